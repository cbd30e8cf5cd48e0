#ifndef GP_CLI_HPP
#define GP_CLI_HPP

#include <optional>
#include <string>

namespace gp {

struct GridSpec {
  double min = 0.0;
  double max = 1.0;
  int count = 1;  // count == 1 yields the single point `min`
};

struct RunConfig {
  std::string subcommand;  // regress | classify | lvm | kernel-eval
  std::string input_path;
  std::string kernel_spec;
  bool optimize = false;
  std::optional<GridSpec> grid;
  std::string test_path;  // empty: none
  std::string out_path;   // empty: stdout
  std::string svg_path;   // empty: no figure
  double band_multiplier = 1.96;
  unsigned seed = 0;
  int latent_dim = 1;   // lvm only
  int max_iters = 500;  // lvm only
};

/// Exit codes: 0 ok, 2 input error, 3 numerical failure.
int run(const RunConfig& cfg);

int run_regress(const RunConfig& cfg);
int run_classify(const RunConfig& cfg);
int run_lvm(const RunConfig& cfg);
int run_kernel_eval(const RunConfig& cfg);

/// Parses "MIN:MAX:N".
GridSpec parse_grid(const std::string& text);

}  // namespace gp

#endif  // GP_CLI_HPP
