#include <CLI11.hpp>

#include "gp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gaussian process regression, classification and "
               "dimensionality reduction"};
  app.require_subcommand(1);

  gp::RunConfig cfg;
  std::string grid_text;

  auto add_common = [&](CLI::App* sub, bool needs_kernel) {
    sub->add_option("--data", cfg.input_path, "input CSV file")->required();
    if (needs_kernel)
      sub->add_option("--kernel", cfg.kernel_spec,
                      "kernel spec, e.g. \"se(sf=1,l=1)+noise(sn=0.1)\"")
          ->required();
    sub->add_option("--grid", grid_text, "test grid MIN:MAX:N");
    sub->add_option("--test", cfg.test_path, "test-point CSV file");
    sub->add_option("--out", cfg.out_path, "output file (default stdout)");
    sub->add_option("--svg", cfg.svg_path, "write an SVG figure");
    sub->add_option("--seed", cfg.seed, "random seed");
  };

  CLI::App* regress = app.add_subcommand("regress", "GP regression");
  add_common(regress, true);
  regress->add_flag("--optimize", cfg.optimize,
                    "maximize the log marginal likelihood");
  regress->add_option("--band", cfg.band_multiplier,
                      "confidence band multiplier (default 1.96)");

  CLI::App* classify = app.add_subcommand("classify", "GP classification");
  add_common(classify, true);
  classify->add_flag("--optimize", cfg.optimize,
                     "maximize the approximate log marginal likelihood");

  CLI::App* lvm = app.add_subcommand("lvm", "latent variable model");
  add_common(lvm, false);
  lvm->add_option("--q", cfg.latent_dim, "latent dimension (default 1)");
  lvm->add_option("--max-iters", cfg.max_iters,
                  "optimizer iteration cap (default 500)");

  CLI::App* keval =
      app.add_subcommand("kernel-eval", "print covariance matrices");
  add_common(keval, true);

  CLI11_PARSE(app, argc, argv);

  cfg.subcommand = app.get_subcommands().front()->get_name();
  if (!grid_text.empty()) {
    try {
      cfg.grid = gp::parse_grid(grid_text);
    } catch (const gp::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return gp::run(cfg);
}
