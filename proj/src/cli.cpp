#include "gp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "gp/dataset.hpp"
#include "gp/gpc.hpp"
#include "gp/gplvm.hpp"
#include "gp/gpr.hpp"
#include "gp/svg.hpp"

namespace gp {

namespace {

struct SplitData {
  Matrix inputs;                          // n x k
  std::vector<std::string> input_names;
  Vector target;                          // empty unless "y" present
  bool has_target = false;
};

// Inputs are every numeric column except "y"; the target is "y".
SplitData split_columns(const Dataset& ds) {
  SplitData out;
  const Eigen::Index y_col = ds.find_column("y");
  std::vector<Eigen::Index> input_cols;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(ds.columns.size());
       ++j)
    if (j != y_col) input_cols.push_back(j);
  if (input_cols.empty())
    throw InvalidInput("no input columns in CSV");

  out.inputs.resize(ds.rows(), static_cast<Eigen::Index>(input_cols.size()));
  for (std::size_t j = 0; j < input_cols.size(); ++j) {
    out.inputs.col(static_cast<Eigen::Index>(j)) = ds.values.col(input_cols[j]);
    out.input_names.push_back(ds.columns[input_cols[j]]);
  }
  if (y_col >= 0) {
    out.target = ds.values.col(y_col);
    out.has_target = true;
  }
  return out;
}

Matrix grid_points(const GridSpec& g) {
  if (g.count < 1) throw InvalidInput("grid count must be >= 1");
  Matrix pts(g.count, 1);
  if (g.count == 1) {
    pts(0, 0) = g.min;
  } else {
    const double step = (g.max - g.min) / static_cast<double>(g.count - 1);
    for (int i = 0; i < g.count; ++i) pts(i, 0) = g.min + step * i;
  }
  return pts;
}

// Test inputs from --test (matching the training dimension) or --grid
// (1-D training inputs only).
Matrix test_points(const RunConfig& cfg, const Matrix& train_inputs) {
  if (!cfg.test_path.empty()) {
    const Dataset ds = read_csv_file(cfg.test_path);
    const SplitData split = split_columns(ds);
    if (split.inputs.cols() != train_inputs.cols())
      throw DimensionMismatch("test inputs have " +
                              std::to_string(split.inputs.cols()) +
                              " columns, training has " +
                              std::to_string(train_inputs.cols()));
    return split.inputs;
  }
  if (train_inputs.cols() != 1)
    throw InvalidInput("--grid requires 1-D inputs; use --test for "
                       "multi-dimensional data");
  if (cfg.grid) return grid_points(*cfg.grid);
  // Default: 200 points over the training range padded by 10%.
  const double lo = train_inputs.minCoeff(), hi = train_inputs.maxCoeff();
  const double pad = 0.1 * std::max(hi - lo, 1e-12);
  return grid_points({lo - pad, hi + pad, 200});
}

class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InvalidInput("cannot write file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_svg(const std::string& path, const SvgFigure& fig) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write file: " + path);
  out << fig.render();
}

void print_kernel_report(const KernelExpr& kernel, double log_ml) {
  std::cout << "kernel=" << kernel.to_spec() << "\n";
  std::cout << "log_ml=" << format_full(log_ml) << "\n";
}

std::vector<int> parse_labels(const Dataset& ds) {
  if (!ds.has_labels())
    throw InvalidInput("classification needs a trailing 'label' column");
  std::vector<int> out;
  out.reserve(ds.labels.size());
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    const std::string& s = ds.labels[i];
    int v = 0;
    const auto [next, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || next != s.data() + s.size())
      throw InvalidInput("label '" + s + "' is not an integer (row " +
                         std::to_string(i + 2) + ")");
    out.push_back(v);
  }
  return out;
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  std::istringstream in(text);
  char c1 = 0, c2 = 0;
  if (!(in >> g.min >> c1 >> g.max >> c2 >> g.count) || c1 != ':' ||
      c2 != ':' || !(in >> std::ws).eof())
    throw InvalidInput("bad --grid; expected MIN:MAX:N, got '" + text + "'");
  if (g.count < 1) throw InvalidInput("grid count must be >= 1");
  return g;
}

int run_regress(const RunConfig& cfg) {
  const Dataset ds = read_csv_file(cfg.input_path);
  const SplitData data = split_columns(ds);
  if (!data.has_target)
    throw InvalidInput("regression needs a 'y' column");

  KernelExpr kernel = KernelExpr::parse(cfg.kernel_spec);
  if (cfg.optimize)
    kernel = optimize_hyperparams(data.inputs, data.target, kernel).kernel;
  const GprModel model = GprModel::fit(data.inputs, data.target, kernel);
  print_kernel_report(model.kernel(), model.log_marginal_likelihood());

  const Matrix test = test_points(cfg, data.inputs);
  const Prediction pred = model.predict(test);

  OutputTarget out(cfg.out_path);
  std::ostream& os = out.stream();
  if (test.cols() == 1) {
    os << "x_star,mean,variance,lo,hi\n";
  } else {
    for (Eigen::Index j = 0; j < test.cols(); ++j)
      os << "x" << (j + 1) << ",";
    os << "mean,variance,lo,hi\n";
  }
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    const double half = cfg.band_multiplier * std::sqrt(pred.variance[i]);
    for (Eigen::Index j = 0; j < test.cols(); ++j)
      os << format_full(test(i, j)) << ",";
    os << format_full(pred.mean[i]) << "," << format_full(pred.variance[i])
       << "," << format_full(pred.mean[i] - half) << ","
       << format_full(pred.mean[i] + half) << "\n";
  }

  if (!cfg.svg_path.empty()) {
    if (test.cols() != 1)
      throw InvalidInput("--svg requires 1-D inputs");
    const Vector xs = test.col(0);
    const Vector lo =
        pred.mean - cfg.band_multiplier * pred.variance.cwiseSqrt();
    const Vector hi =
        pred.mean + cfg.band_multiplier * pred.variance.cwiseSqrt();
    SvgFigure fig;
    const double ymin = std::min(lo.minCoeff(), data.target.minCoeff());
    const double ymax = std::max(hi.maxCoeff(), data.target.maxCoeff());
    fig.set_ranges(std::min(xs.minCoeff(), data.inputs.col(0).minCoeff()),
                   std::max(xs.maxCoeff(), data.inputs.col(0).maxCoeff()),
                   ymin, ymax);
    fig.add_band("band", xs, lo, hi, "#cfe0f2");
    fig.add_line("mean", xs, pred.mean, "#1f5fa8");
    fig.add_points("points", data.inputs.col(0), data.target);
    write_svg(cfg.svg_path, fig);
  }
  return 0;
}

int run_classify(const RunConfig& cfg) {
  const Dataset ds = read_csv_file(cfg.input_path);
  const SplitData data = split_columns(ds);
  const std::vector<int> raw_labels = parse_labels(ds);

  const std::set<int> label_set(raw_labels.begin(), raw_labels.end());
  const bool binary = label_set == std::set<int>{-1, 1};
  if (!binary) {
    for (int v : label_set)
      if (v < 0)
        throw InvalidInput(
            "labels must be {-1,1} (binary) or {0..C-1} (multi-class)");
  }

  const KernelExpr kernel = KernelExpr::parse(cfg.kernel_spec);
  const Matrix test = test_points(cfg, data.inputs);
  OutputTarget out(cfg.out_path);
  std::ostream& os = out.stream();

  if (binary) {
    const BinaryGpcModel model = BinaryGpcModel::fit(
        data.inputs, raw_labels, kernel, cfg.optimize);
    print_kernel_report(model.kernel(), model.log_marginal());
    const Vector prob = model.predict_prob(test);

    if (test.cols() == 1) {
      os << "x_star,prob\n";
    } else {
      for (Eigen::Index j = 0; j < test.cols(); ++j) os << "x" << (j + 1) << ",";
      os << "prob\n";
    }
    for (Eigen::Index i = 0; i < test.rows(); ++i) {
      for (Eigen::Index j = 0; j < test.cols(); ++j)
        os << format_full(test(i, j)) << ",";
      os << format_full(prob[i]) << "\n";
    }

    if (!cfg.svg_path.empty()) {
      if (test.cols() != 1) throw InvalidInput("--svg requires 1-D inputs");
      SvgFigure fig;
      fig.set_ranges(std::min(test.col(0).minCoeff(),
                              data.inputs.col(0).minCoeff()),
                     std::max(test.col(0).maxCoeff(),
                              data.inputs.col(0).maxCoeff()),
                     0.0, 1.0);
      fig.add_line("mean", test.col(0), prob, "#1f5fa8");
      // Training marks drawn at 0/1 rather than -1/+1.
      Vector marks(data.inputs.rows());
      std::vector<int> colors(raw_labels.size());
      for (Eigen::Index i = 0; i < marks.size(); ++i) {
        marks[i] = raw_labels[static_cast<std::size_t>(i)] > 0 ? 1.0 : 0.0;
        colors[static_cast<std::size_t>(i)] = marks[i] > 0.5 ? 1 : 0;
      }
      fig.add_points("points", data.inputs.col(0), marks, colors);
      write_svg(cfg.svg_path, fig);
    }
    return 0;
  }

  // Multi-class: labels 0..C-1.
  const MultiGpcModel model =
      MultiGpcModel::fit(data.inputs, raw_labels, kernel, cfg.optimize);
  print_kernel_report(model.kernels().front(), model.log_marginal());
  const Matrix prob = model.predict_prob(test);

  if (test.cols() == 1) {
    os << "x_star";
  } else {
    for (Eigen::Index j = 0; j < test.cols(); ++j)
      os << (j ? "," : "") << "x" << (j + 1);
  }
  for (int c = 0; c < model.num_classes(); ++c) os << ",prob_" << c;
  os << "\n";
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    for (Eigen::Index j = 0; j < test.cols(); ++j)
      os << (j ? "," : "") << format_full(test(i, j));
    for (int c = 0; c < model.num_classes(); ++c)
      os << "," << format_full(prob(i, c));
    os << "\n";
  }

  if (!cfg.svg_path.empty()) {
    if (test.cols() != 1) throw InvalidInput("--svg requires 1-D inputs");
    SvgFigure fig;
    fig.set_ranges(std::min(test.col(0).minCoeff(),
                            data.inputs.col(0).minCoeff()),
                   std::max(test.col(0).maxCoeff(),
                            data.inputs.col(0).maxCoeff()),
                   0.0, 1.0);
    const char* strokes[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                             "#ff7f0e", "#8c564b"};
    for (int c = 0; c < model.num_classes(); ++c)
      fig.add_line("mean_" + std::to_string(c), test.col(0), prob.col(c),
                   strokes[c % 6]);
    Vector marks = Vector::Zero(data.inputs.rows());
    fig.add_points("points", data.inputs.col(0), marks, raw_labels);
    write_svg(cfg.svg_path, fig);
  }
  return 0;
}

int run_lvm(const RunConfig& cfg) {
  const Dataset ds = read_csv_file(cfg.input_path);
  if (ds.values.cols() < 2)
    throw InvalidInput("lvm needs at least two numeric columns");
  if (cfg.latent_dim >= ds.values.cols())
    throw InvalidInput("latent dimension q must satisfy q < d");

  LvmConfig lc;
  lc.q = cfg.latent_dim;
  lc.max_iters = cfg.max_iters;
  lc.seed = cfg.seed;
  const LvmModel model = fit_lvm(ds.values, lc);

  std::cout << "sigma=" << format_full(model.theta.sigma) << "\n";
  std::cout << "length=" << format_full(model.theta.length) << "\n";
  std::cout << "beta=" << format_full(model.theta.beta) << "\n";
  std::cout << "ll_initial=" << format_full(model.history.front()) << "\n";
  std::cout << "ll_final=" << format_full(model.history.back()) << "\n";
  std::cout << "iterations=" << (model.history.size() - 1) << "\n";
  std::cout << "converged=" << (model.converged ? 1 : 0) << "\n";

  OutputTarget out(cfg.out_path);
  std::ostream& os = out.stream();
  for (int j = 0; j < lc.q; ++j) os << (j ? "," : "") << "z" << (j + 1);
  if (ds.has_labels()) os << ",label";
  os << "\n";
  for (Eigen::Index i = 0; i < model.x_latent.rows(); ++i) {
    for (int j = 0; j < lc.q; ++j)
      os << (j ? "," : "") << format_full(model.x_latent(i, j));
    if (ds.has_labels()) os << "," << ds.labels[static_cast<std::size_t>(i)];
    os << "\n";
  }

  if (!cfg.svg_path.empty()) {
    SvgFigure fig;
    Vector xs(model.x_latent.rows()), ys(model.x_latent.rows());
    if (lc.q >= 2) {
      xs = model.x_latent.col(0);
      ys = model.x_latent.col(1);
    } else {
      for (Eigen::Index i = 0; i < xs.size(); ++i)
        xs[i] = static_cast<double>(i);
      ys = model.x_latent.col(0);
    }
    fig.set_ranges(xs.minCoeff(), xs.maxCoeff(), ys.minCoeff(), ys.maxCoeff());
    std::vector<int> colors;
    if (ds.has_labels()) {
      std::vector<std::string> uniq;
      for (const std::string& s : ds.labels) {
        auto it = std::find(uniq.begin(), uniq.end(), s);
        if (it == uniq.end()) {
          uniq.push_back(s);
          it = uniq.end() - 1;
        }
        colors.push_back(static_cast<int>(it - uniq.begin()));
      }
    }
    fig.add_points("points", xs, ys, colors);
    write_svg(cfg.svg_path, fig);
  }
  return 0;
}

int run_kernel_eval(const RunConfig& cfg) {
  const Dataset ds = read_csv_file(cfg.input_path);
  const SplitData data = split_columns(ds);
  const KernelExpr kernel = KernelExpr::parse(cfg.kernel_spec);

  const Matrix k = gram(kernel, data.inputs);
  OutputTarget out(cfg.out_path);
  std::ostream& os = out.stream();

  auto print_matrix = [&os](const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%6.2f", m(i, j));
        os << (j ? " " : "") << buf;
      }
      os << "\n";
    }
  };

  os << "K =\n";
  print_matrix(k);

  if (cfg.grid || !cfg.test_path.empty()) {
    const Matrix test = test_points(cfg, data.inputs);
    os << "K* =\n";
    print_matrix(cross(kernel, data.inputs, test));
    os << "K** =\n";
    print_matrix(Matrix(self_variance(kernel, test)));
  }
  return 0;
}

int run(const RunConfig& cfg) {
  try {
    if (cfg.subcommand == "regress") return run_regress(cfg);
    if (cfg.subcommand == "classify") return run_classify(cfg);
    if (cfg.subcommand == "lvm") return run_lvm(cfg);
    if (cfg.subcommand == "kernel-eval") return run_kernel_eval(cfg);
    throw InvalidInput("unknown subcommand: " + cfg.subcommand);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace gp
