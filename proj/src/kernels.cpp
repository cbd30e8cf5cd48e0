#include "gp/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <numbers>

namespace gp {

namespace {

double checked_log_param(const char* name, double value, bool allow_zero) {
  if (!std::isfinite(value) || value < 0.0 || (!allow_zero && value == 0.0))
    throw NonPositiveParam(std::string("kernel parameter ") + name +
                           " must be positive and finite");
  return std::log(value);
}

enum class TermKind : std::uint8_t { se, periodic, noise };

struct CompiledTerm {
  TermKind kind;
  double a = 0.0;  // se: sigma_f^2, periodic: nu*pi, noise: sigma_n^2
  double b = 0.0;  // se: -0.5 / length^2
};

// Flattened evaluation plan shared by eval(), gram() and cross() so that a
// single covariance entry is computed by the identical instruction
// sequence on every path.
struct CompiledKernel {
  std::vector<CompiledTerm> terms;
  bool has_periodic = false;

  double eval(const double* x, const double* xp, Eigen::Index dim,
              bool same_point) const {
    double sq = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double d = x[k] - xp[k];
      sq += d * d;
    }
    double sum = 0.0;
    for (const CompiledTerm& t : terms) {
      switch (t.kind) {
        case TermKind::se:
          sum += t.a * std::exp(t.b * sq);
          break;
        case TermKind::periodic: {
          const double s = std::sin(t.a * (x[0] - xp[0]));
          sum += std::exp(-2.0 * s * s);
          break;
        }
        case TermKind::noise:
          if (same_point) sum += t.a;
          break;
      }
    }
    return sum;
  }
};

CompiledKernel compile(const KernelExpr& k, Eigen::Index dim) {
  CompiledKernel c;
  c.terms.reserve(k.terms().size());
  for (const KernelTerm& term : k.terms()) {
    if (const auto* se = std::get_if<SeTerm>(&term)) {
      c.terms.push_back({TermKind::se, std::exp(2.0 * se->log_sigma_f),
                         -0.5 * std::exp(-2.0 * se->log_length)});
    } else if (const auto* p = std::get_if<PeriodicTerm>(&term)) {
      c.has_periodic = true;
      c.terms.push_back(
          {TermKind::periodic, std::exp(p->log_nu) * std::numbers::pi, 0.0});
    } else {
      const auto& n = std::get<NoiseTerm>(term);
      c.terms.push_back({TermKind::noise, std::exp(2.0 * n.log_sigma_n), 0.0});
    }
  }
  if (c.has_periodic && dim != 1)
    throw PeriodicOnMultiDim("periodic term is defined for 1-D inputs only");
  return c;
}

void check_points(const Matrix& xs, const char* who) {
  if (xs.rows() < 1) throw EmptyData(std::string(who) + ": no input points");
  if (xs.cols() < 1)
    throw InvalidInput(std::string(who) + ": inputs need at least one column");
  if (!xs.allFinite())
    throw NonFinite(std::string(who) + ": non-finite input point");
}

}  // namespace

SeTerm SeTerm::make(double sigma_f, double length, bool fix_sf, bool fix_l) {
  SeTerm t;
  t.log_sigma_f = checked_log_param("sf", sigma_f, false);
  t.log_length = checked_log_param("l", length, false);
  t.fix_sigma_f = fix_sf;
  t.fix_length = fix_l;
  return t;
}

PeriodicTerm PeriodicTerm::make(double nu, bool fix) {
  PeriodicTerm t;
  t.log_nu = checked_log_param("nu", nu, false);
  t.fix_nu = fix;
  return t;
}

NoiseTerm NoiseTerm::make(double sigma_n, bool fix) {
  NoiseTerm t;
  t.log_sigma_n = checked_log_param("sn", sigma_n, true);  // sn = 0 allowed
  t.fix_sigma_n = fix;
  return t;
}

KernelExpr::KernelExpr(std::vector<KernelTerm> terms)
    : terms_(std::move(terms)) {
  if (terms_.empty())
    throw InvalidInput("kernel needs at least one term");
  int noise_count = 0;
  for (const KernelTerm& t : terms_)
    if (std::holds_alternative<NoiseTerm>(t)) ++noise_count;
  if (noise_count > 1)
    throw DuplicateNoise("kernel may contain at most one noise term");
}

KernelExpr KernelExpr::se(double sigma_f, double length) {
  return KernelExpr({SeTerm::make(sigma_f, length)});
}

KernelExpr KernelExpr::se_noise(double sigma_f, double length,
                                double sigma_n) {
  return KernelExpr({SeTerm::make(sigma_f, length), NoiseTerm::make(sigma_n)});
}

bool KernelExpr::has_noise() const noexcept {
  for (const KernelTerm& t : terms_)
    if (std::holds_alternative<NoiseTerm>(t)) return true;
  return false;
}

double KernelExpr::noise_variance() const noexcept {
  for (const KernelTerm& t : terms_)
    if (const auto* n = std::get_if<NoiseTerm>(&t))
      return std::exp(2.0 * n->log_sigma_n);
  return 0.0;
}

int KernelExpr::free_param_count() const noexcept {
  int n = 0;
  for (const KernelTerm& t : terms_) {
    if (const auto* se = std::get_if<SeTerm>(&t)) {
      n += !se->fix_sigma_f;
      n += !se->fix_length;
    } else if (const auto* p = std::get_if<PeriodicTerm>(&t)) {
      n += !p->fix_nu;
    } else {
      n += !std::get<NoiseTerm>(t).fix_sigma_n;
    }
  }
  return n;
}

double KernelExpr::eval(const Vector& x, const Vector& x_prime,
                        bool same_point) const {
  if (x.size() != x_prime.size())
    throw DimensionMismatch("kernel eval: input dimensions differ");
  if (x.size() < 1) throw InvalidInput("kernel eval: empty input vector");
  const CompiledKernel c = compile(*this, x.size());
  return c.eval(x.data(), x_prime.data(), x.size(), same_point);
}

// ---------------------------------------------------------------------------
// Gram / cross builders. Every covariance entry is independent, so the
// parallel loops produce bitwise-identical results to the serial twins in
// gp::reference regardless of thread count or schedule.

Matrix gram(const KernelExpr& k, const Matrix& xs) {
  check_points(xs, "gram");
  const Eigen::Index n = xs.rows(), d = xs.cols();
  const CompiledKernel c = compile(k, d);
  const Matrix xt = xs.transpose();  // column i = point i, contiguous
  Matrix out(n, n);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = xt.data() + i * d;
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = c.eval(xi, xt.data() + j * d, d, i == j);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Matrix cross(const KernelExpr& k, const Matrix& xs_train,
             const Matrix& xs_test) {
  check_points(xs_train, "cross");
  check_points(xs_test, "cross");
  if (xs_train.cols() != xs_test.cols())
    throw DimensionMismatch("cross: train/test dimensions differ");
  const Eigen::Index n = xs_train.rows(), m = xs_test.rows(),
                     d = xs_train.cols();
  const CompiledKernel c = compile(k, d);
  const Matrix train_t = xs_train.transpose();
  const Matrix test_t = xs_test.transpose();
  Matrix out(m, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    const double* ti = test_t.data() + i * d;
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = c.eval(ti, train_t.data() + j * d, d, false);
  }
  return out;
}

Vector self_variance(const KernelExpr& k, const Matrix& xs_test) {
  check_points(xs_test, "self_variance");
  const Eigen::Index m = xs_test.rows(), d = xs_test.cols();
  const CompiledKernel c = compile(k, d);
  const Matrix test_t = xs_test.transpose();
  Vector out(m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    const double* ti = test_t.data() + i * d;
    out[i] = c.eval(ti, ti, d, true);
  }
  return out;
}

namespace reference {

Matrix gram(const KernelExpr& k, const Matrix& xs) {
  check_points(xs, "gram");
  const Eigen::Index n = xs.rows(), d = xs.cols();
  const CompiledKernel c = compile(k, d);
  const Matrix xt = xs.transpose();
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = xt.data() + i * d;
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = c.eval(xi, xt.data() + j * d, d, i == j);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Matrix cross(const KernelExpr& k, const Matrix& xs_train,
             const Matrix& xs_test) {
  check_points(xs_train, "cross");
  check_points(xs_test, "cross");
  if (xs_train.cols() != xs_test.cols())
    throw DimensionMismatch("cross: train/test dimensions differ");
  const Eigen::Index n = xs_train.rows(), m = xs_test.rows(),
                     d = xs_train.cols();
  const CompiledKernel c = compile(k, d);
  const Matrix train_t = xs_train.transpose();
  const Matrix test_t = xs_test.transpose();
  Matrix out(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double* ti = test_t.data() + i * d;
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = c.eval(ti, train_t.data() + j * d, d, false);
  }
  return out;
}

Vector self_variance(const KernelExpr& k, const Matrix& xs_test) {
  check_points(xs_test, "self_variance");
  const Eigen::Index m = xs_test.rows(), d = xs_test.cols();
  const CompiledKernel c = compile(k, d);
  const Matrix test_t = xs_test.transpose();
  Vector out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double* ti = test_t.data() + i * d;
    out[i] = c.eval(ti, ti, d, true);
  }
  return out;
}

}  // namespace reference

// ---------------------------------------------------------------------------
// pack / unpack

HyperVector pack(const KernelExpr& k) {
  std::vector<double> vals;
  HyperVector h;
  auto push = [&](double log_value, bool fixed, const char* name) {
    h.fixed_mask.push_back(fixed ? 1 : 0);
    if (fixed) return;
    if (!std::isfinite(log_value))
      throw InvalidInput(std::string("free kernel parameter ") + name +
                         " must be strictly positive to optimize");
    vals.push_back(log_value);
  };
  for (const KernelTerm& t : k.terms()) {
    if (const auto* se = std::get_if<SeTerm>(&t)) {
      push(se->log_sigma_f, se->fix_sigma_f, "sf");
      push(se->log_length, se->fix_length, "l");
    } else if (const auto* p = std::get_if<PeriodicTerm>(&t)) {
      push(p->log_nu, p->fix_nu, "nu");
    } else {
      const auto& n = std::get<NoiseTerm>(t);
      push(n.log_sigma_n, n.fix_sigma_n, "sn");
    }
  }
  h.values = Eigen::Map<const Vector>(vals.data(),
                                      static_cast<Eigen::Index>(vals.size()));
  return h;
}

KernelExpr unpack(const HyperVector& h, const KernelExpr& templ) {
  if (h.values.size() != templ.free_param_count())
    throw DimensionMismatch("unpack: value count does not match template");
  Eigen::Index next = 0;
  auto take = [&](double templ_log, bool fixed) {
    return fixed ? templ_log : h.values[next++];
  };
  std::vector<KernelTerm> terms;
  terms.reserve(templ.terms().size());
  for (const KernelTerm& t : templ.terms()) {
    if (const auto* se = std::get_if<SeTerm>(&t)) {
      SeTerm out = *se;
      out.log_sigma_f = take(se->log_sigma_f, se->fix_sigma_f);
      out.log_length = take(se->log_length, se->fix_length);
      terms.emplace_back(out);
    } else if (const auto* p = std::get_if<PeriodicTerm>(&t)) {
      PeriodicTerm out = *p;
      out.log_nu = take(p->log_nu, p->fix_nu);
      terms.emplace_back(out);
    } else {
      NoiseTerm out = std::get<NoiseTerm>(t);
      out.log_sigma_n = take(out.log_sigma_n, out.fix_sigma_n);
      terms.emplace_back(out);
    }
  }
  return KernelExpr(std::move(terms));
}

// ---------------------------------------------------------------------------
// Spec grammar parser and serializer

namespace {

struct SpecParser {
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() &&
           std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= s.size();
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c))
      throw ParseError(std::string("expected '") + c + "'", pos);
  }
  std::string ident() {
    skip_ws();
    const std::size_t begin = pos;
    while (pos < s.size() &&
           (std::isalpha(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    if (pos == begin) throw ParseError("expected identifier", pos);
    return std::string(s.substr(begin, pos - begin));
  }
  double number() {
    skip_ws();
    double value = 0.0;
    const char* begin = s.data() + pos;
    const char* end = s.data() + s.size();
    auto [next, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc())
      throw ParseError("expected numeric literal", pos);
    pos += static_cast<std::size_t>(next - begin);
    return value;
  }
  bool bang() {
    skip_ws();
    if (pos < s.size() && s[pos] == '!') {
      ++pos;
      return true;
    }
    return false;
  }
};

struct ParsedParam {
  double value;
  bool fixed;
  std::size_t pos;
};

}  // namespace

KernelExpr KernelExpr::parse(std::string_view text) {
  SpecParser p{text};
  std::vector<KernelTerm> terms;
  while (true) {
    const std::size_t term_pos = p.pos;
    const std::string name = p.ident();
    p.expect('(');
    std::map<std::string, ParsedParam> params;
    while (true) {
      p.skip_ws();
      const std::size_t key_pos = p.pos;
      const std::string key = p.ident();
      p.expect('=');
      const double value = p.number();
      const bool fixed = p.bang();
      if (!params.emplace(key, ParsedParam{value, fixed, key_pos}).second)
        throw ParseError("duplicate parameter '" + key + "'", key_pos);
      if (!p.eat(',')) break;
    }
    p.expect(')');

    auto require = [&](const char* key) -> const ParsedParam& {
      auto it = params.find(key);
      if (it == params.end())
        throw ParseError(
            "term '" + name + "' is missing parameter '" + key + "'",
            term_pos);
      return it->second;
    };
    auto reject_extras = [&](std::initializer_list<const char*> allowed) {
      for (const auto& [key, param] : params) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
              return key == a;
            }) == allowed.end())
          throw ParseError("unknown parameter '" + key + "'", param.pos);
      }
    };

    if (name == "se") {
      reject_extras({"sf", "l"});
      const ParsedParam& sf = require("sf");
      const ParsedParam& l = require("l");
      terms.emplace_back(SeTerm::make(sf.value, l.value, sf.fixed, l.fixed));
    } else if (name == "periodic") {
      reject_extras({"nu"});
      const ParsedParam& nu = require("nu");
      terms.emplace_back(PeriodicTerm::make(nu.value, nu.fixed));
    } else if (name == "noise") {
      reject_extras({"sn"});
      const ParsedParam& sn = require("sn");
      terms.emplace_back(NoiseTerm::make(sn.value, sn.fixed));
    } else {
      throw ParseError("unknown kernel term '" + name + "'", term_pos);
    }

    if (!p.eat('+')) break;
  }
  if (!p.at_end())
    throw ParseError("unexpected trailing input", p.pos);
  return KernelExpr(std::move(terms));
}

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_param(std::string& out, const char* key, double value,
                  bool fixed) {
  out += key;
  out += '=';
  out += format_value(value);
  if (fixed) out += '!';
}

}  // namespace

std::string KernelExpr::to_spec() const {
  std::string out;
  bool first = true;
  for (const KernelTerm& t : terms_) {
    if (!first) out += '+';
    first = false;
    if (const auto* se = std::get_if<SeTerm>(&t)) {
      out += "se(";
      append_param(out, "sf", se->sigma_f(), se->fix_sigma_f);
      out += ',';
      append_param(out, "l", se->length(), se->fix_length);
      out += ')';
    } else if (const auto* p = std::get_if<PeriodicTerm>(&t)) {
      out += "periodic(";
      append_param(out, "nu", p->nu(), p->fix_nu);
      out += ')';
    } else {
      const auto& n = std::get<NoiseTerm>(t);
      out += "noise(";
      append_param(out, "sn", n.sigma_n(), n.fix_sigma_n);
      out += ')';
    }
  }
  return out;
}

}  // namespace gp
