#include "oscilab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oscilab {

double eval_cutoff(const CutoffSpec& spec, double r) {
  if (r <= spec.inner_radius) return 1.0;
  if (r >= spec.outer_radius) return 0.0;
  double t = (r - spec.inner_radius) / (spec.outer_radius - spec.inner_radius);
  return 1.0 - smoothstep5(t);
}

double eval_oscillating(const OscillatingSpec& spec, double x) {
  double r = std::abs(x);
  if (r <= spec.cutoff.inner_radius) return 0.0;
  double chi = 1.0 - eval_cutoff(spec.cutoff, r);
  return spec.w * chi * std::pow(r, -spec.beta) * std::sin(spec.k * std::pow(r, spec.alpha));
}

double eval_oscillating(const OscillatingSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return eval_oscillating(spec, x.norm());
}

double SampledFunction::operator()(double t) const {
  if (x.empty() || t < x.front() || t > x.back()) return 0.0;
  auto it = std::upper_bound(x.begin(), x.end(), t);
  if (it == x.end()) return y.back();
  std::size_t i = static_cast<std::size_t>(it - x.begin());
  if (i == 0) return y.front();
  double x0 = x[i - 1], x1 = x[i];
  double w = (t - x0) / (x1 - x0);
  return (1.0 - w) * y[i - 1] + w * y[i];
}

double SampledFunction::max_abs() const {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

double eval_simon_series(const SimonSeriesSpec& spec, double x) {
  double r = std::abs(x);
  double v = spec.core(r);
  double sum = 0.0;
  for (int n = 0; n < spec.truncation_count; ++n) {
    if (r > spec.radii[n]) sum += spec.kappas[n] * std::sin(2.0 * spec.kappas[n] * r + spec.phases[n]);
  }
  if (sum != 0.0) v += 4.0 * sum / r;
  return v;
}

double Envelope::operator()(double t) const {
  if (r.empty()) return 0.0;
  if (r.size() == 1 || t <= r.front()) return g.front();
  auto it = std::upper_bound(r.begin(), r.end(), t);
  std::size_t i = static_cast<std::size_t>(it - r.begin());
  if (i >= r.size()) i = r.size() - 1;
  double w = (t - r[i - 1]) / (r[i] - r[i - 1]);
  return (1.0 - w) * g[i - 1] + w * g[i];
}

BoundCheck simon_bound_check(const SimonSeriesSpec& spec, const Envelope& g,
                             const Eigen::Ref<const Eigen::VectorXd>& xs) {
  BoundCheck out;
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    double x = xs[i];
    double lhs = std::abs(eval_simon_series(spec, x)) * (1.0 + std::abs(x));
    double ratio = lhs / g(std::abs(x));
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.worst_x = x;
    }
  }
  out.holds = out.max_ratio <= 1.0;
  return out;
}

double wvn_g(double x) {
  // 2x - sin 2x cancels for small x; use the series there.
  double y = 2.0 * x;
  if (std::abs(y) < 0.1) {
    double y2 = y * y;
    return y * y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0 * (1.0 - y2 / 72.0)));
  }
  return y - std::sin(y);
}

double eval_wvn_potential(double x) {
  double g = wvn_g(x);
  double q = 1.0 + g * g;
  double s = std::sin(x);
  double s2 = s * s;
  return -16.0 * g * std::sin(2.0 * x) / q - 32.0 * (1.0 - 3.0 * g * g) * s2 * s2 / (q * q);
}

Jet2 wvn_h(double x) {
  double g = wvn_g(x);
  double s = std::sin(x);
  double g1 = 4.0 * s * s;
  double g2 = 4.0 * std::sin(2.0 * x);
  double h = 1.0 / (1.0 + g * g);
  double h1 = -2.0 * g * g1 * h * h;
  double h2 = -2.0 * (g1 * g1 + g * g2) * h * h + 8.0 * g * g * g1 * g1 * h * h * h;
  return {h, h1, h2};
}

namespace {

// sin(r)/r with two derivatives, series below r = 0.5.
Jet2 sinc_jet(double r) {
  if (std::abs(r) < 0.5) {
    double r2 = r * r;
    double f = 0.0, f1 = 0.0, f2 = 0.0;
    double term = 1.0;  // (-1)^n / (2n+1)!
    double p = 1.0;     // r^{2n}
    for (int n = 0; n < 12; ++n) {
      f += term * p;
      if (n >= 1) {
        f1 += term * 2.0 * n * p / r;
        f2 += term * 2.0 * n * (2.0 * n - 1.0) * p / r2;
      }
      p *= r2;
      term /= -((2.0 * n + 2.0) * (2.0 * n + 3.0));
    }
    if (r == 0.0) return {1.0, 0.0, -1.0 / 3.0};
    return {f, f1, f2};
  }
  double s = std::sin(r), c = std::cos(r);
  double f = s / r;
  double f1 = (r * c - s) / (r * r);
  double f2 = ((2.0 - r * r) * s - 2.0 * r * c) / (r * r * r);
  return {f, f1, f2};
}

}  // namespace

Jet2 eval_wvn_bound_state(double x) {
  Jet2 h = wvn_h(x);
  double s = std::sin(x), c = std::cos(x);
  return {s * h.f, c * h.f + s * h.df, -s * h.f + 2.0 * c * h.df + s * h.d2f};
}

Wvn3d eval_wvn_3d(double r) {
  Wvn3d out;
  out.W = eval_wvn_potential(r);
  Jet2 h = wvn_h(r);
  Jet2 s = sinc_jet(r);
  out.u = {s.f * h.f, s.df * h.f + s.f * h.df, s.d2f * h.f + 2.0 * s.df * h.df + s.f * h.d2f};
  return out;
}

double eval_potential(const PotentialSpec& spec, double x) {
  struct Visitor {
    double x;
    double operator()(const OscillatingSpec& s) const { return eval_oscillating(s, x); }
    double operator()(const WignerVonNeumann1D&) const { return eval_wvn_potential(x); }
    double operator()(const WignerVonNeumann3DRadial&) const { return eval_wvn_potential(std::abs(x)); }
    double operator()(const SimonSeriesSpec& s) const { return eval_simon_series(s, x); }
    double operator()(const ShortRangeSample& s) const { return s.v(x); }
    double operator()(const LongRangeSample& s) const { return s.v(x); }
    double operator()(const CustomSample& s) const { return s.v(x); }
    double operator()(const PotentialSum& s) const {
      double v = 0.0;
      for (const auto& t : s.terms) v += eval_potential(t, x);
      return v;
    }
  };
  return std::visit(Visitor{x}, spec.v);
}

namespace {
double sample_frequency(const SampledFunction& f) {
  double dx = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < f.x.size(); ++i) dx = std::min(dx, f.x[i] - f.x[i - 1]);
  return std::isfinite(dx) ? std::numbers::pi / dx : 0.0;
}
}  // namespace

double local_frequency(const PotentialSpec& spec, double x) {
  struct Visitor {
    double x;
    double operator()(const OscillatingSpec& s) const {
      double r = std::max(std::abs(x), s.cutoff.inner_radius);
      return std::abs(s.k) * s.alpha * std::pow(r, s.alpha - 1.0) +
             1.0 / (s.cutoff.outer_radius - s.cutoff.inner_radius);
    }
    double operator()(const WignerVonNeumann1D&) const { return 4.0; }
    double operator()(const WignerVonNeumann3DRadial&) const { return 4.0; }
    double operator()(const SimonSeriesSpec& s) const {
      double m = sample_frequency(s.core);
      for (int n = 0; n < s.truncation_count; ++n) m = std::max(m, 2.0 * s.kappas[n]);
      return m;
    }
    double operator()(const ShortRangeSample& s) const { return sample_frequency(s.v); }
    double operator()(const LongRangeSample& s) const { return sample_frequency(s.v); }
    double operator()(const CustomSample& s) const { return sample_frequency(s.v); }
    double operator()(const PotentialSum& s) const {
      double m = 0.0;
      for (const auto& t : s.terms) m = std::max(m, local_frequency(t, x));
      return m;
    }
  };
  return std::visit(Visitor{x}, spec.v);
}

void validate(const CutoffSpec& spec) {
  require(std::isfinite(spec.inner_radius) && spec.inner_radius > 0.0, "inner_radius > 0");
  require(std::isfinite(spec.outer_radius) && spec.outer_radius > spec.inner_radius,
          "outer_radius > inner_radius");
}

void validate(const OscillatingSpec& spec) {
  require(std::isfinite(spec.alpha) && spec.alpha > 0.0, "alpha > 0");
  require(std::isfinite(spec.beta) && spec.beta > 0.0, "beta > 0");
  require(std::isfinite(spec.w) && spec.w != 0.0, "w != 0");
  require(std::isfinite(spec.k) && spec.k != 0.0, "k != 0");
  validate(spec.cutoff);
}

namespace {
void validate_samples(const SampledFunction& f) {
  require(f.x.size() == f.y.size() && f.x.size() >= 2, "samples: x and y share length >= 2");
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    require(std::isfinite(f.x[i]) && std::isfinite(f.y[i]), "samples finite");
    if (i > 0) require(f.x[i] > f.x[i - 1], "sample abscissae strictly increasing");
  }
}
}  // namespace

void validate(const SimonSeriesSpec& spec) {
  require(spec.truncation_count >= 1, "truncation_count >= 1");
  std::size_t n = static_cast<std::size_t>(spec.truncation_count);
  require(spec.kappas.size() >= n && spec.radii.size() >= n && spec.phases.size() >= n,
          "kappas, radii, phases share length >= truncation_count");
  for (std::size_t i = 0; i < spec.kappas.size(); ++i) {
    require(spec.kappas[i] > 0.0, "kappas positive");
    for (std::size_t j = 0; j < i; ++j) require(spec.kappas[i] != spec.kappas[j], "kappas pairwise distinct");
  }
  for (std::size_t i = 0; i < spec.radii.size(); ++i) {
    require(spec.radii[i] > 0.0, "radii positive");
    if (i > 0) require(spec.radii[i] > spec.radii[i - 1], "radii strictly increasing");
  }
  if (!spec.core.x.empty()) {
    validate_samples(spec.core);
    require(spec.core.x.front() >= 0.0 && spec.core.x.back() <= 1.0, "core supported in [0, 1]");
  }
}

void validate(const PotentialSpec& spec) {
  struct Visitor {
    void operator()(const OscillatingSpec& s) const { validate(s); }
    void operator()(const WignerVonNeumann1D&) const {}
    void operator()(const WignerVonNeumann3DRadial&) const {}
    void operator()(const SimonSeriesSpec& s) const { validate(s); }
    void operator()(const ShortRangeSample& s) const {
      validate_samples(s.v);
      require(s.rho_sr > 0.0, "rho_sr > 0");
    }
    void operator()(const LongRangeSample& s) const {
      validate_samples(s.v);
      require(s.rho_lr > 0.0, "rho_lr > 0");
      require(s.rho_lr_prime > 0.0, "rho_lr_prime > 0");
    }
    void operator()(const CustomSample& s) const { validate_samples(s.v); }
    void operator()(const PotentialSum& s) const {
      require(!s.terms.empty(), "Sum is nonempty");
      for (const auto& t : s.terms) validate(t);
    }
  };
  std::visit(Visitor{}, spec.v);
}

PotentialSpec make_sum(std::vector<PotentialSpec> terms) {
  return PotentialSpec{PotentialSum{std::move(terms)}};
}

ShortRangeSample gaussian_short_range(double amplitude, double sigma, double extent, int count) {
  ShortRangeSample s;
  s.rho_sr = 1.0;
  for (int i = 0; i < count; ++i) {
    double x = -extent + 2.0 * extent * i / (count - 1);
    s.v.x.push_back(x);
    s.v.y.push_back(amplitude * std::exp(-x * x / (2.0 * sigma * sigma)));
  }
  return s;
}

void to_json(Json& j, const CutoffSpec& s) {
  j = Json{{"inner_radius", s.inner_radius}, {"outer_radius", s.outer_radius}};
}

void from_json(const Json& j, CutoffSpec& s) {
  s.inner_radius = j.value("inner_radius", 1.0);
  s.outer_radius = j.value("outer_radius", 2.0);
}

void to_json(Json& j, const OscillatingSpec& s) {
  j = Json{{"w", s.w}, {"k", s.k}, {"alpha", s.alpha}, {"beta", s.beta}, {"cutoff", s.cutoff}};
}

void from_json(const Json& j, OscillatingSpec& s) {
  s.w = j.value("w", 1.0);
  s.k = j.value("k", 2.0);
  s.alpha = j.value("alpha", 1.0);
  s.beta = j.value("beta", 1.0);
  if (j.contains("cutoff")) s.cutoff = j.at("cutoff").get<CutoffSpec>();
}

void to_json(Json& j, const SampledFunction& s) { j = Json{{"x", s.x}, {"y", s.y}}; }

void from_json(const Json& j, SampledFunction& s) {
  s.x = j.at("x").get<std::vector<double>>();
  s.y = j.at("y").get<std::vector<double>>();
}

void to_json(Json& j, const SimonSeriesSpec& s) {
  j = Json{{"kappas", s.kappas}, {"radii", s.radii},     {"phases", s.phases},
           {"core", s.core},     {"truncation_count", s.truncation_count}};
}

void from_json(const Json& j, SimonSeriesSpec& s) {
  s.kappas = j.at("kappas").get<std::vector<double>>();
  s.radii = j.at("radii").get<std::vector<double>>();
  s.phases = j.at("phases").get<std::vector<double>>();
  if (j.contains("core")) s.core = j.at("core").get<SampledFunction>();
  s.truncation_count = j.value("truncation_count", static_cast<int>(s.kappas.size()));
}

void to_json(Json& j, const Envelope& s) { j = Json{{"r", s.r}, {"g", s.g}}; }

void from_json(const Json& j, Envelope& s) {
  s.r = j.at("r").get<std::vector<double>>();
  s.g = j.at("g").get<std::vector<double>>();
}

namespace {
SampledFunction samples_from(const Json& j) {
  if (j.contains("samples")) return j.at("samples").get<SampledFunction>();
  if (j.contains("gaussian")) {
    const Json& g = j.at("gaussian");
    return gaussian_short_range(g.value("amplitude", 0.5), g.value("sigma", 2.0), g.value("extent", 20.0),
                                g.value("count", 801))
        .v;
  }
  throw ValidationError("sample potential needs samples");
}
}  // namespace

void to_json(Json& j, const PotentialSpec& spec) {
  struct Visitor {
    Json& j;
    void operator()(const OscillatingSpec& s) const {
      j = s;
      j["kind"] = "oscillating";
    }
    void operator()(const WignerVonNeumann1D&) const { j = Json{{"kind", "wvn_1d"}}; }
    void operator()(const WignerVonNeumann3DRadial&) const { j = Json{{"kind", "wvn_3d_radial"}}; }
    void operator()(const SimonSeriesSpec& s) const {
      j = s;
      j["kind"] = "simon_series";
    }
    void operator()(const ShortRangeSample& s) const {
      j = Json{{"kind", "short_range_sample"}, {"samples", s.v}, {"rho_sr", s.rho_sr}};
    }
    void operator()(const LongRangeSample& s) const {
      j = Json{{"kind", "long_range_sample"},
               {"samples", s.v},
               {"rho_lr", s.rho_lr},
               {"rho_lr_prime", s.rho_lr_prime}};
    }
    void operator()(const CustomSample& s) const { j = Json{{"kind", "custom"}, {"samples", s.v}}; }
    void operator()(const PotentialSum& s) const {
      Json terms = Json::array();
      for (const auto& t : s.terms) terms.push_back(t);
      j = Json{{"kind", "sum"}, {"terms", terms}};
    }
  };
  std::visit(Visitor{j}, spec.v);
}

void from_json(const Json& j, PotentialSpec& spec) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "oscillating") {
    spec.v = j.get<OscillatingSpec>();
  } else if (kind == "wvn_1d") {
    spec.v = WignerVonNeumann1D{};
  } else if (kind == "wvn_3d_radial") {
    spec.v = WignerVonNeumann3DRadial{};
  } else if (kind == "simon_series") {
    spec.v = j.get<SimonSeriesSpec>();
  } else if (kind == "short_range_sample") {
    spec.v = ShortRangeSample{samples_from(j), j.value("rho_sr", 1.0)};
  } else if (kind == "long_range_sample") {
    spec.v = LongRangeSample{samples_from(j), j.value("rho_lr", 0.5), j.value("rho_lr_prime", 0.5)};
  } else if (kind == "custom") {
    spec.v = CustomSample{samples_from(j)};
  } else if (kind == "sum") {
    PotentialSum s;
    for (const auto& t : j.at("terms")) s.terms.push_back(t.get<PotentialSpec>());
    spec.v = std::move(s);
  } else {
    throw ValidationError("potential kind recognized (got '" + kind + "')");
  }
}

void validate(const WeightFunctionSpec& spec) {
  switch (spec.kind) {
    case WeightKind::g_delta:
      require(spec.delta >= 0.0 && spec.delta < 1.0, "delta in [0, 1)");
      break;
    case WeightKind::psi:
      require(spec.s > 0.5, "s > 1/2");
      require(spec.R >= 1.0, "R >= 1");
      require(spec.c > 0.0, "c > 0");
      break;
    case WeightKind::bracket_power:
      require(std::isfinite(spec.s), "s finite");
      break;
  }
}

namespace {

// int_0^T <tau>^{-2s} d tau for T >= 0
double bracket_integral(double s, double T) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [s](double t) { return std::pow(1.0 + t * t, -s); };
  double head = gauss_kronrod<double, 31>::integrate(f, 0.0, std::min(T, 1.0), 15, 1e-14);
  if (T <= 1.0) return head;
  // tau = e^u keeps the slowly decaying tail on a short smooth interval
  auto g = [s](double u) {
    double e = std::exp(u);
    return e * std::pow(1.0 + e * e, -s);
  };
  return head + gauss_kronrod<double, 31>::integrate(g, 0.0, std::log(T), 15, 1e-14);
}

double half_line_mass(double s) {
  return 0.5 * std::sqrt(std::numbers::pi) * boost::math::tgamma(s - 0.5) / boost::math::tgamma(s);
}

double psi_unit(double s, double t) {
  double tail = bracket_integral(s, std::abs(t));
  return t >= 0.0 ? half_line_mass(s) + tail : half_line_mass(s) - tail;
}

}  // namespace

double eval_weight(const WeightFunctionSpec& spec, double t) {
  switch (spec.kind) {
    case WeightKind::g_delta: {
      double b = bracket(t);
      return (2.0 - std::pow(b, -spec.delta)) / b;
    }
    case WeightKind::psi:
      return spec.c * spec.R * psi_unit(spec.s, t);
    case WeightKind::bracket_power:
      return std::pow(1.0 + t * t, -spec.s / 2.0);
  }
  return 0.0;
}

double psi_derivative(const WeightFunctionSpec& spec, double t) {
  return spec.c * spec.R * std::pow(1.0 + t * t, -spec.s);
}

double psi_increment(const WeightFunctionSpec& spec, double a, double b) {
  if (std::abs(b - a) <= 1.0) {
    auto f = [&](double t) { return std::pow(1.0 + t * t, -spec.s); };
    return spec.c * spec.R * boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
  }
  return eval_weight(spec, b) - eval_weight(spec, a);
}

double psi_limit(const WeightFunctionSpec& spec) { return spec.c * spec.R * 2.0 * half_line_mass(spec.s); }

void to_json(Json& j, const WeightFunctionSpec& s) {
  switch (s.kind) {
    case WeightKind::g_delta:
      j = Json{{"kind", "g_delta"}, {"delta", s.delta}};
      break;
    case WeightKind::psi:
      j = Json{{"kind", "psi"}, {"s", s.s}, {"R", s.R}, {"c", s.c}};
      break;
    case WeightKind::bracket_power:
      j = Json{{"kind", "bracket_power"}, {"s", s.s}};
      break;
  }
}

void from_json(const Json& j, WeightFunctionSpec& s) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "g_delta") {
    s.kind = WeightKind::g_delta;
    s.delta = j.value("delta", 0.5);
  } else if (kind == "psi") {
    s.kind = WeightKind::psi;
    s.s = j.value("s", 1.0);
    s.R = j.value("R", 1.0);
    s.c = j.value("c", 1.0);
  } else if (kind == "bracket_power") {
    s.kind = WeightKind::bracket_power;
    s.s = j.value("s", 1.0);
  } else {
    throw ValidationError("weight kind recognized (got '" + kind + "')");
  }
}

}  // namespace oscilab
