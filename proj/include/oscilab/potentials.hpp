#pragma once

#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "oscilab/common.hpp"

namespace oscilab {

using Json = nlohmann::json;

// kappa(r): 1 on [0, inner], 0 on [outer, inf), quintic blend between.
struct CutoffSpec {
  double inner_radius = 1.0;
  double outer_radius = 2.0;
};

double eval_cutoff(const CutoffSpec& spec, double r);

// W(x) = w (1 - kappa(|x|)) |x|^{-beta} sin(k |x|^alpha)
struct OscillatingSpec {
  double w = 1.0;
  double k = 2.0;
  double alpha = 1.0;
  double beta = 1.0;
  CutoffSpec cutoff;
};

double eval_oscillating(const OscillatingSpec& spec, double x);
double eval_oscillating(const OscillatingSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);

// Piecewise-linear interpolant of tabulated samples; zero outside the table.
struct SampledFunction {
  std::vector<double> x;
  std::vector<double> y;
  double operator()(double t) const;
  double max_abs() const;
};

struct SimonSeriesSpec {
  std::vector<double> kappas;
  std::vector<double> radii;
  std::vector<double> phases;
  SampledFunction core;  // supported in [0, 1]
  int truncation_count = 1;
};

// Evaluated at |x| (even extension of the half-line formula).
double eval_simon_series(const SimonSeriesSpec& spec, double x);

// Monotone piecewise-linear envelope g; linear extrapolation past the table.
struct Envelope {
  std::vector<double> r;
  std::vector<double> g;
  double operator()(double t) const;
};

struct BoundCheck {
  double max_ratio = 0.0;  // max |V(x)| (1+|x|) / g(|x|)
  double worst_x = 0.0;
  bool holds = false;
};

BoundCheck simon_bound_check(const SimonSeriesSpec& spec, const Envelope& g,
                             const Eigen::Ref<const Eigen::VectorXd>& xs);

struct Jet2 {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

double wvn_g(double x);
// h = 1/(1+g^2) and its derivatives; the bound state is sin(x) h(x).
Jet2 wvn_h(double x);
double eval_wvn_potential(double x);
Jet2 eval_wvn_bound_state(double x);

struct Wvn3d {
  double W = 0.0;
  Jet2 u;  // radial profile sin(r) / (r (1 + g(r)^2)) and its r-derivatives
};

// r = 0 returns the limit values.
Wvn3d eval_wvn_3d(double r);

struct ShortRangeSample {
  SampledFunction v;
  double rho_sr = 1.0;
};

struct LongRangeSample {
  SampledFunction v;
  double rho_lr = 0.5;
  double rho_lr_prime = 0.5;
};

struct CustomSample {
  SampledFunction v;
};

struct WignerVonNeumann1D {};
struct WignerVonNeumann3DRadial {};

struct PotentialSpec;

struct PotentialSum {
  std::vector<PotentialSpec> terms;
};

struct PotentialSpec {
  std::variant<OscillatingSpec, WignerVonNeumann1D, WignerVonNeumann3DRadial, SimonSeriesSpec,
               ShortRangeSample, LongRangeSample, PotentialSum, CustomSample>
      v;
};

double eval_potential(const PotentialSpec& spec, double x);

// Upper bound for the local angular frequency of V near x; drives sub-cell quadrature.
double local_frequency(const PotentialSpec& spec, double x);

void validate(const CutoffSpec& spec);
void validate(const OscillatingSpec& spec);
void validate(const SimonSeriesSpec& spec);
void validate(const PotentialSpec& spec);

PotentialSpec make_sum(std::vector<PotentialSpec> terms);
ShortRangeSample gaussian_short_range(double amplitude, double sigma, double extent, int count);

void to_json(Json& j, const CutoffSpec& s);
void from_json(const Json& j, CutoffSpec& s);
void to_json(Json& j, const OscillatingSpec& s);
void from_json(const Json& j, OscillatingSpec& s);
void to_json(Json& j, const SampledFunction& s);
void from_json(const Json& j, SampledFunction& s);
void to_json(Json& j, const SimonSeriesSpec& s);
void from_json(const Json& j, SimonSeriesSpec& s);
void to_json(Json& j, const Envelope& s);
void from_json(const Json& j, Envelope& s);
void to_json(Json& j, const PotentialSpec& s);
void from_json(const Json& j, PotentialSpec& s);

enum class WeightKind { g_delta, psi, bracket_power };

struct WeightFunctionSpec {
  WeightKind kind = WeightKind::bracket_power;
  double delta = 0.5;
  double s = 1.0;
  double R = 1.0;
  double c = 1.0;
};

void validate(const WeightFunctionSpec& spec);
double eval_weight(const WeightFunctionSpec& spec, double t);

// psi'(t) = c R <t>^{-2s}
double psi_derivative(const WeightFunctionSpec& spec, double t);

// psi(b) - psi(a) without cancellation when b is close to a.
double psi_increment(const WeightFunctionSpec& spec, double a, double b);

// sup psi = c R int_R <tau>^{-2s} d tau
double psi_limit(const WeightFunctionSpec& spec);

void to_json(Json& j, const WeightFunctionSpec& s);
void from_json(const Json& j, WeightFunctionSpec& s);

}  // namespace oscilab
