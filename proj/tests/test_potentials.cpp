#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oscilab/potentials.hpp"

using namespace oscilab;
using std::numbers::pi;

namespace {

// Richardson-extrapolated central differences: error O(h^4).
double rich_d1(const std::function<double(double)>& f, double x, double h) {
  auto d = [&](double s) { return (f(x + s) - f(x - s)) / (2 * s); };
  return (4 * d(h / 2) - d(h)) / 3;
}

double rich_d2(const std::function<double(double)>& f, double x, double h) {
  auto d = [&](double s) { return (f(x + s) - 2 * f(x) + f(x - s)) / (s * s); };
  return (4 * d(h / 2) - d(h)) / 3;
}

}  // namespace

TEST_CASE("cutoff plateau, support end and quintic midpoint") {
  CutoffSpec c{1.0, 2.0};
  CHECK(eval_cutoff(c, 0.5) == 1.0);
  CHECK(eval_cutoff(c, 3.0) == 0.0);
  // 1 - (10 t^3 - 15 t^4 + 6 t^5) at t = 1/2
  double t = 0.5;
  CHECK(eval_cutoff(c, 1.5) == doctest::Approx(1 - (10 * t * t * t - 15 * t * t * t * t + 6 * std::pow(t, 5))));
  double prev = 1.0;
  for (double r = 1.0; r <= 2.0; r += 0.01) {
    double v = eval_cutoff(c, r);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("oscillating potential values") {
  OscillatingSpec s;  // w=1, k=2, alpha=1, beta=1, cutoff (1, 2)
  CHECK(eval_oscillating(s, 0.0) == 0.0);
  CHECK(std::abs(eval_oscillating(s, pi)) < 1e-15);
  OscillatingSpec t{3.0, 1.0, 2.0, 0.5, {}};
  CHECK(eval_oscillating(t, 4.0) == doctest::Approx(1.5 * std::sin(16.0)).epsilon(1e-14));
  CHECK(eval_oscillating(t, -4.0) == eval_oscillating(t, 4.0));
}

TEST_CASE("oscillating potential: exact zero inside the cutoff, exact formula outside") {
  for (double alpha : {0.5, 1.0, 2.0})
    for (double beta : {0.3, 1.0, 1.7}) {
      OscillatingSpec s{-2.0, 1.3, alpha, beta, {1.5, 3.0}};
      for (double x = -1.5; x <= 1.5; x += 0.05) CHECK(eval_oscillating(s, x) == 0.0);
      for (double x = 3.0; x < 60.0; x += 0.37) {
        double want = -2.0 * std::pow(x, -beta) * std::sin(1.3 * std::pow(x, alpha));
        CHECK(eval_oscillating(s, x) == doctest::Approx(want).epsilon(1e-13));
      }
    }
}

TEST_CASE("oscillating spec rejects beta = 0 and w = 0") {
  OscillatingSpec s;
  s.beta = 0.0;
  CHECK_THROWS_AS(validate(s), ValidationError);
  s.beta = 1.0;
  s.w = 0.0;
  CHECK_THROWS_AS(validate(s), ValidationError);
  CHECK_THROWS_AS(validate(CutoffSpec{2.0, 1.0}), ValidationError);
}

TEST_CASE("WvN potential: hand values and evenness") {
  CHECK(eval_wvn_potential(0.0) == doctest::Approx(0.0));
  double p2 = pi * pi;
  CHECK(eval_wvn_potential(pi / 2) == doctest::Approx(-32 * (1 - 3 * p2) / ((1 + p2) * (1 + p2))).epsilon(1e-13));
  CHECK(eval_wvn_potential(pi / 2) == doctest::Approx(7.748).epsilon(1e-3));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 200.0);
  for (int i = 0; i < 200; ++i) {
    double x = u(rng);
    CHECK(eval_wvn_potential(x) == eval_wvn_potential(-x));
  }
}

TEST_CASE("WvN bound state values") {
  CHECK(eval_wvn_bound_state(0.0).f == 0.0);
  CHECK(eval_wvn_bound_state(pi / 2).f == doctest::Approx(1 / (1 + pi * pi)).epsilon(1e-14));
}

TEST_CASE("WvN potential decays like <x>^-1") {
  double C = 0.0;
  for (double x = -1e4; x <= 1e4; x += 0.173) C = std::max(C, std::abs(eval_wvn_potential(x)) * bracket(x));
  MESSAGE("max |V(x)| <x> on [-1e4, 1e4]: " << C);
  CHECK(std::isfinite(C));
  CHECK(C < 100.0);
}

TEST_CASE("analytic derivatives agree with Richardson differences") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.1, 100.0);
  auto f = [](double x) { return eval_wvn_bound_state(x).f; };
  auto fr = [](double r) { return eval_wvn_3d(r).u.f; };
  for (int i = 0; i < 1000; ++i) {
    double x = u(rng);
    // scale: the local amplitude 1/(1+g^2), so zeros of f' do not inflate the relative error
    double amp = wvn_h(x).f;
    Jet2 j = eval_wvn_bound_state(x);
    CHECK(std::abs(rich_d1(f, x, 1e-3) - j.df) <= 1e-7 * std::max(std::abs(j.df), amp));
    CHECK(std::abs(rich_d2(f, x, 5e-3) - j.d2f) <= 1e-7 * std::max(std::abs(j.d2f), amp));
    Wvn3d w = eval_wvn_3d(x);
    double ampr = amp / x;
    CHECK(std::abs(rich_d1(fr, x, 1e-3) - w.u.df) <= 1e-7 * std::max(std::abs(w.u.df), ampr));
    CHECK(std::abs(rich_d2(fr, x, 5e-3) - w.u.d2f) <= 1e-7 * std::max(std::abs(w.u.d2f), ampr));
  }
}

TEST_CASE("3D radial profile") {
  CHECK(eval_wvn_3d(0.0).u.f == doctest::Approx(1.0));
  CHECK(eval_wvn_3d(1e-6).u.f == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(eval_wvn_3d(2.0).W == eval_wvn_potential(2.0));
  double r = 3.0;
  Wvn3d w = eval_wvn_3d(r);
  CHECK(std::abs(-w.u.d2f - 2 / r * w.u.df + w.W * w.u.f - w.u.f) < 1e-9);
}

TEST_CASE("Simon series evaluator") {
  SimonSeriesSpec s;
  s.kappas = {1.0};
  s.radii = {1.0};
  s.phases = {0.0};
  CHECK(eval_simon_series(s, 0.5) == 0.0);
  CHECK(eval_simon_series(s, 2.0) == doctest::Approx(2 * std::sin(4.0)).epsilon(1e-14));
  CHECK(eval_simon_series(s, 2.0) == doctest::Approx(-1.5136).epsilon(1e-4));
  CHECK(eval_simon_series(s, -2.0) == eval_simon_series(s, 2.0));

  s.kappas = {1.0, 1.0};
  s.radii = {1.0, 2.0};
  s.phases = {0.0, 0.0};
  CHECK_THROWS_AS(validate(s), ValidationError);  // kappas must be distinct
  s.kappas = {1.0, 2.0};
  s.radii = {2.0, 1.0};
  CHECK_THROWS_AS(validate(s), ValidationError);  // radii must increase
}

TEST_CASE("Simon bound check against a supplied envelope") {
  SimonSeriesSpec s;
  s.kappas = {1.0, 2.0};
  s.radii = {2.0, 10.0};
  s.phases = {0.3, 1.1};
  s.truncation_count = 2;
  Envelope tight{{0.0, 1e4}, {0.5, 0.5}};
  Envelope loose{{0.0, 1.9, 2.0, 9.9, 10.0, 1e4}, {0.1, 0.1, 6.0, 6.0, 18.0, 18.0}};
  Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(10000, -300.0, 300.0);
  CHECK_FALSE(simon_bound_check(s, tight, xs).holds);
  auto b = simon_bound_check(s, loose, xs);
  CHECK(b.holds);
  CHECK(b.max_ratio <= 1.0);
}

TEST_CASE("weight functions") {
  WeightFunctionSpec gd{WeightKind::g_delta, 0.3};
  CHECK(eval_weight(gd, 0.0) == doctest::Approx(1.0));
  for (double x = -50; x <= 50; x += 0.25) CHECK(eval_weight(gd, x) >= 1.0 / bracket(x));

  WeightFunctionSpec bp;
  bp.kind = WeightKind::bracket_power;
  bp.s = 0.5;
  CHECK(eval_weight(bp, 0.0) == 1.0);

  WeightFunctionSpec psi;
  psi.kind = WeightKind::psi;
  psi.s = 1.0;
  psi.R = 1.0;
  psi.c = 1.0;
  CHECK(eval_weight(psi, 0.0) == doctest::Approx(pi / 2).epsilon(1e-12));
  for (double t = -40; t <= 40; t += 0.7) CHECK(std::abs(eval_weight(psi, t) - (std::atan(t) + pi / 2)) < 1e-10);
  CHECK(psi_limit(psi) == doctest::Approx(pi).epsilon(1e-12));
}

TEST_CASE("psi is nondecreasing and bounded by its limit") {
  WeightFunctionSpec psi;
  psi.kind = WeightKind::psi;
  psi.s = 0.51;
  psi.R = 4.0;
  psi.c = 0.7;
  std::vector<double> ts;
  for (double a = 1e5; a > 1e-3; a /= 1.3) ts.push_back(-a);
  for (double a = 0.0; a < 1e5; a = 1.3 * a + 1e-3) ts.push_back(a);
  double lim = psi_limit(psi), prev = -1.0;
  // int_R (1 + t^2)^{-s} dt = sqrt(pi) Gamma(s - 1/2) / Gamma(s)
  CHECK(lim == doctest::Approx(psi.c * psi.R * std::sqrt(pi) * std::tgamma(psi.s - 0.5) / std::tgamma(psi.s))
                   .epsilon(1e-9));
  for (double t : ts) {
    double v = eval_weight(psi, t);
    CHECK(v >= prev - 1e-12);
    CHECK(v <= lim + 1e-10);
    prev = v;
  }
  CHECK(psi_increment(psi, 2.0, 2.0 + 1e-9) == doctest::Approx(psi_derivative(psi, 2.0) * 1e-9).epsilon(1e-6));
  psi.s = 0.5;
  CHECK_THROWS_AS(validate(psi), ValidationError);
}

TEST_CASE("potential spec JSON round trip") {
  PotentialSpec V = make_sum({PotentialSpec{OscillatingSpec{3.0, 2.0, 1.5, 0.75, {}}},
                              PotentialSpec{gaussian_short_range(1.0, 1.0, 8.0, 321)}, PotentialSpec{WignerVonNeumann1D{}}});
  Json j = V;
  PotentialSpec W = j.get<PotentialSpec>();
  for (double x = -30; x <= 30; x += 0.31) CHECK(eval_potential(W, x) == eval_potential(V, x));
  CHECK_THROWS_AS(Json({{"kind", "nope"}}).get<PotentialSpec>(), ValidationError);
}

TEST_CASE("sum of potentials is additive") {
  OscillatingSpec o{2.0, 1.0, 1.0, 1.0, {}};
  PotentialSpec a{o}, b{WignerVonNeumann1D{}};
  PotentialSpec s = make_sum({a, b});
  for (double x = -20; x <= 20; x += 0.9)
    CHECK(eval_potential(s, x) == doctest::Approx(eval_oscillating(o, x) + eval_wvn_potential(x)));
  CHECK_THROWS_AS(validate(PotentialSpec{PotentialSum{}}), ValidationError);
}
