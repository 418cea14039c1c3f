#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "doctest.h"
#include "oscilab/lap.hpp"

using namespace oscilab;

namespace {

OperatorMatrix diag_op(const Grid1D& g, const Eigen::VectorXd& d) {
  return make_dense(g, OperatorKind::hamiltonian, "diag", d.cast<cd>().asDiagonal().toDenseMatrix());
}

OperatorFactory h0() {
  return [](const Grid1D& g) { return build_h0(g); };
}

OperatorFactory conj_A() {
  return [](const Grid1D& g) { return build_conjugate_A(g); };
}

}  // namespace

TEST_CASE("weighted resolvent norm with W = I is 1 / dist(z, spec H)") {
  Grid1D g = line_grid_step(20.0, 0.2);
  OperatorMatrix H = build_schrodinger(g, PotentialSpec{WignerVonNeumann1D{}});
  OperatorMatrix I = build_weight(g, 0.0);
  auto ev = decompose(H, false).values;
  for (cd z : {cd(0.7, 0.05), cd(-3.0, 1.0), cd(2.2, 1e-3)}) {
    double dist = (ev.cast<cd>().array() - z).abs().minCoeff();
    CHECK(weighted_resolvent_norm(H, I, z) == doctest::Approx(1.0 / dist).epsilon(1e-10));
  }
}

TEST_CASE("weighted resolvent norm on a 2x2 diagonal") {
  Grid1D g = line_grid(1.0, 2);
  Eigen::VectorXd d(2), w(2);
  d << 0.0, 2.0;
  w << 1.0, 0.0;
  double eps = 1e-6;
  // W kills the resonant level at 2: only 1 / |0 - z| survives
  CHECK(weighted_resolvent_norm(diag_op(g, d), diag_op(g, w), cd(2.0, eps)) ==
        doctest::Approx(1.0 / std::abs(cd(2.0, eps))).epsilon(1e-12));
}

TEST_CASE("weighted resolvent norm: banded path agrees with the dense path") {
  Grid1D g = line_grid_step(30.0, 0.25);
  OperatorMatrix H = build_schrodinger(g, PotentialSpec{OscillatingSpec{}});
  OperatorMatrix W = build_weight(g, 0.51);
  OperatorMatrix Hd = make_dense(g, OperatorKind::hamiltonian, "Hd", H.to_dense());
  OperatorMatrix Wd = make_dense(g, OperatorKind::weight, "Wd", W.to_dense());
  for (cd z : {cd(0.5, 0.1), cd(1.2, 0.01)})
    CHECK(weighted_resolvent_norm(H, W, z) == doctest::Approx(weighted_resolvent_norm(Hd, Wd, z)).epsilon(1e-6));
}

TEST_CASE("weighted resolvent norm far from the spectrum is small and decreasing in s") {
  Grid1D g = line_grid_step(40.0, 0.2);
  OperatorMatrix H = build_h0(g);
  cd z(-50.0, 1.0);
  OperatorMatrix W = build_weight(g, 0.51);
  double wn = norm_bound(W);
  CHECK(weighted_resolvent_norm(H, W, z) <= 0.1 * wn * wn);
  // <x>^{-s} <= <x>^{-t} for s >= t, so the weighted norm cannot grow with s
  cd near(1.0, 0.01);
  double prev = std::numeric_limits<double>::infinity();
  for (double s : {0.0, 0.3, 0.6, 1.0, 2.0}) {
    double v = weighted_resolvent_norm(H, build_weight(g, s), near);
    CHECK(v <= prev * (1 + 1e-8));
    prev = v;
  }
}

TEST_CASE("tridiagonal solve matches a dense solve") {
  Grid1D g = line_grid_step(15.0, 0.1);
  OperatorMatrix T = build_schrodinger(g, PotentialSpec{WignerVonNeumann1D{}});
  std::mt19937 rng(4);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd b(g.n);
  for (int i = 0; i < g.n; ++i) b[i] = cd(nd(rng), nd(rng));
  for (cd z : {cd(1.0, 1e-3), cd(-2.0, 0.5), cd(400.0, 1e-6)}) {
    Eigen::MatrixXcd A = T.to_dense() - z * Eigen::MatrixXcd::Identity(g.n, g.n);
    Eigen::VectorXcd want = A.partialPivLu().solve(b);
    Eigen::VectorXcd got = tridiagonal_solve(T, z, b);
    CHECK((got - want).norm() <= 1e-9 * want.norm());
  }
  CHECK_THROWS_AS(tridiagonal_solve(make_dense(g, OperatorKind::hamiltonian, "d", T.to_dense()), cd(1, 1), b),
                  ValidationError);
}

TEST_CASE("LAP scan: unweighted control fails, weighted scan holds below the interference threshold") {
  LapScanSpec s;
  s.a = 0.3;
  s.b = 0.8;
  s.s = 0.0;
  s.im_ladder = {1.0, 0.5, 0.25, 0.125};
  auto r0 = lap_scan(PotentialSpec{OscillatingSpec{}}, s);
  CHECK(r0.verdict == LapVerdict::lap_fails);
  CHECK(r0.divergence_exponent >= 0.85);

  s.s = 1.0;
  // W_{1,1} with w = 3 plus the Gaussian short-range sample
  auto r1 = lap_scan(phase_potential(PhaseSweepSpec{}, 1.0, 1.0), s);
  INFO("p = " << r1.divergence_exponent << ", floor " << r1.im_floor);
  CHECK(r1.verdict == LapVerdict::lap_holds);
  CHECK(r1.im_floor >= 10.0 * r1.level_spacing * (1 - 1e-12));
  for (double eta : r1.rungs_used) CHECK(eta >= r1.im_floor);
  CHECK(r1.points.size() == s.box_list.size() * s.re_points * r1.rungs_used.size());
  std::ostringstream csv;
  write_scan_csv(csv, r1);
  CHECK(csv.str().rfind("re_z,im_z,box_L,norm\n", 0) == 0);
  CHECK(summary_json(r1)["verdict"] == "lap_holds");
}

TEST_CASE("LAP scan spec validation") {
  LapScanSpec s;
  s.a = 1.0;
  s.b = 0.5;
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = {};
  s.im_ladder = {0.1, 0.2};
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = {};
  s.box_list = {200.0};
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = {};
  s.s = -0.1;
  CHECK_THROWS_AS(validate(s), ValidationError);
  Json j = LapScanSpec{};
  CHECK(j.get<LapScanSpec>().box_list == LapScanSpec{}.box_list);
}

TEST_CASE("Mourre estimate for H0 with the generator of dilations") {
  Grid1D g = line_grid_step(80.0, 0.01);
  auto r = mourre_check(h0(), conj_A(), g, 0.9, 1.1, MourreMode::strict);
  CHECK(r.window_rank >= 5);
  // [H0, iA] = 2 H0, so the form on E_J is at least about 2 inf J
  CHECK(r.best_c >= 0.9 * 2 * 0.9);
  CHECK(r.holds);
}

TEST_CASE("Mourre estimate: disjoint window is trivial") {
  Grid1D g = line_grid_step(40.0, 0.1);
  auto r = mourre_check(h0(), conj_A(), g, -3.0, -1.0, MourreMode::strict);
  CHECK(r.window_rank == 0);
  CHECK(std::isinf(r.best_c));
  CHECK(to_json_value(r)["best_c"].is_null());
}

TEST_CASE("Mourre estimate: a remainder budget can only raise best_c") {
  Grid1D g = line_grid_step(60.0, 0.05);
  auto V = [](const Grid1D& gg) { return build_schrodinger(gg, PotentialSpec{WignerVonNeumann1D{}}); };
  auto strict = mourre_check(V, conj_A(), g, 0.9, 1.1, MourreMode::strict);
  auto plain = mourre_check(V, conj_A(), g, 0.9, 1.1, MourreMode::plain, 1);
  CHECK(plain.remainder_rank == 1);
  CHECK(plain.best_c >= strict.best_c);
  CHECK(plain.best_c > 0.0);
  // the embedded eigenvector makes the strict form degenerate
  INFO("strict " << strict.best_c << ", plain " << plain.best_c);
  CHECK(strict.best_c < 0.1 * plain.best_c);
  CHECK_THROWS_AS(mourre_check(V, conj_A(), g, 1.1, 0.9, MourreMode::strict), ValidationError);
  CHECK_THROWS_AS(mourre_check(V, conj_A(), g, 0.9, 1.1, MourreMode::weighted), ValidationError);
}

TEST_CASE("weighted Mourre estimate") {
  Grid1D g = line_grid_step(40.0, 0.1);
  WeightFunctionSpec psi;
  psi.kind = WeightKind::psi;
  psi.c = 0.0;  // derived from inf J

  // without the weight term the form [H, i phi(A)] is nonnegative on E_J
  auto nw = weighted_mourre_check(h0(), conj_A(), g, psi, 4.0, 0.5, 1.5, 0.51, false);
  CHECK(nw.commutator_form_min_eig >= -1e-8);
  CHECK(nw.psi_c == doctest::Approx(2.0));

  // the weighted form improves with R
  double prev = -std::numeric_limits<double>::infinity();
  for (double R : {1.0, 4.0, 16.0}) {
    auto r = weighted_mourre_check(h0(), conj_A(), g, psi, R, 0.5, 1.5, 0.51);
    CHECK(r.best_c >= prev - 1e-8);
    prev = r.best_c;
  }

  // phi = 0 (via vanishing coupling c) leaves -E_J <S>^{-2s} E_J <= 0
  WeightFunctionSpec flat = psi;
  flat.c = 1e-12;
  auto z = weighted_mourre_check(h0(), conj_A(), g, flat, 1.0, 0.5, 1.5, 0.51);
  CHECK(z.best_c < 0.0);
  CHECK_FALSE(z.holds);

  CHECK_THROWS_AS(weighted_mourre_check(h0(), conj_A(), g, psi, 0.5, 0.5, 1.5, 0.51), ValidationError);
  CHECK_THROWS_AS(weighted_mourre_check(h0(), conj_A(), g, psi, 2.0, 0.5, 1.5, 0.5), ValidationError);
}

TEST_CASE("Mourre estimate at infinity") {
  Grid1D g = line_grid_step(100.0, 0.1);
  OscillatingSpec o;
  o.beta = 0.8;
  auto H = [o](const Grid1D& gg) { return build_schrodinger(gg, PotentialSpec{o}); };
  auto rep = mourre_at_infinity_check(H, g, {20.0, 40.0}, 0.1, 0.51, 0.7, 0.3, 0.8);
  INFO("c1 " << rep.c1);
  CHECK(rep.c1 > 0.0);
  CHECK(rep.holds);
  CHECK(rep.min_ratio.size() == 2);

  auto free = mourre_at_infinity_check(h0(), g, {20.0, 40.0}, 0.1, 0.51, 0.7, 0.3, 0.8);
  CHECK(free.c1 > 0.0);

  CHECK_THROWS_AS(mourre_at_infinity_check(H, g, {20.0}, 0.1, 0.51, 0.5, 0.3, 0.8), ValidationError);
  CHECK_THROWS_AS(mourre_at_infinity_check(H, g, {20.0}, 1.0, 0.51, 0.7, 0.3, 0.8), ValidationError);
}

TEST_CASE("phase regions") {
  CHECK(phase_region(1.0, 1.0) == PhaseRegion::green);
  CHECK(phase_region(1.0, 0.75) == PhaseRegion::green);
  CHECK(phase_region(1.4, 0.6) == PhaseRegion::green);
  CHECK(phase_region(1.5, 0.6) == PhaseRegion::blue);   // alpha + beta > 2
  CHECK(phase_region(0.5, 0.8) == PhaseRegion::blue);   // beta > alpha
  CHECK(phase_region(1.0, 0.5) == PhaseRegion::outside);
  CHECK(phase_region(0.8, 0.6) == PhaseRegion::outside);
  CHECK(std::string(region_name(PhaseRegion::green)) == "green");
}

TEST_CASE("phase sweep: validation, budget and outputs") {
  PhaseSweepSpec s;
  s.betas = {0.0};
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = {};
  s.below_hi = 1.5;  // crosses k^2/4 = 1
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = {};
  s.screen_boxes = {200.0};
  CHECK_THROWS_AS(validate(s), ValidationError);

  s = {};
  s.budget = 0;
  auto cells = phase_sweep(s);
  REQUIRE(cells.size() == 9);
  for (const auto& c : cells) {
    CHECK(c.below == "skipped");
    CHECK(c.above == "skipped");
  }
  std::ostringstream csv, svg;
  write_phase_csv(csv, cells);
  write_phase_svg(svg, cells, s);
  const std::string text = csv.str();
  CHECK(text.rfind("alpha,beta,window,verdict\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 19);
  CHECK(svg.str().find("<svg") == 0);
  CHECK(svg.str().find("alpha=1 beta=0.75 below=skipped") != std::string::npos);

  Json j = s;
  PhaseSweepSpec back = j.get<PhaseSweepSpec>();
  CHECK(back.alphas == s.alphas);
  CHECK(back.screen_boxes == s.screen_boxes);
  CHECK(back.scan.im_ladder == s.scan.im_ladder);
}

TEST_CASE("phase potential adds the short-range sample") {
  PhaseSweepSpec s;
  OscillatingSpec o{s.w, s.k, 1.5, 0.75, {}};
  PotentialSpec V = phase_potential(s, 1.5, 0.75);
  CHECK(eval_potential(V, 30.0) == doctest::Approx(eval_oscillating(o, 30.0)).epsilon(1e-12));
  CHECK(eval_potential(V, 0.0) != 0.0);
  s.include_short_range = false;
  CHECK(eval_potential(phase_potential(s, 1.5, 0.75), 0.0) == 0.0);
}
