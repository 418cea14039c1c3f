#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "doctest.h"
#include "oscilab/spectral.hpp"

using namespace oscilab;

namespace {

OperatorFactory wvn_factory() {
  return [](const Grid1D& g) { return build_schrodinger(g, PotentialSpec{WignerVonNeumann1D{}}); };
}

GridForBox line_at(double h) {
  return [h](double L) { return line_grid_step(L, h); };
}

int count_genuine(const std::vector<EmbeddedCandidate>& c) {
  return static_cast<int>(
      std::count_if(c.begin(), c.end(), [](const EmbeddedCandidate& e) { return e.verdict == EmbeddedVerdict::genuine; }));
}

}  // namespace

TEST_CASE("eig of a diagonal matrix") {
  Grid1D g = line_grid(1.0, 5);
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(5, 5);
  D.diagonal() << 3.0, -1.0, 2.5, 0.0, 7.0;
  auto r = eig(make_dense(g, OperatorKind::hamiltonian, "diag", D));
  Eigen::VectorXd want(5);
  want << -1.0, 0.0, 2.5, 3.0, 7.0;
  CHECK((r.eigenvalues - want).norm() < 1e-14);
}

TEST_CASE("eig: orthonormal vectors, small residuals, Fourier spectrum") {
  Grid1D g = periodic_grid(8.0, 48);
  OperatorMatrix H = build_h0(g);
  auto r = eig(H);
  Eigen::Index n = r.eigenvectors.cols();
  CHECK((r.eigenvectors.adjoint() * r.eigenvectors - Eigen::MatrixXcd::Identity(n, n)).norm() <= 1e-10);
  CHECK(r.residual_norms.maxCoeff() <= 1e-8 * norm_bound(H));
  Eigen::VectorXd xi = fourier_frequencies(g);
  std::vector<double> want;
  for (int i = 0; i < xi.size(); ++i) want.push_back(xi[i] * xi[i]);
  std::sort(want.begin(), want.end());
  for (int i = 0; i < g.n; ++i) CHECK(r.eigenvalues[i] == doctest::Approx(want[i]).epsilon(1e-10));

  OperatorMatrix T = build_schrodinger(line_grid(30.0, 500), PotentialSpec{WignerVonNeumann1D{}});
  auto w = eig_window(T, 0.5, 1.5);
  CHECK(w.eigenvalues.size() > 0);
  CHECK(w.residual_norms.maxCoeff() <= 1e-8 * norm_bound(T));
}

TEST_CASE("eig rejects non-Hermitian input") {
  Grid1D g = line_grid(1.0, 3);
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(3, 3);
  M(0, 1) = 1.0;
  CHECK_THROWS(eig(make_dense(g, OperatorKind::hamiltonian, "bad", M)));
}

TEST_CASE("WvN embedded eigenvalue is found and is the only genuine candidate") {
  EmbeddedOptions opt;
  opt.conjugate = [](const Grid1D& g) { return build_conjugate_A(g); };
  auto c = find_embedded(wvn_factory(), line_at(0.05), 0.9, 1.1, {200.0, 400.0}, opt);
  REQUIRE(count_genuine(c) == 1);
  for (const auto& e : c) {
    if (e.verdict == EmbeddedVerdict::genuine) {
      CHECK(std::abs(e.energy - 1.0) <= 1e-2);
      CHECK(e.localization >= 0.99);
      CHECK(e.box_drift <= 5e-3);
      CHECK(e.virial <= 1e-3);
    } else if (e.verdict == EmbeddedVerdict::box_artifact) {
      // virial separation: artifacts sit at least 10x above the genuine bound
      CHECK(e.virial >= 1e-2);
    }
  }
}

TEST_CASE("find_embedded is stable under grid refinement") {
  // h = 0.1 is pre-asymptotic for the eigenvalue (shift 2e-2); from h = 0.05 the O(h^2) shift is below drift_tol
  auto coarse = find_embedded(wvn_factory(), line_at(0.05), 0.9, 1.1, {200.0, 400.0});
  auto fine = find_embedded(wvn_factory(), line_at(0.025), 0.9, 1.1, {200.0, 400.0});
  REQUIRE(count_genuine(coarse) == count_genuine(fine));
  auto genuine_energy = [](const std::vector<EmbeddedCandidate>& c) {
    for (const auto& e : c)
      if (e.verdict == EmbeddedVerdict::genuine) return e.energy;
    return 0.0;
  };
  CHECK(std::abs(genuine_energy(coarse) - genuine_energy(fine)) <= 2 * 5e-3);
}

TEST_CASE("free operator has no genuine candidates") {
  auto c = find_embedded([](const Grid1D& g) { return build_h0(g); }, line_at(0.1), 0.1, 3.0, {200.0, 400.0});
  CHECK(c.size() > 10);
  CHECK(count_genuine(c) == 0);
  CHECK_THROWS_AS(find_embedded(wvn_factory(), line_at(0.1), 0.9, 1.1, {200.0}), ValidationError);
}

TEST_CASE("virial check") {
  Grid1D g = line_grid_step(60.0, 0.05);
  auto fH = [](const Grid1D& gg) { return build_h0(gg); };
  auto fA = [](const Grid1D& gg) { return build_conjugate_A(gg); };
  CHECK(virial_check(fH, fA, g, Eigen::VectorXcd::Zero(g.n)) == 0.0);

  // random state in the window [0.9, 1.1] of H0: the form is about 2E
  OperatorMatrix H = build_h0(g);
  auto d = decompose_window(H, 0.9, 1.1);
  std::mt19937 rng(2);
  std::normal_distribution<double> n01;
  Eigen::VectorXcd c(d.values.size());
  for (int i = 0; i < c.size(); ++i) c[i] = cd(n01(rng), n01(rng));
  Eigen::VectorXcd f = d.vectors * c;
  f.normalize();
  CHECK(virial_check(fH, fA, g, f) >= 0.1 * 2 * 1.0);
}

TEST_CASE("tail decay of a compactly supported operator") {
  Grid1D g = line_grid_step(60.0, 0.1);
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(g.n, g.n);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (std::abs(g.x(i)) <= 10 && std::abs(g.x(j)) <= 10) T(i, j) = std::exp(-std::abs(g.x(i) - g.x(j)));
  auto r = tail_decay(make_dense(g, OperatorKind::hamiltonian, "T", T), {20.0, 40.0});
  CHECK(r.tail_norms[0] == 0.0);
  CHECK(r.tail_norms[1] == 0.0);
}

TEST_CASE("tail verdict classification") {
  CHECK(classify_tail({1, 2, 4, 8}, {1.0, 0.5, 0.2, 0.05}).verdict == TailVerdict::decays_to_zero);
  CHECK(classify_tail({1, 2, 4, 8}, {1.0, 0.9, 0.9, 0.9}).verdict == TailVerdict::plateaus);
  CHECK(classify_tail({1, 2, 4, 8}, {1.0, 1.5, 2.0, 3.0}).verdict == TailVerdict::grows);
  CHECK(classify_tail({1, 2, 4, 8}, {1.0, 0.5, 0.3, 0.4}).plateau_estimate == doctest::Approx(0.4));
}

TEST_CASE("interference symbol") {
  CHECK(interference_symbol_check(WindowSpec{0.3, 0.8}, 2.0, 1) == 0.0);
  CHECK(interference_symbol_check(WindowSpec{0.3, 0.8}, 2.0, 3) == 0.0);
  CHECK(interference_symbol_check(WindowSpec{1.1, 1.3}, 2.0, 3) > 0.0);
  CHECK(interference_symbol_check(WindowSpec{0.9, 1.5}, 2.0, 1) > 0.0);
  CHECK(interference_symbol_check(WindowSpec{1.1, 1.3}, 50.0, 3) == 0.0);
}

TEST_CASE("tail verdict matches the interference symbol across k^2/4") {
  Grid1D g = halfline_grid_step(200.0, 0.1);
  std::vector<double> radii{10, 20, 40, 80};
  const std::pair<double, double> windows[] = {{0.2, 0.4}, {0.3, 0.5}, {0.4, 0.6}, {0.5, 0.7}, {0.6, 0.8},
                                               {1.2, 1.5}, {1.4, 1.7}, {1.6, 1.9}, {1.8, 2.1}, {2.0, 2.3}};
  for (auto [a, b] : windows) {
    WindowSpec w{a, b};
    double sym = interference_symbol_check(w, 2.0, 3);
    auto r = interference_probe(g, w, 2.0, radii);
    INFO("window [" << a << ", " << b << "] symbol " << sym << " tails " << r.tail_norms.front() << " .. "
                    << r.tail_norms.back());
    CHECK((sym == 0.0) == (r.verdict == TailVerdict::decays_to_zero));
  }
}

TEST_CASE("small plus decay") {
  Grid1D g = halfline_grid_step(200.0, 0.1);
  std::vector<double> radii{10, 20, 40, 80};
  WindowSpec wide{1.2, 1.6};
  auto r = small_plus_decay_probe(g, wide, 2.0, radii, 0.25);
  CHECK(r.narrow_window.b - r.narrow_window.a == doctest::Approx(0.1));
  CHECK(r.narrow.plateau_estimate <= r.wide.plateau_estimate);
  CHECK(r.narrowing_lowers);

  auto below = interference_probe(g, WindowSpec{0.3, 0.8}, 2.0, radii);
  CHECK(below.verdict == TailVerdict::decays_to_zero);
  CHECK(below.plateau_estimate < 0.05 * r.wide.plateau_estimate);

  InterferenceOptions zero;
  zero.amplitude = 0.0;
  auto z = interference_probe(g, wide, 2.0, radii, zero);
  for (double t : z.tail_norms) CHECK(t == 0.0);
}

TEST_CASE("oscillation compactness probe") {
  Grid1D g = periodic_grid(80.0, 8192);
  std::vector<double> radii{4, 8, 16, 32, 64};
  CompactnessSpec base;  // alpha = 2, p = 1, l = (2, 2), k = 1
  auto r1 = oscillation_compactness_probe(g, base, radii, 70.0);
  CHECK(r1.verdict == TailVerdict::decays_to_zero);
  CompactnessSpec smooth = base;
  smooth.p = 0.0;
  smooth.l1 = smooth.l2 = 6.0;
  auto r0 = oscillation_compactness_probe(g, smooth, radii, 70.0);
  CHECK(r0.verdict == TailVerdict::decays_to_zero);
  CHECK(r0.tail_norms.back() / r0.tail_norms.front() < r1.tail_norms.back() / r1.tail_norms.front());
  CompactnessSpec linear = base;
  linear.alpha = 1.0;
  CHECK(oscillation_compactness_probe(g, linear, radii, 70.0).verdict == TailVerdict::plateaus);
}

TEST_CASE("Golub-Kahan-Lanczos agrees with a dense SVD") {
  std::mt19937 rng(9);
  std::normal_distribution<double> n01;
  Eigen::MatrixXcd M(120, 120);
  for (int i = 0; i < 120; ++i)
    for (int j = 0; j < 120; ++j) M(i, j) = cd(n01(rng), n01(rng));
  double want = Eigen::JacobiSVD<Eigen::MatrixXcd>(M).singularValues()[0];
  double got = largest_singular_value([&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return M * v; },
                                      [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return M.adjoint() * v; },
                                      120, 300, 1e-12);
  CHECK(got == doctest::Approx(want).epsilon(1e-8));
}
