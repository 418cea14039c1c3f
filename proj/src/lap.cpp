#include "oscilab/lap.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lapack.hpp"

namespace oscilab {

namespace {

struct Bands {
  Eigen::VectorXcd sub, diag, super;
};

Bands bands_of(const OperatorMatrix& T) {
  require(!T.is_dense && T.bandwidth() <= 1, "tridiagonal operator");
  const Eigen::Index n = T.dim();
  Bands b{Eigen::VectorXcd::Zero(std::max<Eigen::Index>(n - 1, 0)), Eigen::VectorXcd::Zero(n),
          Eigen::VectorXcd::Zero(std::max<Eigen::Index>(n - 1, 0))};
  for (int k = 0; k < T.sparse.outerSize(); ++k)
    for (SparseC::InnerIterator it(T.sparse, k); it; ++it) {
      if (it.row() == it.col()) b.diag[it.row()] += it.value();
      else if (it.row() == it.col() + 1) b.sub[it.col()] += it.value();
      else b.super[it.row()] += it.value();
    }
  return b;
}

Eigen::VectorXcd solve_bands(const Bands& B, cd z, const Eigen::VectorXcd& rhs) {
  const lapack_int n = static_cast<lapack_int>(B.diag.size());
  Eigen::VectorXcd dl = B.sub, d = B.diag.array() - z, du = B.super, x = rhs;
  lapack_int info = LAPACKE_zgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(), d.data(), du.data(), x.data(), n);
  if (info != 0) throw ComputeError("tridiagonal solve failed (zgtsv info " + std::to_string(info) + ")");
  return x;
}

bool is_diagonal(const OperatorMatrix& W) {
  if (W.is_dense) return false;
  for (int k = 0; k < W.sparse.outerSize(); ++k)
    for (SparseC::InnerIterator it(W.sparse, k); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) return false;
  return true;
}

Eigen::VectorXd diagonal_of(const OperatorMatrix& W) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(W.dim());
  for (int k = 0; k < W.sparse.outerSize(); ++k)
    for (SparseC::InnerIterator it(W.sparse, k); it; ++it)
      if (it.row() == it.col()) d[it.row()] += it.value().real();
  return d;
}

bool is_identity(const OperatorMatrix& W) {
  if (!is_diagonal(W)) return false;
  Eigen::VectorXd d = diagonal_of(W);
  return (d.array() == 1.0).all() && W.sparse.nonZeros() == W.dim();
}

double distance_to_spectrum(const OperatorMatrix& H, cd z) {
  double best = std::numeric_limits<double>::infinity();
  if (!H.is_dense && H.bandwidth() <= 1) {
    // the nearest eigenvalue is one of the two that bracket Re z
    const int n = static_cast<int>(H.dim()), below = count_below(H, z.real());
    Eigen::VectorXd ev = eigenvalues_by_index(H, std::max(below, 1), std::min(below + 1, n));
    for (Eigen::Index i = 0; i < ev.size(); ++i) best = std::min(best, std::abs(ev[i] - z));
    return best;
  }
  SpectralDecomposition d = decompose(H, false);
  for (Eigen::Index i = 0; i < d.values.size(); ++i) best = std::min(best, std::abs(d.values[i] - z));
  return best;
}

double mean_level_spacing(const OperatorMatrix& H, double a, double b) {
  int count = 0;
  if (!H.is_dense && H.bandwidth() <= 1) count = count_below(H, b) - count_below(H, a);
  else count = static_cast<int>(decompose_window(H, a, b, false).values.size());
  return (b - a) / std::max(count, 1);
}

}  // namespace

Eigen::VectorXcd tridiagonal_solve(const OperatorMatrix& T, cd z, const Eigen::VectorXcd& b) {
  require(T.dim() == b.size(), "vector matches the operator dimension");
  return solve_bands(bands_of(T), z, b);
}

double weighted_resolvent_norm(const OperatorMatrix& H, const OperatorMatrix& W, cd z) {
  require(z.imag() != 0.0, "Im z != 0");
  require(H.dim() == W.dim(), "H and W share a dimension");
  if (is_identity(W)) return 1.0 / distance_to_spectrum(H, z);

  if (!H.is_dense && H.bandwidth() <= 1 && is_diagonal(W)) {
    Bands B = bands_of(H);
    Eigen::VectorXd w = diagonal_of(W);
    require((w.array() >= 0.0).all(), "W positive");
    MatVec A = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
      return w.asDiagonal() * solve_bands(B, z, w.asDiagonal() * v);
    };
    MatVec Aadj = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
      return w.asDiagonal() * solve_bands(B, std::conj(z), w.asDiagonal() * v);
    };
    return largest_singular_value(A, Aadj, H.dim(), 200, 1e-8);
  }

  SpectralDecomposition d = decompose(H);
  Eigen::MatrixXcd Wd = W.to_dense();
  Eigen::MatrixXcd X = Wd * d.vectors;
  Eigen::VectorXcd r = (d.values.cast<cd>().array() - z).inverse();
  Eigen::MatrixXcd M = X * r.asDiagonal() * X.adjoint();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues()[0];
}

const char* verdict_name(LapVerdict v) {
  switch (v) {
    case LapVerdict::lap_holds: return "lap_holds";
    case LapVerdict::lap_fails: return "lap_fails";
    case LapVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

void validate(const LapScanSpec& spec) {
  require(std::isfinite(spec.a) && std::isfinite(spec.b) && spec.a < spec.b, "interval a < b");
  // s = 0 is admitted as the unweighted control
  require(std::isfinite(spec.s) && spec.s >= 0.0, "s >= 0");
  require(spec.re_points >= 3, "re_points >= 3");
  require(spec.im_ladder.size() >= 2, "im_ladder has at least two rungs");
  for (std::size_t i = 0; i < spec.im_ladder.size(); ++i) {
    require(spec.im_ladder[i] > 0.0, "im_ladder positive");
    if (i > 0) require(spec.im_ladder[i] < spec.im_ladder[i - 1], "im_ladder strictly decreasing");
  }
  require(spec.box_list.size() >= 2, "box_list has at least two boxes");
  for (double L : spec.box_list) require(std::isfinite(L) && L > 0.0, "box L > 0");
  require(spec.h > 0.0, "h > 0");
  require(spec.floor_factor >= 0.0, "floor_factor >= 0");
}

namespace {

LapVerdict verdict_from(double p) {
  if (p <= 0.15) return LapVerdict::lap_holds;
  if (p >= 0.85) return LapVerdict::lap_fails;
  return LapVerdict::inconclusive;
}

}  // namespace

LapScanResult lap_scan(const OperatorFactory& build, const LapScanSpec& spec) {
  validate(spec);
  std::vector<double> boxes = spec.box_list;
  std::sort(boxes.begin(), boxes.end());
  const std::size_t nb = boxes.size();

  std::vector<OperatorMatrix> Hs(nb), Ws(nb);
  parallel_for(nb, [&](std::size_t b) {
    Grid1D g = line_grid_step(boxes[b], spec.h);
    Hs[b] = build(g);
    require_hermitian(Hs[b]);
    if (spec.weight_kind == LapWeight::position) Ws[b] = build_weight(g, spec.s, Hs[b].components);
    else Ws[b] = build_weight(build_conjugate_A(g), spec.s);
  });

  LapScanResult res;
  // the smallest box has the coarsest spectrum, so its spacing sets the floor for all boxes
  res.level_spacing = mean_level_spacing(Hs[0], spec.a, spec.b);
  res.im_floor = spec.floor_factor * res.level_spacing;
  for (double eta : spec.im_ladder)
    if (eta >= res.im_floor) res.rungs_used.push_back(eta);
  if (res.rungs_used.size() < 2)
    throw ComputeError("im_ladder has fewer than two rungs above the level-spacing floor " +
                       std::to_string(res.im_floor));

  const std::size_t nr = static_cast<std::size_t>(spec.re_points), ni = res.rungs_used.size();
  std::vector<double> re(nr);
  for (std::size_t i = 0; i < nr; ++i) re[i] = spec.a + (spec.b - spec.a) * double(i) / double(nr - 1);

  std::vector<double> norms(nb * nr * ni);
  parallel_for(norms.size(), [&](std::size_t t) {
    std::size_t b = t / (nr * ni), r = (t / ni) % nr, i = t % ni;
    norms[t] = weighted_resolvent_norm(Hs[b], Ws[b], cd(re[r], res.rungs_used[i]));
  });

  std::vector<double> sup(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    double p = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < nr; ++r) {
      for (std::size_t i = 0; i < ni; ++i) {
        double v = norms[(b * nr + r) * ni + i];
        res.points.push_back({re[r], res.rungs_used[i], boxes[b], v});
        sup[b] = std::max(sup[b], v);
      }
      double n1 = norms[(b * nr + r) * ni + ni - 2], n2 = norms[(b * nr + r) * ni + ni - 1];
      p = std::max(p, std::log(n2 / n1) / std::log(res.rungs_used[ni - 2] / res.rungs_used[ni - 1]));
    }
    res.box_exponents.push_back(p);
    res.box_verdicts.push_back(verdict_from(p));
  }
  res.sup_norm = sup[nb - 1];
  res.divergence_exponent = res.box_exponents[nb - 1];
  res.box_stability = std::abs(sup[nb - 1] - sup[nb - 2]) / sup[nb - 1];

  const LapVerdict last = res.box_verdicts[nb - 1];
  const bool agree = res.box_verdicts[nb - 2] == last;
  if (!agree) res.verdict = LapVerdict::inconclusive;
  else if (last == LapVerdict::lap_holds) res.verdict = res.box_stability <= 0.2 ? last : LapVerdict::inconclusive;
  else res.verdict = last;
  return res;
}

LapScanResult lap_scan(const PotentialSpec& V, const LapScanSpec& spec) {
  validate(V);
  return lap_scan([&](const Grid1D& g) { return build_schrodinger(g, V, {}, spec.sampling); }, spec);
}

const char* mode_name(MourreMode m) {
  switch (m) {
    case MourreMode::plain: return "plain";
    case MourreMode::strict: return "strict";
    case MourreMode::weighted: return "weighted";
    case MourreMode::at_infinity: return "at_infinity";
  }
  return "?";
}

namespace {

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& M) {
  if (M.size() == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (M + M.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

SpectralDecomposition window_range(const OperatorMatrix& H, double lo, double hi) {
  return decompose_window(H, std::nextafter(lo, -std::numeric_limits<double>::infinity()), hi);
}

}  // namespace

MourreCheckResult mourre_check(const OperatorFactory& Hf, const OperatorFactory& Af, const Grid1D& g, double J_lo,
                               double J_hi, MourreMode mode, int remainder_rank_budget) {
  require(J_lo < J_hi, "window lo < hi");
  require(mode == MourreMode::plain || mode == MourreMode::strict, "mode in {plain, strict}");
  require(remainder_rank_budget >= 0, "remainder_rank >= 0");
  MourreCheckResult res;
  res.J_lo = J_lo;
  res.J_hi = J_hi;
  res.kind = mode;
  OperatorMatrix H = Hf(g);
  require_hermitian(H);
  SpectralDecomposition d = window_range(H, J_lo, J_hi);
  res.window_rank = static_cast<int>(d.values.size());
  if (res.window_rank == 0) {
    res.holds = true;
    return res;
  }
  OperatorMatrix C = lattice_commutator(Hf, Af, g);
  Eigen::MatrixXcd CV(C.dim(), d.vectors.cols());
  for (Eigen::Index j = 0; j < d.vectors.cols(); ++j) CV.col(j) = C.apply(d.vectors.col(j));
  Eigen::VectorXd ev = hermitian_eigenvalues(d.vectors.adjoint() * CV);
  res.commutator_form_min_eig = ev[0];
  res.commutator_form_max_eig = ev[ev.size() - 1];
  int drop = mode == MourreMode::strict ? 0 : std::min(remainder_rank_budget, res.window_rank);
  res.remainder_rank = drop;
  res.best_c = drop < ev.size() ? ev[drop] : std::numeric_limits<double>::infinity();
  res.holds = res.best_c > 0.0;
  return res;
}

MourreCheckResult weighted_mourre_check(const OperatorFactory& Hf, const OperatorFactory& Sf, const Grid1D& g,
                                        WeightFunctionSpec psi, double R, double J_lo, double J_hi, double s,
                                        bool include_weight, double tol) {
  require(J_lo < J_hi, "window lo < hi");
  require(psi.kind == WeightKind::psi, "phi is a psi weight");
  require(R >= 1.0, "R >= 1");
  require(s > 0.5, "s > 1/2");
  psi.s = s;
  psi.R = R;
  if (psi.c <= 0.0) {
    require(J_lo > 0.0, "inf J > 0 when c is derived from the window");
    psi.c = 1.0 / J_lo;
  }
  validate(psi);

  MourreCheckResult res;
  res.J_lo = J_lo;
  res.J_hi = J_hi;
  res.kind = MourreMode::weighted;
  res.psi_c = psi.c;
  res.R = R;
  OperatorMatrix H = Hf(g);
  require_hermitian(H);
  SpectralDecomposition d = window_range(H, J_lo, J_hi);
  res.window_rank = static_cast<int>(d.values.size());
  if (res.window_rank == 0) {
    res.holds = true;
    return res;
  }
  OperatorMatrix S = Sf(g);
  require_hermitian(S);
  SpectralDecomposition sd = decompose(S);
  const Eigen::VectorXd& a = sd.values;
  const Eigen::Index n = a.size();

  // [H, i phi(S)] in the eigenbasis of S is [H, iS] times the divided differences of phi
  Eigen::MatrixXcd Ct = sd.vectors.adjoint() * lattice_commutator(Hf, Sf, g).to_dense() * sd.vectors;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
  Eigen::VectorXd phi(n);
  for (Eigen::Index j = 0; j < n; ++j) phi[j] = eval_weight(psi, a[j] / R);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < n; ++j) {
      double diff = a[k] - a[j], dd;
      if (std::abs(diff) <= 1e-12 * scale) dd = psi_derivative(psi, 0.5 * (a[j] + a[k]) / R) / R;
      // close pairs lose digits in phi[k] - phi[j]; integrate the short interval directly
      else if (std::abs(diff) <= R) dd = psi_increment(psi, a[j] / R, a[k] / R) / diff;
      else dd = (phi[k] - phi[j]) / diff;
      Ct(j, k) *= dd;
    }
  if (include_weight)
    for (Eigen::Index j = 0; j < n; ++j) Ct(j, j) -= std::pow(1.0 + a[j] * a[j], -s);

  Eigen::MatrixXcd Y = sd.vectors.adjoint() * d.vectors;
  Eigen::VectorXd ev = hermitian_eigenvalues(Y.adjoint() * Ct * Y);
  res.commutator_form_min_eig = ev[0];
  res.commutator_form_max_eig = ev[ev.size() - 1];
  res.best_c = ev[0];
  res.holds = res.best_c >= -tol;
  return res;
}

MourreInfinityReport mourre_at_infinity_check(const OperatorFactory& Hf, const Grid1D& g,
                                              const std::vector<double>& radii, double delta, double s, double gamma,
                                              double J_lo, double J_hi, int trials, unsigned seed) {
  require(gamma > 0.5, "gamma = beta - delta > 1/2");
  require(delta >= 0.0 && delta < 1.0, "delta in [0, 1)");
  require(s >= 0.0, "s >= 0");
  require(trials >= 1, "trials >= 1");
  require(!radii.empty(), "radius list is nonempty");
  require(J_lo < J_hi, "window lo < hi");

  OperatorMatrix H = Hf(g);
  require_hermitian(H);
  SpectralDecomposition d = window_range(H, J_lo, J_hi);
  require(d.values.size() > 0, "window contains spectrum");

  // trial states: Gaussian coefficients in the window eigenbasis
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Eigen::VectorXcd> fs;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXcd c(d.values.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = cd(nd(rng), nd(rng));
    Eigen::VectorXcd f = d.vectors * c;
    fs.push_back(f / f.norm());
  }

  MourreInfinityReport rep;
  rep.radii = radii;
  rep.trials = trials;
  const std::size_t nR = radii.size();
  std::vector<std::vector<double>> lhs(nR), X(nR);
  for (std::size_t r = 0; r < nR; ++r) {
    const double R = radii[r];
    OperatorMatrix C = lattice_commutator(Hf, [R, delta](const Grid1D& gg) { return build_B_R(gg, R, delta); }, g);
    Eigen::VectorXd weight(g.n * H.components);
    for (int c = 0; c < H.components; ++c)
      for (int i = 0; i < g.n; ++i)
        weight[c * g.n + i] = chi_R_profile(std::abs(g.x(i)) / R) * std::pow(bracket(g.x(i)), -s);
    for (const auto& f : fs) {
      lhs[r].push_back(f.dot(C.apply(f)).real());
      X[r].push_back((weight.asDiagonal() * f).norm());
    }
  }

  auto ratios = [&](std::size_t r) {
    std::vector<double> q;
    for (std::size_t i = 0; i < fs.size(); ++i)
      if (X[r][i] > 1e-12) q.push_back(lhs[r][i] / (X[r][i] * X[r][i]));
    return q;
  };
  double c1_zero_error = std::numeric_limits<double>::infinity(), c1_half_median = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < nR; ++r) {
    auto q = ratios(r);
    if (q.empty()) {
      rep.min_ratio.push_back(std::numeric_limits<double>::quiet_NaN());
      rep.median_ratio.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    std::sort(q.begin(), q.end());
    rep.min_ratio.push_back(q.front());
    rep.median_ratio.push_back(q[q.size() / 2]);
    c1_zero_error = std::min(c1_zero_error, q.front());
    c1_half_median = std::min(c1_half_median, 0.5 * q[q.size() / 2]);
  }
  if (!std::isfinite(c1_zero_error)) {
    // every trial state is invisible to chi_R: both sides vanish
    rep.c1 = 0.0;
    rep.error_term.assign(nR, 0.0);
    rep.max_rhs_norm.assign(nR, 0.0);
    rep.holds = true;
    rep.error_decays = true;
    return rep;
  }
  rep.c1 = c1_zero_error > 0.0 ? c1_zero_error : c1_half_median;
  for (std::size_t r = 0; r < nR; ++r) {
    double err = 0.0, xmax = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      xmax = std::max(xmax, X[r][i]);
      if (X[r][i] > 1e-12) err = std::max(err, (rep.c1 * X[r][i] * X[r][i] - lhs[r][i]) / X[r][i]);
    }
    rep.error_term.push_back(std::max(err, 0.0));
    rep.max_rhs_norm.push_back(xmax);
  }
  rep.error_decays = true;
  for (std::size_t r = 1; r < nR; ++r)
    if (rep.error_term[r] > rep.error_term[r - 1]) rep.error_decays = false;
  rep.holds = rep.c1 > 0.0 && (c1_zero_error > 0.0 || rep.error_decays);
  return rep;
}

const char* region_name(PhaseRegion r) {
  switch (r) {
    case PhaseRegion::blue: return "blue";
    case PhaseRegion::green: return "green";
    case PhaseRegion::outside: return "outside";
  }
  return "?";
}

PhaseRegion phase_region(double alpha, double beta) {
  if (beta > alpha || alpha + beta > 2.0) return PhaseRegion::blue;
  if (alpha >= 1.0 && beta > 0.5 && alpha + beta <= 2.0) return PhaseRegion::green;
  return PhaseRegion::outside;
}

void validate(const PhaseSweepSpec& spec) {
  require(!spec.alphas.empty() && !spec.betas.empty(), "alpha and beta lists are nonempty");
  for (double a : spec.alphas) require(std::isfinite(a) && a > 0.0, "alpha > 0");
  for (double b : spec.betas) require(std::isfinite(b) && b > 0.0, "beta > 0");
  require(spec.k != 0.0 && std::isfinite(spec.k), "k != 0");
  require(spec.w != 0.0 && std::isfinite(spec.w), "w != 0");
  const double thr = spec.k * spec.k / 4.0;
  require(spec.below_lo > 0.0 && spec.below_lo < spec.below_hi && spec.below_hi < thr, "below window inside (0, k^2/4)");
  require(spec.above_lo > thr && spec.above_lo < spec.above_hi, "above window inside (k^2/4, inf)");
  require(spec.budget >= 0, "budget >= 0");
  require(spec.screen_boxes.size() >= 2, "screen_boxes has >= 2 entries");
  LapScanSpec probe = spec.scan;
  probe.a = spec.below_lo;
  probe.b = spec.below_hi;
  validate(probe);
}

PotentialSpec phase_potential(const PhaseSweepSpec& spec, double alpha, double beta) {
  OscillatingSpec o;
  o.w = spec.w;
  o.k = spec.k;
  o.alpha = alpha;
  o.beta = beta;
  PotentialSpec osc{o};
  if (!spec.include_short_range) return osc;
  return make_sum({osc, PotentialSpec{gaussian_short_range(1.0, 1.0, 8.0, 321)}});
}

std::vector<PhaseCell> phase_sweep(const PhaseSweepSpec& spec) {
  validate(spec);
  std::vector<PhaseCell> cells;
  int used = 0;
  for (double alpha : spec.alphas)
    for (double beta : spec.betas) {
      PhaseCell cell;
      cell.alpha = alpha;
      cell.beta = beta;
      cell.region = phase_region(alpha, beta);
      if (used >= spec.budget) {
        cells.push_back(cell);
        continue;
      }
      ++used;
      PotentialSpec V = phase_potential(spec, alpha, beta);
      LapScanSpec scan = spec.scan;
      if (alpha > 1.0) scan.sampling = Sampling::cell_average;
      auto build = [&](const Grid1D& g) { return build_schrodinger(g, V, {}, scan.sampling); };
      auto grid_for = [&](double L) { return line_grid_step(L, scan.h); };
      auto run = [&](double lo, double hi, int& genuine, LapScanResult& out) {
        auto cands = find_embedded(build, grid_for, lo, hi, spec.screen_boxes);
        genuine = static_cast<int>(std::count_if(cands.begin(), cands.end(), [](const EmbeddedCandidate& c) {
          return c.verdict == EmbeddedVerdict::genuine;
        }));
        LapScanSpec s = scan;
        s.a = lo;
        s.b = hi;
        out = lap_scan(build, s);
        return std::string(verdict_name(out.verdict));
      };
      cell.below = run(spec.below_lo, spec.below_hi, cell.genuine_below, cell.below_scan);
      cell.above = run(spec.above_lo, spec.above_hi, cell.genuine_above, cell.above_scan);
      cells.push_back(std::move(cell));
    }
  return cells;
}

void write_scan_csv(std::ostream& os, const LapScanResult& r) {
  os << "re_z,im_z,box_L,norm\n" << std::setprecision(12);
  for (const auto& p : r.points) os << p.re_z << ',' << p.im_z << ',' << p.box_L << ',' << p.norm << '\n';
}

nlohmann::json summary_json(const LapScanResult& r) {
  std::vector<std::string> bv;
  for (auto v : r.box_verdicts) bv.emplace_back(verdict_name(v));
  return {{"sup_norm", r.sup_norm},
          {"p", r.divergence_exponent},
          {"box_exponents", r.box_exponents},
          {"box_verdicts", bv},
          {"box_stability", r.box_stability},
          {"verdict", verdict_name(r.verdict)},
          {"im_floor", r.im_floor},
          {"level_spacing", r.level_spacing},
          {"rungs_used", r.rungs_used}};
}

namespace {
nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace

nlohmann::json to_json_value(const MourreCheckResult& r) {
  nlohmann::json j{{"J", {r.J_lo, r.J_hi}},
                   {"kind", mode_name(r.kind)},
                   {"commutator_form_min_eig", finite_or_null(r.commutator_form_min_eig)},
                   {"commutator_form_max_eig", finite_or_null(r.commutator_form_max_eig)},
                   {"best_c", finite_or_null(r.best_c)},
                   {"remainder_rank", r.remainder_rank},
                   {"window_rank", r.window_rank},
                   {"holds", r.holds}};
  if (r.kind == MourreMode::weighted) {
    j["psi_c"] = r.psi_c;
    j["R"] = r.R;
  }
  return j;
}

nlohmann::json to_json_value(const MourreInfinityReport& r) {
  nlohmann::json minr = nlohmann::json::array(), medr = nlohmann::json::array();
  for (double v : r.min_ratio) minr.push_back(finite_or_null(v));
  for (double v : r.median_ratio) medr.push_back(finite_or_null(v));
  return {{"radii", r.radii},     {"min_ratio", minr},         {"median_ratio", medr},
          {"error_term", r.error_term}, {"max_rhs_norm", r.max_rhs_norm}, {"c1", r.c1},
          {"error_decays", r.error_decays}, {"holds", r.holds},   {"trials", r.trials}};
}

void write_phase_csv(std::ostream& os, const std::vector<PhaseCell>& cells) {
  os << "alpha,beta,window,verdict\n";
  for (const auto& c : cells) {
    os << c.alpha << ',' << c.beta << ",below," << c.below << '\n';
    os << c.alpha << ',' << c.beta << ",above," << c.above << '\n';
  }
}

namespace {

const char* verdict_colour(const std::string& v) {
  if (v == "lap_holds") return "#2f9e44";
  if (v == "lap_fails") return "#e03131";
  if (v == "inconclusive") return "#f08c00";
  return "#adb5bd";
}

}  // namespace

void write_phase_svg(std::ostream& os, const std::vector<PhaseCell>& cells, const PhaseSweepSpec& spec) {
  // alpha on the horizontal axis over [0, 3], beta vertical over [0, 2]
  const double W = 480, Hh = 360, x0 = 50, y0 = 310, sx = 130, sy = 140;
  auto X = [&](double a) { return x0 + sx * a; };
  auto Y = [&](double b) { return y0 - sy * b; };
  std::ostringstream o;
  o << std::fixed << std::setprecision(1);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh << "\" viewBox=\"0 0 " << W
    << ' ' << Hh << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // blue: beta > alpha, plus alpha + beta > 2
  o << "<polygon fill=\"#a5d8ff\" fill-opacity=\"0.6\" points=\"" << X(0) << ',' << Y(0) << ' ' << X(2) << ','
    << Y(2) << ' ' << X(0) << ',' << Y(2) << "\"/>\n";
  o << "<polygon fill=\"#a5d8ff\" fill-opacity=\"0.6\" points=\"" << X(2) << ',' << Y(0) << ' ' << X(3) << ','
    << Y(0) << ' ' << X(3) << ',' << Y(2) << ' ' << X(0) << ',' << Y(2) << "\"/>\n";
  // green: alpha >= 1, 1/2 < beta, alpha + beta <= 2
  o << "<polygon fill=\"#b2f2bb\" fill-opacity=\"0.8\" points=\"" << X(1) << ',' << Y(0.5) << ' ' << X(1.5) << ','
    << Y(0.5) << ' ' << X(1) << ',' << Y(1) << "\"/>\n";
  o << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(3) << "\" y2=\"" << Y(0)
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(0) << "\" y2=\"" << Y(2)
    << "\" stroke=\"black\"/>\n";
  for (int t = 1; t <= 3; ++t)
    o << "<text x=\"" << X(t) << "\" y=\"" << Y(0) + 16 << "\" font-size=\"11\" text-anchor=\"middle\">" << t
      << "</text>\n";
  for (int t = 1; t <= 2; ++t)
    o << "<text x=\"" << X(0) - 8 << "\" y=\"" << Y(t) + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << t
      << "</text>\n";
  o << "<text x=\"" << X(3) - 4 << "\" y=\"" << Y(0) - 6 << "\" font-size=\"13\" text-anchor=\"end\">alpha</text>\n";
  o << "<text x=\"" << X(0) + 6 << "\" y=\"" << Y(2) + 12 << "\" font-size=\"13\">beta</text>\n";
  for (const auto& c : cells)
    o << "<circle cx=\"" << X(c.alpha) << "\" cy=\"" << Y(c.beta) << "\" r=\"7\" fill=\"" << verdict_colour(c.below)
      << "\" stroke=\"" << verdict_colour(c.above) << "\" stroke-width=\"3\"><title>"
      << std::defaultfloat << std::setprecision(6) << "alpha=" << c.alpha << " beta=" << c.beta
      << " below=" << c.below << " above=" << c.above << std::fixed << std::setprecision(1) << "</title></circle>\n";
  o << "<text x=\"" << W - 10 << "\" y=\"20\" font-size=\"11\" text-anchor=\"end\">fill: below k^2/4 = "
    << spec.k * spec.k / 4.0 << ", outline: above</text>\n";
  const char* names[] = {"lap_holds", "lap_fails", "inconclusive", "skipped"};
  for (int i = 0; i < 4; ++i)
    o << "<circle cx=\"" << W - 110 << "\" cy=\"" << 38 + 16 * i << "\" r=\"5\" fill=\"" << verdict_colour(names[i])
      << "\"/><text x=\"" << W - 100 << "\" y=\"" << 42 + 16 * i << "\" font-size=\"11\">" << names[i]
      << "</text>\n";
  o << "</svg>\n";
  os << o.str();
}

namespace {

const char* sampling_name(Sampling s) { return s == Sampling::point ? "point" : "cell_average"; }

Sampling sampling_from(const std::string& s) {
  if (s == "point") return Sampling::point;
  if (s == "cell_average") return Sampling::cell_average;
  throw ValidationError("sampling in {point, cell_average} (got '" + s + "')");
}

}  // namespace

void to_json(nlohmann::json& j, const LapScanSpec& s) {
  j = {{"interval", {s.a, s.b}},
       {"s", s.s},
       {"weight_kind", s.weight_kind == LapWeight::position ? "position" : "conjugate_A"},
       {"re_points", s.re_points},
       {"im_ladder", s.im_ladder},
       {"box_list", s.box_list},
       {"h", s.h},
       {"sampling", sampling_name(s.sampling)},
       {"floor_factor", s.floor_factor}};
}

void from_json(const nlohmann::json& j, LapScanSpec& s) {
  LapScanSpec d;
  if (j.contains("interval")) {
    auto I = j.at("interval").get<std::vector<double>>();
    require(I.size() == 2, "interval has two endpoints");
    d.a = I[0];
    d.b = I[1];
  }
  d.s = j.value("s", d.s);
  std::string wk = j.value("weight_kind", std::string("position"));
  if (wk == "position") d.weight_kind = LapWeight::position;
  else if (wk == "conjugate_A") d.weight_kind = LapWeight::conjugate_A;
  else throw ValidationError("weight_kind in {position, conjugate_A} (got '" + wk + "')");
  d.re_points = j.value("re_points", d.re_points);
  d.im_ladder = j.value("im_ladder", d.im_ladder);
  d.box_list = j.value("box_list", d.box_list);
  d.h = j.value("h", d.h);
  d.sampling = sampling_from(j.value("sampling", std::string("point")));
  d.floor_factor = j.value("floor_factor", d.floor_factor);
  s = d;
}

void to_json(nlohmann::json& j, const PhaseSweepSpec& s) {
  j = {{"alphas", s.alphas},
       {"betas", s.betas},
       {"k", s.k},
       {"w", s.w},
       {"below", {s.below_lo, s.below_hi}},
       {"above", {s.above_lo, s.above_hi}},
       {"include_short_range", s.include_short_range},
       {"scan", s.scan},
       {"screen_boxes", s.screen_boxes},
       {"budget", s.budget}};
}

void from_json(const nlohmann::json& j, PhaseSweepSpec& s) {
  PhaseSweepSpec d;
  d.alphas = j.value("alphas", d.alphas);
  d.betas = j.value("betas", d.betas);
  d.k = j.value("k", d.k);
  d.w = j.value("w", d.w);
  if (j.contains("below")) {
    auto I = j.at("below").get<std::vector<double>>();
    require(I.size() == 2, "below window has two endpoints");
    d.below_lo = I[0];
    d.below_hi = I[1];
  }
  if (j.contains("above")) {
    auto I = j.at("above").get<std::vector<double>>();
    require(I.size() == 2, "above window has two endpoints");
    d.above_lo = I[0];
    d.above_hi = I[1];
  }
  d.include_short_range = j.value("include_short_range", d.include_short_range);
  if (j.contains("scan")) d.scan = j.at("scan").get<LapScanSpec>();
  d.screen_boxes = j.value("screen_boxes", d.screen_boxes);
  d.budget = j.value("budget", d.budget);
  s = d;
}

}  // namespace oscilab
