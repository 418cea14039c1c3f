#include "oscilab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>

namespace oscilab {

double norm_bound(const OperatorMatrix& T) {
  if (T.is_dense) return T.dense.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(T.dim());
  for (int k = 0; k < T.sparse.outerSize(); ++k)
    for (SparseC::InnerIterator it(T.sparse, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

namespace {

EigenResult checked(const OperatorMatrix& T, SpectralDecomposition d) {
  EigenResult r;
  r.eigenvalues = std::move(d.values);
  r.eigenvectors = std::move(d.vectors);
  r.residual_norms.resize(r.eigenvalues.size());
  const double scale = std::max(norm_bound(T), 1.0);
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
    Eigen::VectorXcd v = r.eigenvectors.col(i);
    r.residual_norms[i] = (T.apply(v) - r.eigenvalues[i] * v).norm();
    if (r.residual_norms[i] > 1e-8 * scale)
      throw ComputeError("eigenpair residual " + std::to_string(r.residual_norms[i]) + " exceeds 1e-8 ||T||");
  }
  return r;
}

// L^2 mass of v on |x| < L/2 (x < L/2 on a halfline)
double inner_mass(const Grid1D& g, int components, const Eigen::VectorXcd& v) {
  double in = 0.0, total = v.squaredNorm();
  for (int c = 0; c < components; ++c)
    for (int i = 0; i < g.n; ++i)
      if (std::abs(g.x(i)) < 0.5 * g.L) in += std::norm(v[static_cast<Eigen::Index>(c) * g.n + i]);
  return total > 0.0 ? in / total : 0.0;
}

std::vector<Eigen::Index> tail_indices(const Grid1D& g, int components, double R, double outer) {
  std::vector<Eigen::Index> idx;
  for (int c = 0; c < components; ++c)
    for (int i = 0; i < g.n; ++i) {
      double ax = std::abs(g.x(i));
      if (ax >= R && ax <= outer) idx.push_back(static_cast<Eigen::Index>(c) * g.n + i);
    }
  return idx;
}

double hermitian_norm(const Eigen::MatrixXcd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ||P V G V^* P|| for P a coordinate projection: equals ||W^{1/2} G W^{1/2}||, W = (PV)^*(PV).
double projected_norm(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& G, const std::vector<Eigen::Index>& idx) {
  if (idx.empty() || G.size() == 0) return 0.0;
  Eigen::MatrixXcd X(idx.size(), V.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) X.row(r) = V.row(idx[r]);
  Eigen::MatrixXcd W = X.adjoint() * X;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(W);
  Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXcd root = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
  Eigen::MatrixXcd K = root * G * root;
  return hermitian_norm(0.5 * (K + K.adjoint()));
}

}  // namespace

EigenResult eig(const OperatorMatrix& T) {
  require_hermitian(T);
  return checked(T, decompose(T));
}

EigenResult eig_window(const OperatorMatrix& T, double lo, double hi) {
  require_hermitian(T);
  return checked(T, decompose_window(T, lo, hi));
}

const char* verdict_name(EmbeddedVerdict v) {
  switch (v) {
    case EmbeddedVerdict::genuine: return "genuine";
    case EmbeddedVerdict::box_artifact: return "box_artifact";
    case EmbeddedVerdict::unresolved: return "unresolved";
  }
  return "?";
}

const char* verdict_name(TailVerdict v) {
  switch (v) {
    case TailVerdict::decays_to_zero: return "decays_to_zero";
    case TailVerdict::plateaus: return "plateaus";
    case TailVerdict::grows: return "grows";
  }
  return "?";
}

std::vector<EmbeddedCandidate> find_embedded(const OperatorFactory& build, const GridForBox& grid_for, double lo,
                                             double hi, const std::vector<double>& box_list,
                                             const EmbeddedOptions& opt) {
  require(lo < hi, "window lo < hi");
  require(box_list.size() >= 2, "box_list has >= 2 boxes");
  require(opt.drift_tol > 0.0, "drift_tol > 0");
  for (double L : box_list) require(std::isfinite(L) && L > 0.0, "box L > 0");

  struct Box {
    Grid1D grid;
    int components = 1;
    SpectralDecomposition d;
    std::vector<double> loc;
  };
  std::vector<Box> boxes(box_list.size());
  // later boxes may see a candidate drifted past the window edge
  const double pad = 10.0 * opt.drift_tol;
  parallel_for(box_list.size(), [&](std::size_t b) {
    Box& box = boxes[b];
    box.grid = grid_for(box_list[b]);
    OperatorMatrix H = build(box.grid);
    require_hermitian(H);
    box.components = H.components;
    box.d = b == 0 ? decompose_window(H, lo, hi) : decompose_window(H, lo - pad, hi + pad);
    for (Eigen::Index i = 0; i < box.d.values.size(); ++i)
      box.loc.push_back(inner_mass(box.grid, box.components, box.d.vectors.col(i)));
  });

  std::optional<OperatorMatrix> C;
  if (opt.conjugate) C = lattice_commutator(build, opt.conjugate, boxes[0].grid);

  std::vector<EmbeddedCandidate> out;
  const Box& first = boxes[0];
  for (Eigen::Index i = 0; i < first.d.values.size(); ++i) {
    EmbeddedCandidate c;
    c.energy = first.d.values[i];
    c.localization = first.loc[i];
    c.box_L = box_list[0];
    c.box_drift = boxes.size() > 1 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t b = 1; b < boxes.size(); ++b) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < boxes[b].d.values.size(); ++j)
        if (boxes[b].loc[j] >= opt.artifact_localization)
          best = std::min(best, std::abs(boxes[b].d.values[j] - c.energy));
      c.box_drift = std::max(c.box_drift, best);
    }
    if (c.localization >= opt.localization_min && c.box_drift <= opt.drift_tol)
      c.verdict = EmbeddedVerdict::genuine;
    else if (c.localization < opt.artifact_localization || c.box_drift > 10.0 * opt.drift_tol)
      c.verdict = EmbeddedVerdict::box_artifact;
    else
      c.verdict = EmbeddedVerdict::unresolved;
    if (C) c.virial = virial_check(*C, first.d.vectors.col(i));
    out.push_back(c);
  }
  return out;
}

double virial_check(const OperatorMatrix& C, const Eigen::VectorXcd& f) {
  require(C.dim() == f.size(), "vector matches the operator dimension");
  double n2 = f.squaredNorm();
  if (n2 == 0.0) return 0.0;
  return std::abs(f.dot(C.apply(f))) / n2;
}

double virial_check(const OperatorFactory& H, const OperatorFactory& A, const Grid1D& g, const Eigen::VectorXcd& f) {
  return virial_check(lattice_commutator(H, A, g), f);
}

TailDecayReport classify_tail(std::vector<double> radii, std::vector<double> norms) {
  require(!radii.empty() && radii.size() == norms.size(), "one tail norm per radius");
  TailDecayReport r;
  r.radii = std::move(radii);
  r.tail_norms = std::move(norms);
  std::vector<double> last(r.tail_norms.end() - std::min<std::size_t>(3, r.tail_norms.size()), r.tail_norms.end());
  std::sort(last.begin(), last.end());
  r.plateau_estimate = last[last.size() / 2];
  double first = r.tail_norms.front(), end = r.tail_norms.back();
  if (end <= 0.1 * first) r.verdict = TailVerdict::decays_to_zero;
  else if (end > 2.0 * first) r.verdict = TailVerdict::grows;
  else r.verdict = TailVerdict::plateaus;
  return r;
}

TailDecayReport tail_decay(const OperatorMatrix& T, const std::vector<double>& radii, double outer) {
  require_hermitian(T, 1e-10);
  for (double R : radii) require(std::isfinite(R) && R >= 0.0, "radius >= 0");
  std::vector<double> norms(radii.size());
  Eigen::MatrixXcd M = T.to_dense();
  parallel_for(radii.size(), [&](std::size_t k) {
    auto idx = tail_indices(T.grid, T.components, radii[k], outer);
    Eigen::MatrixXcd B(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c) B(r, c) = M(idx[r], idx[c]);
    norms[k] = hermitian_norm(0.5 * (B + B.adjoint()));
  });
  TailDecayReport r = classify_tail(radii, norms);
  r.operator_norm = hermitian_norm(M);
  return r;
}

double interference_symbol_check(const WindowSpec& theta, double k, int dim) {
  validate(theta);
  require(std::isfinite(k) && k > 0.0, "k > 0");
  require(dim >= 1, "dim >= 1");
  double top = theta.b + (theta.kind == WindowKind::sharp_projector ? 0.0 : theta.effective_margin());
  if (top <= 0.0) return 0.0;
  const double X = std::sqrt(top);
  auto th = [&](double p) { return eval_window(theta, p * p); };
  double best = 0.0;
  if (dim == 1) {
    const int N = 200000;
    for (int i = 0; i <= N; ++i) {
      double xi = -X + (2.0 * X + k) * i / N;
      best = std::max(best, th(xi) * th(xi - k));
    }
    return best;
  }
  const int N = 2000;
  std::vector<double> a(N + 1), ta(N + 1);
  for (int i = 0; i <= N; ++i) {
    a[i] = X * i / N;
    ta[i] = th(a[i]);
  }
  for (int i = 0; i <= N; ++i) {
    if (ta[i] == 0.0) continue;
    for (int j = 0; j <= N; ++j)
      if (ta[j] > 0.0 && std::abs(a[i] - a[j]) <= k && k <= a[i] + a[j]) best = std::max(best, ta[i] * ta[j]);
  }
  return best;
}

TailDecayReport interference_probe(const Grid1D& g, const WindowSpec& theta, double k,
                                   const std::vector<double>& radii, const InterferenceOptions& opt) {
  validate(g);
  validate(theta);
  require(std::isfinite(k), "k finite");
  require(opt.dim == 1 || opt.dim == 3, "dim in {1, 3}");
  require(opt.dim != 1 || g.kind == GridKind::line, "dim 1 uses a line grid");
  require(opt.dim != 3 || g.kind == GridKind::halfline, "dim 3 uses a halfline grid");
  require(opt.tail_outer_fraction > 0.0 && opt.tail_outer_fraction <= 1.0, "tail_outer_fraction in (0, 1]");
  for (double R : radii) require(std::isfinite(R) && R >= 0.0, "radius >= 0");

  const double margin = theta.kind == WindowKind::sharp_projector ? 0.0 : theta.effective_margin();
  const double lo = std::nextafter(theta.a - margin, -std::numeric_limits<double>::infinity());
  const double hi = theta.b + margin;
  const double outer = opt.tail_outer_fraction * g.L;
  int channels = 1;
  if (opt.dim == 3)
    channels = opt.max_channel >= 0 ? opt.max_channel + 1
                                    : static_cast<int>(std::ceil(std::sqrt(std::max(hi, 0.0)) * outer)) + 11;

  Eigen::VectorXd S(g.n);
  for (int i = 0; i < g.n; ++i) S[i] = opt.amplitude * std::sin(k * std::abs(g.x(i)));
  std::vector<std::vector<Eigen::Index>> tails;
  for (double R : radii) tails.push_back(tail_indices(g, 1, R, outer));

  // per channel: M_l = V Theta V^* S V Theta V^*, with V the window eigenvectors of h_l
  std::vector<std::vector<double>> per(channels, std::vector<double>(radii.size(), 0.0));
  std::vector<double> full(channels, 0.0);
  parallel_for(static_cast<std::size_t>(channels), [&](std::size_t l) {
    OperatorMatrix H = opt.dim == 1 ? build_h0(g) : build_radial_channel(g, double(l) * double(l + 1));
    SpectralDecomposition d = decompose_window(H, lo, hi);
    if (d.values.size() == 0) return;
    Eigen::VectorXd th = d.values.unaryExpr([&](double t) { return eval_window(theta, t); });
    Eigen::MatrixXcd G = th.asDiagonal() * (d.vectors.adjoint() * S.asDiagonal() * d.vectors) * th.asDiagonal();
    G = 0.5 * (G + G.adjoint()).eval();
    full[l] = hermitian_norm(G);
    for (std::size_t r = 0; r < radii.size(); ++r) per[l][r] = projected_norm(d.vectors, G, tails[r]);
  });

  std::vector<double> norms(radii.size(), 0.0);
  double opnorm = 0.0;
  for (int l = 0; l < channels; ++l) {
    opnorm = std::max(opnorm, full[l]);
    for (std::size_t r = 0; r < radii.size(); ++r) norms[r] = std::max(norms[r], per[l][r]);
  }
  TailDecayReport rep = classify_tail(radii, norms);
  rep.operator_norm = opnorm;
  return rep;
}

SmallPlusDecayReport small_plus_decay_probe(const Grid1D& g, const WindowSpec& theta, double k,
                                            const std::vector<double>& radii, double narrow_fraction,
                                            const InterferenceOptions& opt) {
  validate(theta);
  require(narrow_fraction > 0.0 && narrow_fraction < 1.0, "narrow_fraction in (0, 1)");
  SmallPlusDecayReport out;
  out.narrow_window = theta;
  double c = 0.5 * (theta.a + theta.b), w = 0.5 * (theta.b - theta.a) * narrow_fraction;
  out.narrow_window.a = c - w;
  out.narrow_window.b = c + w;
  out.narrow_window.margin = theta.effective_margin() * narrow_fraction;
  out.wide = interference_probe(g, theta, k, radii, opt);
  out.narrow = interference_probe(g, out.narrow_window, k, radii, opt);
  out.narrowing_lowers = out.narrow.plateau_estimate < out.wide.plateau_estimate;
  return out;
}

double largest_singular_value(const MatVec& A, const MatVec& A_adj, Eigen::Index n, int max_iter, double tol,
                              unsigned seed) {
  require(n > 0, "dimension > 0");
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cd(nd(rng), nd(rng));
  v.normalize();

  std::vector<Eigen::VectorXcd> U, V{v};
  std::vector<double> alpha, beta;
  double prev = -1.0, sigma = 0.0;
  const double tiny = 1e-14;
  auto reorth = [](Eigen::VectorXcd& w, const std::vector<Eigen::VectorXcd>& basis) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) w -= q.dot(w) * q;
  };
  for (int j = 0; j < max_iter && j < n; ++j) {
    Eigen::VectorXcd u = A(V[j]);
    if (j > 0) u -= beta[j - 1] * U[j - 1];
    reorth(u, U);
    double a = u.norm();
    if (a <= tiny * std::max(sigma, 1.0)) break;
    u /= a;
    U.push_back(u);
    alpha.push_back(a);

    // sigma_max(B)^2 = lambda_max(B^T B), B upper bidiagonal (alpha; beta)
    const int m = static_cast<int>(alpha.size());
    Eigen::VectorXd diag(m), off(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) diag[i] = alpha[i] * alpha[i] + (i > 0 ? beta[i - 1] * beta[i - 1] : 0.0);
    for (int i = 0; i + 1 < m; ++i) off[i] = alpha[i] * beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    sigma = std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
    if (j >= 2 && std::abs(sigma - prev) <= tol * sigma) return sigma;
    prev = sigma;

    Eigen::VectorXcd w = A_adj(u) - a * V[j];
    reorth(w, V);
    double b = w.norm();
    if (b <= tiny * std::max(sigma, 1.0)) return sigma;
    V.push_back(w / b);
    beta.push_back(b);
  }
  return sigma;
}

TailDecayReport oscillation_compactness_probe(const Grid1D& g, const CompactnessSpec& spec,
                                              const std::vector<double>& radii, double outer) {
  validate(g);
  require(g.kind == GridKind::periodic, "compactness probe uses a periodic grid");
  require(std::isfinite(spec.p) && spec.alpha > 0.0 && std::isfinite(spec.k), "alpha > 0");
  require(spec.l1 >= 0.0 && spec.l2 >= 0.0, "l1, l2 >= 0");
  require(outer > 0.0 && outer <= g.L, "0 < outer <= L");
  for (double R : radii) require(std::isfinite(R) && R >= 0.0 && R < outer, "0 <= radius < outer");

  Eigen::VectorXd mult(g.n);
  for (int i = 0; i < g.n; ++i) {
    double r = std::abs(g.x(i));
    mult[i] = std::pow(bracket(r), spec.p) * (1.0 - eval_cutoff(spec.cutoff, r)) * std::sin(spec.k * std::pow(r, spec.alpha));
  }
  auto m1 = [&](double xi) { return std::pow(bracket(xi), -spec.l1); };
  auto m2 = [&](double xi) { return std::pow(bracket(xi), -spec.l2); };

  std::vector<double> norms(radii.size());
  // the FFT plans are not shared across threads
  for (std::size_t r = 0; r < radii.size(); ++r) {
    Eigen::VectorXd chi(g.n);
    for (int i = 0; i < g.n; ++i) {
      double ax = std::abs(g.x(i));
      chi[i] = (ax >= radii[r] && ax <= outer) ? 1.0 : 0.0;
    }
    MatVec T = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
      Eigen::VectorXcd w = apply_multiplier(g, Eigen::VectorXcd(chi.asDiagonal() * v), m2);
      w = mult.asDiagonal() * w;
      return chi.asDiagonal() * apply_multiplier(g, w, m1);
    };
    MatVec Tadj = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
      Eigen::VectorXcd w = apply_multiplier(g, Eigen::VectorXcd(chi.asDiagonal() * v), m1);
      w = mult.asDiagonal() * w;
      return chi.asDiagonal() * apply_multiplier(g, w, m2);
    };
    norms[r] = largest_singular_value(T, Tadj, g.n, 300, 1e-7);
  }
  return classify_tail(radii, norms);
}

nlohmann::json to_json_value(const EmbeddedCandidate& c) {
  nlohmann::json j{{"energy", c.energy},
                   {"localization", c.localization},
                   {"box_drift", std::isfinite(c.box_drift) ? nlohmann::json(c.box_drift) : nlohmann::json(nullptr)},
                   {"verdict", verdict_name(c.verdict)},
                   {"box_L", c.box_L}};
  if (std::isfinite(c.virial)) j["virial"] = c.virial;
  return j;
}

nlohmann::json to_json_value(const TailDecayReport& r) {
  return {{"radii", r.radii},
          {"tail_norms", r.tail_norms},
          {"plateau_estimate", r.plateau_estimate},
          {"verdict", verdict_name(r.verdict)},
          {"operator_norm", r.operator_norm}};
}

void append_sweep_csv(std::ostream& os, const WindowSpec& w, double k, const TailDecayReport& r, bool header) {
  if (header) os << "window_lo,window_hi,k,verdict,plateau\n";
  os << w.a << ',' << w.b << ',' << k << ',' << verdict_name(r.verdict) << ',' << r.plateau_estimate << '\n';
}

}  // namespace oscilab
