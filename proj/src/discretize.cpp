#include "oscilab/discretize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <unsupported/Eigen/FFT>

#include "lapack.hpp"

namespace oscilab {

const char* kind_label(OperatorKind k) {
  switch (k) {
    case OperatorKind::hamiltonian:
      return "hamiltonian";
    case OperatorKind::free:
      return "free";
    case OperatorKind::conjugate_A:
      return "conjugate_A";
    case OperatorKind::conjugate_BR:
      return "conjugate_BR";
    case OperatorKind::weight:
      return "weight";
    case OperatorKind::window:
      return "window";
    case OperatorKind::dirac:
      return "dirac";
    case OperatorKind::commutator:
      return "commutator";
  }
  return "hamiltonian";
}

Eigen::MatrixXcd OperatorMatrix::to_dense() const {
  if (is_dense) return dense;
  return Eigen::MatrixXcd(sparse);
}

SparseC OperatorMatrix::to_sparse() const {
  if (!is_dense) return sparse;
  return dense.sparseView();
}

Eigen::VectorXcd OperatorMatrix::apply(const Eigen::VectorXcd& v) const {
  if (is_dense) return dense * v;
  return sparse * v;
}

int OperatorMatrix::bandwidth() const {
  if (is_dense) return -1;
  int bw = 0;
  for (int k = 0; k < sparse.outerSize(); ++k)
    for (SparseC::InnerIterator it(sparse, k); it; ++it)
      if (it.value() != cd(0.0)) bw = std::max(bw, static_cast<int>(std::abs(it.row() - it.col())));
  return bw;
}

bool OperatorMatrix::is_real() const {
  if (is_dense) return dense.imag().cwiseAbs().maxCoeff() == 0.0;
  for (int k = 0; k < sparse.outerSize(); ++k)
    for (SparseC::InnerIterator it(sparse, k); it; ++it)
      if (it.value().imag() != 0.0) return false;
  return true;
}

OperatorMatrix make_dense(const Grid1D& g, OperatorKind kind, std::string label, Eigen::MatrixXcd m,
                          int components) {
  OperatorMatrix T;
  T.grid = g;
  T.kind = kind;
  T.label = std::move(label);
  T.components = components;
  T.dense = std::move(m);
  T.is_dense = true;
  return T;
}

OperatorMatrix make_sparse(const Grid1D& g, OperatorKind kind, std::string label, SparseC m, int components) {
  OperatorMatrix T;
  T.grid = g;
  T.kind = kind;
  T.label = std::move(label);
  T.components = components;
  m.makeCompressed();
  T.sparse = std::move(m);
  T.is_dense = false;
  return T;
}

double hermitian_defect(const OperatorMatrix& T) {
  if (T.is_dense) {
    double nrm = T.dense.norm();
    return nrm == 0.0 ? 0.0 : (T.dense - T.dense.adjoint()).norm() / nrm;
  }
  double nrm = T.sparse.norm();
  if (nrm == 0.0) return 0.0;
  SparseC adj = T.sparse.adjoint();
  return SparseC(T.sparse - adj).norm() / nrm;
}

void require_hermitian(const OperatorMatrix& T, double tol) {
  require(T.dim() == static_cast<Eigen::Index>(T.components) * T.grid.n, "dimension matches grid");
  require(hermitian_defect(T) <= tol, "operator Hermitian to 1e-12 relative");
}

namespace {

using Triplets = std::vector<Eigen::Triplet<cd>>;

SparseC from_triplets(Eigen::Index n, const Triplets& t) {
  SparseC m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// Circulant matrix with eigenvalue mult(xi_j) on the j-th Fourier mode.
Eigen::MatrixXcd circulant(const Grid1D& g, const std::function<double(double)>& mult) {
  const int n = g.n;
  Eigen::VectorXd xi = fourier_frequencies(g);
  std::vector<cd> spec(n), col;
  for (int j = 0; j < n; ++j) spec[j] = mult(xi[j]);
  Eigen::FFT<double> fft;
  fft.inv(col, spec);
  Eigen::MatrixXcd C(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) C(i, j) = col[((i - j) % n + n) % n];
  return C;
}

void add_laplacian(Triplets& t, const Grid1D& g, Eigen::Index offset = 0) {
  const int n = g.n;
  const double h = g.step(), c = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    t.emplace_back(offset + i, offset + i, 2.0 * c);
    if (i + 1 < n) {
      t.emplace_back(offset + i, offset + i + 1, -c);
      t.emplace_back(offset + i + 1, offset + i, -c);
    }
  }
}

// central difference d/dx with Dirichlet walls; D is real antisymmetric
void add_derivative(Triplets& t, const Grid1D& g, Eigen::Index row0, Eigen::Index col0, double sign) {
  const double c = sign / (2.0 * g.step());
  for (int i = 0; i + 1 < g.n; ++i) {
    t.emplace_back(row0 + i, col0 + i + 1, c);
    t.emplace_back(row0 + i + 1, col0 + i, -c);
  }
}

}  // namespace

OperatorMatrix build_h0(const Grid1D& g) {
  validate(g);
  if (g.kind == GridKind::periodic)
    return make_dense(g, OperatorKind::free, "H0", circulant(g, [](double xi) { return xi * xi; }));
  Triplets t;
  add_laplacian(t, g);
  return make_sparse(g, OperatorKind::free, "H0", from_triplets(g.n, t));
}

OperatorMatrix build_radial_channel(const Grid1D& g, double alpha_channel) {
  require(g.kind == GridKind::halfline, "radial channel needs a halfline grid");
  OperatorMatrix T = build_h0(g);
  Triplets t;
  for (int i = 0; i < g.n; ++i) {
    double r = g.x(i);
    t.emplace_back(i, i, alpha_channel / (r * r));
  }
  T.sparse += from_triplets(g.n, t);
  T.kind = OperatorKind::hamiltonian;
  T.label = "radial channel";
  return T;
}

Eigen::VectorXd sample_potential(const Grid1D& g, const PotentialSpec& V, Sampling sampling) {
  Eigen::VectorXd v(g.n);
  const double h = g.step();
  for (int i = 0; i < g.n; ++i) {
    double x = g.x(i);
    if (sampling == Sampling::point) {
      v[i] = eval_potential(V, x);
      continue;
    }
    int panels = 1 + static_cast<int>(std::floor(local_frequency(V, x) * h));
    double a = x - 0.5 * h, w = h / panels, sum = 0.0;
    auto f = [&](double t) { return eval_potential(V, t); };
    for (int p = 0; p < panels; ++p)
      sum += boost::math::quadrature::gauss<double, 8>::integrate(f, a + p * w, a + (p + 1) * w);
    v[i] = sum / h;
  }
  for (int i = 0; i < g.n; ++i)
    if (!std::isfinite(v[i])) throw ValidationError("potential finite at every grid point");
  return v;
}

OperatorMatrix build_schrodinger(const Grid1D& g, const Eigen::VectorXd& v, std::optional<double> channel) {
  require(v.size() == g.n, "potential samples match grid");
  OperatorMatrix T = channel ? build_radial_channel(g, *channel) : build_h0(g);
  T.kind = OperatorKind::hamiltonian;
  T.label = "H";
  if (T.is_dense) {
    T.dense.diagonal() += v.cast<cd>();
  } else {
    Triplets t;
    for (int i = 0; i < g.n; ++i) t.emplace_back(i, i, v[i]);
    T.sparse += from_triplets(g.n, t);
  }
  return T;
}

OperatorMatrix build_schrodinger(const Grid1D& g, const PotentialSpec& V, std::optional<double> channel,
                                 Sampling sampling) {
  return build_schrodinger(g, sample_potential(g, V, sampling), channel);
}

OperatorMatrix build_dirac_1d(const Grid1D& g, double m, const std::vector<Eigen::Matrix2cd>& V) {
  validate(g);
  require(V.empty() || static_cast<int>(V.size()) == g.n, "Dirac potential samples match grid");
  for (const auto& v : V) require((v - v.adjoint()).norm() <= 1e-12 * (1.0 + v.norm()), "V Hermitian at each point");
  const int n = g.n;
  if (g.kind == GridKind::periodic) {
    Eigen::MatrixXcd P = circulant(g, [](double xi) { return xi; });
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    // sigma_2 P = [[0, -iP], [iP, 0]]
    H.block(0, n, n, n) = cd(0, -1) * P;
    H.block(n, 0, n, n) = cd(0, 1) * P;
    H.diagonal().head(n).array() += m;
    H.diagonal().tail(n).array() -= m;
    for (int i = 0; i < static_cast<int>(V.size()); ++i)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) H(a * n + i, b * n + i) += V[i](a, b);
    return make_dense(g, OperatorKind::dirac, "Dirac 1D", std::move(H), 2);
  }
  Triplets t;
  // -iP = -d/dx in the upper right block, iP = d/dx in the lower left
  add_derivative(t, g, 0, n, -1.0);
  add_derivative(t, g, n, 0, 1.0);
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, m);
    t.emplace_back(n + i, n + i, -m);
  }
  for (int i = 0; i < static_cast<int>(V.size()); ++i)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if (V[i](a, b) != cd(0.0)) t.emplace_back(a * n + i, b * n + i, V[i](a, b));
  return make_sparse(g, OperatorKind::dirac, "Dirac 1D", from_triplets(2 * n, t), 2);
}

OperatorMatrix build_dirac_channel(const Grid1D& g, double m, int kappa_rho, const Eigen::VectorXd& phi_sc,
                                   const Eigen::VectorXd& phi_am, const Eigen::VectorXd& phi_el) {
  require(g.kind == GridKind::halfline, "Dirac channel needs a halfline grid");
  const int n = g.n;
  require(phi_sc.size() == n && phi_am.size() == n && phi_el.size() == n, "channel potentials match grid");
  Triplets t;
  add_derivative(t, g, 0, n, -1.0);
  add_derivative(t, g, n, 0, 1.0);
  for (int i = 0; i < n; ++i) {
    double b = kappa_rho / g.x(i) + phi_am[i];
    t.emplace_back(i, i, m + phi_sc[i] + phi_el[i]);
    t.emplace_back(n + i, n + i, -m - phi_sc[i] + phi_el[i]);
    t.emplace_back(i, n + i, b);
    t.emplace_back(n + i, i, b);
  }
  return make_sparse(g, OperatorKind::dirac, "Dirac channel", from_triplets(2 * n, t), 2);
}

OperatorMatrix build_conjugate_A(const Grid1D& g) {
  validate(g);
  require(g.kind != GridKind::periodic, "conjugate operator needs a non-periodic grid");
  const double h = g.step();
  Triplets t;
  for (int j = 0; j + 1 < g.n; ++j) {
    cd v(0.0, -(g.x(j) + g.x(j + 1)) / (4.0 * h));
    t.emplace_back(j, j + 1, v);
    t.emplace_back(j + 1, j, std::conj(v));
  }
  return make_sparse(g, OperatorKind::conjugate_A, "A", from_triplets(g.n, t));
}

double chi_R_profile(double t) { return smoothstep5(t - 1.0); }

double g_delta(double x, double delta) {
  double b = bracket(x);
  return (2.0 - std::pow(b, -delta)) / b;
}

OperatorMatrix build_B_R(const Grid1D& g, double R, double delta) {
  validate(g);
  require(g.kind != GridKind::periodic, "B_R needs a non-periodic grid");
  require(R >= 1.0, "R >= 1");
  require(R < g.L, "R < L");
  require(delta >= 0.0 && delta < 1.0, "delta in [0, 1)");
  const double h = g.step();
  Eigen::VectorXd G(g.n);
  for (int i = 0; i < g.n; ++i) {
    double x = g.x(i), c = chi_R_profile(std::abs(x) / R);
    G[i] = c * c * g_delta(x, delta) * x;
  }
  Triplets t;
  for (int j = 0; j + 1 < g.n; ++j) {
    cd v(0.0, -(G[j] + G[j + 1]) / (2.0 * h));
    if (v == cd(0.0)) continue;
    t.emplace_back(j, j + 1, v);
    t.emplace_back(j + 1, j, std::conj(v));
  }
  return make_sparse(g, OperatorKind::conjugate_BR, "B_R", from_triplets(g.n, t));
}

Grid1D padded_grid(const Grid1D& g, int pad) {
  Grid1D p = g;
  double h = g.step();
  switch (g.kind) {
    case GridKind::line:
      p.L = g.L + pad * h;
      p.n = g.n + 2 * pad;
      break;
    case GridKind::halfline:
      p.L = g.L + pad * h;
      p.n = g.n + pad;
      break;
    case GridKind::periodic:
      throw ValidationError("padding needs a Dirichlet grid");
  }
  return p;
}

OperatorMatrix lattice_commutator(const std::function<OperatorMatrix(const Grid1D&)>& H_factory,
                                  const std::function<OperatorMatrix(const Grid1D&)>& A_factory, const Grid1D& g,
                                  int pad) {
  Grid1D p = padded_grid(g, pad);
  SparseC H = H_factory(p).to_sparse(), A = A_factory(p).to_sparse();
  require(H.rows() == p.n && A.rows() == p.n, "factories build scalar operators on the padded grid");
  SparseC C = cd(0.0, 1.0) * SparseC(H * A - A * H);
  int off = g.kind == GridKind::line ? pad : 0;
  SparseC crop = C.block(off, off, g.n, g.n);
  return make_sparse(g, OperatorKind::commutator, "i[H,A]", crop);
}

OperatorMatrix box_commutator(const OperatorMatrix& H, const OperatorMatrix& A) {
  require(H.dim() == A.dim(), "commutator operands share a dimension");
  if (H.is_dense || A.is_dense) {
    Eigen::MatrixXcd h = H.to_dense(), a = A.to_dense();
    return make_dense(H.grid, OperatorKind::commutator, "i[H,A]", cd(0.0, 1.0) * (h * a - a * h), H.components);
  }
  SparseC C = cd(0.0, 1.0) * SparseC(H.sparse * A.sparse - A.sparse * H.sparse);
  return make_sparse(H.grid, OperatorKind::commutator, "i[H,A]", C, H.components);
}

namespace {

struct Tridiagonal {
  Eigen::VectorXd d, e;   // real symmetric form
  Eigen::VectorXcd phase;  // T = U S U^*, U = diag(phase)
};

// A Hermitian tridiagonal matrix is unitarily diagonal-similar to a real symmetric one.
Tridiagonal to_real_tridiagonal(const OperatorMatrix& T) {
  const Eigen::Index n = T.dim();
  Tridiagonal out;
  out.d.resize(n);
  out.e.resize(std::max<Eigen::Index>(n - 1, 0));
  out.phase.resize(n);
  Eigen::VectorXcd sub = Eigen::VectorXcd::Zero(std::max<Eigen::Index>(n - 1, 0));
  out.d.setZero();
  for (int k = 0; k < T.sparse.outerSize(); ++k)
    for (SparseC::InnerIterator it(T.sparse, k); it; ++it) {
      if (it.row() == it.col()) out.d[it.row()] += it.value().real();
      else if (it.row() == it.col() + 1) sub[it.col()] += it.value();
    }
  out.phase[0] = 1.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    double a = std::abs(sub[j]);
    out.e[j] = a;
    out.phase[j + 1] = a == 0.0 ? out.phase[j] : out.phase[j] * sub[j] / a;
  }
  return out;
}

bool tridiagonal_route(const OperatorMatrix& T) { return !T.is_dense && T.bandwidth() <= 1; }

int sturm(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double x) {
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  int count = 0;
  double q = d[0] - x;
  if (q == 0.0) q = -tiny;
  if (q < 0.0) ++count;
  for (Eigen::Index i = 1; i < d.size(); ++i) {
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

SpectralDecomposition tridiagonal_decompose(const OperatorMatrix& T, int il, int iu, bool vectors) {
  Tridiagonal td = to_real_tridiagonal(T);
  const lapack_int n = static_cast<lapack_int>(td.d.size());
  SpectralDecomposition out;
  if (iu < il) {
    out.values.resize(0);
    out.vectors.resize(n, 0);
    return out;
  }
  lapack_int count = iu - il + 1, found = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd Z(vectors ? n : 1, vectors ? count : 1);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(count));
  Eigen::VectorXd e(n);
  e.head(n - 1) = td.e;
  e[n - 1] = 0.0;
  lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'I', n, td.d.data(), e.data(), 0.0, 0.0,
                                   il, iu, 0.0, &found, w.data(), Z.data(), vectors ? n : 1, isuppz.data());
  if (info != 0) throw ComputeError("tridiagonal eigensolver failed (dstevr info " + std::to_string(info) + ")");
  out.values = w.head(found);
  if (vectors) out.vectors = td.phase.asDiagonal() * Z.leftCols(found).cast<cd>();
  return out;
}

SpectralDecomposition dense_decompose(const OperatorMatrix& T, char range, double lo, double hi, bool vectors) {
  const lapack_int n = static_cast<lapack_int>(T.dim());
  SpectralDecomposition out;
  Eigen::VectorXd w(n);
  lapack_int found = 0;
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  char jobz = vectors ? 'V' : 'N';
  Eigen::MatrixXcd M = T.to_dense();
  if (T.is_real()) {
    Eigen::MatrixXd A = M.real();
    Eigen::MatrixXd Z(n, vectors ? n : 1);
    lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, jobz, range, 'U', n, A.data(), n, lo, hi, 0, 0, 0.0, &found,
                                     w.data(), Z.data(), n, isuppz.data());
    if (info != 0) throw ComputeError("dense eigensolver failed (dsyevr info " + std::to_string(info) + ")");
    if (vectors) out.vectors = Z.leftCols(found).cast<cd>();
  } else {
    Eigen::MatrixXcd Z(n, vectors ? n : 1);
    lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, jobz, range, 'U', n, M.data(), n, lo, hi, 0, 0, 0.0, &found,
                                     w.data(), Z.data(), n, isuppz.data());
    if (info != 0) throw ComputeError("dense eigensolver failed (zheevr info " + std::to_string(info) + ")");
    if (vectors) out.vectors = Z.leftCols(found);
  }
  out.values = w.head(found);
  return out;
}

}  // namespace

SpectralDecomposition decompose(const OperatorMatrix& T, bool vectors) {
  if (tridiagonal_route(T)) return tridiagonal_decompose(T, 1, static_cast<int>(T.dim()), vectors);
  return dense_decompose(T, 'A', 0.0, 0.0, vectors);
}

SpectralDecomposition decompose_window(const OperatorMatrix& T, double lo, double hi, bool vectors) {
  require(lo < hi, "window lo < hi");
  if (tridiagonal_route(T)) {
    Tridiagonal td = to_real_tridiagonal(T);
    // Sturm counts give the exact index range, so workspace matches the window
    int il = sturm(td.d, td.e, lo) + 1, iu = sturm(td.d, td.e, hi);
    SpectralDecomposition out = tridiagonal_decompose(T, il, iu, vectors);
    // trim values that fall on the open end after rounding
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < out.values.size(); ++i)
      if (out.values[i] > lo && out.values[i] <= hi) keep.push_back(i);
    if (static_cast<Eigen::Index>(keep.size()) == out.values.size()) return out;
    SpectralDecomposition t;
    t.values.resize(keep.size());
    if (vectors) t.vectors.resize(out.vectors.rows(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      t.values[k] = out.values[keep[k]];
      if (vectors) t.vectors.col(k) = out.vectors.col(keep[k]);
    }
    return t;
  }
  return dense_decompose(T, 'V', lo, hi, vectors);
}

int count_below(const OperatorMatrix& T, double x) {
  require(tridiagonal_route(T), "Sturm count needs a tridiagonal operator");
  Tridiagonal td = to_real_tridiagonal(T);
  return sturm(td.d, td.e, x);
}

Eigen::VectorXd eigenvalues_by_index(const OperatorMatrix& T, int il, int iu) {
  require(tridiagonal_route(T), "index selection needs a tridiagonal operator");
  require(il >= 1 && iu <= T.dim() && il <= iu, "1 <= il <= iu <= n");
  return tridiagonal_decompose(T, il, iu, false).values;
}

OperatorMatrix apply_function(const SpectralDecomposition& d, const Grid1D& g, int components,
                              const std::function<double(double)>& fn, OperatorKind kind, const std::string& label) {
  const Eigen::Index n = d.vectors.rows();
  Eigen::VectorXd f = d.values.unaryExpr(fn);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  if (d.values.size() > 0) out = d.vectors * f.asDiagonal() * d.vectors.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return make_dense(g, kind, label, std::move(out), components);
}

OperatorMatrix apply_function(const OperatorMatrix& T, const std::function<double(double)>& fn, OperatorKind kind,
                              const std::string& label) {
  return apply_function(decompose(T), T.grid, T.components, fn, kind, label);
}

OperatorMatrix build_weight(const Grid1D& g, double s, int components) {
  require(std::isfinite(s) && s >= 0.0, "s >= 0");
  const int n = g.n;
  Triplets t;
  for (int c = 0; c < components; ++c)
    for (int i = 0; i < n; ++i) t.emplace_back(c * n + i, c * n + i, std::pow(bracket(g.x(i)), -s));
  return make_sparse(g, OperatorKind::weight, "<Q>^-s", from_triplets(static_cast<Eigen::Index>(components) * n, t),
                     components);
}

OperatorMatrix build_weight(const OperatorMatrix& T, double s) {
  require(std::isfinite(s) && s >= 0.0, "s >= 0");
  require_hermitian(T);
  return apply_function(T, [s](double t) { return std::pow(bracket(t), -s); }, OperatorKind::weight, "<T>^-s");
}

void validate(const WindowSpec& w) {
  require(std::isfinite(w.a) && std::isfinite(w.b) && w.a < w.b, "window a < b");
  require(w.margin < 0.0 || w.margin > 0.0, "window margin > 0");
}

namespace {
// C-infinity partition: 0 at u <= 0, 1 at u >= 1
double smooth_partition(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double p = std::exp(-1.0 / u), q = std::exp(-1.0 / (1.0 - u));
  return p / (p + q);
}
}  // namespace

double eval_window(const WindowSpec& w, double t) {
  if (w.kind == WindowKind::sharp_projector) return (t >= w.a && t <= w.b) ? 1.0 : 0.0;
  double m = w.effective_margin();
  if (t >= w.a && t <= w.b) return 1.0;
  if (t < w.a) return smooth_partition((t - (w.a - m)) / m);
  return smooth_partition(((w.b + m) - t) / m);
}

OperatorMatrix apply_window(const OperatorMatrix& T, const WindowSpec& w) {
  validate(w);
  require_hermitian(T);
  double m = w.kind == WindowKind::sharp_projector ? 0.0 : w.effective_margin();
  double lo = std::nextafter(w.a - m, -std::numeric_limits<double>::infinity());
  SpectralDecomposition d = decompose_window(T, lo, w.b + m);
  return apply_function(d, T.grid, T.components, [&](double t) { return eval_window(w, t); }, OperatorKind::window,
                        "theta(T)");
}

Eigen::Matrix4cd dirac_beta() {
  Eigen::Matrix4cd b = Eigen::Matrix4cd::Zero();
  b.diagonal() << 1.0, 1.0, -1.0, -1.0;
  return b;
}

Eigen::Matrix4cd dirac_alpha(int j) {
  require(j >= 1 && j <= 3, "alpha index in {1, 2, 3}");
  Eigen::Matrix2cd s;
  if (j == 1) s << 0.0, 1.0, 1.0, 0.0;
  else if (j == 2) s << 0.0, cd(0, -1), cd(0, 1), 0.0;
  else s << 1.0, 0.0, 0.0, -1.0;
  Eigen::Matrix4cd a = Eigen::Matrix4cd::Zero();
  a.block(0, 2, 2, 2) = s;
  a.block(2, 0, 2, 2) = s;
  return a;
}

void validate(const DiracSymbols& sym) {
  require(std::isfinite(sym.m) && sym.m > 0.0, "m > 0");
  require(sym.tau_lo < sym.tau_hi, "tau support lo < hi");
  require(sym.tau_lo > sym.m || sym.tau_hi < -sym.m, "tau support inside (m, inf) or its negative mirror");
}

double eval_tau(const DiracSymbols& sym, double t) {
  if (t <= sym.tau_lo || t >= sym.tau_hi) return 0.0;
  double w = 0.5 * (sym.tau_hi - sym.tau_lo);
  return std::exp(1.0 - w * w / ((t - sym.tau_lo) * (sym.tau_hi - t)));
}

DiracSymbolValues eval_dirac_symbols(const DiracSymbols& sym, const Eigen::Vector3d& xi) {
  validate(sym);
  DiracSymbolValues out;
  double r2 = xi.squaredNorm();
  out.mu = std::sqrt(r2 + sym.m * sym.m);
  double tau = eval_tau(sym, sym.tau_hi < 0.0 ? -out.mu : out.mu);
  if (tau != 0.0) {
    if (r2 == 0.0) throw ValidationError("xi != 0 where tau(mu) != 0");
    out.F = out.mu * out.mu / r2 * tau * xi;
  }
  Eigen::Matrix4cd D = sym.m * dirac_beta();
  for (int j = 0; j < 3; ++j) D += xi[j] * dirac_alpha(j + 1);
  Eigen::Matrix4cd I = Eigen::Matrix4cd::Identity();
  out.Pi_plus = 0.5 * (I + D / out.mu);
  out.Pi_minus = 0.5 * (I - D / out.mu);
  return out;
}

double chi_reg_profile(double t) { return 1.0 - smoothstep5(t - 1.0); }

double build_regularized_channel_symbol(double alpha_channel, double kappa_reg, double r, double tau) {
  require(r > 0.0, "r > 0");
  require(kappa_reg >= 1.0, "kappa_reg >= 1");
  double s = alpha_channel / (r * r);
  return tau * tau + s * chi_reg_profile(s / kappa_reg);
}

namespace {
constexpr char kMagic[8] = {'O', 'S', 'C', 'L', 'M', 'A', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "binary format is little-endian");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ValidationError("binary matrix truncated");
  return v;
}
}  // namespace

void write_binary(std::ostream& os, const OperatorMatrix& T) {
  Eigen::MatrixXcd M = T.to_dense();
  std::string label = std::string(kind_label(T.kind)) + ":" + T.label;
  os.write(kMagic, 8);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(M.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(M.cols()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(label.size()));
  os.write(label.data(), static_cast<std::streamsize>(label.size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      put<double>(os, M(i, j).real());
      put<double>(os, M(i, j).imag());
    }
}

OperatorMatrix read_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw ValidationError("binary matrix magic");
  auto rows = get<std::uint64_t>(is), cols = get<std::uint64_t>(is);
  auto len = get<std::uint32_t>(is);
  std::string label(len, '\0');
  is.read(label.data(), len);
  Eigen::MatrixXcd M(rows, cols);
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      double re = get<double>(is), im = get<double>(is);
      M(i, j) = cd(re, im);
    }
  // header label is "kind:label"; grid provenance is not part of the format
  OperatorMatrix T;
  auto colon = label.find(':');
  std::string kind = label.substr(0, colon);
  T.label = colon == std::string::npos ? std::string() : label.substr(colon + 1);
  bool known = false;
  for (auto k : {OperatorKind::hamiltonian, OperatorKind::free, OperatorKind::conjugate_A, OperatorKind::conjugate_BR,
                 OperatorKind::weight, OperatorKind::window, OperatorKind::dirac, OperatorKind::commutator})
    if (kind == kind_label(k)) {
      T.kind = k;
      known = true;
    }
  if (!known) throw ValidationError("binary matrix kind label recognized (got '" + kind + "')");
  T.grid.n = static_cast<int>(rows);
  T.dense = std::move(M);
  T.is_dense = true;
  return T;
}

void write_matrix_market(std::ostream& os, const OperatorMatrix& T) {
  SparseC S = T.to_sparse();
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << "% " << kind_label(T.kind) << ": " << T.label << "\n";
  os << S.rows() << ' ' << S.cols() << ' ' << S.nonZeros() << '\n';
  os.precision(17);
  for (int k = 0; k < S.outerSize(); ++k)
    for (SparseC::InnerIterator it(S, k); it; ++it)
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
}

void to_json(nlohmann::json& j, const WindowSpec& w) {
  j = {{"a", w.a},
       {"b", w.b},
       {"margin", w.effective_margin()},
       {"kind", w.kind == WindowKind::sharp_projector ? "sharp_projector" : "smooth_bump"}};
}

void from_json(const nlohmann::json& j, WindowSpec& w) {
  w.a = j.at("a").get<double>();
  w.b = j.at("b").get<double>();
  w.margin = j.value("margin", -1.0);
  std::string kind = j.value("kind", std::string("smooth_bump"));
  if (kind == "sharp_projector") w.kind = WindowKind::sharp_projector;
  else if (kind == "smooth_bump") w.kind = WindowKind::smooth_bump;
  else throw ValidationError("window kind is 'sharp_projector' or 'smooth_bump'");
}

}  // namespace oscilab
