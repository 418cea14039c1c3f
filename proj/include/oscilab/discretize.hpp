#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "oscilab/grid.hpp"
#include "oscilab/potentials.hpp"

namespace oscilab {

enum class OperatorKind { hamiltonian, free, conjugate_A, conjugate_BR, weight, window, dirac, commutator };

const char* kind_label(OperatorKind k);

using SparseC = Eigen::SparseMatrix<cd>;

// Hermitian matrix with grid provenance. Banded operators keep sparse storage;
// functional-calculus results are dense.
struct OperatorMatrix {
  Grid1D grid;
  OperatorKind kind = OperatorKind::hamiltonian;
  std::string label;
  int components = 1;  // 2 for Dirac systems; dimension = components * grid.n
  SparseC sparse;
  Eigen::MatrixXcd dense;
  bool is_dense = false;

  Eigen::Index dim() const { return is_dense ? dense.rows() : sparse.rows(); }
  Eigen::MatrixXcd to_dense() const;
  SparseC to_sparse() const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  // max |i - j| over stored nonzeros; -1 for dense storage
  int bandwidth() const;
  bool is_real() const;
};

OperatorMatrix make_dense(const Grid1D& g, OperatorKind kind, std::string label, Eigen::MatrixXcd m,
                          int components = 1);
OperatorMatrix make_sparse(const Grid1D& g, OperatorKind kind, std::string label, SparseC m,
                           int components = 1);

// ||T - T^H||_F / ||T||_F (0 for the zero matrix)
double hermitian_defect(const OperatorMatrix& T);
void require_hermitian(const OperatorMatrix& T, double tol = 1e-12);

OperatorMatrix build_h0(const Grid1D& g);

// h0 + alpha r^{-2}; alpha is the coefficient exactly as passed.
OperatorMatrix build_radial_channel(const Grid1D& g, double alpha_channel);

enum class Sampling { point, cell_average };

// V on the grid; cell_average integrates V over each cell with Gauss-Legendre panels
// fine enough for the local oscillation frequency.
Eigen::VectorXd sample_potential(const Grid1D& g, const PotentialSpec& V, Sampling sampling = Sampling::point);

OperatorMatrix build_schrodinger(const Grid1D& g, const PotentialSpec& V, std::optional<double> channel = {},
                                 Sampling sampling = Sampling::point);
OperatorMatrix build_schrodinger(const Grid1D& g, const Eigen::VectorXd& v, std::optional<double> channel = {});

// sigma_2 P + m sigma_3 + V on a line (central differences) or periodic grid (exact
// Fourier P). Layout: component-major, index c * n + i. V holds one Hermitian 2x2 per point.
OperatorMatrix build_dirac_1d(const Grid1D& g, double m, const std::vector<Eigen::Matrix2cd>& V = {});

// [[m + phi_sc + phi_el, -D + b], [D + b, -m - phi_sc + phi_el]], b = kappa/r + phi_am,
// on a halfline grid.
OperatorMatrix build_dirac_channel(const Grid1D& g, double m, int kappa_rho, const Eigen::VectorXd& phi_sc,
                                   const Eigen::VectorXd& phi_am, const Eigen::VectorXd& phi_el);

// (PQ + QP)/2 with central differences: A_{j,j+1} = -i (x_j + x_{j+1}) / (4h).
OperatorMatrix build_conjugate_A(const Grid1D& g);

// chi(t): 0 on [0, 1], 1 on [2, inf), quintic blend
double chi_R_profile(double t);
double g_delta(double x, double delta);

// G P + P G with G = chi(|x|/R)^2 g_delta(x) x
OperatorMatrix build_B_R(const Grid1D& g, double R, double delta);

// Grid with `pad` extra points past every Dirichlet wall (both ends of a line, the far end of a halfline).
Grid1D padded_grid(const Grid1D& g, int pad);

// i[H, A] evaluated on a padded lattice and cropped back to g, so the commutator does not
// pick up the artificial walls. factory builds the operator on any grid of the same family.
OperatorMatrix lattice_commutator(const std::function<OperatorMatrix(const Grid1D&)>& H_factory,
                                  const std::function<OperatorMatrix(const Grid1D&)>& A_factory, const Grid1D& g,
                                  int pad = 4);

// Plain box commutator i(HA - AH).
OperatorMatrix box_commutator(const OperatorMatrix& H, const OperatorMatrix& A);

struct SpectralDecomposition {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // orthonormal columns
};

// Full decomposition (dense LAPACK, or the tridiagonal solver when the band allows).
SpectralDecomposition decompose(const OperatorMatrix& T, bool vectors = true);
// Eigenpairs with eigenvalue in (lo, hi].
SpectralDecomposition decompose_window(const OperatorMatrix& T, double lo, double hi, bool vectors = true);

// Number of eigenvalues below x (Sturm count; tridiagonal operators only).
int count_below(const OperatorMatrix& T, double x);
// Eigenvalues il..iu (1-based, ascending order; tridiagonal operators only).
Eigen::VectorXd eigenvalues_by_index(const OperatorMatrix& T, int il, int iu);

OperatorMatrix apply_function(const OperatorMatrix& T, const std::function<double(double)>& fn, OperatorKind kind,
                              const std::string& label);
OperatorMatrix apply_function(const SpectralDecomposition& d, const Grid1D& g, int components,
                              const std::function<double(double)>& fn, OperatorKind kind, const std::string& label);

// <x>^{-s} on the grid (repeated per component).
OperatorMatrix build_weight(const Grid1D& g, double s, int components = 1);
// <T>^{-s} by functional calculus.
OperatorMatrix build_weight(const OperatorMatrix& T, double s);

enum class WindowKind { sharp_projector, smooth_bump };

struct WindowSpec {
  double a = 0.0, b = 1.0;
  double margin = -1.0;  // negative selects the default 0.1 (b - a)
  WindowKind kind = WindowKind::smooth_bump;
  double effective_margin() const { return margin < 0.0 ? 0.1 * (b - a) : margin; }
};

void validate(const WindowSpec& w);
double eval_window(const WindowSpec& w, double t);
OperatorMatrix apply_window(const OperatorMatrix& T, const WindowSpec& w);

// 4x4 Dirac matrices in the standard representation.
Eigen::Matrix4cd dirac_beta();
Eigen::Matrix4cd dirac_alpha(int j);

struct DiracSymbols {
  double m = 1.0;
  double tau_lo = 1.05, tau_hi = 1.3;  // support of tau; a negative interval mirrors to -mu
};

struct DiracSymbolValues {
  double mu = 0.0;
  Eigen::Vector3d F = Eigen::Vector3d::Zero();
  Eigen::Matrix4cd Pi_plus, Pi_minus;
};

void validate(const DiracSymbols& sym);
double eval_tau(const DiracSymbols& sym, double t);
DiracSymbolValues eval_dirac_symbols(const DiracSymbols& sym, const Eigen::Vector3d& xi);

// chi: 1 on [0, 1], 0 on [2, inf), quintic blend
double chi_reg_profile(double t);
double build_regularized_channel_symbol(double alpha_channel, double kappa_reg, double r, double tau);

// row-major little-endian: magic, rows, cols, "kind:label", then (re, im) pairs
void write_binary(std::ostream& os, const OperatorMatrix& T);
OperatorMatrix read_binary(std::istream& is);
void write_matrix_market(std::ostream& os, const OperatorMatrix& T);

void to_json(nlohmann::json& j, const WindowSpec& w);
void from_json(const nlohmann::json& j, WindowSpec& w);

}  // namespace oscilab
