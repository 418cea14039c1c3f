#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include "oscilab/discretize.hpp"

namespace oscilab {

struct EigenResult {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXd residual_norms;
};

// Full spectrum; fails on non-Hermitian input or if a residual exceeds 1e-8 ||T||.
EigenResult eig(const OperatorMatrix& T);
// Eigenpairs in (lo, hi], same guarantees.
EigenResult eig_window(const OperatorMatrix& T, double lo, double hi);

// Upper bound for ||T|| (max absolute row sum).
double norm_bound(const OperatorMatrix& T);

enum class EmbeddedVerdict { genuine, box_artifact, unresolved };
const char* verdict_name(EmbeddedVerdict v);

struct EmbeddedCandidate {
  double energy = 0.0;
  double localization = 0.0;  // L^2 mass in the inner half-box
  double box_drift = 0.0;     // distance to the nearest localized eigenvalue in the larger boxes
  EmbeddedVerdict verdict = EmbeddedVerdict::unresolved;
  double virial = std::numeric_limits<double>::quiet_NaN();  // |<f, i[H,A] f>| when requested
  double box_L = 0.0;
};

using OperatorFactory = std::function<OperatorMatrix(const Grid1D&)>;
using GridForBox = std::function<Grid1D(double L)>;

struct EmbeddedOptions {
  double drift_tol = 5e-3;
  double localization_min = 0.99;
  double artifact_localization = 0.9;  // below this a candidate is a box state
  OperatorFactory conjugate;           // when set, the virial value is reported per candidate
};

// Candidates are the eigenvalues in (lo, hi] of the first box; the remaining boxes
// measure drift. Boxes are solved in parallel.
std::vector<EmbeddedCandidate> find_embedded(const OperatorFactory& build, const GridForBox& grid_for, double lo,
                                             double hi, const std::vector<double>& box_list,
                                             const EmbeddedOptions& opt = {});

// |<f, C f>| / ||f||^2 for C = i[H, A] (lattice commutator); 0 for f = 0.
double virial_check(const OperatorMatrix& C, const Eigen::VectorXcd& f);
double virial_check(const OperatorFactory& H, const OperatorFactory& A, const Grid1D& g, const Eigen::VectorXcd& f);

enum class TailVerdict { decays_to_zero, plateaus, grows };
const char* verdict_name(TailVerdict v);

struct TailDecayReport {
  std::vector<double> radii;
  std::vector<double> tail_norms;
  double plateau_estimate = 0.0;  // median of the last three norms
  TailVerdict verdict = TailVerdict::plateaus;
  double operator_norm = 0.0;  // ||T|| when the probe knows it
};

// verdict from a norm sequence: decays if last <= 0.1 first, grows if last > 2 first
TailDecayReport classify_tail(std::vector<double> radii, std::vector<double> norms);

// ||chi T chi|| with chi the indicator of R <= |x| <= outer; T Hermitian.
TailDecayReport tail_decay(const OperatorMatrix& T, const std::vector<double>& radii,
                           double outer = std::numeric_limits<double>::infinity());

// max theta(a^2) theta(b^2) over momenta a, b >= 0 with |a - b| <= k <= a + b (dim >= 2),
// or over xi with b = |xi - k| (dim = 1).
double interference_symbol_check(const WindowSpec& theta, double k, int dim = 1);

struct InterferenceOptions {
  int dim = 3;               // 1: line grid; 3: radial channel sum on a halfline grid
  double amplitude = 1.0;    // multiplies sin(k|x|); 0 gives the zero operator
  double tail_outer_fraction = 0.5;  // tail region ends at this fraction of L (keeps clear of the wall)
  int max_channel = -1;      // -1 picks sqrt(sup supp theta) * outer + 10
};

// Tail norms of M = theta(H0) sin(k|Q|) theta(H0).
TailDecayReport interference_probe(const Grid1D& g, const WindowSpec& theta, double k,
                                   const std::vector<double>& radii, const InterferenceOptions& opt = {});

struct SmallPlusDecayReport {
  TailDecayReport wide, narrow;
  WindowSpec narrow_window;
  bool narrowing_lowers = false;
};

// Probe at theta and at a window of narrow_fraction of its width about the same centre.
SmallPlusDecayReport small_plus_decay_probe(const Grid1D& g, const WindowSpec& theta, double k,
                                            const std::vector<double>& radii, double narrow_fraction = 0.25,
                                            const InterferenceOptions& opt = {});

struct CompactnessSpec {
  double p = 1.0, alpha = 2.0, k = 1.0;
  double l1 = 2.0, l2 = 2.0;
  CutoffSpec cutoff;
};

// Tail norms of <P>^{-l1} <Q>^p (1 - kappa(|Q|)) sin(k |Q|^alpha) <P>^{-l2} on a periodic grid;
// the tail region is R <= |x| <= outer.
TailDecayReport oscillation_compactness_probe(const Grid1D& g, const CompactnessSpec& spec,
                                              const std::vector<double>& radii, double outer);

// Largest singular value of a linear map given by matvec and adjoint matvec
// (Golub-Kahan-Lanczos with full reorthogonalization).
using MatVec = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;
double largest_singular_value(const MatVec& A, const MatVec& A_adj, Eigen::Index n, int max_iter = 300,
                              double tol = 1e-9, unsigned seed = 7);

nlohmann::json to_json_value(const EmbeddedCandidate& c);
nlohmann::json to_json_value(const TailDecayReport& r);
void append_sweep_csv(std::ostream& os, const WindowSpec& w, double k, const TailDecayReport& r, bool header);

}  // namespace oscilab
