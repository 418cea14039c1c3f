#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "oscilab/spectral.hpp"

namespace oscilab {

// Largest singular value of W (H - z)^{-1} W. Tridiagonal H with diagonal W uses a
// banded complex solve inside Golub-Kahan-Lanczos; anything else goes through the full
// eigendecomposition of H. W = identity short-circuits to 1/dist(z, spec H).
double weighted_resolvent_norm(const OperatorMatrix& H, const OperatorMatrix& W, cd z);

// Solves (T - z) x = b for a tridiagonal T (banded LU without pivoting is unsafe here, so
// this uses partial pivoting).
Eigen::VectorXcd tridiagonal_solve(const OperatorMatrix& T, cd z, const Eigen::VectorXcd& b);

enum class LapWeight { position, conjugate_A };
enum class LapVerdict { lap_holds, lap_fails, inconclusive };
const char* verdict_name(LapVerdict v);

struct LapScanSpec {
  double a = 0.5, b = 1.5;
  double s = 0.51;  // 0 gives the unweighted control
  LapWeight weight_kind = LapWeight::position;
  int re_points = 5;
  std::vector<double> im_ladder{1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3};
  std::vector<double> box_list{200.0, 400.0};
  double h = 0.1;
  Sampling sampling = Sampling::point;
  double floor_factor = 10.0;  // rungs below floor_factor * mean level spacing are dropped
};

void validate(const LapScanSpec& spec);

struct LapPoint {
  double re_z, im_z, box_L, norm;
};

struct LapScanResult {
  std::vector<LapPoint> points;
  double sup_norm = 0.0;              // largest box
  double divergence_exponent = 0.0;   // max over Re z, largest box
  std::vector<double> box_exponents;  // per box
  std::vector<LapVerdict> box_verdicts;
  double box_stability = 0.0;  // relative sup_norm change between the two largest boxes
  LapVerdict verdict = LapVerdict::inconclusive;
  double im_floor = 0.0;
  double level_spacing = 0.0;
  std::vector<double> rungs_used;
};

// Operators are built by `build` on line grids of spacing spec.h for every box.
LapScanResult lap_scan(const OperatorFactory& build, const LapScanSpec& spec);
LapScanResult lap_scan(const PotentialSpec& V, const LapScanSpec& spec);

enum class MourreMode { plain, strict, weighted, at_infinity };
const char* mode_name(MourreMode m);

struct MourreCheckResult {
  double J_lo = 0.0, J_hi = 0.0;
  double commutator_form_min_eig = std::numeric_limits<double>::infinity();
  double commutator_form_max_eig = -std::numeric_limits<double>::infinity();
  double best_c = std::numeric_limits<double>::infinity();  // +inf when the window range is trivial
  int remainder_rank = 0;
  int window_rank = 0;
  MourreMode kind = MourreMode::strict;
  double psi_c = 0.0;  // weighted mode: the constant c of psi
  double R = 0.0;
  bool holds = false;
};

// E_J [H, iA] E_J on the window range, with the commutator taken on a padded lattice.
MourreCheckResult mourre_check(const OperatorFactory& H, const OperatorFactory& A, const Grid1D& g, double J_lo,
                               double J_hi, MourreMode mode, int remainder_rank_budget = 0);

// E_J ([H, i phi(S)] - <S>^{-2s}) E_J with phi(t) = psi(t / R). psi.c <= 0 selects c = 1 / inf J.
// include_weight = false drops the <S>^{-2s} term.
MourreCheckResult weighted_mourre_check(const OperatorFactory& H, const OperatorFactory& S, const Grid1D& g,
                                        WeightFunctionSpec psi, double R, double J_lo, double J_hi, double s,
                                        bool include_weight = true, double tol = 1e-6);

struct MourreInfinityReport {
  std::vector<double> radii;
  std::vector<double> min_ratio;     // min over trials of <f,[H,iB_R]f> / ||chi_R <Q>^{-s} f||^2
  std::vector<double> median_ratio;
  std::vector<double> error_term;    // max_i (c1 X_i^2 - LHS_i)_+ / X_i at the reported c1
  std::vector<double> max_rhs_norm;  // max_i ||chi_R <Q>^{-s} f_i||
  double c1 = 0.0;
  bool error_decays = false;
  bool holds = false;
  int trials = 0;
};

MourreInfinityReport mourre_at_infinity_check(const OperatorFactory& H, const Grid1D& g,
                                              const std::vector<double>& radii, double delta, double s, double gamma,
                                              double J_lo, double J_hi, int trials = 64, unsigned seed = 1);

enum class PhaseRegion { blue, green, outside };
const char* region_name(PhaseRegion r);
// blue: beta > alpha or alpha + beta > 2; green: alpha >= 1, beta > 1/2, alpha + beta <= 2
PhaseRegion phase_region(double alpha, double beta);

struct PhaseCell {
  double alpha = 0.0, beta = 0.0;
  PhaseRegion region = PhaseRegion::outside;
  int genuine_below = 0, genuine_above = 0;
  std::string below = "skipped", above = "skipped";  // LapVerdict name, or skipped
  LapScanResult below_scan, above_scan;
};

struct PhaseSweepSpec {
  std::vector<double> alphas{1.0, 1.5, 2.0};
  std::vector<double> betas{0.6, 0.75, 1.0};
  double k = 2.0, w = 3.0;
  double below_lo = 0.3, below_hi = 0.8;
  double above_lo = 1.2, above_hi = 2.0;
  bool include_short_range = true;
  LapScanSpec scan;  // interval fields are overwritten per window
  std::vector<double> screen_boxes{200.0, 400.0};  // eigenvalue screen; independent of scan.box_list
  int budget = 40;   // cells past the budget are skipped
};

void validate(const PhaseSweepSpec& spec);
PotentialSpec phase_potential(const PhaseSweepSpec& spec, double alpha, double beta);
std::vector<PhaseCell> phase_sweep(const PhaseSweepSpec& spec);

void write_scan_csv(std::ostream& os, const LapScanResult& r);
nlohmann::json summary_json(const LapScanResult& r);
nlohmann::json to_json_value(const MourreCheckResult& r);
nlohmann::json to_json_value(const MourreInfinityReport& r);
void write_phase_csv(std::ostream& os, const std::vector<PhaseCell>& cells);
void write_phase_svg(std::ostream& os, const std::vector<PhaseCell>& cells, const PhaseSweepSpec& spec);

void to_json(nlohmann::json& j, const LapScanSpec& s);
void from_json(const nlohmann::json& j, LapScanSpec& s);
void to_json(nlohmann::json& j, const PhaseSweepSpec& s);
void from_json(const nlohmann::json& j, PhaseSweepSpec& s);

}  // namespace oscilab
