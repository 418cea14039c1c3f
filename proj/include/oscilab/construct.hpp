#pragma once

#include <iosfwd>

#include <Eigen/Core>

#include "json.hpp"
#include "oscilab/grid.hpp"

namespace oscilab {

// max |-f'' + (V + dV) f - f| over x = 0, step, ..., x_max. dV = 0 is the identity check.
double verify_wvn_1d(double x_max, double step, double dV = 0.0);

// max |-u'' - (2/r) u' + (W + dV) u - u| over r = step, 2 step, ..., r_max.
double verify_wvn_3d(double r_max, double step, double dV = 0.0);

// int_R^{r_max} |u(r)|^2 r^2 dr for the radial profile (composite Gauss-Legendre).
double wvn_3d_tail_mass(double R, double r_max);

struct KgConstruction {
  Grid1D grid;
  double m = 1.0;
  double lambda = 0.0;
  Eigen::VectorXd x, h, k_fn, f, V;
  double residual_max = 0.0;  // max |(sqrt(P^2+m^2) - m) f + V f - lambda f| on the interior
  double oracle_gap = 0.0;    // same residual for V from the regular form (no division by f)
  double decay_constant = 0.0;  // max |V(x)| <x> on the interior
  int fitted_points = 0;        // grid points where the quotient was replaced by a local fit
  int k_sign_changes = 0;       // on the interior; each one puts a pole in V
  double k_min = 0.0;
  double interior_fraction = 0.8;
};

KgConstruction kg_construct(double m, const Grid1D& grid);

// V from the regular form, evaluated on the same grid; independent of the quotient route.
Eigen::VectorXd kg_regular_potential(double m, const Grid1D& grid);

enum class PhiElKind { bracket_inverse, zero };

struct DiracChannelSpec {
  double m = 1.0;
  double lambda = 1.5;
  int kappa_rho = 1;
  double u_decay = 1.0;
  double match_radius = 1.0;
  PhiElKind phi_el = PhiElKind::bracket_inverse;
};

void validate(const DiracChannelSpec& spec);
double eval_phi_el(PhiElKind kind, double r);

// Halfline grid (0, 200] with step 1e-3.
Grid1D default_dirac_grid();

Eigen::Matrix2d dirac_M(double m, double lambda);
Eigen::Matrix2d dirac_exp_rM(double m, double lambda, double r);

struct DiracProfile {
  Eigen::VectorXd r, u1, u2, du1, du2;
};

DiracProfile dirac_build_u(const DiracChannelSpec& spec, const Grid1D& grid);

struct DiracConstruction {
  Grid1D grid;
  Eigen::VectorXd r, u1, u2, du1, du2, v1, v2, w1, w2, phi_sc, phi_am, phi_el, f1, f2;
  double residual_max = 0.0;
};

DiracConstruction dirac_solve_potential(const DiracChannelSpec& spec, const Grid1D& grid);

// max over interior points of |D_rho f - lambda f|, using the stored potentials and f' = M f + exp(rM) u'.
double dirac_residual(const DiracConstruction& c, const DiracChannelSpec& spec);

struct DiracLimits {
  double phi_sc_first = 0.0, phi_am_first = 0.0;   // values at the first grid point
  double phi_sc_zero = 0.0, phi_am_zero = 0.0;     // linear extrapolation to r = 0
  bool finite_at_zero = false;
  double max_far = 0.0;  // max(|phi_sc|, |phi_am|) over [R/2, R]
  double max_mid = 0.0;  // same over [R/4, R/2]
  bool decays = false;
  double derivative_ratio_end = 0.0;  // |u'| / |u| at the last point
  double phi_el_zero = 0.0, phi_el_end = 0.0;
};

DiracLimits dirac_check_limits(const DiracConstruction& c);

void write_csv(std::ostream& os, const DiracConstruction& c);
void write_csv(std::ostream& os, const KgConstruction& c);
nlohmann::json summary_json(const DiracConstruction& c, const DiracLimits& lim);
nlohmann::json summary_json(const KgConstruction& c);

void to_json(nlohmann::json& j, const DiracChannelSpec& s);
void from_json(const nlohmann::json& j, DiracChannelSpec& s);

}  // namespace oscilab
