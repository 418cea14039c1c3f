#include "oscilab/construct.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>

#include "oscilab/potentials.hpp"

namespace oscilab {

double verify_wvn_1d(double x_max, double step, double dV) {
  require(x_max > 0.0, "x_max > 0");
  require(step > 0.0, "step > 0");
  long n = std::lround(x_max / step);
  double worst = 0.0;
  for (long i = 0; i <= n; ++i) {
    double x = i * step;
    Jet2 f = eval_wvn_bound_state(x);
    double res = -f.d2f + (eval_wvn_potential(x) + dV) * f.f - f.f;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double verify_wvn_3d(double r_max, double step, double dV) {
  require(r_max > 0.0, "r_max > 0");
  require(step > 0.0, "step > 0");
  long n = std::max(1L, std::lround(r_max / step));
  double worst = 0.0;
  for (long i = 1; i <= n; ++i) {
    double r = i * step;
    Wvn3d w = eval_wvn_3d(r);
    double res = -w.u.d2f - 2.0 * w.u.df / r + (w.W + dV) * w.u.f - w.u.f;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double wvn_3d_tail_mass(double R, double r_max) {
  require(R >= 0.0 && r_max > R, "0 <= R < r_max");
  auto f = [](double r) {
    double u = eval_wvn_3d(r).u.f;
    return u * u * r * r;
  };
  int panels = static_cast<int>(std::ceil(r_max - R));
  double width = (r_max - R) / panels, sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    double a = R + p * width;
    sum += boost::math::quadrature::gauss<double, 20>::integrate(f, a, a + width);
  }
  return sum;
}

namespace {

double kg_lambda(double m) { return 1.0 / (std::sqrt(1.0 + m * m) + m); }

// sqrt(xi^2 + m^2) - m without cancellation at small xi
double shifted_energy(double xi, double m) { return xi * xi / (std::sqrt(xi * xi + m * m) + m); }

void kg_check(double m, const Grid1D& grid) {
  require(std::isfinite(m) && m > 0.0, "m > 0");
  require(grid.kind == GridKind::periodic, "grid periodic");
  require(2.0 * grid.L >= 200.0, "grid length >= 200");
  require(grid.n >= 16.0 * 2.0 * grid.L, "resolution >= 16 points per unit");
}

struct KgFields {
  Eigen::VectorXd x, h, k, f, N;
};

KgFields kg_fields(double m, const Grid1D& grid) {
  KgFields out;
  out.x = grid.points();
  out.h = out.x.unaryExpr([](double t) { return wvn_h(t).f; });
  auto T = [m](double xi) { return std::sqrt(xi * xi + m * m); };
  out.k = apply_multiplier(grid, out.h, [&](double xi) { return T(xi + 1.0) + T(xi - 1.0); });
  out.f = out.k.cwiseProduct(out.x.array().sin().matrix());
  out.N = apply_multiplier(grid, out.f, [m](double xi) { return shifted_energy(xi, m); });
  return out;
}

}  // namespace

Eigen::VectorXd kg_regular_potential(double m, const Grid1D& grid) {
  kg_check(m, grid);
  KgFields F = kg_fields(m, grid);
  auto T = [m](double xi) { return std::sqrt(xi * xi + m * m); };
  Eigen::VectorXd tt = apply_multiplier(grid, F.h, [&](double xi) { return T(xi + 1.0) * T(xi - 1.0); });
  double lambda = kg_lambda(m);
  Eigen::VectorXd V(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    double x = F.x[i];
    Jet2 h = wvn_h(x);
    double g = wvn_g(x);
    double num = tt[i] - h.d2f + (1.0 + m * m) * h.f - m * F.k[i] +
                 16.0 * g * std::sin(x) * std::cos(x) * h.f * h.f;
    V[i] = lambda - num / F.k[i];
  }
  return V;
}

KgConstruction kg_construct(double m, const Grid1D& grid) {
  kg_check(m, grid);
  KgConstruction c;
  c.grid = grid;
  c.m = m;
  c.lambda = kg_lambda(m);
  KgFields F = kg_fields(m, grid);
  c.x = F.x;
  c.h = F.h;
  c.k_fn = F.k;
  c.f = F.f;

  const int n = grid.n;
  double thresh = 1e-8 * c.f.cwiseAbs().maxCoeff();
  auto quotient_ok = [&](int i) { return std::abs(c.f[i]) >= thresh; };
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  c.V.resize(n);
  for (int i = 0; i < n; ++i)
    if (quotient_ok(i)) c.V[i] = c.lambda - F.N[i] / c.f[i];
  for (int i = 0; i < n; ++i) {
    if (quotient_ok(i)) continue;
    // both N and f vanish here; the quotient has a smooth extension, read off from
    // the symmetric four-point interpolant of its neighbours
    int im2 = wrap(i - 2), im1 = wrap(i - 1), ip1 = wrap(i + 1), ip2 = wrap(i + 2);
    if (!(quotient_ok(im2) && quotient_ok(im1) && quotient_ok(ip1) && quotient_ok(ip2)))
      throw ComputeError("kg_construct: cannot extend V across a zero of f (neighbours also vanish)");
    c.V[i] = (-c.V[im2] + 4.0 * c.V[im1] + 4.0 * c.V[ip1] - c.V[ip2]) / 6.0;
    ++c.fitted_points;
  }

  Eigen::VectorXd Vreg = kg_regular_potential(m, grid);
  double edge = c.interior_fraction * grid.L;
  for (int i = 0; i < n; ++i) {
    double x = c.x[i];
    if (std::abs(x) > edge) continue;
    double lf = c.lambda * c.f[i];
    c.residual_max = std::max(c.residual_max, std::abs(F.N[i] + c.V[i] * c.f[i] - lf));
    c.oracle_gap = std::max(c.oracle_gap, std::abs(F.N[i] + Vreg[i] * c.f[i] - lf));
    c.decay_constant = std::max(c.decay_constant, std::abs(c.V[i]) * bracket(x));
  }
  c.k_min = c.k_fn.minCoeff();
  for (int i = 1; i < n; ++i)
    if (std::abs(c.x[i]) <= edge && std::abs(c.x[i - 1]) <= edge && (c.k_fn[i] > 0.0) != (c.k_fn[i - 1] > 0.0))
      ++c.k_sign_changes;
  return c;
}

void validate(const DiracChannelSpec& s) {
  require(std::isfinite(s.m) && s.m >= 0.0, "m >= 0");
  require(std::isfinite(s.lambda) && std::abs(s.lambda) > s.m, "|lambda| > m");
  require(s.kappa_rho != 0, "kappa_rho != 0");
  require(std::isfinite(s.u_decay) && s.u_decay > 0.5, "u_decay > 1/2");
  require(std::isfinite(s.match_radius) && s.match_radius > 0.0, "match_radius > 0");
}

double eval_phi_el(PhiElKind kind, double r) {
  switch (kind) {
    case PhiElKind::bracket_inverse:
      return 1.0 / bracket(r);
    case PhiElKind::zero:
      return 0.0;
  }
  return 0.0;
}

Grid1D default_dirac_grid() { return halfline_grid_step(200.0, 1e-3); }

Eigen::Matrix2d dirac_M(double m, double lambda) {
  Eigen::Matrix2d M;
  M << 0.0, m + lambda, m - lambda, 0.0;
  return M;
}

Eigen::Matrix2d dirac_exp_rM(double m, double lambda, double r) {
  // M^2 = (m^2 - lambda^2) I, so the series splits into even and odd parts.
  Eigen::Matrix2d M = dirac_M(m, lambda);
  double q = lambda * lambda - m * m;
  double c, s;  // exp(rM) = c I + s M
  if (q > 0.0) {
    double w = std::sqrt(q);
    c = std::cos(w * r);
    s = std::sin(w * r) / w;
  } else if (q < 0.0) {
    double w = std::sqrt(-q);
    c = std::cosh(w * r);
    s = std::sinh(w * r) / w;
  } else {
    c = 1.0;
    s = r;
  }
  return c * Eigen::Matrix2d::Identity() + s * M;
}

DiracProfile dirac_build_u(const DiracChannelSpec& spec, const Grid1D& grid) {
  validate(spec);
  require(grid.kind == GridKind::halfline, "Dirac channel grid is a halfline");
  const int n = grid.n;
  const double a = 0.5 * spec.match_radius, b = 2.0 * spec.match_radius;
  require(b < grid.x(n - 1), "2 match_radius inside the grid");
  const int kap = spec.kappa_rho;
  const double p = std::abs(kap), d = spec.u_decay;

  DiracProfile u;
  u.r = grid.points();
  u.u1.resize(n);
  u.u2.resize(n);
  u.du1.resize(n);
  u.du2.resize(n);
  for (int i = 0; i < n; ++i) {
    double r = u.r[i];
    // near 0: (0, r^kappa) for kappa > 0, (r^{-kappa}, 0) for kappa < 0
    double rp = std::pow(r, p), drp = p * std::pow(r, p - 1.0);
    double n1 = kap > 0 ? 0.0 : rp, n2 = kap > 0 ? rp : 0.0;
    double dn1 = kap > 0 ? 0.0 : drp, dn2 = kap > 0 ? drp : 0.0;
    double fr = std::pow(r, -d), dfr = -d * std::pow(r, -d - 1.0);
    double t = (r - a) / (b - a);
    double s = smoothstep5(t), ds = smoothstep5_deriv(t) / (b - a);
    u.u1[i] = (1.0 - s) * n1 + s * fr;
    u.u2[i] = (1.0 - s) * n2 + s * fr;
    u.du1[i] = (1.0 - s) * dn1 + s * dfr + ds * (fr - n1);
    u.du2[i] = (1.0 - s) * dn2 + s * dfr + ds * (fr - n2);
    if (!(u.u1[i] * u.u1[i] + u.u2[i] * u.u2[i] > 0.0))
      throw ComputeError("dirac_build_u: u1^2 + u2^2 vanishes; change match_radius");
  }
  return u;
}

DiracConstruction dirac_solve_potential(const DiracChannelSpec& spec, const Grid1D& grid) {
  DiracProfile u = dirac_build_u(spec, grid);
  const int n = grid.n;
  DiracConstruction c;
  c.grid = grid;
  c.r = u.r;
  c.u1 = u.u1;
  c.u2 = u.u2;
  c.du1 = u.du1;
  c.du2 = u.du2;
  for (auto* v : {&c.v1, &c.v2, &c.w1, &c.w2, &c.phi_sc, &c.phi_am, &c.phi_el}) v->resize(n);
  for (int i = 0; i < n; ++i) {
    double r = c.r[i];
    Eigen::Matrix2d E = dirac_exp_rM(spec.m, spec.lambda, r);
    Eigen::Vector2d v = E * Eigen::Vector2d(c.u1[i], c.u2[i]);
    Eigen::Vector2d y = E * Eigen::Vector2d(c.du1[i], c.du2[i]);
    // w = i sigma_2 y with i sigma_2 = [[0, 1], [-1, 0]]
    double w1 = y[1], w2 = -y[0];
    double nv = v.squaredNorm();
    if (!(nv > 1e-300) || !std::isfinite(nv))
      throw ComputeError("dirac_solve_potential: v1^2 + v2^2 underflows");
    double e = eval_phi_el(spec.phi_el, r);
    c.v1[i] = v[0];
    c.v2[i] = v[1];
    c.w1[i] = w1;
    c.w2[i] = w2;
    c.phi_el[i] = e;
    c.phi_sc[i] = (v[0] * w1 - v[1] * w2) / nv + (v[1] * v[1] - v[0] * v[0]) / nv * e;
    c.phi_am[i] = (v[0] * w2 + v[1] * w1) / nv - 2.0 * v[0] * v[1] / nv * e - spec.kappa_rho / r;
  }
  c.f1 = c.v1;
  c.f2 = c.v2;
  c.residual_max = dirac_residual(c, spec);
  return c;
}

double dirac_residual(const DiracConstruction& c, const DiracChannelSpec& spec) {
  const double m = spec.m, lam = spec.lambda;
  Eigen::Matrix2d M = dirac_M(m, lam);
  double worst = 0.0;
  for (Eigen::Index i = 1; i + 1 < c.r.size(); ++i) {
    double r = c.r[i];
    Eigen::Vector2d f(c.f1[i], c.f2[i]);
    Eigen::Vector2d df = M * f + dirac_exp_rM(m, lam, r) * Eigen::Vector2d(c.du1[i], c.du2[i]);
    double a = c.phi_sc[i], e = c.phi_el[i], b = spec.kappa_rho / r + c.phi_am[i];
    double row1 = (m + a + e - lam) * f[0] - df[1] + b * f[1];
    double row2 = df[0] + b * f[0] + (-m - a + e - lam) * f[1];
    worst = std::max(worst, std::hypot(row1, row2));
  }
  return worst;
}

DiracLimits dirac_check_limits(const DiracConstruction& c) {
  DiracLimits L;
  const Eigen::Index n = c.r.size();
  auto extrapolate = [&](const Eigen::VectorXd& y) {
    return y[0] - c.r[0] * (y[1] - y[0]) / (c.r[1] - c.r[0]);
  };
  L.phi_sc_first = c.phi_sc[0];
  L.phi_am_first = c.phi_am[0];
  L.phi_sc_zero = extrapolate(c.phi_sc);
  L.phi_am_zero = extrapolate(c.phi_am);
  L.finite_at_zero = std::isfinite(L.phi_sc_zero) && std::isfinite(L.phi_am_zero) &&
                     std::abs(L.phi_sc_zero) < 1e6 && std::abs(L.phi_am_zero) < 1e6;
  double R = c.r[n - 1];
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = std::max(std::abs(c.phi_sc[i]), std::abs(c.phi_am[i]));
    if (c.r[i] >= 0.5 * R) L.max_far = std::max(L.max_far, v);
    else if (c.r[i] >= 0.25 * R) L.max_mid = std::max(L.max_mid, v);
  }
  L.decays = L.max_far < L.max_mid;
  L.derivative_ratio_end = std::hypot(c.du1[n - 1], c.du2[n - 1]) / std::hypot(c.u1[n - 1], c.u2[n - 1]);
  L.phi_el_zero = extrapolate(c.phi_el);
  L.phi_el_end = c.phi_el[n - 1];
  return L;
}

void write_csv(std::ostream& os, const DiracConstruction& c) {
  os << "r,u1,u2,v1,v2,w1,w2,phi_sc,phi_am,phi_el,f1,f2\n" << std::setprecision(12);
  for (Eigen::Index i = 0; i < c.r.size(); ++i) {
    os << c.r[i] << ',' << c.u1[i] << ',' << c.u2[i] << ',' << c.v1[i] << ',' << c.v2[i] << ',' << c.w1[i]
       << ',' << c.w2[i] << ',' << c.phi_sc[i] << ',' << c.phi_am[i] << ',' << c.phi_el[i] << ','
       << c.f1[i] << ',' << c.f2[i] << '\n';
  }
}

void write_csv(std::ostream& os, const KgConstruction& c) {
  os << "x,h,k,f,V\n" << std::setprecision(12);
  for (Eigen::Index i = 0; i < c.x.size(); ++i)
    os << c.x[i] << ',' << c.h[i] << ',' << c.k_fn[i] << ',' << c.f[i] << ',' << c.V[i] << '\n';
}

nlohmann::json summary_json(const DiracConstruction& c, const DiracLimits& lim) {
  return {{"residual_max", c.residual_max},
          {"grid", c.grid},
          {"limits",
           {{"phi_sc_first", lim.phi_sc_first},
            {"phi_am_first", lim.phi_am_first},
            {"phi_sc_zero", lim.phi_sc_zero},
            {"phi_am_zero", lim.phi_am_zero},
            {"finite_at_zero", lim.finite_at_zero},
            {"max_far", lim.max_far},
            {"max_mid", lim.max_mid},
            {"decays", lim.decays},
            {"derivative_ratio_end", lim.derivative_ratio_end},
            {"phi_el_zero", lim.phi_el_zero},
            {"phi_el_end", lim.phi_el_end}}}};
}

nlohmann::json summary_json(const KgConstruction& c) {
  return {{"m", c.m},
          {"lambda", c.lambda},
          {"residual_max", c.residual_max},
          {"oracle_gap", c.oracle_gap},
          {"decay_constant", c.decay_constant},
          {"fitted_points", c.fitted_points},
          {"k_sign_changes", c.k_sign_changes},
          {"k_min", c.k_min},
          {"interior_fraction", c.interior_fraction},
          {"grid", c.grid}};
}

void to_json(nlohmann::json& j, const DiracChannelSpec& s) {
  j = {{"m", s.m},
       {"lambda", s.lambda},
       {"kappa_rho", s.kappa_rho},
       {"u_decay", s.u_decay},
       {"match_radius", s.match_radius},
       {"phi_el", s.phi_el == PhiElKind::zero ? "zero" : "bracket_inverse"}};
}

void from_json(const nlohmann::json& j, DiracChannelSpec& s) {
  s.m = j.value("m", 1.0);
  s.lambda = j.value("lambda", 1.5);
  s.kappa_rho = j.value("kappa_rho", 1);
  s.u_decay = j.value("u_decay", 1.0);
  s.match_radius = j.value("match_radius", 1.0);
  std::string el = j.value("phi_el", std::string("bracket_inverse"));
  if (el == "zero") s.phi_el = PhiElKind::zero;
  else if (el == "bracket_inverse") s.phi_el = PhiElKind::bracket_inverse;
  else throw ValidationError("phi_el is 'bracket_inverse' or 'zero'");
}

}  // namespace oscilab
