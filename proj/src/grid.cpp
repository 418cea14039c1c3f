#include "oscilab/grid.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace oscilab {

double Grid1D::step() const {
  switch (kind) {
    case GridKind::line:
      return 2.0 * L / (n + 1);
    case GridKind::halfline:
      return L / (n + 1);
    case GridKind::periodic:
      return 2.0 * L / n;
  }
  return 0.0;
}

double Grid1D::x(int i) const {
  double h = step();
  switch (kind) {
    case GridKind::line:
      return -L + (i + 1) * h;
    case GridKind::halfline:
      return (i + 1) * h;
    case GridKind::periodic:
      return -L + i * h;
  }
  return 0.0;
}

Eigen::VectorXd Grid1D::points() const {
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = x(i);
  return out;
}

Grid1D line_grid(double L, int n) { return {GridKind::line, L, n, Boundary::dirichlet}; }
Grid1D halfline_grid(double L, int n) { return {GridKind::halfline, L, n, Boundary::dirichlet}; }
Grid1D periodic_grid(double L, int n) { return {GridKind::periodic, L, n, Boundary::periodic}; }

Grid1D line_grid_step(double L, double h) {
  return line_grid(L, static_cast<int>(std::lround(2.0 * L / h)) - 1);
}
Grid1D halfline_grid_step(double L, double h) {
  return halfline_grid(L, static_cast<int>(std::lround(L / h)) - 1);
}
Grid1D periodic_grid_step(double L, double h) {
  return periodic_grid(L, static_cast<int>(std::lround(2.0 * L / h)));
}

void validate(const Grid1D& g) {
  require(std::isfinite(g.L) && g.L > 0.0, "grid L > 0");
  require(g.n >= 16, "grid n >= 16");
  require((g.kind == GridKind::periodic) == (g.boundary == Boundary::periodic),
          "periodic boundary iff periodic grid");
}

bool same_grid(const Grid1D& a, const Grid1D& b) {
  return a.kind == b.kind && a.L == b.L && a.n == b.n && a.boundary == b.boundary;
}

Eigen::VectorXd fourier_frequencies(const Grid1D& g) {
  Eigen::VectorXd xi(g.n);
  double dxi = std::numbers::pi / g.L;
  for (int j = 0; j < g.n; ++j) xi[j] = (j <= g.n / 2 ? j : j - g.n) * dxi;
  return xi;
}

Eigen::VectorXcd apply_multiplier(const Grid1D& g, const Eigen::VectorXcd& f,
                                  const std::function<double(double)>& m) {
  require(g.kind == GridKind::periodic, "Fourier multipliers need a periodic grid");
  require(f.size() == g.n, "vector length matches grid");
  Eigen::FFT<double> fft;
  std::vector<cd> in(f.data(), f.data() + f.size()), freq, out;
  fft.fwd(freq, in);
  Eigen::VectorXd xi = fourier_frequencies(g);
  for (int j = 0; j < g.n; ++j) freq[j] *= m(xi[j]);
  fft.inv(out, freq);
  return Eigen::Map<Eigen::VectorXcd>(out.data(), g.n);
}

Eigen::VectorXd apply_multiplier(const Grid1D& g, const Eigen::VectorXd& f,
                                 const std::function<double(double)>& m) {
  return apply_multiplier(g, Eigen::VectorXcd(f.cast<cd>()), m).real();
}

namespace {
const char* kind_name(GridKind k) {
  switch (k) {
    case GridKind::line:
      return "line";
    case GridKind::halfline:
      return "halfline";
    case GridKind::periodic:
      return "periodic";
  }
  return "line";
}
}  // namespace

void to_json(nlohmann::json& j, const Grid1D& g) {
  j = nlohmann::json{{"kind", kind_name(g.kind)}, {"L", g.L}, {"n", g.n}, {"step", g.step()}};
}

void from_json(const nlohmann::json& j, Grid1D& g) {
  std::string kind = j.value("kind", std::string("line"));
  double L = j.at("L").get<double>();
  auto make = [&](int n) {
    if (kind == "line") return line_grid(L, n);
    if (kind == "halfline") return halfline_grid(L, n);
    if (kind == "periodic") return periodic_grid(L, n);
    throw ValidationError("grid kind recognized (got '" + kind + "')");
  };
  if (j.contains("n")) {
    g = make(j.at("n").get<int>());
  } else {
    double h = j.at("step").get<double>();
    require(h > 0.0, "grid step > 0");
    if (kind == "line") g = line_grid_step(L, h);
    else if (kind == "halfline") g = halfline_grid_step(L, h);
    else if (kind == "periodic") g = periodic_grid_step(L, h);
    else throw ValidationError("grid kind recognized (got '" + kind + "')");
  }
}

}  // namespace oscilab
