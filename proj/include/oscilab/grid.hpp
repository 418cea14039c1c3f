#pragma once

#include <functional>

#include <Eigen/Core>

#include "json.hpp"
#include "oscilab/common.hpp"

namespace oscilab {

enum class GridKind { line, halfline, periodic };
enum class Boundary { dirichlet, periodic };

// line:     x_i = -L + (i+1) h,  h = 2L/(n+1), Dirichlet at +-L
// halfline: x_i = (i+1) h,       h = L/(n+1),  Dirichlet at 0 and L
// periodic: x_i = -L + i h,      h = 2L/n
struct Grid1D {
  GridKind kind = GridKind::line;
  double L = 1.0;
  int n = 16;
  Boundary boundary = Boundary::dirichlet;

  double step() const;
  double x(int i) const;
  Eigen::VectorXd points() const;
};

Grid1D line_grid(double L, int n);
Grid1D halfline_grid(double L, int n);
Grid1D periodic_grid(double L, int n);

// Same families, with n chosen so the spacing is as close to h as the box allows.
Grid1D line_grid_step(double L, double h);
Grid1D halfline_grid_step(double L, double h);
Grid1D periodic_grid_step(double L, double h);

void validate(const Grid1D& g);
bool same_grid(const Grid1D& a, const Grid1D& b);

// Angular frequencies of the discrete Fourier basis, in FFT order; Nyquist taken as +pi/h.
Eigen::VectorXd fourier_frequencies(const Grid1D& g);

// m(P) f on a periodic grid. m must be even for a real result.
Eigen::VectorXd apply_multiplier(const Grid1D& g, const Eigen::VectorXd& f,
                                 const std::function<double(double)>& m);
Eigen::VectorXcd apply_multiplier(const Grid1D& g, const Eigen::VectorXcd& f,
                                  const std::function<double(double)>& m);

void to_json(nlohmann::json& j, const Grid1D& g);
void from_json(const nlohmann::json& j, Grid1D& g);

}  // namespace oscilab
