#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace oscilab {

using cd = std::complex<double>;

// Thrown when an input violates a documented invariant; what() names it.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& invariant) : std::runtime_error(invariant) {}
};

// Thrown when a numerical step cannot produce a trustworthy value.
struct ComputeError : std::runtime_error {
  explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const char* invariant) {
  if (!ok) throw ValidationError(invariant);
}

// <t> = (1 + t^2)^{1/2}
template <class Scalar>
inline Scalar bracket(Scalar t) {
  using std::sqrt;
  return sqrt(Scalar(1) + t * t);
}

// 0 at t <= 0, 1 at t >= 1, C^2 in between.
template <class Scalar>
inline Scalar smoothstep5(Scalar t) {
  if (t <= Scalar(0)) return Scalar(0);
  if (t >= Scalar(1)) return Scalar(1);
  return t * t * t * (Scalar(10) + t * (Scalar(-15) + Scalar(6) * t));
}

template <class Scalar>
inline Scalar smoothstep5_deriv(Scalar t) {
  if (t <= Scalar(0) || t >= Scalar(1)) return Scalar(0);
  Scalar u = t * (Scalar(1) - t);
  return Scalar(30) * u * u;
}

// Worker count: explicit override, else OSCILAB_THREADS, else hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [0, n) on thread_count() workers. Results must be written
// to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace oscilab
