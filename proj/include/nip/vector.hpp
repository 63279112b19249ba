#ifndef NIP_VECTOR_HPP
#define NIP_VECTOR_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "nip/error.hpp"

namespace nip {

/// A point of R^n. Iterates, subgradients and normals all use this type.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool all_finite(const Vector& v)
{
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

/// Throws unless `v` is a nonempty finite vector.
inline void require_valid(const Vector& v, const char* what)
{
  if (v.size() < 1) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " has dimension 0");
  }
  if (!all_finite(v)) {
    throw Error(ErrorCode::NonFinite, std::string(what) + " has a non-finite entry");
  }
}

inline void require_dim(const Vector& v, Eigen::Index dim, const char* what)
{
  if (v.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " has dimension " + std::to_string(v.size()) +
                  ", expected " + std::to_string(dim));
  }
}

/// Seeded random draws with fixed conversions from the raw 64-bit engine
/// output, so that results do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller; the second variate is cached.
  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform direction on the unit sphere of R^dim.
  Vector direction(Eigen::Index dim)
  {
    Vector d(dim);
    double norm = 0.0;
    do {
      for (Eigen::Index i = 0; i < dim; ++i) d[i] = normal();
      norm = d.norm();
    } while (norm == 0.0);
    return d / norm;
  }

  /// Uniform in the closed ball B(center, radius).
  Vector in_ball(const Vector& center, double radius)
  {
    const Eigen::Index dim = center.size();
    const Vector d = direction(dim);
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(dim));
    return center + r * d;
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace nip

#endif // NIP_VECTOR_HPP
