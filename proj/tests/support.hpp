// Independent reference implementations used only by the tests.

#ifndef NIP_TESTS_SUPPORT_HPP
#define NIP_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nip/nip.hpp"

namespace nip::testing {

struct RandomInstance {
  Vector x0;
  std::vector<Halfspace> halfspaces;
};

/// n in [1, 5], k in [1, 6], Gaussian normals, offsets in [-1, 1].
inline RandomInstance random_instance(Rng& rng)
{
  const auto n = static_cast<Eigen::Index>(1 + static_cast<int>(rng.uniform() * 5));
  const auto k = static_cast<std::size_t>(1 + static_cast<int>(rng.uniform() * 6));
  RandomInstance inst;
  inst.x0.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) inst.x0[i] = 2.0 * rng.normal();
  for (std::size_t j = 0; j < k; ++j) {
    Vector a(n);
    for (Eigen::Index i = 0; i < n; ++i) a[i] = rng.normal();
    inst.halfspaces.emplace_back(a, rng.uniform(-1.0, 1.0));
  }
  return inst;
}

/// Projection onto {a_j . x <= b_j} by enumerating every active subset,
/// solving the equality-constrained least-squares problem for it with a
/// full-pivot LU on the Gram matrix, and keeping the point that satisfies
/// all KKT conditions. nullopt when no subset yields a feasible KKT point.
inline std::optional<Vector> brute_force_projection(const Vector& x0, const std::vector<Halfspace>& hs)
{
  const std::size_t k = hs.size();
  const Eigen::Index n = x0.size();
  std::optional<Vector> best;
  double best_dist = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t j = 0; j < k; ++j) {
      if (mask & (1u << j)) subset.push_back(j);
    }
    if (static_cast<Eigen::Index>(subset.size()) > n) continue;

    Vector x = x0;
    if (!subset.empty()) {
      const auto m = static_cast<Eigen::Index>(subset.size());
      Matrix N(n, m);
      Vector b(m);
      for (Eigen::Index c = 0; c < m; ++c) {
        N.col(c) = hs[subset[static_cast<std::size_t>(c)]].normal();
        b[c] = hs[subset[static_cast<std::size_t>(c)]].offset();
      }
      const Matrix G = N.transpose() * N;
      Eigen::FullPivLU<Matrix> lu(G);
      lu.setThreshold(1e-10);
      if (lu.rank() < m) continue;
      const Vector lambda = lu.solve(N.transpose() * x0 - b);
      bool dual_ok = true;
      for (Eigen::Index c = 0; c < m; ++c) {
        if (lambda[c] < -1e-10) dual_ok = false;
      }
      if (!dual_ok) continue;
      x = x0 - N * lambda;
    }
    bool primal_ok = true;
    for (const auto& h : hs) {
      if (h.scaled_violation(x) > 1e-9) primal_ok = false;
    }
    if (!primal_ok) continue;
    const double dist = (x - x0).norm();
    if (!best || dist < best_dist) {
      best = x;
      best_dist = dist;
    }
  }
  return best;
}

/// The unit-ball run reduced to its radius: r <- r - (eps_i + r^2 - 1) / (2 r)
/// until r^2 - 1 <= 0. Returns the index of the first feasible iterate.
inline std::optional<std::size_t> radial_reference_iterations(double r0, double eps0, std::size_t max_iter)
{
  double r = r0;
  for (std::size_t i = 0; i <= max_iter; ++i) {
    const double f = r * r - 1.0;
    if (f <= 0.0) return i;
    const double eps = eps0 / static_cast<double>(i + 1);
    r = r - (eps + f) / (2.0 * r);
  }
  return std::nullopt;
}

/// (1.5, sqrt(1.75)): the point with first coordinate 1.5 on the boundary of
/// the feasible set of ProblemSpec::default_nonconvex().
inline Vector nonconvex_boundary_point()
{
  Vector p(2);
  p << 1.5, std::sqrt(1.75);
  return p;
}

inline Vector vec(std::initializer_list<double> values)
{
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

} // namespace nip::testing

#endif // NIP_TESTS_SUPPORT_HPP
