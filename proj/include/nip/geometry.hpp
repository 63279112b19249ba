#ifndef NIP_GEOMETRY_HPP
#define NIP_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nip/error.hpp"
#include "nip/vector.hpp"

namespace nip {

/// Absolute tolerance on the scaled violation (<a,x> - b) / ||a||.
inline constexpr double kFeasibilityTol = 1e-10;
/// Multipliers below this are treated as zero.
inline constexpr double kMultiplierTol = 1e-12;

/// The closed halfspace {x : <normal, x> <= offset}.
class Halfspace {
public:
  Halfspace(Vector normal, double offset) : normal_(std::move(normal)), offset_(offset)
  {
    require_valid(normal_, "halfspace normal");
    if (!std::isfinite(offset_)) {
      throw Error(ErrorCode::NonFinite, "halfspace offset is not finite");
    }
    norm_ = normal_.norm();
    if (!(norm_ > 0.0)) {
      throw Error(ErrorCode::ZeroNormal, "halfspace normal is zero");
    }
  }

  const Vector& normal() const { return normal_; }
  double offset() const { return offset_; }
  double normal_norm() const { return norm_; }
  Eigen::Index dim() const { return normal_.size(); }

  /// Unscaled violation <a, x> - b.
  double residual(const Vector& x) const { return normal_.dot(x) - offset_; }

  /// Signed distance of x past the bounding hyperplane.
  double scaled_violation(const Vector& x) const { return residual(x) / norm_; }

  bool contains(const Vector& x, double tol = 0.0) const { return scaled_violation(x) <= tol; }

private:
  Vector normal_;
  double offset_;
  double norm_;
};

/// A finite intersection of halfspaces sharing one dimension.
class CutPolyhedron {
public:
  explicit CutPolyhedron(std::vector<Halfspace> halfspaces) : halfspaces_(std::move(halfspaces))
  {
    if (halfspaces_.empty()) {
      throw Error(ErrorCode::InvalidArgument, "polyhedron needs at least one halfspace");
    }
    dim_ = halfspaces_.front().dim();
    for (const auto& h : halfspaces_) {
      if (h.dim() != dim_) {
        throw Error(ErrorCode::DimensionMismatch, "halfspaces of a polyhedron differ in dimension");
      }
    }
  }

  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  const Halfspace& operator[](std::size_t j) const { return halfspaces_[j]; }
  std::size_t size() const { return halfspaces_.size(); }
  Eigen::Index dim() const { return dim_; }

  /// Largest scaled violation over all halfspaces.
  double max_violation(const Vector& x) const
  {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& h : halfspaces_) worst = std::max(worst, h.scaled_violation(x));
    return worst;
  }

  bool contains(const Vector& x, double tol = 0.0) const { return max_violation(x) <= tol; }

private:
  std::vector<Halfspace> halfspaces_;
  Eigen::Index dim_ = 0;
};

struct ProjectionResult {
  Vector point;
  /// Indices of the constraints carrying a multiplier, ascending.
  std::vector<std::size_t> active_set;
  /// One nonnegative multiplier per entry of active_set.
  std::vector<double> multipliers;
  /// True when x0 already belonged to the polyhedron.
  bool feasible = false;
};

/// Nearest point of h to x0: x0 - max(0, <a,x0> - b) / ||a||^2 * a.
inline Vector project_halfspace(const Vector& x0, const Halfspace& h)
{
  require_dim(x0, h.dim(), "point");
  const double r = h.residual(x0);
  if (r <= 0.0) return x0;
  return x0 - (r / h.normal().squaredNorm()) * h.normal();
}

/// Euclidean projection of x0 onto P by a dual active-set method.
///
/// Starts from the unconstrained minimizer x0 and repeatedly adds the most
/// violated constraint (lowest index on ties). Each addition moves along the
/// direction that keeps the current active constraints tight; when an active
/// multiplier would turn negative first, that constraint is dropped and the
/// addition continues. An added normal that lies in the span of the active
/// normals with no droppable constraint certifies P is empty.
///
/// Throws InfeasiblePolyhedron when P is empty.
inline ProjectionResult project_polyhedron(const Vector& x0, const CutPolyhedron& P,
                                           double tol = kFeasibilityTol)
{
  require_dim(x0, P.dim(), "point");
  require_valid(x0, "point");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");

  const std::size_t k = P.size();
  const Eigen::Index n = P.dim();

  Vector x = x0;
  std::vector<std::size_t> active;
  std::vector<double> lambda;
  std::vector<char> is_active(k, 0);

  ProjectionResult result;
  result.feasible = P.contains(x0, tol);

  auto remove_active = [&](std::size_t pos) {
    is_active[active[pos]] = 0;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(pos));
    lambda.erase(lambda.begin() + static_cast<std::ptrdiff_t>(pos));
  };

  const std::size_t max_rounds = 50 * (k + static_cast<std::size_t>(n)) + 100;
  std::size_t rounds = 0;

  while (true) {
    std::size_t p = k;
    double worst = tol;
    for (std::size_t j = 0; j < k; ++j) {
      if (is_active[j]) continue;
      const double v = P[j].scaled_violation(x);
      if (v > worst) {
        worst = v;
        p = j;
      }
    }
    if (p == k) break;

    const Vector& ap = P[p].normal();
    const double ap_norm = P[p].normal_norm();
    double up = 0.0;

    while (true) {
      if (++rounds > max_rounds) {
        throw Error(ErrorCode::NumericalFailure, "projection active-set iteration did not settle");
      }
      const std::size_t m = active.size();
      Vector r(static_cast<Eigen::Index>(m));
      Vector z = -ap;
      if (m > 0) {
        Matrix N(n, static_cast<Eigen::Index>(m));
        for (std::size_t c = 0; c < m; ++c) N.col(static_cast<Eigen::Index>(c)) = P[active[c]].normal();
        r = N.colPivHouseholderQr().solve(ap);
        z += N * r;
      }

      // Partial step limit: first active multiplier reaching zero.
      std::size_t drop = m;
      double t_drop = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < m; ++c) {
        const double scale = ap_norm / P[active[c]].normal_norm();
        if (r[static_cast<Eigen::Index>(c)] > kMultiplierTol * scale) {
          const double t = lambda[c] / r[static_cast<Eigen::Index>(c)];
          if (t < t_drop) {
            t_drop = t;
            drop = c;
          }
        }
      }

      const double z_norm = z.norm();
      const bool dependent = z_norm <= 1e-10 * ap_norm;
      if (dependent) {
        if (drop == m) {
          throw Error(ErrorCode::InfeasiblePolyhedron,
                      "constraint " + std::to_string(p) + " conflicts with the active constraints");
        }
        for (std::size_t c = 0; c < m; ++c) lambda[c] -= t_drop * r[static_cast<Eigen::Index>(c)];
        up += t_drop;
        remove_active(drop);
        continue;
      }

      const double s = P[p].residual(x);
      const double t_full = std::max(0.0, s) / z.squaredNorm();
      if (drop < m && t_drop < t_full) {
        x += t_drop * z;
        for (std::size_t c = 0; c < m; ++c) lambda[c] -= t_drop * r[static_cast<Eigen::Index>(c)];
        up += t_drop;
        remove_active(drop);
        continue;
      }

      x += t_full * z;
      for (std::size_t c = 0; c < m; ++c) lambda[c] -= t_full * r[static_cast<Eigen::Index>(c)];
      up += t_full;
      active.push_back(p);
      lambda.push_back(up);
      is_active[p] = 1;
      break;
    }
  }

  std::vector<std::size_t> order(active.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return active[a] < active[b]; });
  for (std::size_t c : order) {
    result.active_set.push_back(active[c]);
    result.multipliers.push_back(lambda[c] > 0.0 ? lambda[c] : 0.0);
  }
  result.point = std::move(x);
  return result;
}

struct VariationalInequalityReport {
  /// max over sampled y of <x0 - x1, y - x1>.
  double max_violation = 0.0;
  /// max over sampled y of the same quantity divided by 1 + ||x0 - x1|| ||y - x1||.
  double max_relative_violation = 0.0;
  std::size_t samples = 0;
};

namespace detail {

/// A point with every constraint slack by at least some margin, found by
/// projecting `near` onto shrunken copies of P. Empty when P has no interior
/// at the probed margins.
inline std::optional<Vector> interior_point(const CutPolyhedron& P, const Vector& near, double scale)
{
  for (int halvings = 0; halvings < 48; ++halvings) {
    const double margin = scale * std::ldexp(1.0, -halvings);
    std::vector<Halfspace> shrunk;
    shrunk.reserve(P.size());
    for (const auto& h : P.halfspaces()) shrunk.emplace_back(h.normal(), h.offset() - margin * h.normal_norm());
    try {
      auto proj = project_polyhedron(near, CutPolyhedron(std::move(shrunk)));
      if (P.max_violation(proj.point) < 0.0) return proj.point;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasiblePolyhedron) throw;
    }
  }
  return std::nullopt;
}

} // namespace detail

/// Samples feasible points y of P and reports the largest value of
/// <x0 - x1, y - x1>, which is nonpositive for an exact projection x1.
///
/// Half the samples come from rejection sampling at log-uniform radii around
/// x1, the rest from a hit-and-run walk started at an interior point of P.
/// Throws NoFeasibleSampleFound if no feasible y turns up within the attempt
/// budget.
inline VariationalInequalityReport check_variational_inequality(const Vector& x0,
                                                                const ProjectionResult& result,
                                                                const CutPolyhedron& P,
                                                                std::size_t samples, std::uint64_t seed)
{
  require_dim(x0, P.dim(), "point");
  require_dim(result.point, P.dim(), "projection");
  if (samples == 0) throw Error(ErrorCode::InvalidArgument, "samples must be positive");

  const Vector& x1 = result.point;
  const Vector gap = x0 - x1;
  const Eigen::Index n = P.dim();
  const double radius = std::max({1.0, gap.norm(), 0.1 * x1.norm()});

  Rng rng(seed);
  VariationalInequalityReport report;
  report.max_violation = -std::numeric_limits<double>::infinity();
  report.max_relative_violation = -std::numeric_limits<double>::infinity();

  auto record = [&](const Vector& y) {
    const Vector dy = y - x1;
    const double v = gap.dot(dy);
    report.max_violation = std::max(report.max_violation, v);
    report.max_relative_violation = std::max(report.max_relative_violation, v / (1.0 + gap.norm() * dy.norm()));
    ++report.samples;
  };

  const std::size_t local_target = (samples + 1) / 2;
  const std::size_t attempt_budget = 200 * samples + 1000;
  std::size_t attempts = 0;
  while (report.samples < local_target && attempts < attempt_budget) {
    ++attempts;
    const double r = radius * std::pow(10.0, -6.0 * rng.uniform());
    const Vector y = x1 + r * rng.direction(n);
    if (P.contains(y)) record(y);
  }

  if (report.samples < samples) {
    if (auto start = detail::interior_point(P, x1, radius)) {
      Vector y = *start;
      const double walk_radius = std::max(radius, 2.0 * (y - x1).norm());
      record(y);
      while (report.samples < samples) {
        const Vector d = rng.direction(n);
        // Chord of P intersected with B(x1, walk_radius) through y along d.
        const Vector w = y - x1;
        const double bd = w.dot(d);
        const double disc = bd * bd - (w.squaredNorm() - walk_radius * walk_radius);
        double lo = -bd - std::sqrt(std::max(0.0, disc));
        double hi = -bd + std::sqrt(std::max(0.0, disc));
        for (const auto& h : P.halfspaces()) {
          const double ad = h.normal().dot(d);
          const double slack = -h.residual(y);
          if (ad > 0.0) hi = std::min(hi, slack / ad);
          else if (ad < 0.0) lo = std::max(lo, slack / ad);
        }
        if (hi > lo) {
          const Vector candidate = y + rng.uniform(lo, hi) * d;
          if (P.contains(candidate)) y = candidate;
        }
        record(y);
      }
    }
  }

  if (report.samples == 0) {
    throw Error(ErrorCode::NoFeasibleSampleFound,
                "no feasible sample after " + std::to_string(attempts) + " attempts");
  }
  return report;
}

} // namespace nip

#endif // NIP_GEOMETRY_HPP
