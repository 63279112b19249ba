#ifndef NIP_ORACLE_HPP
#define NIP_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nip/error.hpp"
#include "nip/geometry.hpp"
#include "nip/vector.hpp"

namespace nip {

enum class ProblemKind { Ball, MaxAffine, MaxQuadratics, SipDistance, ShiftedBallInfeasible };

inline std::string_view to_string(ProblemKind kind)
{
  switch (kind) {
  case ProblemKind::Ball: return "ball";
  case ProblemKind::MaxAffine: return "max_affine";
  case ProblemKind::MaxQuadratics: return "max_quadratics";
  case ProblemKind::SipDistance: return "sip_distance";
  case ProblemKind::ShiftedBallInfeasible: return "shifted_ball_infeasible";
  }
  return "unknown";
}

inline std::optional<ProblemKind> problem_kind_from_string(std::string_view name)
{
  for (auto kind : {ProblemKind::Ball, ProblemKind::MaxAffine, ProblemKind::MaxQuadratics,
                    ProblemKind::SipDistance, ProblemKind::ShiftedBallInfeasible}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

/// f(x) = ||x - center||^2 - radius^2.
struct BallParams {
  Vector center;
  double radius = 1.0;
};

/// f(x) = max_j <normals[j], x> + offsets[j].
struct MaxAffineParams {
  std::vector<Vector> normals;
  std::vector<double> offsets;
};

/// One piece 1/2 x'Hx + <linear, x> + constant.
struct QuadraticPiece {
  Matrix hessian;
  Vector linear;
  double constant = 0.0;
};

/// f(x) = max over pieces.
struct MaxQuadraticsParams {
  std::vector<QuadraticPiece> pieces;
};

struct BallBody {
  Vector center;
  double radius = 1.0;
};

/// A closed convex set K_i of a set-intersection instance.
class ConvexBody {
public:
  static ConvexBody ball(Vector center, double radius)
  {
    require_valid(center, "ball center");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
    }
    return ConvexBody(BallBody{std::move(center), radius});
  }

  static ConvexBody halfspace(Vector normal, double offset)
  {
    return ConvexBody(Halfspace(std::move(normal), offset));
  }

  bool is_ball() const { return std::holds_alternative<BallBody>(body_); }
  const BallBody& as_ball() const { return std::get<BallBody>(body_); }
  const Halfspace& as_halfspace() const { return std::get<Halfspace>(body_); }

  Eigen::Index dim() const { return is_ball() ? as_ball().center.size() : as_halfspace().dim(); }

  Vector project(const Vector& x) const
  {
    if (is_ball()) {
      const auto& b = as_ball();
      const Vector w = x - b.center;
      const double r = w.norm();
      if (r <= b.radius) return x;
      return b.center + (b.radius / r) * w;
    }
    return project_halfspace(x, as_halfspace());
  }

  double distance(const Vector& x) const
  {
    if (is_ball()) {
      const auto& b = as_ball();
      return std::max(0.0, (x - b.center).norm() - b.radius);
    }
    return std::max(0.0, as_halfspace().scaled_violation(x));
  }

private:
  explicit ConvexBody(std::variant<BallBody, Halfspace> body) : body_(std::move(body)) {}

  std::variant<BallBody, Halfspace> body_;
};

/// f(x) = max_i d(x, K_i); zero exactly on the intersection of the bodies.
struct SipDistanceParams {
  std::vector<ConvexBody> bodies;
};

/// f(x) = ||x - center||^2 + shift with shift > 0; never feasible.
struct ShiftedBallParams {
  Vector center;
  double shift = 1.0;
};

/// An instance of the inequality problem f(x) <= 0.
class ProblemSpec {
public:
  using Params = std::variant<BallParams, MaxAffineParams, MaxQuadraticsParams, SipDistanceParams,
                              ShiftedBallParams>;

  static ProblemSpec ball(Vector center, double radius)
  {
    require_valid(center, "center");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw Error(ErrorCode::InvalidArgument, "radius must be positive");
    }
    const auto dim = center.size();
    return ProblemSpec(dim, BallParams{std::move(center), radius});
  }

  /// The unit-ball instance ||x||^2 - 1 on R^dim.
  static ProblemSpec unit_ball(Eigen::Index dim) { return ball(Vector::Zero(dim), 1.0); }

  static ProblemSpec max_affine(std::vector<Vector> normals, std::vector<double> offsets)
  {
    if (normals.empty()) throw Error(ErrorCode::InvalidArgument, "max_affine needs at least one piece");
    if (normals.size() != offsets.size()) {
      throw Error(ErrorCode::DimensionMismatch, "max_affine normals and offsets differ in count");
    }
    const auto dim = normals.front().size();
    for (const auto& a : normals) {
      require_valid(a, "normal");
      require_dim(a, dim, "normal");
    }
    for (double c : offsets) {
      if (!std::isfinite(c)) throw Error(ErrorCode::NonFinite, "max_affine offset is not finite");
    }
    return ProblemSpec(dim, MaxAffineParams{std::move(normals), std::move(offsets)});
  }

  static ProblemSpec max_quadratics(std::vector<QuadraticPiece> pieces)
  {
    if (pieces.empty()) throw Error(ErrorCode::InvalidArgument, "max_quadratics needs at least one piece");
    const auto dim = pieces.front().linear.size();
    for (auto& q : pieces) {
      require_valid(q.linear, "linear term");
      require_dim(q.linear, dim, "linear term");
      if (q.hessian.rows() != dim || q.hessian.cols() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "hessian must be dim x dim");
      }
      if (!q.hessian.allFinite() || !std::isfinite(q.constant)) {
        throw Error(ErrorCode::NonFinite, "quadratic piece has a non-finite coefficient");
      }
      q.hessian = (0.5 * (q.hessian + q.hessian.transpose())).eval();
    }
    return ProblemSpec(dim, MaxQuadraticsParams{std::move(pieces)});
  }

  /// max(x2 - x1^2, ||x||^2 - 4) on R^2: a nonconvex lower-C1 instance whose
  /// feasible set is {x2 <= x1^2} intersected with the disc of radius 2.
  static ProblemSpec default_nonconvex()
  {
    QuadraticPiece parabola{Matrix::Zero(2, 2), Vector::Zero(2), 0.0};
    parabola.hessian(0, 0) = -2.0;
    parabola.linear[1] = 1.0;
    QuadraticPiece disc{2.0 * Matrix::Identity(2, 2), Vector::Zero(2), -4.0};
    return max_quadratics({parabola, disc});
  }

  static ProblemSpec sip_distance(std::vector<ConvexBody> bodies)
  {
    if (bodies.empty()) throw Error(ErrorCode::InvalidArgument, "sip_distance needs at least one body");
    const auto dim = bodies.front().dim();
    for (const auto& b : bodies) {
      if (b.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "bodies differ in dimension");
    }
    return ProblemSpec(dim, SipDistanceParams{std::move(bodies)});
  }

  static ProblemSpec shifted_ball_infeasible(Vector center, double shift = 1.0)
  {
    require_valid(center, "center");
    if (!(shift > 0.0) || !std::isfinite(shift)) {
      throw Error(ErrorCode::InvalidArgument, "shift must be positive");
    }
    const auto dim = center.size();
    return ProblemSpec(dim, ShiftedBallParams{std::move(center), shift});
  }

  ProblemKind kind() const { return static_cast<ProblemKind>(params_.index()); }
  Eigen::Index dim() const { return dim_; }
  const Params& params() const { return params_; }

  const std::string& name() const { return name_; }
  ProblemSpec& with_name(std::string name)
  {
    name_ = std::move(name);
    return *this;
  }

  /// Absolute near-activity threshold. When unset, 1e-8 (1 + |f(x)|) is used.
  const std::optional<double>& activity_tol() const { return activity_tol_; }
  ProblemSpec& with_activity_tol(std::optional<double> tau)
  {
    if (tau && (!(*tau >= 0.0) || !std::isfinite(*tau))) {
      throw Error(ErrorCode::InvalidArgument, "activity_tol must be finite and nonnegative");
    }
    activity_tol_ = tau;
    return *this;
  }

  double activity_threshold(double value) const
  {
    return activity_tol_ ? *activity_tol_ : 1e-8 * (1.0 + std::abs(value));
  }

private:
  ProblemSpec(Eigen::Index dim, Params params) : dim_(dim), params_(std::move(params)) {}

  Eigen::Index dim_;
  Params params_;
  std::string name_;
  std::optional<double> activity_tol_;
};

/// f(x) together with a bundle of Clarke subgradients at x.
struct Evaluation {
  double value = 0.0;
  std::vector<Vector> bundle;
};

inline constexpr std::size_t kDefaultJMax = 8;

namespace detail {

/// Indices of pieces with value >= max - tau, most active first, capped.
inline std::vector<std::size_t> near_active(const std::vector<double>& values, double tau,
                                            std::size_t j_max)
{
  const double top = *std::max_element(values.begin(), values.end());
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] >= top - tau) idx.push_back(j);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (idx.size() > j_max) idx.resize(j_max);
  return idx;
}

inline double quadratic_value(const QuadraticPiece& q, const Vector& x)
{
  return 0.5 * x.dot(q.hessian * x) + q.linear.dot(x) + q.constant;
}

} // namespace detail

/// Evaluates f at x with up to j_max subgradients.
///
/// Smooth kinds return the gradient. Max-type kinds return the gradients of
/// the pieces within the activity threshold of the max, ordered by
/// decreasing piece value. For sip_distance at a point of the intersection
/// the bundle is {0}, which is a member of the subdifferential there.
inline Evaluation evaluate(const ProblemSpec& problem, const Vector& x, std::size_t j_max = kDefaultJMax)
{
  require_dim(x, problem.dim(), "point");
  if (j_max == 0) throw Error(ErrorCode::InvalidArgument, "j_max must be at least 1");

  Evaluation eval;
  std::visit(
    [&](const auto& p) {
      using P = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<P, BallParams>) {
        const Vector w = x - p.center;
        eval.value = w.squaredNorm() - p.radius * p.radius;
        eval.bundle.push_back(2.0 * w);
      } else if constexpr (std::is_same_v<P, ShiftedBallParams>) {
        const Vector w = x - p.center;
        eval.value = w.squaredNorm() + p.shift;
        eval.bundle.push_back(2.0 * w);
      } else if constexpr (std::is_same_v<P, MaxAffineParams>) {
        std::vector<double> values(p.normals.size());
        for (std::size_t j = 0; j < values.size(); ++j) values[j] = p.normals[j].dot(x) + p.offsets[j];
        eval.value = *std::max_element(values.begin(), values.end());
        for (std::size_t j : detail::near_active(values, problem.activity_threshold(eval.value), j_max)) {
          eval.bundle.push_back(p.normals[j]);
        }
      } else if constexpr (std::is_same_v<P, MaxQuadraticsParams>) {
        std::vector<double> values(p.pieces.size());
        for (std::size_t j = 0; j < values.size(); ++j) values[j] = detail::quadratic_value(p.pieces[j], x);
        eval.value = *std::max_element(values.begin(), values.end());
        for (std::size_t j : detail::near_active(values, problem.activity_threshold(eval.value), j_max)) {
          eval.bundle.push_back(p.pieces[j].hessian * x + p.pieces[j].linear);
        }
      } else {
        std::vector<double> values(p.bodies.size());
        for (std::size_t j = 0; j < values.size(); ++j) values[j] = p.bodies[j].distance(x);
        eval.value = *std::max_element(values.begin(), values.end());
        if (eval.value <= 0.0) {
          eval.bundle.push_back(Vector::Zero(x.size()));
        } else {
          for (std::size_t j : detail::near_active(values, problem.activity_threshold(eval.value), j_max)) {
            if (values[j] <= 0.0) continue;
            eval.bundle.push_back((x - p.bodies[j].project(x)) / values[j]);
          }
        }
      }
    },
    problem.params());

  if (!std::isfinite(eval.value)) throw Error(ErrorCode::NonFinite, "f(x) is not finite");
  return eval;
}

struct ApproxConvexityReport {
  /// max of f(x) + <s, y - x> - eps_ac ||y - x|| - f(y); <= 0 means the
  /// sampled inequality held.
  double worst_violation = -std::numeric_limits<double>::infinity();
  std::size_t pairs = 0;
};

/// Samples pairs x, y uniformly in B(center, delta) and tests the
/// approximate-convexity inequality for every bundle member at x.
inline ApproxConvexityReport check_approximate_convexity(const ProblemSpec& problem, const Vector& center,
                                                         double delta, double eps_ac, std::size_t pairs,
                                                         std::uint64_t seed, std::size_t j_max = kDefaultJMax)
{
  require_dim(center, problem.dim(), "center");
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  if (!(eps_ac > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps_ac must be positive");
  if (pairs == 0) throw Error(ErrorCode::InvalidArgument, "pairs must be positive");

  Rng rng(seed);
  ApproxConvexityReport report;
  for (std::size_t k = 0; k < pairs; ++k) {
    const Vector x = rng.in_ball(center, delta);
    const Vector y = rng.in_ball(center, delta);
    const Evaluation ex = evaluate(problem, x, j_max);
    const double fy = evaluate(problem, y, 1).value;
    const Vector dy = y - x;
    const double slack = eps_ac * dy.norm();
    for (const auto& s : ex.bundle) {
      report.worst_violation = std::max(report.worst_violation, ex.value + s.dot(dy) - slack - fy);
    }
    ++report.pairs;
  }
  return report;
}

/// True for kinds whose sublevel sets S_eps have a closed-form distance.
inline bool has_analytic_sublevel(const ProblemSpec& problem)
{
  return problem.kind() == ProblemKind::Ball || problem.kind() == ProblemKind::MaxAffine;
}

/// d(x, S_eps) with S_eps = {y : f(y) <= -eps}.
///
/// Returns nullopt when the kind has no closed form. Throws SublevelEmpty
/// when S_eps is empty.
inline std::optional<double> exact_sublevel_distance(const ProblemSpec& problem, const Vector& x, double eps)
{
  require_dim(x, problem.dim(), "point");
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be nonnegative");

  switch (problem.kind()) {
  case ProblemKind::Ball: {
    const auto& p = std::get<BallParams>(problem.params());
    const double r2 = p.radius * p.radius - eps;
    if (r2 < 0.0) throw Error(ErrorCode::SublevelEmpty, "eps exceeds radius^2");
    return std::max(0.0, (x - p.center).norm() - std::sqrt(r2));
  }
  case ProblemKind::MaxAffine: {
    const auto& p = std::get<MaxAffineParams>(problem.params());
    std::vector<Halfspace> cuts;
    for (std::size_t j = 0; j < p.normals.size(); ++j) {
      if (p.normals[j].squaredNorm() == 0.0) {
        // Constant piece: either always satisfied or S_eps is empty.
        if (p.offsets[j] > -eps) throw Error(ErrorCode::SublevelEmpty, "constant piece exceeds -eps");
        continue;
      }
      cuts.emplace_back(p.normals[j], -eps - p.offsets[j]);
    }
    if (cuts.empty()) return 0.0;
    try {
      const auto proj = project_polyhedron(x, CutPolyhedron(std::move(cuts)));
      return (proj.point - x).norm();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InfeasiblePolyhedron) throw Error(ErrorCode::SublevelEmpty, e.what());
      throw;
    }
  }
  case ProblemKind::SipDistance:
    if (eps > 0.0) throw Error(ErrorCode::SublevelEmpty, "distance functions are nonnegative");
    return std::nullopt;
  case ProblemKind::ShiftedBallInfeasible:
    throw Error(ErrorCode::SublevelEmpty, "shifted ball is positive everywhere");
  case ProblemKind::MaxQuadratics:
    return std::nullopt;
  }
  return std::nullopt;
}

} // namespace nip

#endif // NIP_ORACLE_HPP
