#ifndef NIP_SOLVER_HPP
#define NIP_SOLVER_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "nip/error.hpp"
#include "nip/geometry.hpp"
#include "nip/oracle.hpp"
#include "nip/schedule.hpp"
#include "nip/vector.hpp"

namespace nip {

enum class BaselineMode { None, ZeroEps, SingleCut };
enum class InfeasibleCutFallback { FirstCutOnly, Fail };

inline std::string_view to_string(BaselineMode mode)
{
  switch (mode) {
  case BaselineMode::None: return "none";
  case BaselineMode::ZeroEps: return "zero_eps";
  case BaselineMode::SingleCut: return "single_cut";
  }
  return "none";
}

inline std::optional<BaselineMode> baseline_from_string(std::string_view name)
{
  for (auto m : {BaselineMode::None, BaselineMode::ZeroEps, BaselineMode::SingleCut}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

struct SolveOptions {
  std::size_t j_max = kDefaultJMax;
  std::size_t max_iter = 1000;
  EpsilonSchedule schedule = EpsilonSchedule::harmonic(0.1);
  BaselineMode baseline = BaselineMode::None;
  InfeasibleCutFallback infeasible_cut_fallback = InfeasibleCutFallback::FirstCutOnly;
  bool record_sublevel_distance = false;
  double projection_tol = kFeasibilityTol;

  void validate() const
  {
    if (j_max < 1) throw Error(ErrorCode::InvalidArgument, "j_max must be at least 1");
    if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");
    if (!(projection_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "projection_tol must be positive");
  }

  /// Bundle cap after the baseline is applied.
  std::size_t effective_j_max() const { return baseline == BaselineMode::SingleCut ? 1 : j_max; }

  /// Shift used at iteration i after the baseline is applied.
  double shift_at(std::size_t i) const { return baseline == BaselineMode::ZeroEps ? 0.0 : schedule.at(i); }
};

struct StepMeta {
  /// J_i, the number of cuts built from the bundle.
  std::size_t cuts = 0;
  /// Cuts carrying a positive multiplier at the projection.
  std::size_t active_cuts = 0;
  /// The cut polyhedron was empty and only the first cut was used.
  bool fallback_used = false;
};

struct StepResult {
  Vector x_next;
  StepMeta meta;
};

/// The cut {y : f(x) + <s, y - x> <= -eps} as a halfspace.
inline Halfspace make_cut(const Vector& x, double fx, const Vector& s, double eps)
{
  return Halfspace(s, s.dot(x) - fx - eps);
}

/// One iteration: project x onto the polyhedron of cuts built from `eval`.
///
/// Throws ZeroSubgradient if a bundle member vanishes and InfeasibleCuts if
/// the cuts have empty intersection under the Fail fallback.
inline StepResult step(const Vector& x, double eps, const Evaluation& eval, const SolveOptions& opts)
{
  if (eval.bundle.empty()) throw Error(ErrorCode::InvalidArgument, "empty subgradient bundle");
  const std::size_t J = std::min(eval.bundle.size(), opts.effective_j_max());

  std::vector<Halfspace> cuts;
  cuts.reserve(J);
  for (std::size_t j = 0; j < J; ++j) {
    require_dim(eval.bundle[j], x.size(), "subgradient");
    if (!(eval.bundle[j].squaredNorm() > 0.0)) {
      throw Error(ErrorCode::ZeroSubgradient, "subgradient " + std::to_string(j) + " is zero");
    }
    cuts.push_back(make_cut(x, eval.value, eval.bundle[j], eps));
  }

  StepResult out;
  out.meta.cuts = J;
  try {
    auto proj = project_polyhedron(x, CutPolyhedron(cuts), opts.projection_tol);
    out.x_next = std::move(proj.point);
    out.meta.active_cuts = proj.active_set.size();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasiblePolyhedron) throw;
    if (opts.infeasible_cut_fallback == InfeasibleCutFallback::Fail) {
      throw Error(ErrorCode::InfeasibleCuts, e.what());
    }
    auto proj = project_polyhedron(x, CutPolyhedron({cuts.front()}), opts.projection_tol);
    out.x_next = std::move(proj.point);
    out.meta.active_cuts = proj.active_set.size();
    out.meta.fallback_used = true;
  }
  return out;
}

inline StepResult step(const Vector& x, double eps, const ProblemSpec& problem, const SolveOptions& opts)
{
  return step(x, eps, evaluate(problem, x, opts.effective_j_max()), opts);
}

struct TraceRow {
  std::size_t i = 0;
  double eps = 0.0;
  double f = 0.0;
  std::size_t cuts = 0;
  double step_norm = 0.0;
  std::optional<double> dist_sublevel;
  std::size_t active_cuts = 0;

  bool operator==(const TraceRow&) const = default;
};

enum class SolveStatusKind { FeasibleFound, MaxIterExceeded, ZeroSubgradient, InfeasibleCuts, NumericalFailure };

inline std::string_view to_string(SolveStatusKind kind)
{
  switch (kind) {
  case SolveStatusKind::FeasibleFound: return "FeasibleFound";
  case SolveStatusKind::MaxIterExceeded: return "MaxIterExceeded";
  case SolveStatusKind::ZeroSubgradient: return "ZeroSubgradient";
  case SolveStatusKind::InfeasibleCuts: return "InfeasibleCuts";
  case SolveStatusKind::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

struct SolveStatus {
  SolveStatusKind kind = SolveStatusKind::MaxIterExceeded;
  /// Iteration at which the run stopped.
  std::size_t iteration = 0;
  /// The iterate x_iteration.
  Vector x;
  double f_x = 0.0;
  /// f(x) < 0 rather than merely <= 0 (FeasibleFound only).
  bool strict_feasible = false;
  std::string message;
};

struct SolveTrace {
  std::vector<TraceRow> rows;
  /// x_i for each row.
  std::vector<Vector> iterates;
  SolveStatus status;

  bool feasible_found() const { return status.kind == SolveStatusKind::FeasibleFound; }
};

/// Runs the shifted-cut projection method from x0.
///
/// Each iteration evaluates f(x_i), stops if f(x_i) <= 0, and otherwise
/// projects x_i onto {y : f(x_i) + <s_j, y - x_i> <= -eps_i for all j}.
/// Oracle failures during a step end the run with the matching status; they
/// are not rethrown.
inline SolveTrace solve(const ProblemSpec& problem, const Vector& x0, const SolveOptions& opts)
{
  opts.validate();
  require_dim(x0, problem.dim(), "x0");
  require_valid(x0, "x0");

  SolveTrace trace;
  Vector x = x0;
  for (std::size_t i = 0;; ++i) {
    const Evaluation eval = evaluate(problem, x, opts.effective_j_max());
    const double eps = opts.shift_at(i);

    auto stop = [&](SolveStatusKind kind, std::string message) {
      trace.status.kind = kind;
      trace.status.iteration = i;
      trace.status.x = x;
      trace.status.f_x = eval.value;
      trace.status.strict_feasible = kind == SolveStatusKind::FeasibleFound && eval.value < 0.0;
      trace.status.message = std::move(message);
    };

    if (i == opts.max_iter && eval.value > 0.0) {
      stop(SolveStatusKind::MaxIterExceeded, "");
      return trace;
    }

    TraceRow row;
    row.i = i;
    row.eps = eps;
    row.f = eval.value;
    if (opts.record_sublevel_distance) {
      try {
        row.dist_sublevel = exact_sublevel_distance(problem, x, eps);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SublevelEmpty) throw;
      }
    }

    if (eval.value <= 0.0) {
      trace.rows.push_back(row);
      trace.iterates.push_back(x);
      stop(SolveStatusKind::FeasibleFound, "");
      return trace;
    }

    try {
      StepResult next = step(x, eps, eval, opts);
      row.cuts = next.meta.cuts;
      row.active_cuts = next.meta.active_cuts;
      row.step_norm = (next.x_next - x).norm();
      trace.rows.push_back(row);
      trace.iterates.push_back(x);
      x = std::move(next.x_next);
    } catch (const Error& e) {
      row.cuts = std::min(eval.bundle.size(), opts.effective_j_max());
      trace.rows.push_back(row);
      trace.iterates.push_back(x);
      switch (e.code()) {
      case ErrorCode::ZeroSubgradient: stop(SolveStatusKind::ZeroSubgradient, e.what()); return trace;
      case ErrorCode::InfeasibleCuts: stop(SolveStatusKind::InfeasibleCuts, e.what()); return trace;
      case ErrorCode::NumericalFailure: stop(SolveStatusKind::NumericalFailure, e.what()); return trace;
      default: throw;
      }
    }
  }
}

/// Independent solves from each start. Output order follows `starts`
/// whatever order the workers finish in. `threads == 0` picks the hardware
/// concurrency.
inline std::vector<SolveTrace> solve_multistart(const ProblemSpec& problem, const std::vector<Vector>& starts,
                                                const SolveOptions& opts, unsigned threads = 0)
{
  if (starts.empty()) throw Error(ErrorCode::InvalidArgument, "no start points");
  opts.validate();
  for (const auto& s : starts) {
    require_dim(s, problem.dim(), "start");
    require_valid(s, "start");
  }

  std::vector<SolveTrace> traces(starts.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, starts.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < starts.size(); k = next++) {
      try {
        traces[k] = solve(problem, starts[k], opts);
      } catch (const std::exception& e) {
        traces[k].status.kind = SolveStatusKind::NumericalFailure;
        traces[k].status.x = starts[k];
        traces[k].status.message = e.what();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return traces;
}

} // namespace nip

#endif // NIP_SOLVER_HPP
