#ifndef NIP_COMMANDS_HPP
#define NIP_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "nip/diagnostics.hpp"
#include "nip/error.hpp"
#include "nip/io.hpp"
#include "nip/oracle.hpp"
#include "nip/solver.hpp"

namespace nip {

enum ExitCode : int {
  kExitFeasible = 0,
  kExitConfigError = 1,
  kExitMaxIter = 2,
  kExitSolverFailure = 3,
  kExitNotAvailable = 4,
  kExitInsufficientData = 5,
};

inline int exit_code_for(SolveStatusKind kind)
{
  switch (kind) {
  case SolveStatusKind::FeasibleFound: return kExitFeasible;
  case SolveStatusKind::MaxIterExceeded: return kExitMaxIter;
  case SolveStatusKind::ZeroSubgradient:
  case SolveStatusKind::InfeasibleCuts:
  case SolveStatusKind::NumericalFailure: return kExitSolverFailure;
  }
  return kExitSolverFailure;
}

/// x0 drawn uniformly from B(center, radius); center defaults to the origin.
struct RandomStart {
  std::uint64_t seed = 0;
  double radius = 1.0;
  std::optional<Vector> center;
};

inline Vector random_start(const RandomStart& spec, Eigen::Index dim)
{
  if (!(spec.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "x0-random radius must be positive");
  const Vector center = spec.center ? *spec.center : Vector(Vector::Zero(dim));
  require_dim(center, dim, "x0-random center");
  Rng rng(spec.seed);
  return rng.in_ball(center, spec.radius);
}

struct RunConfig {
  std::filesystem::path problem_file;
  /// Used instead of problem_file when set.
  std::optional<ProblemSpec> problem;
  std::variant<Vector, RandomStart> x0 = Vector();
  double eps0 = 0.1;
  std::string schedule = "harmonic:p=1";
  std::size_t j_max = kDefaultJMax;
  std::size_t max_iter = 1000;
  BaselineMode baseline = BaselineMode::None;
  InfeasibleCutFallback infeasible_cuts = InfeasibleCutFallback::FirstCutOnly;
  bool record_dist = false;
  std::optional<std::filesystem::path> trace_csv;
  std::optional<std::filesystem::path> trace_json;
  std::optional<std::filesystem::path> report_json;
};

namespace detail {

struct Prepared {
  ProblemSpec problem;
  Vector x0;
  SolveOptions opts;
};

inline Prepared prepare(const RunConfig& config)
{
  ProblemSpec problem = config.problem ? *config.problem : load_problem(config.problem_file);
  if (problem.name().empty() && !config.problem) problem.with_name(config.problem_file.stem().string());

  Vector x0;
  if (const auto* v = std::get_if<Vector>(&config.x0)) {
    if (v->size() == 0) throw Error(ErrorCode::InvalidArgument, "x0: no start point given");
    if (v->size() != problem.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "x0: has " + std::to_string(v->size()) +
                                                  " coordinates, problem dim is " + std::to_string(problem.dim()));
    }
    require_valid(*v, "x0");
    x0 = *v;
  } else {
    x0 = random_start(std::get<RandomStart>(config.x0), problem.dim());
  }

  SolveOptions opts;
  opts.schedule = EpsilonSchedule::parse(config.schedule, config.eps0);
  opts.j_max = config.j_max;
  opts.max_iter = config.max_iter;
  opts.baseline = config.baseline;
  opts.infeasible_cut_fallback = config.infeasible_cuts;
  opts.record_sublevel_distance = config.record_dist;
  opts.validate();
  return {std::move(problem), std::move(x0), std::move(opts)};
}

inline void emit_traces(const RunConfig& config, const SolveTrace& trace)
{
  if (config.trace_csv) write_file_atomic(*config.trace_csv, trace_csv_string(trace));
  if (config.trace_json) write_file_atomic(*config.trace_json, trace_to_json(trace).dump(2) + "\n");
}

inline json config_to_json(const Prepared& p)
{
  return {{"problem", problem_to_json(p.problem)},
          {"x0", detail::to_json(p.x0)},
          {"schedule", p.opts.schedule.descriptor()},
          {"eps0", p.opts.schedule.eps0()},
          {"j_max", p.opts.j_max},
          {"max_iter", p.opts.max_iter},
          {"baseline", std::string(to_string(p.opts.baseline))}};
}

inline std::string summary_line(std::string_view label, const SolveTrace& trace)
{
  return std::string(label) + "status=" + std::string(to_string(trace.status.kind)) +
         " iterations=" + std::to_string(trace.status.iteration) + " f=" + format_double(trace.status.f_x);
}

/// Rows with f > 0 carrying a recorded distance.
inline std::vector<double> pre_termination_distances(const SolveTrace& trace)
{
  std::vector<double> d;
  for (const auto& r : trace.rows) {
    if (r.f > 0.0 && r.dist_sublevel) d.push_back(*r.dist_sublevel);
  }
  return d;
}

template <class F>
int guarded(std::ostream& err, F&& body)
{
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
    case ErrorCode::NotAvailable: return kExitNotAvailable;
    case ErrorCode::InsufficientData: return kExitInsufficientData;
    case ErrorCode::ZeroSubgradient:
    case ErrorCode::InfeasibleCuts:
    case ErrorCode::NumericalFailure: return kExitSolverFailure;
    default: return kExitConfigError;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

} // namespace detail

/// Runs one solve, writes the requested trace files and prints a summary.
inline int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err)
{
  return detail::guarded(err, [&] {
    const auto prepared = detail::prepare(config);
    const SolveTrace trace = solve(prepared.problem, prepared.x0, prepared.opts);
    detail::emit_traces(config, trace);
    if (config.report_json) {
      json report = {{"config", detail::config_to_json(prepared)}, {"status", status_to_json(trace.status)},
                     {"rows", trace.rows.size()}};
      write_file_atomic(*config.report_json, report.dump(2) + "\n");
    }
    out << detail::summary_line("", trace) << '\n';
    return exit_code_for(trace.status.kind);
  });
}

/// Runs the configured solver and the zero_eps and single_cut baselines
/// from the same start and reports them side by side. The exit code is the
/// one of the configured run.
inline int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err)
{
  return detail::guarded(err, [&] {
    auto prepared = detail::prepare(config);
    prepared.opts.record_sublevel_distance = has_analytic_sublevel(prepared.problem);

    struct Variant {
      std::string name;
      BaselineMode mode;
    };
    const std::vector<Variant> variants = {{"main", prepared.opts.baseline},
                                           {"zero_eps", BaselineMode::ZeroEps},
                                           {"single_cut", BaselineMode::SingleCut}};

    json entries = json::array();
    std::optional<SolveTrace> main_trace;
    for (const auto& v : variants) {
      SolveOptions opts = prepared.opts;
      opts.baseline = v.mode;
      json entry = {{"name", v.name}, {"baseline", std::string(to_string(v.mode))}};
      try {
        SolveTrace trace = solve(prepared.problem, prepared.x0, opts);
        entry["status"] = std::string(to_string(trace.status.kind));
        entry["iterations"] = trace.status.iteration;
        entry["final_f"] = trace.status.f_x;
        entry["final_x"] = detail::to_json(trace.status.x);
        try {
          entry["distance_rate"] = rate_fit_to_json(fit_decay_rate(detail::pre_termination_distances(trace)));
        } catch (const Error&) {
          entry["distance_rate"] = nullptr;
        }
        out << detail::summary_line(v.name + ": ", trace) << '\n';
        if (!main_trace) main_trace = std::move(trace);
      } catch (const Error& e) {
        if (!main_trace) throw;
        entry["status"] = "Error";
        entry["message"] = e.what();
      }
      entries.push_back(std::move(entry));
    }

    detail::emit_traces(config, *main_trace);
    json report = {{"config", detail::config_to_json(prepared)}, {"variants", std::move(entries)}};
    if (config.report_json) {
      write_file_atomic(*config.report_json, report.dump(2) + "\n");
    } else {
      out << report.dump(2) << '\n';
    }
    return exit_code_for(main_trace->status.kind);
  });
}

/// Solves with sublevel distances recorded and reports the decay contrast
/// and the empirical regularity-modulus lower bounds.
///
/// Exit 4 when the problem has no analytic sublevel distance, 5 when the
/// run is too short to fit; otherwise the exit code of the solve.
inline int cmd_diagnose(const RunConfig& config, std::ostream& out, std::ostream& err)
{
  return detail::guarded(err, [&] {
    auto prepared = detail::prepare(config);
    if (!has_analytic_sublevel(prepared.problem)) {
      throw Error(ErrorCode::NotAvailable,
                  std::string(to_string(prepared.problem.kind())) + " has no analytic sublevel distance");
    }
    prepared.opts.record_sublevel_distance = true;
    const SolveTrace trace = solve(prepared.problem, prepared.x0, prepared.opts);
    detail::emit_traces(config, trace);

    const ClaimContrastReport contrast = claim_contrast(trace);

    std::vector<Vector> positive;
    double kappa_trace = 0.0;
    for (std::size_t k = 0; k < trace.rows.size(); ++k) {
      const auto& r = trace.rows[k];
      if (!(r.f > 0.0)) continue;
      positive.push_back(trace.iterates[k]);
      if (r.dist_sublevel) kappa_trace = std::max(kappa_trace, *r.dist_sublevel / (r.f + r.eps));
    }

    json report = {{"config", detail::config_to_json(prepared)},
                   {"status", status_to_json(trace.status)},
                   {"claim_contrast", claim_contrast_to_json(contrast)},
                   {"kappa_lower_bound_eps0", estimate_kappa(prepared.problem, positive, 0.0)},
                   {"kappa_lower_bound_trace", kappa_trace}};
    if (config.report_json) {
      write_file_atomic(*config.report_json, report.dump(2) + "\n");
    } else {
      out << report.dump(2) << '\n';
    }
    out << detail::summary_line("", trace) << " rho=" << format_double(contrast.distance_rate.rho)
        << " L_hat=" << format_double(contrast.l_hat) << '\n';
    return exit_code_for(trace.status.kind);
  });
}

} // namespace nip

#endif // NIP_COMMANDS_HPP
