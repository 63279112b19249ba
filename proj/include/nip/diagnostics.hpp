#ifndef NIP_DIAGNOSTICS_HPP
#define NIP_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nip/error.hpp"
#include "nip/oracle.hpp"
#include "nip/solver.hpp"

namespace nip {

/// Largest observed d(x, S_eps) / (f(x) + eps) over the points.
///
/// A sampled lower bound on any regularity modulus valid on the region the
/// points cover, not the modulus itself.
inline double estimate_kappa(const ProblemSpec& problem, const std::vector<Vector>& points, double eps)
{
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "no points");
  if (!has_analytic_sublevel(problem)) {
    throw Error(ErrorCode::NotAvailable, std::string(to_string(problem.kind())) + " has no analytic sublevel distance");
  }
  double best = 0.0;
  for (const auto& x : points) {
    const double denom = evaluate(problem, x, 1).value + eps;
    if (!(denom > 0.0)) throw Error(ErrorCode::InvalidArgument, "f(x) + eps must be positive at every point");
    const auto d = exact_sublevel_distance(problem, x, eps);
    if (!d) throw Error(ErrorCode::NotAvailable, "sublevel distance unavailable");
    best = std::max(best, *d / denom);
  }
  return best;
}

struct RateFit {
  /// exp(slope) of the least-squares line through (i, log v_i).
  double rho = 1.0;
  double r2 = 1.0;
  std::size_t n_points = 0;
};

/// Log-linear least-squares fit of a positive sequence against its index.
///
/// Trailing zeros are trimmed first. Logs are split into mantissa and binary
/// exponent so that rescaling by a power of two leaves the fit bit-identical.
inline RateFit fit_decay_rate(std::span<const double> values)
{
  std::size_t n = values.size();
  while (n > 0 && values[n - 1] == 0.0) --n;
  if (n < 3) throw Error(ErrorCode::InsufficientData, "need at least 3 positive values, got " + std::to_string(n));

  std::vector<double> log_mant(n);
  std::vector<long long> expo(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorCode::InvalidArgument, "values must be positive and finite before the trailing zeros");
    }
    int e = 0;
    const double m = std::frexp(values[i], &e);
    log_mant[i] = std::log(m);
    expo[i] = e;
  }

  const auto nn = static_cast<long long>(n);
  long long expo_sum = 0;
  for (auto e : expo) expo_sum += e;
  const double mant_ref = log_mant[0];
  double mant_mean = 0.0;
  for (double v : log_mant) mant_mean += v - mant_ref;
  mant_mean /= static_cast<double>(n);

  // Centered logs: (log m_i - mean) + (n e_i - sum e) / n * ln 2.
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = ((log_mant[i] - mant_ref) - mant_mean) +
           static_cast<double>(nn * expo[i] - expo_sum) / static_cast<double>(n) * std::numbers::ln2;
  }

  const double x_mean = 0.5 * static_cast<double>(n - 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * y[i];
    sxx += dx * dx;
    syy += y[i] * y[i];
  }
  const double slope = sxy / sxx;

  RateFit fit;
  fit.n_points = n;
  fit.rho = std::exp(slope);
  if (syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double resid = y[i] - slope * (static_cast<double>(i) - x_mean);
      ssr += resid * resid;
    }
    fit.r2 = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  }
  return fit;
}

inline RateFit fit_decay_rate(const std::vector<double>& values)
{
  return fit_decay_rate(std::span<const double>(values.data(), values.size()));
}

struct ClaimContrastReport {
  /// d(x_i, S_eps_i) over the rows with f(x_i) > 0.
  std::vector<double> distances;
  std::vector<double> eps;
  /// eps_i / d_i; bounded above when d_i >= eps_i / (L + eps_ac).
  std::vector<double> eps_over_distance;
  RateFit distance_rate;
  double l_hat = 0.0;
  bool strictly_decreasing = true;
  bool terminated = false;
  std::size_t iterations = 0;
  std::string verdict;
};

/// Contrasts the linear decay of d(x_i, S_eps_i) with the sublinear lower
/// bound eps_i / (L + eps_ac) it must respect while f(x_i) > 0.
inline ClaimContrastReport claim_contrast(const SolveTrace& trace)
{
  ClaimContrastReport report;
  for (const auto& row : trace.rows) {
    if (!(row.f > 0.0) || !row.dist_sublevel) continue;
    report.distances.push_back(*row.dist_sublevel);
    report.eps.push_back(row.eps);
  }
  if (report.distances.size() < 3) {
    throw Error(ErrorCode::InsufficientData,
                "need distances on at least 3 rows with f > 0, got " + std::to_string(report.distances.size()));
  }

  for (std::size_t i = 0; i < report.distances.size(); ++i) {
    const double d = report.distances[i];
    const double ratio = d > 0.0 ? report.eps[i] / d : 0.0;
    report.eps_over_distance.push_back(ratio);
    report.l_hat = std::max(report.l_hat, ratio);
    if (i > 0 && !(d < report.distances[i - 1])) report.strictly_decreasing = false;
  }
  report.distance_rate = fit_decay_rate(report.distances);
  report.terminated = trace.feasible_found();
  report.iterations = trace.status.iteration;

  if (report.terminated) {
    report.verdict = "terminated at iteration " + std::to_string(report.iterations) +
                     ": d(x_i, S_eps_i) decayed geometrically (rho=" + std::to_string(report.distance_rate.rho) +
                     ") while eps_i decays sublinearly, so the lower bound eps_i/L_hat forced finite termination";
  } else if (report.l_hat == 0.0) {
    report.verdict = "no termination within " + std::to_string(report.iterations) +
                     " iterations; eps_i = 0 removes the sublinear lower bound, so the geometric decay of "
                     "d(x_i, S_0) need not end in finitely many steps";
  } else {
    report.verdict = "no termination within " + std::to_string(report.iterations) +
                     " iterations; the start or eps0 may lie outside the region of guaranteed finite convergence";
  }
  return report;
}

} // namespace nip

#endif // NIP_DIAGNOSTICS_HPP
