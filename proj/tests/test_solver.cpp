#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"

using nip::ProblemSpec;
using nip::SolveOptions;
using nip::SolveStatusKind;
using nip::Vector;
using nip::testing::vec;

namespace {

ProblemSpec max_xy()
{
  auto p = ProblemSpec::max_affine({vec({1, 0}), vec({0, 1})}, {0.0, 0.0});
  p.with_activity_tol(0.0);
  return p;
}

ProblemSpec opposing_cuts()
{
  return ProblemSpec::max_affine({vec({1, 0}), vec({-1, 0})}, {1.0, 1.0});
}

bool same_trace(const nip::SolveTrace& a, const nip::SolveTrace& b)
{
  return a.rows == b.rows && a.status.kind == b.status.kind && a.status.iteration == b.status.iteration &&
         a.status.x == b.status.x && a.status.f_x == b.status.f_x;
}

/// Per-iteration cut validity and step dominance over a finished trace.
void check_step_invariants(const ProblemSpec& problem, const nip::SolveTrace& trace, const SolveOptions& opts)
{
  for (std::size_t k = 0; k + 1 < trace.iterates.size(); ++k) {
    const Vector& x = trace.iterates[k];
    const Vector& next = trace.iterates[k + 1];
    const auto eval = nip::evaluate(problem, x, opts.effective_j_max());
    const double eps = trace.rows[k].eps;
    const std::size_t J = std::min(eval.bundle.size(), opts.effective_j_max());
    const Vector dx = next - x;
    for (std::size_t j = 0; j < J; ++j) {
      const Vector& s = eval.bundle[j];
      EXPECT_LE(eval.value + s.dot(dx), -eps + 1e-9 * (1.0 + s.norm() * dx.norm())) << "row " << k << " cut " << j;
    }
    const Vector single = nip::project_halfspace(x, nip::make_cut(x, eval.value, eval.bundle[0], eps));
    EXPECT_GE(dx.norm(), (single - x).norm() * (1.0 - 1e-12)) << "row " << k;
  }
}

} // namespace

TEST(Step, BallSingleCutClosedForm)
{
  SolveOptions opts;
  const auto r = nip::step(vec({2, 0}), 0.1, ProblemSpec::unit_ball(2), opts);
  // x - (eps + f) / ||s||^2 s with f = 3, s = (4, 0).
  EXPECT_NEAR(r.x_next[0], 2.0 - 3.1 / 16.0 * 4.0, 1e-15);
  EXPECT_NEAR(r.x_next[0], 1.225, 1e-15);
  EXPECT_EQ(r.x_next[1], 0.0);
  EXPECT_EQ(r.meta.cuts, 1u);
  EXPECT_EQ(r.meta.active_cuts, 1u);
}

TEST(Step, SingleCutEqualsHalfspaceProjection)
{
  const auto p = ProblemSpec::default_nonconvex();
  nip::Rng rng(10);
  SolveOptions opts;
  for (int t = 0; t < 100; ++t) {
    const Vector x = rng.in_ball(Vector::Zero(2), 3.0);
    const auto eval = nip::evaluate(p, x);
    if (eval.bundle.size() != 1 || eval.value <= 0.0) continue;
    const auto r = nip::step(x, 0.05, eval, opts);
    const Vector expected = nip::project_halfspace(x, nip::make_cut(x, eval.value, eval.bundle[0], 0.05));
    EXPECT_LE((r.x_next - expected).norm(), 1e-14 * (1.0 + expected.norm()));
  }
}

TEST(Step, MaxAffineCornerMatchesBruteForce)
{
  SolveOptions opts;
  const auto r = nip::step(vec({1, 1}), 0.5, max_xy(), opts);
  EXPECT_EQ(r.meta.cuts, 2u);
  EXPECT_EQ(r.meta.active_cuts, 2u);
  const auto eval = nip::evaluate(max_xy(), vec({1, 1}));
  std::vector<nip::Halfspace> cuts;
  for (const auto& s : eval.bundle) cuts.push_back(nip::make_cut(vec({1, 1}), eval.value, s, 0.5));
  const auto oracle = nip::testing::brute_force_projection(vec({1, 1}), cuts);
  ASSERT_TRUE(oracle.has_value());
  EXPECT_LE((r.x_next - *oracle).norm(), 1e-12);
  EXPECT_LE((r.x_next - vec({-0.5, -0.5})).norm(), 1e-15);
}

TEST(Step, SingleCutBaselineUsesOneCut)
{
  SolveOptions opts;
  opts.baseline = nip::BaselineMode::SingleCut;
  const auto r = nip::step(vec({1, 1}), 0.5, max_xy(), opts);
  EXPECT_EQ(r.meta.cuts, 1u);
  EXPECT_LE((r.x_next - vec({-0.5, 1})).norm(), 1e-15);
}

TEST(Step, Errors)
{
  SolveOptions opts;
  try {
    nip::step(vec({0, 0}), 0.1, ProblemSpec::shifted_ball_infeasible(Vector::Zero(2)), opts);
    FAIL();
  } catch (const nip::Error& e) {
    EXPECT_EQ(e.code(), nip::ErrorCode::ZeroSubgradient);
  }
  opts.infeasible_cut_fallback = nip::InfeasibleCutFallback::Fail;
  try {
    nip::step(vec({0, 0}), 0.1, opposing_cuts(), opts);
    FAIL();
  } catch (const nip::Error& e) {
    EXPECT_EQ(e.code(), nip::ErrorCode::InfeasibleCuts);
  }
  opts.infeasible_cut_fallback = nip::InfeasibleCutFallback::FirstCutOnly;
  const auto r = nip::step(vec({0, 0}), 0.1, opposing_cuts(), opts);
  EXPECT_TRUE(r.meta.fallback_used);
  EXPECT_NEAR(r.x_next[0], -1.1, 1e-15);
}

TEST(Solve, AlreadyFeasible)
{
  const auto t = nip::solve(ProblemSpec::unit_ball(2), vec({0.5, 0}), SolveOptions{});
  EXPECT_EQ(t.status.kind, SolveStatusKind::FeasibleFound);
  EXPECT_EQ(t.status.iteration, 0u);
  EXPECT_EQ(t.status.f_x, -0.75);
  EXPECT_TRUE(t.status.strict_feasible);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].step_norm, 0.0);
  EXPECT_EQ(t.rows[0].cuts, 0u);
}

TEST(Solve, BallMatchesRadialReference)
{
  const auto expected = nip::testing::radial_reference_iterations(2.0, 0.1, 100);
  ASSERT_TRUE(expected.has_value());
  const auto t = nip::solve(ProblemSpec::unit_ball(2), vec({2, 0}), SolveOptions{});
  EXPECT_EQ(t.status.kind, SolveStatusKind::FeasibleFound);
  EXPECT_EQ(t.status.iteration, *expected);
  EXPECT_EQ(t.rows.size(), *expected + 1);
  EXPECT_EQ(t.rows.back().step_norm, 0.0);
}

TEST(Solve, ZeroSubgradientAtOrigin)
{
  const auto t = nip::solve(ProblemSpec::shifted_ball_infeasible(Vector::Zero(2)), vec({0, 0}), SolveOptions{});
  EXPECT_EQ(t.status.kind, SolveStatusKind::ZeroSubgradient);
  EXPECT_EQ(t.status.iteration, 0u);
  EXPECT_EQ(t.status.x, vec({0, 0}));
}

TEST(Solve, InfeasibleCutsAndFallback)
{
  SolveOptions opts;
  opts.infeasible_cut_fallback = nip::InfeasibleCutFallback::Fail;
  const auto fail = nip::solve(opposing_cuts(), vec({0, 0}), opts);
  EXPECT_EQ(fail.status.kind, SolveStatusKind::InfeasibleCuts);
  EXPECT_EQ(fail.status.iteration, 0u);

  opts.infeasible_cut_fallback = nip::InfeasibleCutFallback::FirstCutOnly;
  opts.max_iter = 20;
  const auto fallback = nip::solve(opposing_cuts(), vec({0, 0}), opts);
  EXPECT_EQ(fallback.status.kind, SolveStatusKind::MaxIterExceeded);
  EXPECT_EQ(fallback.rows.size(), 20u);
}

TEST(Solve, TraceInvariantsOnSeveralProblems)
{
  struct Case {
    ProblemSpec problem;
    Vector x0;
  };
  const std::vector<Case> cases = {
    {ProblemSpec::unit_ball(2), vec({2, 0})},
    {ProblemSpec::unit_ball(3), vec({-1, 2, 0.5})},
    {max_xy(), vec({1, 1})},
    {ProblemSpec::default_nonconvex(), vec({1.2, 2.0})},
    {ProblemSpec::default_nonconvex(), vec({0.1, 0.8})},
    {ProblemSpec::sip_distance({nip::ConvexBody::ball(vec({0, 0}), 1.0), nip::ConvexBody::halfspace(vec({1, 0}), 0.0)}),
     vec({2, 0.3})},
  };
  for (const auto& c : cases) {
    SolveOptions opts;
    opts.max_iter = 500;
    const auto t = nip::solve(c.problem, c.x0, opts);
    ASSERT_FALSE(t.rows.empty());
    EXPECT_EQ(t.status.kind, SolveStatusKind::FeasibleFound) << nip::to_string(c.problem.kind());
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      EXPECT_EQ(t.rows[k].i, k);
      if (k + 1 < t.rows.size()) {
        EXPECT_GT(t.rows[k].f, 0.0);
        EXPECT_GT(t.rows[k].eps, t.rows[k + 1].eps);
      }
    }
    EXPECT_LE(t.status.f_x, 0.0);
    check_step_invariants(c.problem, t, opts);
  }
}

TEST(Solve, ZeroEpsBaselineNeverTerminatesOnBall)
{
  SolveOptions opts;
  opts.baseline = nip::BaselineMode::ZeroEps;
  opts.max_iter = 1000;
  const auto t = nip::solve(ProblemSpec::unit_ball(2), vec({2, 0}), opts);
  EXPECT_EQ(t.status.kind, SolveStatusKind::MaxIterExceeded);
  EXPECT_EQ(t.rows.size(), 1000u);
  for (const auto& r : t.rows) {
    EXPECT_GT(r.f, 0.0);
    EXPECT_EQ(r.eps, 0.0);
  }
  EXPECT_GT(t.status.f_x, 0.0);
}

TEST(Solve, DistanceToShiftedSublevelDecreasesOnBall)
{
  nip::Rng rng(99);
  const auto p = ProblemSpec::unit_ball(2);
  for (int trial = 0; trial < 20; ++trial) {
    SolveOptions opts;
    opts.record_sublevel_distance = true;
    const Vector x0 = rng.direction(2) * rng.uniform(1.1, 5.0);
    const auto t = nip::solve(p, x0, opts);
    ASSERT_EQ(t.status.kind, SolveStatusKind::FeasibleFound);
    for (std::size_t k = 0; k + 1 < t.iterates.size(); ++k) {
      const double eps = t.rows[k].eps;
      const double before = *nip::exact_sublevel_distance(p, t.iterates[k], eps);
      const double after = *nip::exact_sublevel_distance(p, t.iterates[k + 1], eps);
      EXPECT_LE(after, before + 1e-15);
      EXPECT_EQ(*t.rows[k].dist_sublevel, before);
    }
  }
}

TEST(Solve, Validation)
{
  SolveOptions opts;
  opts.max_iter = 0;
  EXPECT_THROW(nip::solve(ProblemSpec::unit_ball(2), vec({2, 0}), opts), nip::Error);
  EXPECT_THROW(nip::solve(ProblemSpec::unit_ball(2), vec({2, 0, 0}), SolveOptions{}), nip::Error);
}

TEST(Multistart, SingleStartEqualsSolve)
{
  const auto p = ProblemSpec::default_nonconvex();
  const Vector x0 = vec({1.4, 1.9});
  const auto batch = nip::solve_multistart(p, {x0}, SolveOptions{});
  ASSERT_EQ(batch.size(), 1u);
  EXPECT_TRUE(same_trace(batch[0], nip::solve(p, x0, SolveOptions{})));
}

TEST(Multistart, OrderIndependentAndThreadCountIndependent)
{
  const auto p = ProblemSpec::default_nonconvex();
  nip::Rng rng(5);
  std::vector<Vector> starts;
  for (int k = 0; k < 16; ++k) starts.push_back(rng.in_ball(nip::testing::nonconvex_boundary_point(), 0.5));
  SolveOptions opts;
  opts.max_iter = 500;
  const auto serial = nip::solve_multistart(p, starts, opts, 1);
  const auto parallel = nip::solve_multistart(p, starts, opts, 8);
  for (std::size_t k = 0; k < starts.size(); ++k) EXPECT_TRUE(same_trace(serial[k], parallel[k]));

  std::vector<Vector> reversed(starts.rbegin(), starts.rend());
  const auto rev = nip::solve_multistart(p, reversed, opts, 4);
  for (std::size_t k = 0; k < starts.size(); ++k) EXPECT_TRUE(same_trace(serial[k], rev[starts.size() - 1 - k]));
}

TEST(Multistart, PerStartFailuresDoNotAbortTheBatch)
{
  const auto p = ProblemSpec::shifted_ball_infeasible(Vector::Zero(2));
  SolveOptions opts;
  opts.max_iter = 5;
  const auto batch = nip::solve_multistart(p, {vec({0, 0}), vec({1, 1})}, opts);
  EXPECT_EQ(batch[0].status.kind, SolveStatusKind::ZeroSubgradient);
  EXPECT_NE(batch[1].status.kind, SolveStatusKind::FeasibleFound);
}
