// Command-line front end: nip solve | compare | diagnose

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "nip/commands.hpp"

namespace {

struct Flags {
  std::string problem;
  std::string x0;
  std::string x0_random;
  double eps0 = 0.1;
  std::string schedule = "harmonic:p=1";
  std::size_t j_max = nip::kDefaultJMax;
  std::size_t max_iter = 1000;
  std::string baseline = "none";
  std::string infeasible_cuts = "first_cut_only";
  std::string trace_csv;
  std::string trace_json;
  std::string report_json;
  bool record_dist = false;
};

void add_flags(CLI::App* cmd, Flags& f)
{
  cmd->add_option("--problem", f.problem, "Problem spec JSON file")->required();
  auto* x0 = cmd->add_option("--x0", f.x0, "Start point \"v1,v2,...\"");
  auto* rnd = cmd->add_option("--x0-random", f.x0_random, "Random start SEED:RADIUS[:c1,c2,...]");
  x0->excludes(rnd);
  cmd->add_option("--eps0", f.eps0, "Initial shift eps_0");
  cmd->add_option("--schedule", f.schedule, "harmonic:p=P | log | const");
  cmd->add_option("--j-max", f.j_max, "Maximum subgradients per iteration");
  cmd->add_option("--max-iter", f.max_iter, "Iteration limit");
  cmd->add_option("--baseline", f.baseline, "none | zero_eps | single_cut");
  cmd->add_option("--infeasible-cuts", f.infeasible_cuts, "first_cut_only | fail");
  cmd->add_option("--trace-csv", f.trace_csv, "Write the trace as CSV");
  cmd->add_option("--trace-json", f.trace_json, "Write the trace as JSON");
  cmd->add_option("--report-json", f.report_json, "Write the report as JSON");
  cmd->add_flag("--record-dist", f.record_dist, "Record d(x_i, S_eps_i) when available");
}

nip::RunConfig to_config(const Flags& f)
{
  nip::RunConfig c;
  c.problem_file = f.problem;
  if (!f.x0.empty()) {
    c.x0 = nip::parse_vector(f.x0, "--x0");
  } else if (!f.x0_random.empty()) {
    const auto first = f.x0_random.find(':');
    if (first == std::string::npos) throw nip::Error(nip::ErrorCode::ParseError, "--x0-random: expected SEED:RADIUS");
    const auto second = f.x0_random.find(':', first + 1);
    nip::RandomStart r;
    try {
      r.seed = std::stoull(f.x0_random.substr(0, first));
    } catch (const std::exception&) {
      throw nip::Error(nip::ErrorCode::ParseError, "--x0-random: bad seed");
    }
    r.radius = nip::parse_double(f.x0_random.substr(first + 1, second == std::string::npos ? std::string::npos
                                                                                            : second - first - 1),
                                 "--x0-random radius");
    if (second != std::string::npos) r.center = nip::parse_vector(f.x0_random.substr(second + 1), "--x0-random center");
    c.x0 = r;
  } else {
    throw nip::Error(nip::ErrorCode::ParseError, "one of --x0 or --x0-random is required");
  }
  c.eps0 = f.eps0;
  c.schedule = f.schedule;
  c.j_max = f.j_max;
  c.max_iter = f.max_iter;
  const auto baseline = nip::baseline_from_string(f.baseline);
  if (!baseline) throw nip::Error(nip::ErrorCode::ParseError, "--baseline: unknown mode '" + f.baseline + "'");
  c.baseline = *baseline;
  if (f.infeasible_cuts == "fail") {
    c.infeasible_cuts = nip::InfeasibleCutFallback::Fail;
  } else if (f.infeasible_cuts != "first_cut_only") {
    throw nip::Error(nip::ErrorCode::ParseError, "--infeasible-cuts: expected first_cut_only or fail");
  }
  c.record_dist = f.record_dist;
  if (!f.trace_csv.empty()) c.trace_csv = f.trace_csv;
  if (!f.trace_json.empty()) c.trace_json = f.trace_json;
  if (!f.report_json.empty()) c.report_json = f.report_json;
  return c;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Shifted-cut projection solver for inequality problems f(x) <= 0"};
  app.require_subcommand(1);

  Flags flags;
  auto* solve = app.add_subcommand("solve", "Run the solver and write its trace");
  auto* compare = app.add_subcommand("compare", "Run the solver against the zero_eps and single_cut baselines");
  auto* diagnose = app.add_subcommand("diagnose", "Report distance decay and regularity estimates");
  for (auto* cmd : {solve, compare, diagnose}) add_flags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : nip::kExitConfigError;
  }

  nip::RunConfig config;
  try {
    config = to_config(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nip::kExitConfigError;
  }

  if (solve->parsed()) return nip::cmd_solve(config, std::cout, std::cerr);
  if (compare->parsed()) return nip::cmd_compare(config, std::cout, std::cerr);
  return nip::cmd_diagnose(config, std::cout, std::cerr);
}
