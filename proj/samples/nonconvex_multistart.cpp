// Multi-start run on max(x2 - x1^2, ||x||^2 - 4) from points scattered around
// the boundary point (1.5, sqrt(1.75)).

#include <cmath>
#include <iostream>
#include <vector>

#include "nip/nip.hpp"

int main()
{
  const nip::ProblemSpec problem = nip::ProblemSpec::default_nonconvex();
  nip::Vector anchor(2);
  anchor << 1.5, std::sqrt(1.75);

  nip::Rng rng(7);
  std::vector<nip::Vector> starts;
  for (int k = 0; k < 20; ++k) starts.push_back(rng.in_ball(anchor, 0.5));

  nip::SolveOptions opts;
  opts.max_iter = 500;
  const auto traces = nip::solve_multistart(problem, starts, opts);

  int found = 0;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& t = traces[k];
    found += t.feasible_found();
    std::cout << "start " << k << " (" << starts[k].transpose() << "): " << nip::to_string(t.status.kind)
              << " after " << t.status.iteration << " iterations, f=" << t.status.f_x << '\n';
  }
  std::cout << found << "/" << traces.size() << " starts reached f(x) <= 0\n";
  return 0;
}
