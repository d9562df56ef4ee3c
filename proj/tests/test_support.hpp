#pragma once

// Shared generators and independent oracles for the test suites.  The oracles
// here deliberately re-derive every quantity with plain nested loops so they
// share no code path with the library's factored implementations.

#include <filesystem>
#include <random>
#include <vector>

#include "teamci/problem_io.hpp"
#include "teamci/team_problem.hpp"

namespace teamci::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(TEAMCI_FIXTURE_DIR) / name;
}

struct SizeBounds {
  std::size_t state_max = 3;
  std::size_t common_max = 3;
  std::size_t obs_max = 3;
  std::size_t act_max = 3;
};

// Random two-agent instance: sizes uniform in {1..max}, joint law and cost
// entries uniform in [0,1] (law normalized), channels random conditional
// rows against uniform references.
inline TeamProblem random_problem(std::mt19937_64& rng, const SizeBounds& bounds = {},
                                  int agents = 2) {
  auto draw_size = [&rng](std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(1, hi)(rng);
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t nx = draw_size(bounds.state_max);
  const std::size_t nx0 = draw_size(bounds.common_max);
  SpacePtr state = FiniteSpace::indexed("state", nx);
  SpacePtr common = FiniteSpace::indexed("common", nx0);

  std::vector<SpacePtr> obs, act;
  std::vector<ObservationChannel> channels;
  std::size_t nuj = 1, nyj = 1;
  for (int i = 0; i < agents; ++i) {
    const std::size_t ny = draw_size(bounds.obs_max);
    const std::size_t nu = draw_size(bounds.act_max);
    obs.push_back(FiniteSpace::indexed("y" + std::to_string(i), ny));
    act.push_back(FiniteSpace::indexed("u" + std::to_string(i), nu));
    nyj *= ny;
    nuj *= nu;

    // random channel W(y|x), factored against the uniform reference
    std::vector<double> density(ny * nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      double norm = 0.0;
      std::vector<double> w(ny);
      for (std::size_t y = 0; y < ny; ++y) {
        w[y] = unit(rng) + 1e-3;  // keep rows nondegenerate
        norm += w[y];
      }
      for (std::size_t y = 0; y < ny; ++y)
        density[y * nx + x] = (w[y] / norm) * static_cast<double>(ny);
    }
    channels.push_back(
        {i, Measure::uniform(obs.back()), std::move(density), "table", {}});
  }

  std::vector<double> law(nx * nx0);
  double mass = 0.0;
  for (auto& v : law) {
    v = unit(rng) + 1e-3;
    mass += v;
  }
  for (auto& v : law) v /= mass;

  std::vector<double> cost(nx * nx0 * nyj * nuj);
  for (auto& v : cost) v = unit(rng);

  return TeamProblem("random", state, common, obs, act, std::move(law), std::move(channels),
                     CostSpec::table(std::move(cost)));
}

// Independent oracle: the naive five-fold sum over (x, x0, y-tuple, u-tuple)
// with no factoring and no shared code with expected_cost.
inline double naive_expected_cost(const TeamProblem& problem, const PolicyProfile& profile) {
  const int n = problem.num_agents();
  const std::size_t nx = problem.state_space()->size();
  const std::size_t nx0 = problem.common_space()->size();

  std::vector<std::size_t> ny(n), nu(n);
  for (int i = 0; i < n; ++i) {
    ny[i] = problem.observation_space(i)->size();
    nu[i] = problem.action_space(i)->size();
  }

  double total = 0.0;
  std::vector<std::size_t> y(n, 0), u(n, 0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t x0 = 0; x0 < nx0; ++x0) {
      // iterate all y tuples with an odometer
      std::fill(y.begin(), y.end(), 0);
      while (true) {
        std::fill(u.begin(), u.end(), 0);
        while (true) {
          double term = problem.joint_weight(x, x0);
          for (int i = 0; i < n; ++i)
            term *= problem.channel_q(i, y[i], x) * problem.channel(i).reference.weight(y[i]);
          for (int i = 0; i < n; ++i)
            term *= profile.part(i).row(x0 * ny[i] + y[i]).weight(u[i]);
          term *= problem.cost_value(x, x0, y, u);
          total += term;

          int carry = n - 1;
          while (carry >= 0 && ++u[carry] == nu[carry]) u[carry--] = 0;
          if (carry < 0) break;
        }
        int carry = n - 1;
        while (carry >= 0 && ++y[carry] == ny[carry]) y[carry--] = 0;
        if (carry < 0) break;
      }
    }
  }
  return total;
}

// Random probability vector (interior of the simplex).
inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w(n);
  double mass = 0.0;
  for (auto& v : w) {
    v = unit(rng) + 1e-3;
    mass += v;
  }
  for (auto& v : w) v /= mass;
  return w;
}

// Random randomized policy profile for a problem.
inline PolicyProfile random_profile(std::mt19937_64& rng, const TeamProblem& problem) {
  std::vector<Kernel> parts;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const std::size_t rows =
        problem.common_space()->size() * problem.observation_space(i)->size();
    std::vector<Measure> row_measures;
    for (std::size_t rno = 0; rno < rows; ++rno)
      row_measures.push_back(Measure::probability(
          problem.action_space(i), random_simplex(rng, problem.action_space(i)->size())));
    parts.emplace_back(problem.policy_domain(i), problem.action_space(i),
                       std::move(row_measures));
  }
  return PolicyProfile(std::move(parts));
}

}  // namespace teamci::testing
