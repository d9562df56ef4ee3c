#include "teamci/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "teamci/errors.hpp"

namespace teamci {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Precomputed tables for evaluating J of deterministic profiles fast: one
// entry per (x, x0, y-tuple) with the channel-weighted probability and a
// pointer into the cost table's u-slice.  A profile is a flat digit vector
// (per-agent action tables concatenated); J is a single pass over the tuples.
struct ProfileEvaluator {
  explicit ProfileEvaluator(const TeamProblem& problem) : problem_(&problem) {
    const int n = problem.num_agents();
    const std::size_t nx = problem.state_space()->size();
    const std::size_t nx0 = problem.common_space()->size();
    const JointIndexer& obs = problem.obs_indexer();

    agent_offset.resize(n);
    std::size_t off = 0;
    for (int i = 0; i < n; ++i) {
      agent_offset[i] = off;
      off += nx0 * problem.observation_space(i)->size();
    }
    total_pairs = off;
    act_stride.resize(n);
    digit_base.assign(total_pairs, 0);
    for (int i = 0; i < n; ++i) {
      act_stride[i] = problem.act_indexer().stride(i);
      const std::size_t pairs = nx0 * problem.observation_space(i)->size();
      for (std::size_t p = 0; p < pairs; ++p)
        digit_base[agent_offset[i] + p] = problem.action_space(i)->size();
    }

    std::vector<std::size_t> y(n);
    for (std::size_t x0 = 0; x0 < nx0; ++x0) {
      for (std::size_t x = 0; x < nx; ++x) {
        const double pxx0 = problem.joint_weight(x, x0);
        if (pxx0 == 0.0) continue;
        for (std::size_t yj = 0; yj < obs.total(); ++yj) {
          obs.decode(yj, y);
          double w = pxx0;
          for (int i = 0; i < n; ++i)
            w *= problem.channel_q(i, y[i], x) * problem.channel(i).reference.weight(y[i]);
          if (w == 0.0) continue;
          weight.push_back(w);
          cost_offset.push_back(((x * nx0 + x0) * obs.total() + yj) *
                                problem.act_indexer().total());
          for (int i = 0; i < n; ++i) {
            std::size_t ny_i = problem.observation_space(i)->size();
            pair_of_tuple.push_back(agent_offset[i] + x0 * ny_i + y[i]);
          }
        }
      }
    }
  }

  // digits: flat action table, one entry per (agent, x0, y) pair
  double evaluate(const std::size_t* digits) const {
    const int n = problem_->num_agents();
    const double* cost = problem_->cost_table().data();
    double acc = 0.0;
    const std::size_t t_count = weight.size();
    for (std::size_t t = 0; t < t_count; ++t) {
      std::size_t uj = 0;
      for (int i = 0; i < n; ++i) uj += digits[pair_of_tuple[t * n + i]] * act_stride[i];
      acc += weight[t] * cost[cost_offset[t] + uj];
    }
    return acc;
  }

  // Per-(pair, action) cost contributions of one agent holding the other
  // agents' (possibly randomized) rows fixed:
  //   J(d_i) = sum_p h[p][d_i(p)]  over this agent's pairs p.
  std::vector<double> response_table(const PolicyProfile& profile, int agent) const {
    const TeamProblem& problem = *problem_;
    const int n = problem.num_agents();
    const std::size_t nu_i = problem.action_space(agent)->size();
    const std::size_t pairs =
        problem.common_space()->size() * problem.observation_space(agent)->size();
    std::vector<double> h(pairs * nu_i, 0.0);

    const JointIndexer& act = problem.act_indexer();
    std::vector<std::size_t> u(n);
    const double* cost = problem.cost_table().data();
    const std::size_t t_count = weight.size();
    for (std::size_t t = 0; t < t_count; ++t) {
      const std::size_t p = pair_of_tuple[t * n + agent] - agent_offset[agent];
      for (std::size_t uj = 0; uj < act.total(); ++uj) {
        act.decode(uj, u);
        double w_others = 1.0;
        for (int j = 0; j < n; ++j) {
          if (j == agent) continue;
          w_others *= profile.part(j).row(pair_of_tuple[t * n + j] - agent_offset[j]).weight(u[j]);
        }
        if (w_others == 0.0) continue;
        h[p * nu_i + u[agent]] += weight[t] * w_others * cost[cost_offset[t] + uj];
      }
    }
    return h;
  }

  const TeamProblem* problem_;
  std::vector<double> weight;
  std::vector<std::size_t> cost_offset;
  std::vector<std::size_t> pair_of_tuple;  // tuple-major, one entry per agent
  std::vector<std::size_t> agent_offset;   // into the flat digit vector
  std::vector<std::size_t> act_stride;
  std::vector<std::size_t> digit_base;     // |U_i| per flat position
  std::size_t total_pairs = 0;
};

// Flat digit odometer in lexicographic profile order (last position least
// significant).
void decode_ordinal(const ProfileEvaluator& ev, std::uint64_t ordinal,
                    std::vector<std::size_t>& digits) {
  digits.assign(ev.total_pairs, 0);
  for (std::size_t p = ev.total_pairs; p-- > 0;) {
    digits[p] = static_cast<std::size_t>(ordinal % ev.digit_base[p]);
    ordinal /= ev.digit_base[p];
  }
}

bool increment(const ProfileEvaluator& ev, std::vector<std::size_t>& digits) {
  for (std::size_t p = ev.total_pairs; p-- > 0;) {
    if (++digits[p] < ev.digit_base[p]) return true;
    digits[p] = 0;
  }
  return false;  // wrapped
}

PolicyProfile profile_from_ordinal(const TeamProblem& problem, const ProfileEvaluator& ev,
                                   std::uint64_t ordinal) {
  std::vector<std::size_t> digits;
  decode_ordinal(ev, ordinal, digits);
  std::vector<Kernel> parts;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const std::size_t pairs =
        problem.common_space()->size() * problem.observation_space(i)->size();
    std::vector<std::size_t> table(digits.begin() + ev.agent_offset[i],
                                   digits.begin() + ev.agent_offset[i] + pairs);
    parts.push_back(
        Kernel::deterministic(problem.policy_domain(i), problem.action_space(i), table));
  }
  return PolicyProfile(std::move(parts));
}

struct Best {
  double value = std::numeric_limits<double>::infinity();
  std::uint64_t ordinal = 0;
};

bool better(const Best& a, const Best& b) {
  return a.value < b.value || (a.value == b.value && a.ordinal < b.ordinal);
}

// Scans profiles [begin, end) and returns the (value, ordinal)-minimal one.
Best scan_range(const ProfileEvaluator& ev, std::uint64_t begin, std::uint64_t end) {
  Best best;
  if (begin >= end) return best;
  std::vector<std::size_t> digits;
  decode_ordinal(ev, begin, digits);
  for (std::uint64_t o = begin; o < end; ++o) {
    double j = ev.evaluate(digits.data());
    if (j < best.value) {
      best.value = j;
      best.ordinal = o;
    }
    increment(ev, digits);
  }
  return best;
}

SolveResult brute_force_impl(const TeamProblem& problem, std::uint64_t cap, bool parallel) {
  const double t0 = now_seconds();
  const std::uint64_t count = deterministic_profile_count(problem, cap);
  ProfileEvaluator ev(problem);

  Best best;
  if (parallel && count > 4096) {
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
#else
    const int max_threads = 1;
#endif
    std::vector<Best> local(static_cast<std::size_t>(max_threads));
#pragma omp parallel num_threads(max_threads)
    {
#ifdef _OPENMP
      const int tid = omp_get_thread_num();
      const int nt = omp_get_num_threads();
#else
      const int tid = 0;
      const int nt = 1;
#endif
      const std::uint64_t chunk = (count + nt - 1) / nt;
      const std::uint64_t begin = std::min<std::uint64_t>(count, chunk * tid);
      const std::uint64_t end = std::min<std::uint64_t>(count, begin + chunk);
      local[static_cast<std::size_t>(tid)] = scan_range(ev, begin, end);
    }
    for (const auto& b : local)
      if (better(b, best)) best = b;
  } else {
    best = scan_range(ev, 0, count);
  }

  SolveResult result{.method = "brute",
                     .value = best.value,
                     .profile = profile_from_ordinal(problem, ev, best.ordinal),
                     .prescription = std::nullopt,
                     .grid = std::nullopt,
                     .trace = {},
                     .evaluations = count,
                     .wall_seconds = 0.0};
  result.wall_seconds = now_seconds() - t0;
  return result;
}

}  // namespace

std::uint64_t deterministic_profile_count(const TeamProblem& problem, std::uint64_t cap) {
  std::uint64_t total = 1;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const std::uint64_t pairs = static_cast<std::uint64_t>(problem.common_space()->size()) *
                                problem.observation_space(i)->size();
    auto per_agent = checked_pow(problem.action_space(i)->size(), pairs);
    auto next = per_agent ? checked_mul(total, *per_agent) : std::nullopt;
    if (!next)
      throw CapExceeded("deterministic profile enumeration overflows, cap is " +
                            std::to_string(cap),
                        UINT64_MAX, cap);
    total = *next;
  }
  if (total > cap)
    throw CapExceeded("deterministic profile enumeration: " + std::to_string(total) +
                          " profiles exceed cap " + std::to_string(cap),
                      total, cap);
  return total;
}

SolveResult brute_force(const TeamProblem& problem, std::uint64_t cap) {
  return brute_force_impl(problem, cap, /*parallel=*/true);
}

SolveResult brute_force_serial(const TeamProblem& problem, std::uint64_t cap) {
  return brute_force_impl(problem, cap, /*parallel=*/false);
}

SolveResult solve_common_information(const TeamProblem& problem, const GridOptions& options) {
  const double t0 = now_seconds();
  std::vector<PrescriptionAction> grid = build_lambda_grid(problem, options);
  CentralizedProblem cp = reduce(problem, std::move(grid), options.describe());
  auto [prescription, value] = solve_centralized(cp);
  PolicyProfile lifted = lift(problem, cp, prescription);

  std::uint64_t active = 0;
  for (bool a : cp.row_active) active += a ? 1 : 0;

  SolveResult result{.method = "ci",
                     .value = value,
                     .profile = std::move(lifted),
                     .prescription = std::move(prescription),
                     .grid = std::move(cp.grid),
                     .trace = {},
                     .evaluations = active * static_cast<std::uint64_t>(cp.m_table.size() /
                                                                        cp.common_space->size()),
                     .wall_seconds = 0.0};
  result.wall_seconds = now_seconds() - t0;
  return result;
}

std::pair<Kernel, double> best_deterministic_response(const TeamProblem& problem,
                                                      const PolicyProfile& profile, int agent) {
  ProfileEvaluator ev(problem);
  std::vector<double> h = ev.response_table(profile, agent);
  const std::size_t nu = problem.action_space(agent)->size();
  const std::size_t pairs =
      problem.common_space()->size() * problem.observation_space(agent)->size();

  std::vector<std::size_t> table(pairs, 0);
  double value = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    std::size_t best_u = 0;
    double best_v = h[p * nu];
    for (std::size_t u = 1; u < nu; ++u) {
      if (h[p * nu + u] < best_v) {
        best_v = h[p * nu + u];
        best_u = u;
      }
    }
    table[p] = best_u;
    value += best_v;
  }
  return {Kernel::deterministic(problem.policy_domain(agent), problem.action_space(agent), table),
          value};
}

SolveResult person_by_person(const TeamProblem& problem, const PolicyProfile& initial,
                             int max_iter, double tol) {
  if (max_iter < 1) throw std::invalid_argument("person_by_person: max_iter must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("person_by_person: tol must be positive");

  const double t0 = now_seconds();
  PolicyProfile current = initial;
  double j_current = expected_cost(problem, current);
  std::vector<double> trace{j_current};
  std::uint64_t evaluations = 0;

  for (int cycle = 0; cycle < max_iter; ++cycle) {
    const double j_cycle_start = j_current;
    for (int agent = 0; agent < problem.num_agents(); ++agent) {
      auto [reply, est] = best_deterministic_response(problem, current, agent);
      (void)est;
      std::vector<Kernel> parts = current.parts();
      parts[agent] = std::move(reply);
      PolicyProfile candidate(std::move(parts));
      const double j_candidate = expected_cost(problem, candidate);
      ++evaluations;
      // the exact best response cannot be worse; guard against fp jitter so
      // the trace is non-increasing by construction
      if (j_candidate < j_current) {
        current = std::move(candidate);
        j_current = j_candidate;
      }
      trace.push_back(j_current);
    }
    if (j_cycle_start - j_current < tol) break;
  }

  SolveResult result{.method = "pbp",
                     .value = j_current,
                     .profile = std::move(current),
                     .prescription = std::nullopt,
                     .grid = std::nullopt,
                     .trace = std::move(trace),
                     .evaluations = evaluations,
                     .wall_seconds = 0.0};
  result.wall_seconds = now_seconds() - t0;
  return result;
}

}  // namespace teamci
