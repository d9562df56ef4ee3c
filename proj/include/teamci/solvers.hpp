#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "teamci/reduction.hpp"

namespace teamci {

struct SolveResult {
  std::string method;
  double value = 0.0;
  PolicyProfile profile;
  std::optional<Prescription> prescription;  // CI pipeline only
  std::optional<std::vector<PrescriptionAction>> grid;
  std::vector<double> trace;                 // person-by-person value per step
  std::uint64_t evaluations = 0;
  double wall_seconds = 0.0;
};

// Total deterministic-profile count prod_i |U_i|^(|X0| |Y_i|); throws
// CapExceeded above cap.
std::uint64_t deterministic_profile_count(const TeamProblem& problem, std::uint64_t cap);

// Exhaustive minimum of J over all deterministic profiles, returning the
// lexicographically first minimizer (profiles ordered by agent-0-major
// policy ordinals).  `brute_force` distributes the profile range over OpenMP
// threads with a (value, ordinal)-keyed min reduction, so the result is
// schedule-independent and identical to `brute_force_serial`.
SolveResult brute_force(const TeamProblem& problem,
                        std::uint64_t cap = kDefaultEnumerationCap);
SolveResult brute_force_serial(const TeamProblem& problem,
                               std::uint64_t cap = kDefaultEnumerationCap);

// The full pipeline: build_lambda_grid -> reduce -> solve_centralized ->
// lift.  The reported value equals expected_cost of the lifted profile.
SolveResult solve_common_information(const TeamProblem& problem,
                                     const GridOptions& options = {});

// Cyclic exact best response in agent order, deterministic responses only.
// The value trace is non-increasing by construction; stops when a full cycle
// improves by less than tol or after max_iter cycles.
SolveResult person_by_person(const TeamProblem& problem, const PolicyProfile& initial,
                             int max_iter, double tol);

// Exact best deterministic reply of one agent holding the others fixed
// (lexicographically first among minimizers), plus the resulting cost.
std::pair<Kernel, double> best_deterministic_response(const TeamProblem& problem,
                                                      const PolicyProfile& profile, int agent);

}  // namespace teamci
