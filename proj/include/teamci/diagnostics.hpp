#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teamci/reduction.hpp"
#include "teamci/test_function.hpp"

namespace teamci {

// ---------------------------------------------------------------------------
// w*-convergence of kernel sequences, probed against a finite bank.
// Verdicts are bank-relative: the check never asserts anything about test
// functions outside the supplied bank.

struct FunctionConvergence {
  std::vector<double> pairings;  // pairing(seq[n], f, mu) per n
  double limit_pairing = 0.0;
  double max_tail_deviation = 0.0;  // over indices >= n0
  bool converged = false;
};

struct ConvergenceReport {
  std::vector<FunctionConvergence> per_function;
  bool converged = false;
  std::string to_string() const;
};

ConvergenceReport check_wstar_convergence(std::span<const Kernel> seq, const Kernel& limit,
                                          std::span<const TestFunction> bank, const Measure& mu,
                                          double tol, std::size_t n0);

// ---------------------------------------------------------------------------
// Escaping-mass demonstration: point masses marching off a truncated grid.
// The pairing against any vanishing test function tends to 0 while every
// kernel in the sequence keeps full row mass; the pointwise limit has row
// mass 0, so the probability-valued kernels are not closed at grid scale.

struct EscapingMassReport {
  SpacePtr base;
  SpacePtr action;
  // pairings[k][n-1] = pairing of step-n kernel against bank[k].
  std::vector<std::vector<double>> pairings;
  std::vector<double> step_row_mass;   // per n, mass of every row of gamma_n
  double limit_row_mass = 0.0;         // 0
  MeasureKind limit_row_kind = MeasureKind::SubProbability;
  bool limit_is_probability = false;
  std::vector<std::size_t> underflow_steps;  // bank-0 pairing underflowed to 0
  std::string to_string() const;
};

// Bank members must share spaces and vanish at the far end of the grid
// (max |f| over atoms at the largest coordinate must be <= vanish_threshold);
// non-vanishing members are rejected.  The action grid must contain atoms at
// integer coordinates 1..n_max.
EscapingMassReport escaping_mass_demo(std::size_t n_max, std::span<const TestFunction> bank,
                                      double vanish_threshold = 1e-6);

// Canonical demo spaces: integer-coordinate action grid 1..n_max and a
// one-atom base space.
SpacePtr escaping_mass_action_grid(std::size_t n_max);
SpacePtr escaping_mass_base_space();

// ---------------------------------------------------------------------------
// Tightness of a family of measures against a nested compact-set schedule.

struct CompactSet {
  std::string name;
  std::vector<bool> member;  // per atom of the family's space
};

struct TightnessReport {
  std::vector<std::string> set_names;
  // outside_mass[m][s] = mass of family[m] outside schedule[s].
  std::vector<std::vector<double>> outside_mass;
  std::optional<std::size_t> sufficient_set;  // first s with sup outside <= eps
  double eps = 0.0;
  bool tight() const { return sufficient_set.has_value(); }
  std::string to_string() const;
};

// Requires a nonempty family on one space and a nested schedule (each set a
// subset of the next).
TightnessReport tightness_check(std::span<const Measure> family,
                                std::span<const CompactSet> schedule, double eps);

// Coordinate balls {atoms with max-norm coordinate <= R} for increasing radii.
std::vector<CompactSet> coordinate_ball_schedule(const SpacePtr& space,
                                                 std::span<const double> radii);
// Single-element schedule containing the whole grid (the natural exhaustion
// of a space flagged compact).
std::vector<CompactSet> full_space_schedule(const SpacePtr& space);

// ---------------------------------------------------------------------------
// IC growth class: inf over K x L^c x E3 of phi >= M for some candidate L.

struct IcClassResult {
  std::size_t set_index = 0;       // index into the candidate schedule
  std::string set_name;
  double achieved_min = 0.0;       // exact grid minimum over K x L^c x E3
};

// phi(e1, e2, e3) evaluated by index; candidates whose complement in E2 is
// empty are skipped (an empty complement certifies nothing at truncated
// scale).  Returns the first sufficient candidate, or nullopt.
std::optional<IcClassResult> ic_class_check(
    const std::function<double(std::size_t, std::size_t, std::size_t)>& phi, std::size_t n1,
    std::size_t n2, std::size_t n3, std::span<const std::size_t> K, double M,
    std::span<const CompactSet> candidates);

// ---------------------------------------------------------------------------
// Sub-level tightness of the reduced problem: the family of joint measures
// prod_i lambda_i(y_i)(du_i) (x) mu_i(dy_i) over grid elements with
// M(x0, lambda) <= r, checked against a schedule on the joint Y x U space.
// Also reports the hypothesis route: all-action-grids-compact shortcut,
// IC class of c~ = c prod_i q_i in the (Y, U, X) factorization at this x0,
// and the channel floor inf over (y, x) of prod_i q_i.

struct SublevelTightnessOptions {
  double ic_bound = 0.0;                    // M in the IC check; <=0 disables
  std::vector<double> ic_radii = {1, 2, 4, 8};  // candidate L balls in U
};

struct SublevelTightnessReport {
  double threshold = 0.0;
  std::vector<std::size_t> sublevel;  // grid indices with M(x0, .) <= r
  bool empty_sublevel = false;
  TightnessReport tightness;
  bool compact_shortcut = false;  // every U_i flagged compact
  std::optional<IcClassResult> ic;
  double channel_floor = 0.0;
  bool channel_floor_positive = false;
  std::string to_string() const;
};

SublevelTightnessReport sublevel_tightness(const TeamProblem& problem,
                                           const CentralizedProblem& cp, std::size_t x0,
                                           double r, std::span<const CompactSet> schedule,
                                           double eps,
                                           const SublevelTightnessOptions& options = {});

// Joint Y x U product space of a problem and the joint measure of one
// prescription action on it.
SpacePtr joint_obs_action_space(const TeamProblem& problem);
Measure prescription_joint_measure(const TeamProblem& problem, const SpacePtr& joint_space,
                                   const PrescriptionAction& lambda);

// ---------------------------------------------------------------------------
// Lower semicontinuity / continuity probe of M(x0, .) along supplied
// w*-convergent sequences of prescription actions.

struct LscSequenceResult {
  std::vector<double> m_values;   // M(x0, lambda^n)
  double m_limit = 0.0;           // M(x0, limit)
  double liminf_gap = 0.0;        // m_limit - min over the tail (n >= n0)
  double final_deviation = 0.0;   // |M(lambda^last) - m_limit|
  bool lsc_pass = false;          // liminf_gap <= tol
  bool continuity_pass = false;   // final_deviation <= tol
};

struct LscReport {
  std::vector<LscSequenceResult> sequences;
  bool all_pass = false;
  std::string to_string() const;
};

struct LscSequence {
  std::vector<PrescriptionAction> terms;
  PrescriptionAction limit;
};

// Each input sequence is first verified w*-convergent componentwise against
// the default per-agent banks; a non-convergent input is rejected with the
// convergence report in the exception message.
LscReport lsc_probe(const TeamProblem& problem, std::size_t x0,
                    std::span<const LscSequence> sequences, double tol, std::size_t n0 = 0);

}  // namespace teamci
