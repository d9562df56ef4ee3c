#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teamci/indexing.hpp"
#include "teamci/kernel.hpp"

namespace teamci {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

// Observation channel of one agent, factored as W(dy|x) = q(y,x) mu(dy)
// against an explicit reference measure on the observation grid.
struct ObservationChannel {
  int agent = 0;
  Measure reference;              // mu_i on Y_i
  std::vector<double> density;    // q(y, x), y-major: density[y * nx + x]
  std::string family;             // optional provenance ("table" when dense)
  std::vector<double> family_params;

  double q(std::size_t y, std::size_t x, std::size_t nx) const { return density[y * nx + x]; }
};

// Cost specification: a dense table over (x, x0, y-tuple, u-tuple) in
// row-major order, possibly expanded from a named parametric family.  The
// family metadata is retained for file round-trips.
class CostSpec {
 public:
  enum class Family { Table, Quadratic, Mismatch };

  static CostSpec table(std::vector<double> values);
  // c = sum_i track[i] (u_i - x)^2 + coupling (sum_i u_i - x)^2
  //     + sum_i effort[i] u_i^2, evaluated on first coordinates.
  static CostSpec quadratic(std::vector<double> track_weights, double coupling_weight,
                            std::vector<double> effort_weights);
  // c = sum_i state[i] 1{u_i != x} + disagreement * sum_{i<j} 1{u_i != u_j},
  // comparing atom indices.
  static CostSpec mismatch(std::vector<double> state_weights, double disagreement_weight);

  Family family() const { return family_; }
  const std::vector<double>& table_values() const { return table_; }
  const std::vector<double>& track_weights() const { return track_weights_; }
  double coupling_weight() const { return coupling_weight_; }
  const std::vector<double>& effort_weights() const { return effort_weights_; }
  const std::vector<double>& state_weights() const { return state_weights_; }
  double disagreement_weight() const { return disagreement_weight_; }

 private:
  Family family_ = Family::Table;
  std::vector<double> table_;
  std::vector<double> track_weights_;
  double coupling_weight_ = 0.0;
  std::vector<double> effort_weights_;
  std::vector<double> state_weights_;
  double disagreement_weight_ = 0.0;

  friend class TeamProblem;
};

struct ValidationIssue {
  std::string code;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// Static team instance: N agents, joint law on X x X0, per-agent observation
// channels and a shared cost.  Construction performs shape checks and caches
// marginals and the dense cost table; semantic checks (normalization,
// nonnegativity) live in validate() so defective instances can be inspected.
class TeamProblem {
 public:
  TeamProblem(std::string name, SpacePtr state_space, SpacePtr common_space,
              std::vector<SpacePtr> observation_spaces, std::vector<SpacePtr> action_spaces,
              std::vector<double> joint_law,  // x-major: joint_law[x * nX0 + x0]
              std::vector<ObservationChannel> channels, CostSpec cost,
              std::uint64_t enumeration_cap = kDefaultEnumerationCap);

  const std::string& name() const { return name_; }
  int num_agents() const { return static_cast<int>(observation_spaces_.size()); }
  const SpacePtr& state_space() const { return state_space_; }
  const SpacePtr& common_space() const { return common_space_; }
  const SpacePtr& observation_space(int i) const { return observation_spaces_[i]; }
  const SpacePtr& action_space(int i) const { return action_spaces_[i]; }
  // Cached product X0 x Y_i, the domain of agent i's policy (x0-major).
  const SpacePtr& policy_domain(int i) const { return policy_domains_[i]; }

  double joint_weight(std::size_t x, std::size_t x0) const {
    return joint_law_[x * common_space_->size() + x0];
  }
  const std::vector<double>& joint_law() const { return joint_law_; }
  const Measure& state_marginal() const { return state_marginal_; }    // mu
  const Measure& common_marginal() const { return common_marginal_; }  // mu0

  const ObservationChannel& channel(int i) const { return channels_[i]; }
  double channel_q(int i, std::size_t y, std::size_t x) const {
    return channels_[i].density[y * state_space_->size() + x];
  }

  const CostSpec& cost() const { return cost_; }
  const JointIndexer& obs_indexer() const { return obs_indexer_; }
  const JointIndexer& act_indexer() const { return act_indexer_; }

  // Dense cost lookup; yj/uj are joint (row-major) tuple indices.
  double cost_value_joint(std::size_t x, std::size_t x0, std::size_t yj, std::size_t uj) const {
    return cost_table_[((x * common_marginal_.size() + x0) * obs_indexer_.total() + yj) *
                           act_indexer_.total() +
                       uj];
  }
  double cost_value(std::size_t x, std::size_t x0, std::span<const std::size_t> y,
                    std::span<const std::size_t> u) const {
    return cost_value_joint(x, x0, obs_indexer_.encode(y), act_indexer_.encode(u));
  }
  const std::vector<double>& cost_table() const { return cost_table_; }
  double min_cost() const { return min_cost_; }
  double max_cost() const { return max_cost_; }

  std::uint64_t enumeration_cap() const { return enumeration_cap_; }

  // Recorded modulus of TV-continuity of the pre-quantization channels, when
  // the file supplies one.  Metadata only: nothing at grid scale can verify
  // it, so it round-trips untouched.
  std::optional<double> channel_tv_modulus() const { return channel_tv_modulus_; }
  void set_channel_tv_modulus(double value) { channel_tv_modulus_ = value; }

 private:
  std::string name_;
  SpacePtr state_space_;
  SpacePtr common_space_;
  std::vector<SpacePtr> observation_spaces_;
  std::vector<SpacePtr> action_spaces_;
  std::vector<SpacePtr> policy_domains_;
  std::vector<double> joint_law_;
  Measure state_marginal_;
  Measure common_marginal_;
  std::vector<ObservationChannel> channels_;
  CostSpec cost_;
  std::vector<double> cost_table_;
  JointIndexer obs_indexer_;
  JointIndexer act_indexer_;
  double min_cost_ = 0.0;
  double max_cost_ = 0.0;
  std::uint64_t enumeration_cap_;
  std::optional<double> channel_tv_modulus_;
};

// Mechanized well-formedness report: channel normalization per (agent, x),
// density nonnegativity, joint-law mass, cost nonnegativity and finiteness.
// Reports, never mutates.
ValidationReport validate(const TeamProblem& problem);

// Per-agent policies: kernels from X0 x Y_i (x0-major rows) to U_i with
// probability rows.
class PolicyProfile {
 public:
  explicit PolicyProfile(std::vector<Kernel> parts);

  int num_agents() const { return static_cast<int>(parts_.size()); }
  const Kernel& part(int i) const { return parts_[i]; }
  const std::vector<Kernel>& parts() const { return parts_; }
  bool deterministic() const { return deterministic_; }

 private:
  std::vector<Kernel> parts_;
  bool deterministic_;
};

// Integral of the cost against a product of action measures:
//   sum_u c(x, x0, y, u) prod_i nus[i](u_i).
// Multilinear in the nus; collapses to a table lookup at point masses.
double tilde_c(const TeamProblem& problem, std::size_t x, std::size_t x0,
               std::span<const std::size_t> y, std::span<const Measure> nus);

// Exact expected cost of a profile:
//   sum_{x,x0} P(x,x0) sum_y prod_i q_i(y_i,x) mu_i(y_i)
//                      tilde_c(x, x0, y, (gamma_i(x0, y_i))_i).
double expected_cost(const TeamProblem& problem, const PolicyProfile& profile);

// P(x | x0) for positive-mass x0; zero-mass atoms get a uniform placeholder
// and set *flagged (they never enter any objective).
Measure conditional_state_law(const TeamProblem& problem, std::size_t x0,
                              bool* flagged = nullptr);

// Number of deterministic policies of one agent: |U_i|^(|X0| |Y_i|).
// Throws CapExceeded when above cap (or not representable).
std::uint64_t deterministic_policy_count(const TeamProblem& problem, int agent,
                                         std::uint64_t cap);

// The ordinal-th deterministic policy of one agent, in lexicographic order of
// the map table over (x0, y) pairs (pair index x0 * |Y_i| + y, pair 0 most
// significant).  Ordinal 0 maps every pair to action atom 0.
Kernel deterministic_policy(const TeamProblem& problem, int agent, std::uint64_t ordinal);

// Calls fn on every deterministic policy of the agent in lexicographic order.
void enumerate_deterministic_policies(const TeamProblem& problem, int agent, std::uint64_t cap,
                                      const std::function<void(const Kernel&)>& fn);

// Profile with every agent playing action atom 0 everywhere.
PolicyProfile all_first_action_profile(const TeamProblem& problem);

}  // namespace teamci
