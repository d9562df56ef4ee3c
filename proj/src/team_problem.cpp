#include "teamci/team_problem.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "teamci/errors.hpp"

namespace teamci {

CostSpec CostSpec::table(std::vector<double> values) {
  CostSpec c;
  c.family_ = Family::Table;
  c.table_ = std::move(values);
  return c;
}

CostSpec CostSpec::quadratic(std::vector<double> track_weights, double coupling_weight,
                             std::vector<double> effort_weights) {
  CostSpec c;
  c.family_ = Family::Quadratic;
  c.track_weights_ = std::move(track_weights);
  c.coupling_weight_ = coupling_weight;
  c.effort_weights_ = std::move(effort_weights);
  return c;
}

CostSpec CostSpec::mismatch(std::vector<double> state_weights, double disagreement_weight) {
  CostSpec c;
  c.family_ = Family::Mismatch;
  c.state_weights_ = std::move(state_weights);
  c.disagreement_weight_ = disagreement_weight;
  return c;
}

namespace {

// Expands a cost family to the dense table over (x, x0, y-tuple, u-tuple).
std::vector<double> expand_cost(const CostSpec& cost, const SpacePtr& state,
                                const SpacePtr& common, const JointIndexer& obs_idx,
                                const JointIndexer& act_idx,
                                const std::vector<SpacePtr>& action_spaces) {
  const std::size_t nx = state->size();
  const std::size_t nx0 = common->size();
  const std::size_t nyj = obs_idx.total();
  const std::size_t nuj = act_idx.total();
  const std::size_t n_agents = action_spaces.size();

  if (cost.family() == CostSpec::Family::Table) {
    if (cost.table_values().size() != nx * nx0 * nyj * nuj)
      throw std::invalid_argument("cost table: expected " +
                                  std::to_string(nx * nx0 * nyj * nuj) + " entries, got " +
                                  std::to_string(cost.table_values().size()));
    return cost.table_values();
  }

  if (cost.family() == CostSpec::Family::Quadratic) {
    if (state->coord_dim() == 0)
      throw std::invalid_argument("quadratic cost: state space has no coordinates");
    for (const auto& us : action_spaces)
      if (us->coord_dim() == 0)
        throw std::invalid_argument("quadratic cost: action space '" + us->label() +
                                    "' has no coordinates");
    if (cost.track_weights().size() != n_agents || cost.effort_weights().size() != n_agents)
      throw std::invalid_argument("quadratic cost: one track/effort weight per agent required");
  }
  if (cost.family() == CostSpec::Family::Mismatch &&
      cost.state_weights().size() != n_agents)
    throw std::invalid_argument("mismatch cost: one state weight per agent required");

  std::vector<double> out(nx * nx0 * nyj * nuj);
  std::vector<std::size_t> u(n_agents);
  for (std::size_t x = 0; x < nx; ++x) {
    double xc = state->coord_dim() ? state->atom(x).coord[0] : 0.0;
    for (std::size_t uj = 0; uj < nuj; ++uj) {
      act_idx.decode(uj, u);
      double v = 0.0;
      if (cost.family() == CostSpec::Family::Quadratic) {
        double usum = 0.0;
        for (std::size_t i = 0; i < n_agents; ++i) {
          double uc = action_spaces[i]->atom(u[i]).coord[0];
          usum += uc;
          v += cost.track_weights()[i] * (uc - xc) * (uc - xc);
          v += cost.effort_weights()[i] * uc * uc;
        }
        v += cost.coupling_weight() * (usum - xc) * (usum - xc);
      } else {  // Mismatch: compare atom indices
        for (std::size_t i = 0; i < n_agents; ++i)
          if (u[i] != x) v += cost.state_weights()[i];
        for (std::size_t i = 0; i < n_agents; ++i)
          for (std::size_t j = i + 1; j < n_agents; ++j)
            if (u[i] != u[j]) v += cost.disagreement_weight();
      }
      // the same (x, u) value for every (x0, y)
      for (std::size_t x0 = 0; x0 < nx0; ++x0)
        for (std::size_t yj = 0; yj < nyj; ++yj)
          out[((x * nx0 + x0) * nyj + yj) * nuj + uj] = v;
    }
  }
  return out;
}

}  // namespace

TeamProblem::TeamProblem(std::string name, SpacePtr state_space, SpacePtr common_space,
                         std::vector<SpacePtr> observation_spaces,
                         std::vector<SpacePtr> action_spaces, std::vector<double> joint_law,
                         std::vector<ObservationChannel> channels, CostSpec cost,
                         std::uint64_t enumeration_cap)
    : name_(std::move(name)),
      state_space_(std::move(state_space)),
      common_space_(std::move(common_space)),
      observation_spaces_(std::move(observation_spaces)),
      action_spaces_(std::move(action_spaces)),
      joint_law_(std::move(joint_law)),
      state_marginal_(Measure::zero(state_space_)),    // placeholders, set below
      common_marginal_(Measure::zero(common_space_)),
      channels_(std::move(channels)),
      cost_(std::move(cost)),
      enumeration_cap_(enumeration_cap) {
  const std::size_t nx = state_space_->size();
  const std::size_t nx0 = common_space_->size();

  if (observation_spaces_.empty() || observation_spaces_.size() != action_spaces_.size())
    throw std::invalid_argument("team problem: need one observation and action space per agent");
  if (channels_.size() != observation_spaces_.size())
    throw std::invalid_argument("team problem: need one channel per agent");
  if (joint_law_.size() != nx * nx0)
    throw std::invalid_argument("team problem: joint law must be |X| x |X0|");

  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto& ch = channels_[i];
    if (!same_space(ch.reference.space(), observation_spaces_[i]))
      throw std::invalid_argument("channel " + std::to_string(i) +
                                  ": reference measure on wrong space");
    if (ch.density.size() != observation_spaces_[i]->size() * nx)
      throw std::invalid_argument("channel " + std::to_string(i) + ": density must be |Y| x |X|");
  }

  std::vector<std::size_t> obs_extents, act_extents;
  for (const auto& s : observation_spaces_) obs_extents.push_back(s->size());
  for (const auto& s : action_spaces_) act_extents.push_back(s->size());
  obs_indexer_ = JointIndexer(obs_extents);
  act_indexer_ = JointIndexer(act_extents);

  // marginals (joint law may be dirty; clamp only for the cached measures)
  std::vector<double> mu(nx, 0.0), mu0(nx0, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t x0 = 0; x0 < nx0; ++x0) {
      mu[x] += joint_law_[x * nx0 + x0];
      mu0[x0] += joint_law_[x * nx0 + x0];
    }
  state_marginal_ = Measure::signed_measure(state_space_, std::move(mu));
  common_marginal_ = Measure::signed_measure(common_space_, std::move(mu0));

  for (int i = 0; i < num_agents(); ++i)
    policy_domains_.push_back(FiniteSpace::product({common_space_, observation_spaces_[i]}));

  cost_table_ =
      expand_cost(cost_, state_space_, common_space_, obs_indexer_, act_indexer_, action_spaces_);
  min_cost_ = cost_table_.empty() ? 0.0 : cost_table_[0];
  max_cost_ = min_cost_;
  for (double v : cost_table_) {
    min_cost_ = std::min(min_cost_, v);
    max_cost_ = std::max(max_cost_, v);
  }
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok: all invariants hold\n";
  std::ostringstream os;
  for (const auto& issue : issues) os << issue.code << ": " << issue.detail << "\n";
  return os.str();
}

ValidationReport validate(const TeamProblem& problem) {
  ValidationReport report;
  auto add = [&](std::string code, std::string detail) {
    report.issues.push_back({std::move(code), std::move(detail)});
  };

  const std::size_t nx = problem.state_space()->size();

  // joint law: nonnegative probability mass
  double mass = 0.0;
  bool law_clean = true;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t x0 = 0; x0 < problem.common_space()->size(); ++x0) {
      double w = problem.joint_weight(x, x0);
      if (!std::isfinite(w)) {
        add("joint-law-finite", "non-finite weight at (x=" + std::to_string(x) +
                                    ", x0=" + std::to_string(x0) + ")");
        law_clean = false;
      } else if (w < 0.0) {
        add("joint-law-negative", "negative weight at (x=" + std::to_string(x) +
                                      ", x0=" + std::to_string(x0) + ")");
        law_clean = false;
      } else {
        mass += w;
      }
    }
  if (law_clean && std::abs(mass - 1.0) > kMassTol)
    add("joint-law-mass", "total mass " + std::to_string(mass));

  // channels: q >= 0 finite, and each W_i(.|x) a probability measure
  for (int i = 0; i < problem.num_agents(); ++i) {
    const auto& ch = problem.channel(i);
    const std::size_t ny = problem.observation_space(i)->size();
    for (std::size_t x = 0; x < nx; ++x) {
      double row = 0.0;
      bool clean = true;
      for (std::size_t y = 0; y < ny; ++y) {
        double q = ch.density[y * nx + x];
        if (!std::isfinite(q)) {
          add("channel-finite", "agent " + std::to_string(i) + ", non-finite density at (y=" +
                                    std::to_string(y) + ", x=" + std::to_string(x) + ")");
          clean = false;
        } else if (q < 0.0) {
          add("channel-negative", "agent " + std::to_string(i) + ", negative density at (y=" +
                                      std::to_string(y) + ", x=" + std::to_string(x) + ")");
          clean = false;
        } else {
          row += q * ch.reference.weight(y);
        }
      }
      if (clean && std::abs(row - 1.0) > kMassTol)
        add("channel-normalization",
            "agent " + std::to_string(i) + ", state x=" + std::to_string(x) +
                ": sum_y q(y,x) mu(y) = " + std::to_string(row));
    }
    if (ch.reference.kind() != MeasureKind::Probability)
      add("channel-reference", "agent " + std::to_string(i) + ": reference not a probability");
  }

  // cost: nonnegative and finite
  for (std::size_t k = 0; k < problem.cost_table().size(); ++k) {
    double v = problem.cost_table()[k];
    if (!std::isfinite(v)) {
      add("cost-finite", "non-finite cost entry at flat index " + std::to_string(k));
    } else if (v < 0.0) {
      add("cost-negative", "negative cost entry at flat index " + std::to_string(k));
    }
  }
  return report;
}

PolicyProfile::PolicyProfile(std::vector<Kernel> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw std::invalid_argument("policy profile: no agents");
  deterministic_ = true;
  for (const auto& k : parts_) deterministic_ = deterministic_ && k.is_deterministic();
}

double tilde_c(const TeamProblem& problem, std::size_t x, std::size_t x0,
               std::span<const std::size_t> y, std::span<const Measure> nus) {
  const int n = problem.num_agents();
  if (static_cast<int>(nus.size()) != n)
    throw std::invalid_argument("tilde_c: one action measure per agent required");
  for (int i = 0; i < n; ++i) {
    if (!same_space(nus[i].space(), problem.action_space(i)))
      throw std::invalid_argument("tilde_c: measure " + std::to_string(i) + " on wrong space");
    if (nus[i].kind() == MeasureKind::Signed)
      throw std::invalid_argument("tilde_c: action measures must be (sub-)probability");
  }

  const std::size_t yj = problem.obs_indexer().encode(y);

  // fast path: all point masses collapse to a single table lookup
  bool all_points = true;
  std::vector<std::size_t> u(n);
  for (int i = 0; i < n; ++i) {
    auto p = nus[i].point_support();
    if (!p) {
      all_points = false;
      break;
    }
    u[i] = *p;
  }
  if (all_points) return problem.cost_value_joint(x, x0, yj, problem.act_indexer().encode(u));

  const JointIndexer& act = problem.act_indexer();
  double acc = 0.0;
  for (std::size_t uj = 0; uj < act.total(); ++uj) {
    act.decode(uj, u);
    double w = 1.0;
    for (int i = 0; i < n; ++i) w *= nus[i].weight(u[i]);
    if (w == 0.0) continue;
    acc += w * problem.cost_value_joint(x, x0, yj, uj);
  }
  return acc;
}

double expected_cost(const TeamProblem& problem, const PolicyProfile& profile) {
  const int n = problem.num_agents();
  if (profile.num_agents() != n)
    throw std::invalid_argument("expected_cost: agent count mismatch");
  for (int i = 0; i < n; ++i) {
    if (!same_space(profile.part(i).source(), problem.policy_domain(i)) ||
        !same_space(profile.part(i).target(), problem.action_space(i)))
      throw std::invalid_argument("expected_cost: profile spaces do not match the problem");
  }

  const std::size_t nx = problem.state_space()->size();
  const std::size_t nx0 = problem.common_space()->size();
  const JointIndexer& obs = problem.obs_indexer();

  std::vector<std::size_t> y(n);
  std::vector<Measure> nus;
  double total = 0.0;
  for (std::size_t x0 = 0; x0 < nx0; ++x0) {
    for (std::size_t x = 0; x < nx; ++x) {
      double pxx0 = problem.joint_weight(x, x0);
      if (pxx0 == 0.0) continue;
      double inner = 0.0;
      for (std::size_t yj = 0; yj < obs.total(); ++yj) {
        obs.decode(yj, y);
        double w = 1.0;
        for (int i = 0; i < n; ++i)
          w *= problem.channel_q(i, y[i], x) * problem.channel(i).reference.weight(y[i]);
        if (w == 0.0) continue;
        nus.clear();
        for (int i = 0; i < n; ++i) {
          std::size_t ny_i = problem.observation_space(i)->size();
          nus.push_back(profile.part(i).row(x0 * ny_i + y[i]));
        }
        inner += w * tilde_c(problem, x, x0, y, nus);
      }
      total += pxx0 * inner;
    }
  }
  return total;
}

Measure conditional_state_law(const TeamProblem& problem, std::size_t x0, bool* flagged) {
  const std::size_t nx = problem.state_space()->size();
  double mass = problem.common_marginal().weight(x0);
  if (mass <= 0.0) {
    if (flagged) *flagged = true;
    return Measure::uniform(problem.state_space());
  }
  if (flagged) *flagged = false;
  std::vector<double> w(nx);
  for (std::size_t x = 0; x < nx; ++x) w[x] = problem.joint_weight(x, x0) / mass;
  return Measure::probability(problem.state_space(), std::move(w));
}

std::uint64_t deterministic_policy_count(const TeamProblem& problem, int agent,
                                         std::uint64_t cap) {
  const std::uint64_t pairs = static_cast<std::uint64_t>(problem.common_space()->size()) *
                              problem.observation_space(agent)->size();
  auto count = checked_pow(problem.action_space(agent)->size(), pairs);
  if (!count)
    throw CapExceeded("deterministic policy enumeration for agent " + std::to_string(agent) +
                          " overflows (|U|^" + std::to_string(pairs) + "), cap is " +
                          std::to_string(cap),
                      UINT64_MAX, cap);
  if (*count > cap)
    throw CapExceeded("deterministic policy enumeration for agent " + std::to_string(agent) +
                          ": " + std::to_string(*count) + " policies exceed cap " +
                          std::to_string(cap),
                      *count, cap);
  return *count;
}

Kernel deterministic_policy(const TeamProblem& problem, int agent, std::uint64_t ordinal) {
  const std::size_t pairs =
      problem.common_space()->size() * problem.observation_space(agent)->size();
  const std::uint64_t nu = problem.action_space(agent)->size();
  std::vector<std::size_t> table(pairs, 0);
  // most-significant digit first: ordinal 0 is the all-first-action map
  for (std::size_t p = pairs; p-- > 0;) {
    table[p] = static_cast<std::size_t>(ordinal % nu);
    ordinal /= nu;
  }
  return Kernel::deterministic(problem.policy_domain(agent), problem.action_space(agent), table);
}

void enumerate_deterministic_policies(const TeamProblem& problem, int agent, std::uint64_t cap,
                                      const std::function<void(const Kernel&)>& fn) {
  const std::uint64_t count = deterministic_policy_count(problem, agent, cap);
  for (std::uint64_t o = 0; o < count; ++o) fn(deterministic_policy(problem, agent, o));
}

PolicyProfile all_first_action_profile(const TeamProblem& problem) {
  std::vector<Kernel> parts;
  for (int i = 0; i < problem.num_agents(); ++i)
    parts.push_back(deterministic_policy(problem, i, 0));
  return PolicyProfile(std::move(parts));
}

}  // namespace teamci
