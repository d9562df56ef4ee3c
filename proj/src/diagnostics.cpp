#include "teamci/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace teamci {

// ---------------------------------------------------------------------------
// w*-convergence

std::string ConvergenceReport::to_string() const {
  std::ostringstream os;
  os << (converged ? "converged" : "not converged") << " (bank-relative verdict over "
     << per_function.size() << " test functions)\n";
  for (std::size_t k = 0; k < per_function.size(); ++k) {
    const auto& fc = per_function[k];
    os << "  f[" << k << "]: limit " << fc.limit_pairing << ", max tail deviation "
       << fc.max_tail_deviation << " -> " << (fc.converged ? "ok" : "fail") << "\n";
  }
  return os.str();
}

ConvergenceReport check_wstar_convergence(std::span<const Kernel> seq, const Kernel& limit,
                                          std::span<const TestFunction> bank, const Measure& mu,
                                          double tol, std::size_t n0) {
  if (bank.empty()) throw std::invalid_argument("check_wstar_convergence: empty bank");
  if (seq.empty()) throw std::invalid_argument("check_wstar_convergence: empty sequence");

  ConvergenceReport report;
  report.converged = true;
  for (const auto& f : bank) {
    FunctionConvergence fc;
    fc.limit_pairing = pairing(limit, f, mu);
    fc.pairings.reserve(seq.size());
    for (const auto& g : seq) fc.pairings.push_back(pairing(g, f, mu));
    fc.max_tail_deviation = 0.0;
    for (std::size_t nn = std::min(n0, seq.size()); nn < seq.size(); ++nn)
      fc.max_tail_deviation =
          std::max(fc.max_tail_deviation, std::abs(fc.pairings[nn] - fc.limit_pairing));
    fc.converged = fc.max_tail_deviation <= tol;
    report.converged = report.converged && fc.converged;
    report.per_function.push_back(std::move(fc));
  }
  return report;
}

// ---------------------------------------------------------------------------
// escaping mass

SpacePtr escaping_mass_action_grid(std::size_t n_max) {
  std::vector<Atom> atoms;
  atoms.reserve(n_max);
  for (std::size_t k = 1; k <= n_max; ++k)
    atoms.push_back({std::to_string(k), {static_cast<double>(k)}});
  return FiniteSpace::make("u-ray", std::move(atoms));
}

SpacePtr escaping_mass_base_space() {
  return FiniteSpace::make("x-point", {{"0", {0.0}}});
}

std::string EscapingMassReport::to_string() const {
  std::ostringstream os;
  os << "escaping-mass demo over " << pairings.size() << " test functions, "
     << step_row_mass.size() << " steps\n";
  os << "  gamma_n row mass: 1 at every step; limit row mass: " << limit_row_mass << " ("
     << teamci::to_string(limit_row_kind) << ", "
     << (limit_is_probability ? "probability" : "NOT a probability") << ")\n";
  if (!underflow_steps.empty())
    os << "  pairing underflowed to 0 from step " << underflow_steps.front() << " on (bank 0)\n";
  return os.str();
}

EscapingMassReport escaping_mass_demo(std::size_t n_max, std::span<const TestFunction> bank,
                                      double vanish_threshold) {
  if (bank.empty()) throw std::invalid_argument("escaping_mass_demo: empty bank");
  if (n_max == 0) throw std::invalid_argument("escaping_mass_demo: n_max must be >= 1");

  const SpacePtr base = bank[0].base();
  const SpacePtr action = bank[0].action();
  for (const auto& f : bank)
    if (!same_space(f.base(), base) || !same_space(f.action(), action))
      throw std::invalid_argument("escaping_mass_demo: bank members on mixed spaces");
  if (action->coord_dim() != 1)
    throw std::invalid_argument("escaping_mass_demo: action grid needs 1-d coordinates");

  // locate atoms at integer coordinates 1..n_max
  std::vector<std::size_t> atom_at_step(n_max, 0);
  double top_coord = -std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < action->size(); ++u)
    top_coord = std::max(top_coord, action->atom(u).coord[0]);
  for (std::size_t k = 1; k <= n_max; ++k) {
    bool found = false;
    for (std::size_t u = 0; u < action->size(); ++u) {
      if (action->atom(u).coord[0] == static_cast<double>(k)) {
        atom_at_step[k - 1] = u;
        found = true;
        break;
      }
    }
    if (!found)
      throw std::invalid_argument("escaping_mass_demo: grid lacks an atom at coordinate " +
                                  std::to_string(k));
  }

  // every bank member must vanish at the far end of the truncated grid
  for (std::size_t kf = 0; kf < bank.size(); ++kf) {
    double tail = 0.0;
    for (std::size_t y = 0; y < base->size(); ++y)
      for (std::size_t u = 0; u < action->size(); ++u)
        if (action->atom(u).coord[0] >= top_coord)
          tail = std::max(tail, std::abs(bank[kf].value(y, u)));
    if (tail > vanish_threshold)
      throw std::invalid_argument(
          "escaping_mass_demo: bank member " + std::to_string(kf) +
          " does not vanish at the grid end (tail max " + std::to_string(tail) +
          " above threshold " + std::to_string(vanish_threshold) + ")");
  }

  const Measure mu = Measure::uniform(base);
  EscapingMassReport report;
  report.base = base;
  report.action = action;
  report.pairings.assign(bank.size(), {});
  report.step_row_mass.reserve(n_max);

  for (std::size_t n = 1; n <= n_max; ++n) {
    Kernel gamma_n = Kernel::constant_row(base, Measure::point_mass(action, atom_at_step[n - 1]));
    report.step_row_mass.push_back(gamma_n.row(0).total());
    for (std::size_t kf = 0; kf < bank.size(); ++kf) {
      double p = pairing(gamma_n, bank[kf], mu);
      report.pairings[kf].push_back(p);
      if (kf == 0 && p == 0.0) report.underflow_steps.push_back(n);
    }
  }

  Kernel limit = Kernel::constant_row(base, Measure::zero(action));
  report.limit_row_mass = limit.row(0).total();
  report.limit_row_kind = limit.kind();
  report.limit_is_probability = limit.kind() == MeasureKind::Probability;
  return report;
}

// ---------------------------------------------------------------------------
// tightness

std::string TightnessReport::to_string() const {
  std::ostringstream os;
  if (outside_mass.empty()) {
    os << "tightness: empty family (trivially compact)\n";
    return os.str();
  }
  if (sufficient_set) {
    os << "tight: sup outside-mass <= " << eps << " at set '" << set_names[*sufficient_set]
       << "' (index " << *sufficient_set << ")\n";
  } else {
    os << "not tight at eps " << eps << " within the supplied schedule\n";
  }
  return os.str();
}

TightnessReport tightness_check(std::span<const Measure> family,
                                std::span<const CompactSet> schedule, double eps) {
  if (family.empty()) throw std::invalid_argument("tightness_check: empty family");
  if (schedule.empty()) throw std::invalid_argument("tightness_check: empty schedule");

  const SpacePtr space = family[0].space();
  for (const auto& m : family)
    if (!same_space(m.space(), space))
      throw std::invalid_argument("tightness_check: family on mixed spaces");
  for (const auto& s : schedule)
    if (s.member.size() != space->size())
      throw std::invalid_argument("tightness_check: schedule set '" + s.name +
                                  "' sized for a different space");
  for (std::size_t s = 1; s < schedule.size(); ++s)
    for (std::size_t a = 0; a < space->size(); ++a)
      if (schedule[s - 1].member[a] && !schedule[s].member[a])
        throw std::invalid_argument("tightness_check: schedule not nested at set '" +
                                    schedule[s].name + "'");

  TightnessReport report;
  report.eps = eps;
  for (const auto& s : schedule) report.set_names.push_back(s.name);
  report.outside_mass.assign(family.size(), std::vector<double>(schedule.size(), 0.0));

  for (std::size_t m = 0; m < family.size(); ++m) {
    for (std::size_t s = 0; s < schedule.size(); ++s) {
      double outside = 0.0;
      for (std::size_t a = 0; a < space->size(); ++a)
        if (!schedule[s].member[a]) outside += family[m].weight(a);
      report.outside_mass[m][s] = outside;
    }
  }

  for (std::size_t s = 0; s < schedule.size(); ++s) {
    double sup = 0.0;
    for (std::size_t m = 0; m < family.size(); ++m)
      sup = std::max(sup, report.outside_mass[m][s]);
    if (sup <= eps) {
      report.sufficient_set = s;
      break;
    }
  }
  return report;
}

std::vector<CompactSet> coordinate_ball_schedule(const SpacePtr& space,
                                                 std::span<const double> radii) {
  std::vector<CompactSet> schedule;
  for (double r : radii) {
    CompactSet set;
    set.name = "ball(" + std::to_string(r) + ")";
    set.member.resize(space->size());
    for (std::size_t a = 0; a < space->size(); ++a)
      set.member[a] = space->coord_radius(a) <= r;
    schedule.push_back(std::move(set));
  }
  return schedule;
}

std::vector<CompactSet> full_space_schedule(const SpacePtr& space) {
  CompactSet set;
  set.name = "full-grid";
  set.member.assign(space->size(), true);
  return {std::move(set)};
}

// ---------------------------------------------------------------------------
// IC class

std::optional<IcClassResult> ic_class_check(
    const std::function<double(std::size_t, std::size_t, std::size_t)>& phi, std::size_t n1,
    std::size_t n2, std::size_t n3, std::span<const std::size_t> K, double M,
    std::span<const CompactSet> candidates) {
  if (candidates.empty()) throw std::invalid_argument("ic_class_check: empty candidate schedule");
  if (K.empty()) throw std::invalid_argument("ic_class_check: empty compact set K");
  for (std::size_t e1 : K)
    if (e1 >= n1) throw std::invalid_argument("ic_class_check: K index out of range");

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& L = candidates[c];
    if (L.member.size() != n2)
      throw std::invalid_argument("ic_class_check: candidate '" + L.name +
                                  "' sized for a different space");
    // an empty complement certifies nothing at truncated scale
    bool has_complement = false;
    for (std::size_t e2 = 0; e2 < n2; ++e2) has_complement = has_complement || !L.member[e2];
    if (!has_complement) continue;

    double min_phi = std::numeric_limits<double>::infinity();
    for (std::size_t e1 : K)
      for (std::size_t e2 = 0; e2 < n2; ++e2) {
        if (L.member[e2]) continue;
        for (std::size_t e3 = 0; e3 < n3; ++e3)
          min_phi = std::min(min_phi, phi(e1, e2, e3));
      }
    if (min_phi >= M) return IcClassResult{c, L.name, min_phi};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// sub-level tightness

SpacePtr joint_obs_action_space(const TeamProblem& problem) {
  std::vector<SpacePtr> parts;
  for (int i = 0; i < problem.num_agents(); ++i) parts.push_back(problem.observation_space(i));
  for (int i = 0; i < problem.num_agents(); ++i) parts.push_back(problem.action_space(i));
  return FiniteSpace::product(parts);
}

Measure prescription_joint_measure(const TeamProblem& problem, const SpacePtr& joint_space,
                                   const PrescriptionAction& lambda) {
  const int n = problem.num_agents();
  std::vector<std::size_t> extents;
  for (int i = 0; i < n; ++i) extents.push_back(problem.observation_space(i)->size());
  for (int i = 0; i < n; ++i) extents.push_back(problem.action_space(i)->size());
  JointIndexer idx(extents);
  if (idx.total() != joint_space->size())
    throw std::invalid_argument("prescription_joint_measure: joint space size mismatch");

  std::vector<double> w(idx.total());
  std::vector<std::size_t> digits(extents.size());
  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    idx.decode(flat, digits);
    double v = 1.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t y = digits[i];
      const std::size_t u = digits[n + i];
      v *= problem.channel(i).reference.weight(y) * lambda.parts[i].row(y).weight(u);
    }
    w[flat] = v;
  }
  return Measure::probability(joint_space, std::move(w));
}

std::string SublevelTightnessReport::to_string() const {
  std::ostringstream os;
  os << "sub-level set {M(x0,.) <= " << threshold << "}: " << sublevel.size() << " elements\n";
  if (empty_sublevel) {
    os << "  empty (trivially compact)\n";
    return os.str();
  }
  os << "  " << tightness.to_string();
  os << "  hypothesis route: compact-action shortcut "
     << (compact_shortcut ? "applies" : "does not apply") << "; channel floor " << channel_floor
     << (channel_floor_positive ? " > 0" : " (not positive)");
  if (ic)
    os << "; IC class holds with L = " << ic->set_name << " (min " << ic->achieved_min << ")";
  os << "\n";
  return os.str();
}

SublevelTightnessReport sublevel_tightness(const TeamProblem& problem,
                                           const CentralizedProblem& cp, std::size_t x0,
                                           double r, std::span<const CompactSet> schedule,
                                           double eps, const SublevelTightnessOptions& options) {
  if (x0 >= cp.common_space->size() || !cp.row_active[x0])
    throw std::invalid_argument("sublevel_tightness: no active M-table row for x0");

  SublevelTightnessReport report;
  report.threshold = r;
  for (std::size_t j = 0; j < cp.grid.size(); ++j)
    if (cp.m(x0, j) <= r) report.sublevel.push_back(j);
  report.empty_sublevel = report.sublevel.empty();

  // hypothesis route (i): every action grid flagged compact
  report.compact_shortcut = true;
  for (int i = 0; i < problem.num_agents(); ++i)
    report.compact_shortcut =
        report.compact_shortcut && problem.action_space(i)->compact_flag();

  // hypothesis route (ii)(b): channel floor over (y-tuple, x)
  const JointIndexer& obs = problem.obs_indexer();
  const std::size_t nx = problem.state_space()->size();
  double floor = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> y(problem.num_agents());
  for (std::size_t yj = 0; yj < obs.total(); ++yj) {
    obs.decode(yj, y);
    for (std::size_t x = 0; x < nx; ++x) {
      double prod = 1.0;
      for (int i = 0; i < problem.num_agents(); ++i) prod *= problem.channel_q(i, y[i], x);
      floor = std::min(floor, prod);
    }
  }
  report.channel_floor = floor;
  report.channel_floor_positive = floor > 0.0;

  // hypothesis route (ii)(a): c~ = c prod q_i in IC(Y, U) at this x0
  if (options.ic_bound > 0.0) {
    const JointIndexer& act = problem.act_indexer();
    SpacePtr u_space;
    {
      std::vector<SpacePtr> parts;
      for (int i = 0; i < problem.num_agents(); ++i) parts.push_back(problem.action_space(i));
      u_space = FiniteSpace::product(parts);
    }
    auto candidates = coordinate_ball_schedule(u_space, options.ic_radii);
    std::vector<std::size_t> K(obs.total());
    for (std::size_t k = 0; k < K.size(); ++k) K[k] = k;
    std::vector<std::size_t> ybuf(problem.num_agents());
    auto phi = [&](std::size_t yj, std::size_t uj, std::size_t x) {
      obs.decode(yj, ybuf);
      double q = 1.0;
      for (int i = 0; i < problem.num_agents(); ++i) q *= problem.channel_q(i, ybuf[i], x);
      return problem.cost_value_joint(x, x0, yj, uj) * q;
    };
    report.ic = ic_class_check(phi, obs.total(), act.total(), nx, K, options.ic_bound,
                               candidates);
  }

  if (report.empty_sublevel) {
    report.tightness.eps = eps;
    return report;
  }

  SpacePtr joint = joint_obs_action_space(problem);
  std::vector<Measure> family;
  family.reserve(report.sublevel.size());
  for (std::size_t j : report.sublevel)
    family.push_back(prescription_joint_measure(problem, joint, cp.grid[j]));
  report.tightness = tightness_check(family, schedule, eps);
  return report;
}

// ---------------------------------------------------------------------------
// lower semicontinuity probe

std::string LscReport::to_string() const {
  std::ostringstream os;
  os << (all_pass ? "pass" : "fail") << " over " << sequences.size() << " sequences\n";
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& r = sequences[s];
    os << "  seq[" << s << "]: liminf gap " << r.liminf_gap << " ("
       << (r.lsc_pass ? "ok" : "fail") << "), final deviation " << r.final_deviation << " ("
       << (r.continuity_pass ? "ok" : "fail") << ")\n";
  }
  return os.str();
}

LscReport lsc_probe(const TeamProblem& problem, std::size_t x0,
                    std::span<const LscSequence> sequences, double tol, std::size_t n0) {
  if (sequences.empty()) throw std::invalid_argument("lsc_probe: no sequences");

  // per-agent default banks for the convergence precondition
  std::vector<std::vector<TestFunction>> banks;
  for (int i = 0; i < problem.num_agents(); ++i)
    banks.push_back(default_test_bank(problem.observation_space(i), problem.action_space(i)));

  LscReport report;
  report.all_pass = true;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    if (seq.terms.empty()) throw std::invalid_argument("lsc_probe: empty sequence");

    // verify w*-convergence componentwise before touching M
    for (int i = 0; i < problem.num_agents(); ++i) {
      std::vector<Kernel> component;
      component.reserve(seq.terms.size());
      for (const auto& lam : seq.terms) component.push_back(lam.parts[i]);
      ConvergenceReport conv =
          check_wstar_convergence(component, seq.limit.parts[i], banks[i],
                                  problem.channel(i).reference, tol, n0);
      if (!conv.converged)
        throw std::invalid_argument("lsc_probe: sequence " + std::to_string(s) + ", agent " +
                                    std::to_string(i) +
                                    " is not w*-convergent to its designated limit:\n" +
                                    conv.to_string());
    }

    LscSequenceResult r;
    r.m_limit = evaluate_M(problem, x0, seq.limit);
    r.m_values.reserve(seq.terms.size());
    for (const auto& lam : seq.terms) r.m_values.push_back(evaluate_M(problem, x0, lam));

    double tail_min = std::numeric_limits<double>::infinity();
    for (std::size_t nn = std::min(n0, r.m_values.size() - 1); nn < r.m_values.size(); ++nn)
      tail_min = std::min(tail_min, r.m_values[nn]);
    r.liminf_gap = r.m_limit - tail_min;
    r.final_deviation = std::abs(r.m_values.back() - r.m_limit);
    r.lsc_pass = r.liminf_gap <= tol;
    r.continuity_pass = r.final_deviation <= tol;
    report.all_pass = report.all_pass && r.lsc_pass && r.continuity_pass;
    report.sequences.push_back(std::move(r));
  }
  return report;
}

}  // namespace teamci
