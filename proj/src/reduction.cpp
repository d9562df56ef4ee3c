#include "teamci/reduction.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "teamci/errors.hpp"

namespace teamci {

std::string GridOptions::describe() const {
  if (mode == Mode::Deterministic) return "deterministic";
  return "randomized:" + std::to_string(resolution);
}

namespace {

void check_action_shapes(const TeamProblem& problem, const PrescriptionAction& lambda) {
  if (static_cast<int>(lambda.parts.size()) != problem.num_agents())
    throw std::invalid_argument("prescription action: agent count mismatch");
  for (int i = 0; i < problem.num_agents(); ++i) {
    if (!same_space(lambda.parts[i].source(), problem.observation_space(i)) ||
        !same_space(lambda.parts[i].target(), problem.action_space(i)))
      throw std::invalid_argument("prescription action: component " + std::to_string(i) +
                                  " has mismatched spaces");
  }
}

// Compositions of r into m parts, enumerated so that index k of r=1 is the
// point mass on action atom k (descending first part).  comp_index selects
// one composition without materializing the list.
std::uint64_t composition_count(std::uint64_t r, std::uint64_t m) {
  // C(r + m - 1, m - 1), small arguments only
  std::uint64_t n = r + m - 1, k = m - 1, out = 1;
  for (std::uint64_t j = 1; j <= k; ++j) out = out * (n - k + j) / j;
  return out;
}

void composition_at(std::uint64_t r, std::size_t m, std::uint64_t index,
                    std::vector<std::uint64_t>& out) {
  out.assign(m, 0);
  std::uint64_t rem = r;
  for (std::size_t part = 0; part + 1 < m; ++part) {
    for (std::uint64_t k = rem + 1; k-- > 0;) {  // k = rem, rem-1, ..., 0
      std::uint64_t block = composition_count(rem - k, m - part - 1);
      if (index < block) {
        out[part] = k;
        rem -= k;
        break;
      }
      index -= block;
    }
  }
  out[m - 1] = rem;
}

}  // namespace

double evaluate_L(const TeamProblem& problem, std::size_t x, std::size_t x0,
                  const PrescriptionAction& lambda) {
  check_action_shapes(problem, lambda);
  if (x >= problem.state_space()->size() || x0 >= problem.common_space()->size())
    throw std::invalid_argument("evaluate_L: atom index out of range");

  const int n = problem.num_agents();
  const JointIndexer& obs = problem.obs_indexer();
  std::vector<std::size_t> y(n);
  std::vector<Measure> nus;

  double acc = 0.0;
  for (std::size_t yj = 0; yj < obs.total(); ++yj) {
    obs.decode(yj, y);
    double w = 1.0;
    for (int i = 0; i < n; ++i)
      w *= problem.channel_q(i, y[i], x) * problem.channel(i).reference.weight(y[i]);
    if (w == 0.0) continue;
    nus.clear();
    for (int i = 0; i < n; ++i) nus.push_back(lambda.parts[i].row(y[i]));
    acc += w * tilde_c(problem, x, x0, y, nus);
  }
  return acc;
}

double evaluate_M(const TeamProblem& problem, std::size_t x0, const PrescriptionAction& lambda) {
  if (x0 >= problem.common_space()->size())
    throw std::invalid_argument("evaluate_M: x0 out of range");
  if (problem.common_marginal().weight(x0) <= 0.0)
    throw std::invalid_argument("evaluate_M: x0 atom '" +
                                problem.common_space()->atom(x0).label +
                                "' has zero common-marginal mass");
  bool flagged = false;
  Measure cond = conditional_state_law(problem, x0, &flagged);
  double acc = 0.0;
  for (std::size_t x = 0; x < cond.size(); ++x) {
    double p = cond.weight(x);
    if (p == 0.0) continue;
    acc += p * evaluate_L(problem, x, x0, lambda);
  }
  return acc;
}

std::uint64_t lambda_grid_size(const TeamProblem& problem, const GridOptions& options) {
  std::uint64_t total = 1;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const std::uint64_t ny = problem.observation_space(i)->size();
    const std::uint64_t nu = problem.action_space(i)->size();
    std::uint64_t rows_per_y;
    if (options.mode == GridOptions::Mode::Deterministic) {
      rows_per_y = nu;
    } else {
      if (options.resolution < 1)
        throw std::invalid_argument("lambda grid: randomized resolution must be >= 1");
      rows_per_y = composition_count(options.resolution, nu);
    }
    auto per_agent = checked_pow(rows_per_y, ny);
    auto next = per_agent ? checked_mul(total, *per_agent) : std::nullopt;
    if (!next)
      throw CapExceeded("lambda grid overflows, cap is " + std::to_string(options.cap),
                        UINT64_MAX, options.cap);
    total = *next;
  }
  if (total > options.cap)
    throw CapExceeded("lambda grid has " + std::to_string(total) + " elements, cap is " +
                          std::to_string(options.cap),
                      total, options.cap);
  return total;
}

std::vector<PrescriptionAction> build_lambda_grid(const TeamProblem& problem,
                                                  const GridOptions& options) {
  const std::uint64_t total = lambda_grid_size(problem, options);
  const int n = problem.num_agents();
  const std::uint64_t r = options.mode == GridOptions::Mode::Deterministic
                              ? 1
                              : static_cast<std::uint64_t>(options.resolution);

  // Per-agent row alphabets: all simplex-lattice rows at resolution r, in an
  // order whose r=1 case is the point mass on atom 0, 1, 2, ...
  std::vector<std::vector<Measure>> row_alphabet(n);
  std::vector<std::uint64_t> rows_per_y(n);
  for (int i = 0; i < n; ++i) {
    const std::size_t nu = problem.action_space(i)->size();
    const std::uint64_t count = composition_count(r, nu);
    rows_per_y[i] = count;
    std::vector<std::uint64_t> comp;
    for (std::uint64_t k = 0; k < count; ++k) {
      composition_at(r, nu, k, comp);
      std::vector<double> w(nu);
      for (std::size_t u = 0; u < nu; ++u) w[u] = static_cast<double>(comp[u]) / double(r);
      row_alphabet[i].push_back(Measure::probability(problem.action_space(i), std::move(w)));
    }
  }

  // Flat enumeration: agent 0 most significant, within an agent row y=0 most
  // significant, digit = row alphabet index.
  std::vector<std::size_t> extents;
  for (int i = 0; i < n; ++i)
    for (std::size_t y = 0; y < problem.observation_space(i)->size(); ++y)
      extents.push_back(static_cast<std::size_t>(rows_per_y[i]));
  JointIndexer idx(extents);

  std::vector<PrescriptionAction> grid;
  grid.reserve(total);
  std::vector<std::size_t> digits(extents.size());
  for (std::uint64_t flat = 0; flat < total; ++flat) {
    idx.decode(flat, digits);
    PrescriptionAction lambda;
    std::size_t d = 0;
    for (int i = 0; i < n; ++i) {
      std::vector<Measure> rows;
      const std::size_t ny = problem.observation_space(i)->size();
      rows.reserve(ny);
      for (std::size_t y = 0; y < ny; ++y) rows.push_back(row_alphabet[i][digits[d++]]);
      lambda.parts.emplace_back(problem.observation_space(i), problem.action_space(i),
                                std::move(rows));
    }
    grid.push_back(std::move(lambda));
  }
  return grid;
}

namespace {

// Shared M-table fill; the flat entry loop is what reduce() parallelizes.
CentralizedProblem fill_m_table(const TeamProblem& problem, std::vector<PrescriptionAction> grid,
                                const std::string& grid_note, bool parallel) {
  if (grid.empty()) throw std::invalid_argument("reduce: empty prescription grid");
  for (const auto& lambda : grid) check_action_shapes(problem, lambda);

  CentralizedProblem cp;
  cp.common_space = problem.common_space();
  cp.grid = std::move(grid);
  const std::size_t nx0 = cp.common_space->size();
  const std::size_t g = cp.grid.size();
  cp.m_table.assign(nx0 * g, 0.0);
  cp.row_active.assign(nx0, false);
  cp.common_weights.assign(nx0, 0.0);
  for (std::size_t x0 = 0; x0 < nx0; ++x0) {
    cp.common_weights[x0] = problem.common_marginal().weight(x0);
    cp.row_active[x0] = cp.common_weights[x0] > 0.0;
  }

  // active (x0, j) entries, flattened for even distribution
  std::vector<std::size_t> active_rows;
  for (std::size_t x0 = 0; x0 < nx0; ++x0)
    if (cp.row_active[x0]) active_rows.push_back(x0);
  const std::size_t work = active_rows.size() * g;

  const auto entry = [&](std::size_t k) {
    const std::size_t x0 = active_rows[k / g];
    const std::size_t j = k % g;
    cp.m_table[x0 * g + j] = evaluate_M(problem, x0, cp.grid[j]);
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(work); ++k)
      entry(static_cast<std::size_t>(k));
  } else {
    for (std::size_t k = 0; k < work; ++k) entry(k);
  }

  std::ostringstream prov;
  prov << "problem=" << problem.name() << " grid_size=" << g;
  if (!grid_note.empty()) prov << " grid=" << grid_note;
  cp.provenance = prov.str();
  return cp;
}

}  // namespace

CentralizedProblem reduce(const TeamProblem& problem, std::vector<PrescriptionAction> grid,
                          const std::string& grid_note) {
  return fill_m_table(problem, std::move(grid), grid_note, /*parallel=*/true);
}

CentralizedProblem reduce_serial(const TeamProblem& problem,
                                 std::vector<PrescriptionAction> grid,
                                 const std::string& grid_note) {
  return fill_m_table(problem, std::move(grid), grid_note, /*parallel=*/false);
}

std::pair<Prescription, double> solve_centralized(const CentralizedProblem& cp) {
  if (cp.grid.empty()) throw std::invalid_argument("solve_centralized: empty grid");
  const std::size_t nx0 = cp.common_space->size();
  const std::size_t g = cp.grid.size();

  Prescription pres;
  pres.action_index.assign(nx0, Prescription::kUnassigned);
  double value = 0.0;
  for (std::size_t x0 = 0; x0 < nx0; ++x0) {
    if (!cp.row_active[x0]) continue;
    std::size_t best = 0;
    double best_m = cp.m_table[x0 * g];
    for (std::size_t j = 1; j < g; ++j) {
      double m = cp.m_table[x0 * g + j];
      if (m < best_m) {  // lowest index wins ties
        best_m = m;
        best = j;
      }
    }
    pres.action_index[x0] = static_cast<std::int64_t>(best);
    value += cp.common_weights[x0] * best_m;
  }
  return {pres, value};
}

PolicyProfile lift(const TeamProblem& problem, const CentralizedProblem& cp,
                   const Prescription& prescription) {
  const std::size_t nx0 = problem.common_space()->size();
  if (prescription.action_index.size() != nx0)
    throw std::invalid_argument("lift: prescription must cover every x0 atom");

  std::vector<Kernel> parts;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const std::size_t ny = problem.observation_space(i)->size();
    std::vector<Measure> rows;
    rows.reserve(nx0 * ny);
    for (std::size_t x0 = 0; x0 < nx0; ++x0) {
      std::int64_t j = prescription.action_index[x0];
      if (j == Prescription::kUnassigned) {
        if (problem.common_marginal().weight(x0) > 0.0)
          throw std::invalid_argument("lift: missing assignment on positive-mass x0 atom '" +
                                      problem.common_space()->atom(x0).label + "'");
        for (std::size_t y = 0; y < ny; ++y)
          rows.push_back(Measure::uniform(problem.action_space(i)));
        continue;
      }
      if (j < 0 || static_cast<std::size_t>(j) >= cp.grid.size())
        throw std::invalid_argument("lift: prescription index out of range");
      const Kernel& lam_i = cp.grid[static_cast<std::size_t>(j)].parts[i];
      for (std::size_t y = 0; y < ny; ++y) rows.push_back(lam_i.row(y));
    }
    parts.emplace_back(problem.policy_domain(i), problem.action_space(i), std::move(rows));
  }
  return PolicyProfile(std::move(parts));
}

PrescriptionAction restrict_profile(const TeamProblem& problem, const PolicyProfile& profile,
                                    std::size_t x0) {
  PrescriptionAction lambda;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const std::size_t ny = problem.observation_space(i)->size();
    std::vector<Measure> rows;
    rows.reserve(ny);
    for (std::size_t y = 0; y < ny; ++y) rows.push_back(profile.part(i).row(x0 * ny + y));
    lambda.parts.emplace_back(problem.observation_space(i), problem.action_space(i),
                              std::move(rows));
  }
  return lambda;
}

}  // namespace teamci
