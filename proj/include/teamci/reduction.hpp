#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "teamci/team_problem.hpp"

namespace teamci {

// One coordinator action: a tuple of per-agent kernels Y_i -> U_i with
// probability rows.
struct PrescriptionAction {
  std::vector<Kernel> parts;
};

// Coordinator policy on the grid: for each X0 atom, an index into a fixed
// list of prescription actions.  kUnassigned is allowed only on atoms of zero
// common-marginal mass.
struct Prescription {
  static constexpr std::int64_t kUnassigned = -1;
  std::vector<std::int64_t> action_index;
};

struct GridOptions {
  enum class Mode { Deterministic, Randomized };
  Mode mode = Mode::Deterministic;
  unsigned resolution = 1;  // simplex-lattice denominator for Randomized
  std::uint64_t cap = kDefaultEnumerationCap;

  std::string describe() const;
};

// The reduced centralized instance: a dense table M(x0, grid element).
// Rows for zero-mass x0 atoms are stored as zeros and excluded from
// optimization, value accounting and export.
struct CentralizedProblem {
  SpacePtr common_space;
  std::vector<PrescriptionAction> grid;
  std::vector<double> m_table;        // row-major [x0][grid index]
  std::vector<bool> row_active;       // mu0-mass > 0
  std::vector<double> common_weights; // mu0, the coordinator's observation law
  std::string provenance;

  double m(std::size_t x0, std::size_t j) const { return m_table[x0 * grid.size() + j]; }
};

// Coordinator cost of one action at a fixed (x, x0):
//   sum_y prod_i q_i(y_i, x) mu_i(y_i) * tilde_c(x, x0, y, (lambda_i(y_i))_i).
double evaluate_L(const TeamProblem& problem, std::size_t x, std::size_t x0,
                  const PrescriptionAction& lambda);

// Conditional coordinator cost M(x0, lambda) = E[L(x, x0, lambda) | x0].
// Refuses zero-mass x0 atoms.
double evaluate_M(const TeamProblem& problem, std::size_t x0, const PrescriptionAction& lambda);

// Size of the grid that build_lambda_grid would produce; throws CapExceeded
// above options.cap.
std::uint64_t lambda_grid_size(const TeamProblem& problem, const GridOptions& options);

// Deterministic mode: all tuples of per-agent deterministic kernels
// Y_i -> U_i in lexicographic order (agent 0 most significant, within an
// agent row y=0 most significant).  Randomized mode: rows range over the
// simplex lattice {k/r}, enumerated so that r=1 reproduces the deterministic
// grid exactly.  Duplicate-free and deterministic in both modes.
std::vector<PrescriptionAction> build_lambda_grid(const TeamProblem& problem,
                                                  const GridOptions& options);

// Fills the M table for every positive-mass x0 and grid element.
// `reduce` runs the same per-entry computation as `reduce_serial` with the
// entries distributed over OpenMP threads; outputs are identical.  The
// optional note (typically GridOptions::describe()) lands in the provenance.
CentralizedProblem reduce(const TeamProblem& problem, std::vector<PrescriptionAction> grid,
                          const std::string& grid_note = "");
CentralizedProblem reduce_serial(const TeamProblem& problem,
                                 std::vector<PrescriptionAction> grid,
                                 const std::string& grid_note = "");

// Per-x0 argmin over the grid (lowest index on ties) and the induced value
// sum_{x0} mu0(x0) min_j M(x0, j).  Refuses an empty grid.
std::pair<Prescription, double> solve_centralized(const CentralizedProblem& cp);

// Team profile with gamma_i(x0, y) = grid[prescription(x0)].parts[i].row(y).
// Zero-mass x0 atoms get uniform placeholder rows; a missing assignment on a
// positive-mass atom is refused.
PolicyProfile lift(const TeamProblem& problem, const CentralizedProblem& cp,
                   const Prescription& prescription);

// The prescription action a profile plays at one common-information atom.
PrescriptionAction restrict_profile(const TeamProblem& problem, const PolicyProfile& profile,
                                    std::size_t x0);

}  // namespace teamci
