#pragma once

#include <vector>

#include "teamci/measure.hpp"

namespace teamci {

// Stochastic kernel between finite spaces: one measure over the target per
// source atom.  The kernel's kind is the weakest row kind (probability if all
// rows are probabilities, sub-probability if all are at most that, signed
// otherwise).  Immutable after construction.
class Kernel {
 public:
  Kernel(SpacePtr source, SpacePtr target, std::vector<Measure> rows);

  // Point-mass rows: source atom s maps to target atom action_by_source[s].
  static Kernel deterministic(SpacePtr source, SpacePtr target,
                              const std::vector<std::size_t>& action_by_source);

  // Every row equal to the given measure.
  static Kernel constant_row(SpacePtr source, Measure row);

  const SpacePtr& source() const { return source_; }
  const SpacePtr& target() const { return target_; }
  std::size_t rows() const { return rows_.size(); }
  const Measure& row(std::size_t s) const { return rows_[s]; }
  MeasureKind kind() const { return kind_; }

  // Every row a point mass?
  bool is_deterministic() const;

 private:
  SpacePtr source_;
  SpacePtr target_;
  std::vector<Measure> rows_;
  MeasureKind kind_;
};

// Row-wise convex combination (1-t)*a + t*b; kinds must allow it (probability
// rows mix to probability rows).
Kernel mix_kernels(const Kernel& a, const Kernel& b, double t);

// ess sup over the source of the row TV norm, realized on a finite grid as
// the max over atoms carrying positive reference mass.  Equals 1 for
// stochastic kernels and 0 for the zero kernel.
double kernel_inf_norm(const Kernel& gamma, const Measure& reference);

}  // namespace teamci
