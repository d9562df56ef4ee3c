#pragma once

#include <vector>

#include "teamci/finite_space.hpp"

namespace teamci {

// Tolerance on measure normalization; algebraic identities are tested at the
// stricter 1e-12 elsewhere.
inline constexpr double kMassTol = 1e-9;

enum class MeasureKind { Probability, SubProbability, Signed };

const char* to_string(MeasureKind kind);

// Finite-support measure: one real weight per atom of a FiniteSpace.
// Immutable after construction; constructors validate the declared kind.
class Measure {
 public:
  static Measure probability(SpacePtr space, std::vector<double> weights);
  static Measure sub_probability(SpacePtr space, std::vector<double> weights);
  static Measure signed_measure(SpacePtr space, std::vector<double> weights);

  static Measure point_mass(SpacePtr space, std::size_t atom);
  static Measure uniform(SpacePtr space);
  // The degenerate measure assigning 0 to every set (a sub-probability).
  static Measure zero(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  MeasureKind kind() const { return kind_; }
  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  double total() const;
  // Sum of absolute weights (the total-variation norm at finite support).
  double tv_norm() const;
  // Point mass sitting on a single atom?  Returns the atom index if so.
  std::optional<std::size_t> point_support() const;

 private:
  Measure(SpacePtr space, std::vector<double> weights, MeasureKind kind);

  SpacePtr space_;
  std::vector<double> weights_;
  MeasureKind kind_;
};

// Total-variation distance with the factor-2 convention:
// 2 sup_D |a(D) - b(D)|, which equals the sum of |a - b| over atoms for
// measures of equal total mass.  Requires matching spaces.
double tv_distance(const Measure& a, const Measure& b);

// Product of (sub-)probability measures on the product space, atoms in
// row-major order (first factor most significant).  Empty input is rejected.
Measure product_measure(const std::vector<Measure>& parts);

}  // namespace teamci
