#include "teamci/measure.hpp"

#include <cmath>
#include <stdexcept>

#include "teamci/indexing.hpp"

namespace teamci {

const char* to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::Probability: return "probability";
    case MeasureKind::SubProbability: return "sub-probability";
    case MeasureKind::Signed: return "signed";
  }
  return "?";
}

Measure::Measure(SpacePtr space, std::vector<double> weights, MeasureKind kind)
    : space_(std::move(space)), weights_(std::move(weights)), kind_(kind) {
  if (!space_) throw std::invalid_argument("measure: null space");
  if (weights_.size() != space_->size())
    throw std::invalid_argument("measure on '" + space_->label() + "': expected " +
                                std::to_string(space_->size()) + " weights, got " +
                                std::to_string(weights_.size()));
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w)) throw std::invalid_argument("measure: non-finite weight");
    if (kind_ != MeasureKind::Signed && w < 0.0)
      throw std::invalid_argument("measure: negative weight in a nonnegative kind");
    sum += w;
  }
  if (kind_ == MeasureKind::Probability && std::abs(sum - 1.0) > kMassTol)
    throw std::invalid_argument("probability measure on '" + space_->label() +
                                "': total mass " + std::to_string(sum));
  if (kind_ == MeasureKind::SubProbability && sum > 1.0 + kMassTol)
    throw std::invalid_argument("sub-probability measure on '" + space_->label() +
                                "': total mass " + std::to_string(sum));
}

Measure Measure::probability(SpacePtr space, std::vector<double> weights) {
  return Measure(std::move(space), std::move(weights), MeasureKind::Probability);
}

Measure Measure::sub_probability(SpacePtr space, std::vector<double> weights) {
  return Measure(std::move(space), std::move(weights), MeasureKind::SubProbability);
}

Measure Measure::signed_measure(SpacePtr space, std::vector<double> weights) {
  return Measure(std::move(space), std::move(weights), MeasureKind::Signed);
}

Measure Measure::point_mass(SpacePtr space, std::size_t atom) {
  if (atom >= space->size()) throw std::invalid_argument("point_mass: atom out of range");
  std::vector<double> w(space->size(), 0.0);
  w[atom] = 1.0;
  return probability(std::move(space), std::move(w));
}

Measure Measure::uniform(SpacePtr space) {
  std::vector<double> w(space->size(), 1.0 / static_cast<double>(space->size()));
  return probability(std::move(space), std::move(w));
}

Measure Measure::zero(SpacePtr space) {
  return sub_probability(std::move(space), std::vector<double>(space->size(), 0.0));
}

double Measure::total() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double Measure::tv_norm() const {
  double s = 0.0;
  for (double w : weights_) s += std::abs(w);
  return s;
}

std::optional<std::size_t> Measure::point_support() const {
  std::optional<std::size_t> at;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    if (weights_[i] == 1.0 && !at) {
      at = i;
    } else {
      return std::nullopt;
    }
  }
  return at;
}

double tv_distance(const Measure& a, const Measure& b) {
  if (!same_space(a.space(), b.space()))
    throw std::invalid_argument("tv_distance: measures live on different spaces");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.weight(i) - b.weight(i));
  return s;
}

Measure product_measure(const std::vector<Measure>& parts) {
  if (parts.empty()) throw std::invalid_argument("product_measure: empty factor list");

  std::vector<SpacePtr> spaces;
  std::vector<std::size_t> extents;
  bool all_probability = true;
  for (const auto& m : parts) {
    if (m.kind() == MeasureKind::Signed)
      throw std::invalid_argument("product_measure: factors must be (sub-)probability");
    all_probability = all_probability && m.kind() == MeasureKind::Probability;
    spaces.push_back(m.space());
    extents.push_back(m.size());
  }

  SpacePtr prod = FiniteSpace::product(spaces);
  JointIndexer idx(extents);
  std::vector<double> w(idx.total(), 1.0);
  std::vector<std::size_t> digits(parts.size());
  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    idx.decode(flat, digits);
    double v = 1.0;
    for (std::size_t i = 0; i < parts.size(); ++i) v *= parts[i].weight(digits[i]);
    w[flat] = v;
  }
  return all_probability ? Measure::probability(prod, std::move(w))
                         : Measure::sub_probability(prod, std::move(w));
}

}  // namespace teamci
