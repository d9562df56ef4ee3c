#include "teamci/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace teamci {

namespace {

MeasureKind combined_kind(const std::vector<Measure>& rows) {
  bool all_prob = true;
  bool all_sub = true;
  for (const auto& r : rows) {
    all_prob = all_prob && r.kind() == MeasureKind::Probability;
    all_sub = all_sub && r.kind() != MeasureKind::Signed;
  }
  if (all_prob) return MeasureKind::Probability;
  if (all_sub) return MeasureKind::SubProbability;
  return MeasureKind::Signed;
}

}  // namespace

Kernel::Kernel(SpacePtr source, SpacePtr target, std::vector<Measure> rows)
    : source_(std::move(source)), target_(std::move(target)), rows_(std::move(rows)) {
  if (!source_ || !target_) throw std::invalid_argument("kernel: null space");
  if (rows_.size() != source_->size())
    throw std::invalid_argument("kernel " + source_->label() + " -> " + target_->label() +
                                ": expected " + std::to_string(source_->size()) +
                                " rows, got " + std::to_string(rows_.size()));
  for (const auto& r : rows_)
    if (!same_space(r.space(), target_))
      throw std::invalid_argument("kernel: row measure on wrong space");
  kind_ = combined_kind(rows_);
}

Kernel Kernel::deterministic(SpacePtr source, SpacePtr target,
                             const std::vector<std::size_t>& action_by_source) {
  if (action_by_source.size() != source->size())
    throw std::invalid_argument("deterministic kernel: one action per source atom required");
  std::vector<Measure> rows;
  rows.reserve(source->size());
  for (std::size_t s = 0; s < source->size(); ++s)
    rows.push_back(Measure::point_mass(target, action_by_source[s]));
  return Kernel(std::move(source), std::move(target), std::move(rows));
}

Kernel Kernel::constant_row(SpacePtr source, Measure row) {
  std::vector<Measure> rows(source->size(), row);
  return Kernel(std::move(source), row.space(), std::move(rows));
}

bool Kernel::is_deterministic() const {
  for (const auto& r : rows_)
    if (!r.point_support()) return false;
  return true;
}

Kernel mix_kernels(const Kernel& a, const Kernel& b, double t) {
  if (!same_space(a.source(), b.source()) || !same_space(a.target(), b.target()))
    throw std::invalid_argument("mix_kernels: space mismatch");
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("mix_kernels: t outside [0,1]");
  std::vector<Measure> rows;
  rows.reserve(a.rows());
  for (std::size_t s = 0; s < a.rows(); ++s) {
    std::vector<double> w(a.target()->size());
    for (std::size_t u = 0; u < w.size(); ++u)
      w[u] = (1.0 - t) * a.row(s).weight(u) + t * b.row(s).weight(u);
    if (a.row(s).kind() == MeasureKind::Probability &&
        b.row(s).kind() == MeasureKind::Probability) {
      rows.push_back(Measure::probability(a.target(), std::move(w)));
    } else {
      rows.push_back(Measure::signed_measure(a.target(), std::move(w)));
    }
  }
  return Kernel(a.source(), a.target(), std::move(rows));
}

double kernel_inf_norm(const Kernel& gamma, const Measure& reference) {
  if (!same_space(gamma.source(), reference.space()))
    throw std::invalid_argument("kernel_inf_norm: reference measure on wrong space");
  double norm = 0.0;
  for (std::size_t s = 0; s < gamma.rows(); ++s) {
    if (reference.weight(s) <= 0.0) continue;  // ess sup ignores zero-mass atoms
    norm = std::max(norm, gamma.row(s).tv_norm());
  }
  return norm;
}

}  // namespace teamci
