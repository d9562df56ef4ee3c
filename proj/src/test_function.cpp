#include "teamci/test_function.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace teamci {

TestFunction::TestFunction(SpacePtr base, SpacePtr action, std::vector<double> values)
    : base_(std::move(base)), action_(std::move(action)), values_(std::move(values)) {
  if (!base_ || !action_) throw std::invalid_argument("test function: null space");
  if (values_.size() != base_->size() * action_->size())
    throw std::invalid_argument("test function: table size mismatch");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("test function: non-finite value");
}

TestFunction TestFunction::constant(SpacePtr base, SpacePtr action, double c) {
  std::vector<double> v(base->size() * action->size(), c);
  return TestFunction(std::move(base), std::move(action), std::move(v));
}

TestFunction TestFunction::indicator(SpacePtr base, SpacePtr action, std::size_t y,
                                     std::size_t u) {
  std::vector<double> v(base->size() * action->size(), 0.0);
  v[y * action->size() + u] = 1.0;
  return TestFunction(std::move(base), std::move(action), std::move(v));
}

TestFunction TestFunction::from_fn(SpacePtr base, SpacePtr action,
                                   const std::function<double(const Atom&, const Atom&)>& fn) {
  std::vector<double> v;
  v.reserve(base->size() * action->size());
  for (std::size_t y = 0; y < base->size(); ++y)
    for (std::size_t u = 0; u < action->size(); ++u)
      v.push_back(fn(base->atom(y), action->atom(u)));
  return TestFunction(std::move(base), std::move(action), std::move(v));
}

double TestFunction::row_sup(std::size_t y) const {
  double s = 0.0;
  for (std::size_t u = 0; u < action_->size(); ++u) s = std::max(s, std::abs(value(y, u)));
  return s;
}

double f_norm1(const TestFunction& f, const Measure& mu) {
  if (!same_space(f.base(), mu.space()))
    throw std::invalid_argument("f_norm1: measure on wrong space");
  double s = 0.0;
  for (std::size_t y = 0; y < mu.size(); ++y) s += mu.weight(y) * f.row_sup(y);
  return s;
}

double pairing(const Kernel& gamma, const TestFunction& f, const Measure& mu) {
  if (!same_space(gamma.source(), f.base()) || !same_space(gamma.source(), mu.space()))
    throw std::invalid_argument("pairing: base space mismatch");
  if (!same_space(gamma.target(), f.action()))
    throw std::invalid_argument("pairing: action space mismatch");
  if (mu.kind() != MeasureKind::Probability)
    throw std::invalid_argument("pairing: reference measure must be a probability");

  double acc = 0.0;
  for (std::size_t y = 0; y < mu.size(); ++y) {
    double my = mu.weight(y);
    if (my == 0.0) continue;
    const Measure& row = gamma.row(y);
    double inner = 0.0;
    for (std::size_t u = 0; u < row.size(); ++u) inner += f.value(y, u) * row.weight(u);
    acc += my * inner;
  }
  return acc;
}

double wstar_distance(const Kernel& g1, const Kernel& g2, std::span<const TestFunction> bank,
                      const Measure& mu) {
  if (bank.empty()) throw std::invalid_argument("wstar_distance: empty test bank");
  double dist = 0.0;
  double scale = 0.5;  // 2^-k, k starting at 1
  for (const auto& f : bank) {
    double d = std::abs(pairing(g1, f, mu) - pairing(g2, f, mu));
    dist += scale * d / (1.0 + d);
    scale *= 0.5;
  }
  return dist;
}

std::vector<TestFunction> default_test_bank(SpacePtr base, SpacePtr action) {
  // Bump profile at the action grid: triangular in the coordinate with the
  // minimal inter-atom gap as radius, Kronecker when no coordinates exist.
  const std::size_t na = action->size();
  double radius = 0.0;
  if (action->coord_dim() == 1 && na > 1) {
    radius = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = i + 1; j < na; ++j)
        radius = std::min(radius,
                          std::abs(action->atom(i).coord[0] - action->atom(j).coord[0]));
    if (!(radius > 0.0)) radius = 0.0;
  }

  std::vector<TestFunction> bank;
  bank.reserve(base->size() * na);
  for (std::size_t y = 0; y < base->size(); ++y) {
    for (std::size_t u = 0; u < na; ++u) {
      if (radius > 0.0) {
        double center = action->atom(u).coord[0];
        std::vector<double> v(base->size() * na, 0.0);
        for (std::size_t u2 = 0; u2 < na; ++u2)
          v[y * na + u2] =
              std::max(0.0, 1.0 - std::abs(action->atom(u2).coord[0] - center) / radius);
        bank.emplace_back(base, action, std::move(v));
      } else {
        bank.push_back(TestFunction::indicator(base, action, y, u));
      }
    }
  }
  return bank;
}

}  // namespace teamci
