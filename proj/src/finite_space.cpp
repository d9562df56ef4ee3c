#include "teamci/finite_space.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "teamci/indexing.hpp"

namespace teamci {

FiniteSpace::FiniteSpace(std::string label, std::vector<Atom> atoms, bool compact)
    : label_(std::move(label)), atoms_(std::move(atoms)), compact_(compact) {
  if (atoms_.empty()) throw std::invalid_argument("space '" + label_ + "': no atoms");

  std::unordered_set<std::string> seen;
  for (const auto& a : atoms_) {
    if (!seen.insert(a.label).second)
      throw std::invalid_argument("space '" + label_ + "': duplicate atom label '" + a.label +
                                  "'");
    for (double c : a.coord)
      if (!std::isfinite(c))
        throw std::invalid_argument("space '" + label_ + "': non-finite coordinate on atom '" +
                                    a.label + "'");
  }

  // All coordinate vectors, when present, must share one dimension.
  for (const auto& a : atoms_) {
    if (a.coord.empty()) continue;
    if (coord_dim_ == 0) {
      coord_dim_ = a.coord.size();
    } else if (a.coord.size() != coord_dim_) {
      throw std::invalid_argument("space '" + label_ + "': mixed coordinate dimensions");
    }
  }
  if (coord_dim_ != 0)
    for (const auto& a : atoms_)
      if (a.coord.empty())
        throw std::invalid_argument("space '" + label_ + "': atom '" + a.label +
                                    "' lacks coordinates present elsewhere");
}

SpacePtr FiniteSpace::make(std::string label, std::vector<Atom> atoms, bool compact) {
  return std::make_shared<const FiniteSpace>(std::move(label), std::move(atoms), compact);
}

SpacePtr FiniteSpace::indexed(std::string label, std::size_t n) {
  std::vector<Atom> atoms;
  atoms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) atoms.push_back({std::to_string(i), {}});
  return make(std::move(label), std::move(atoms));
}

SpacePtr FiniteSpace::grid1d(std::string label, double lo, double hi, std::size_t n,
                             bool compact) {
  if (n == 0) throw std::invalid_argument("grid1d: zero atoms");
  std::vector<Atom> atoms;
  atoms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double c = (n == 1) ? lo : lo + (hi - lo) * static_cast<double>(i) / double(n - 1);
    atoms.push_back({std::to_string(i), {c}});
  }
  return make(std::move(label), std::move(atoms), compact);
}

SpacePtr FiniteSpace::product(const std::vector<SpacePtr>& parts) {
  if (parts.empty()) throw std::invalid_argument("product space: no factors");

  std::vector<std::size_t> extents;
  std::string label;
  for (const auto& p : parts) {
    if (!p) throw std::invalid_argument("product space: null factor");
    extents.push_back(p->size());
    if (!label.empty()) label += "x";
    label += p->label();
  }
  JointIndexer idx(extents);

  std::vector<Atom> atoms;
  atoms.reserve(idx.total());
  std::vector<std::size_t> digits(parts.size());
  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    idx.decode(flat, digits);
    Atom a;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const Atom& f = parts[i]->atom(digits[i]);
      if (!a.label.empty()) a.label += "|";
      a.label += f.label;
      a.coord.insert(a.coord.end(), f.coord.begin(), f.coord.end());
    }
    atoms.push_back(std::move(a));
  }
  bool compact = true;
  for (const auto& p : parts) compact = compact && p->compact_flag();
  return make(std::move(label), std::move(atoms), compact);
}

std::optional<std::size_t> FiniteSpace::index_of(std::string_view atom_label) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].label == atom_label) return i;
  return std::nullopt;
}

double FiniteSpace::coord_radius(std::size_t i) const {
  double r = 0.0;
  for (double c : atoms_.at(i).coord) r = std::max(r, std::abs(c));
  return r;
}

bool FiniteSpace::same_as(const FiniteSpace& other) const {
  if (this == &other) return true;
  if (label_ != other.label_) return false;
  if (atoms_.size() != other.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].label != other.atoms_[i].label) return false;
    if (atoms_[i].coord != other.atoms_[i].coord) return false;
  }
  return true;
}

}  // namespace teamci
