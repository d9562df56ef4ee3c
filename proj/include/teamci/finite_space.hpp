#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace teamci {

// One atom of a quantized space.  The coordinate vector is optional; when
// present it feeds metrics (coordinate balls, bump functions, quadratic
// costs).  Coordinates are dimensionless.
struct Atom {
  std::string label;
  std::vector<double> coord;
};

// A finite ordered point set standing in for a locally compact Polish space.
// Immutable after construction.  The `compact` flag marks grids that
// represent a genuinely compact space (no truncation happened), which lets
// tightness checks start from the full grid.
class FiniteSpace {
 public:
  FiniteSpace(std::string label, std::vector<Atom> atoms, bool compact = false);

  static std::shared_ptr<const FiniteSpace> make(std::string label, std::vector<Atom> atoms,
                                                 bool compact = false);

  // n atoms labeled "0".."n-1", no coordinates.
  static std::shared_ptr<const FiniteSpace> indexed(std::string label, std::size_t n);

  // n evenly spaced atoms on [lo, hi] with 1-d coordinates.
  static std::shared_ptr<const FiniteSpace> grid1d(std::string label, double lo, double hi,
                                                   std::size_t n, bool compact = false);

  // Product space; atoms in row-major order (first factor most significant),
  // labels joined with '|', coordinates concatenated (factors without
  // coordinates contribute nothing).
  static std::shared_ptr<const FiniteSpace> product(
      const std::vector<std::shared_ptr<const FiniteSpace>>& parts);

  const std::string& label() const { return label_; }
  std::size_t size() const { return atoms_.size(); }
  const Atom& atom(std::size_t i) const { return atoms_.at(i); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool compact_flag() const { return compact_; }

  // Shared coordinate dimension, 0 when the space carries no coordinates.
  std::size_t coord_dim() const { return coord_dim_; }

  std::optional<std::size_t> index_of(std::string_view atom_label) const;

  // max-norm of the atom's coordinate vector; 0 for coordinate-free spaces.
  double coord_radius(std::size_t i) const;

  bool same_as(const FiniteSpace& other) const;

 private:
  std::string label_;
  std::vector<Atom> atoms_;
  bool compact_;
  std::size_t coord_dim_ = 0;
};

using SpacePtr = std::shared_ptr<const FiniteSpace>;

inline bool same_space(const SpacePtr& a, const SpacePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->same_as(*b);
}

}  // namespace teamci
