#pragma once

#include "calderon/grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace calderon {

/// Subset of lattice nodes (equivalently, of lattice cells).
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(const GridSpec& spec, bool value = false);
  template <class Pred>
  static NodeSet from_predicate(const GridSpec& spec, Pred&& pred) {
    NodeSet s(spec);
    for (Eigen::Index i = 0; i < spec.size(); ++i) s.bits_[i] = pred(i) ? 1 : 0;
    return s;
  }

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  /// False for a default-constructed set, which has no storage.
  [[nodiscard]] bool defined() const { return !bits_.empty(); }
  [[nodiscard]] bool operator[](Eigen::Index i) const { return bits_[i] != 0; }
  [[nodiscard]] bool contains(const Index& k) const { return bits_[spec_.ravel(k)] != 0; }
  void set(Eigen::Index i, bool v = true) { bits_[i] = v ? 1 : 0; }

  [[nodiscard]] Eigen::Index count() const;
  [[nodiscard]] double measure() const { return count() * spec_.cell_volume(); }
  [[nodiscard]] bool empty() const { return count() == 0; }
  [[nodiscard]] bool full() const { return count() == spec_.size(); }
  [[nodiscard]] bool subset_of(const NodeSet& o) const;
  [[nodiscard]] NodeSet complement() const;
  /// Union with the box of half-width r cells around every member.
  [[nodiscard]] NodeSet dilate(int r) const;
  NodeSet& operator|=(const NodeSet& o);
  bool operator==(const NodeSet& o) const { return spec_ == o.spec_ && bits_ == o.bits_; }

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> bits_;
};

/// Dyadic subcube of the lattice domain. corner is in units of the cube side.
struct DyadicCube {
  int generation = 0;
  Index corner{0, 0, 0};

  [[nodiscard]] int side_cells(const GridSpec& spec) const { return spec.N >> generation; }
  [[nodiscard]] double side(const GridSpec& spec) const { return spec.h() * side_cells(spec); }
  [[nodiscard]] Index first_cell(const GridSpec& spec) const;
  [[nodiscard]] Point center(const GridSpec& spec) const;
  [[nodiscard]] bool contains_cell(const GridSpec& spec, const Index& c) const;
  [[nodiscard]] std::vector<Eigen::Index> cells(const GridSpec& spec) const;
  [[nodiscard]] double measure(const GridSpec& spec) const;
  [[nodiscard]] DyadicCube child(int which, int d) const;

  bool operator==(const DyadicCube& o) const { return generation == o.generation && corner == o.corner; }
};

int max_generation(const GridSpec& spec);
bool nested_or_disjoint(const GridSpec& spec, const DyadicCube& a, const DyadicCube& b);
bool disjoint(const GridSpec& spec, const DyadicCube& a, const DyadicCube& b);

struct WhitneyCover {
  GridSpec spec;
  NodeSet G;
  std::vector<DyadicCube> cubes;
  std::vector<Point> centers;
  /// Cell index of each center; may lie in the ring just outside the lattice.
  std::vector<Index> center_cells;
  /// Finest cells kept although the lower distance bound fails at lattice scale.
  std::vector<bool> degenerate;
};

/// Squared gap between the closed box of Q and the complement of G, in cell units.
/// Cells outside the lattice count as complement.
std::int64_t exact_gap2(const NodeSet& G, const DyadicCube& Q);

WhitneyCover whitney_decompose(const NodeSet& G);
/// Nearest complement node to Q, lexicographic tie-break; writes its cell to cell_out if given.
Point enlarged_center(const DyadicCube& Q, const WhitneyCover& cover, Index* cell_out = nullptr);

struct WhitneyReport {
  bool disjoint = true;
  bool union_exact = true;
  bool lower_ok = true;
  bool upper_ok = true;
  bool centers_in_complement = true;
  bool centers_ok = true;
  double min_ratio = 0;
  double max_ratio = 0;
  double min_center_ratio = 0;
  double max_center_ratio = 0;
  double max_enlarged_volume_ratio = 0;
  int degenerate_count = 0;
  int cube_count = 0;

  [[nodiscard]] bool all_ok() const {
    return disjoint && union_exact && lower_ok && upper_ok && centers_in_complement && centers_ok;
  }
};

WhitneyReport verify_whitney(const WhitneyCover& cover);

void write_cover_csv(std::ostream& os, const WhitneyCover& cover);

}  // namespace calderon
