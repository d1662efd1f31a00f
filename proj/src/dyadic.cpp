#include "calderon/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace calderon {

NodeSet::NodeSet(const GridSpec& spec, bool value)
    : spec_(spec), bits_(static_cast<std::size_t>(spec.size()), value ? 1 : 0) {}

Eigen::Index NodeSet::count() const {
  Eigen::Index c = 0;
  for (auto b : bits_) c += b;
  return c;
}

bool NodeSet::subset_of(const NodeSet& o) const {
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] && !o.bits_[i]) return false;
  return true;
}

NodeSet NodeSet::complement() const {
  NodeSet c(spec_);
  for (std::size_t i = 0; i < bits_.size(); ++i) c.bits_[i] = bits_[i] ? 0 : 1;
  return c;
}

NodeSet& NodeSet::operator|=(const NodeSet& o) {
  if (!(spec_ == o.spec_)) throw std::invalid_argument("node set grid mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
  return *this;
}

NodeSet NodeSet::dilate(int r) const {
  // Separable running maximum along each axis.
  NodeSet cur = *this;
  const int N = spec_.N;
  for (int axis = 0; axis < spec_.d; ++axis) {
    NodeSet next(spec_);
    Eigen::Index stride = 1;
    for (int a = spec_.d - 1; a > axis; --a) stride *= N;
    for (Eigen::Index i = 0; i < spec_.size(); ++i) {
      const Index k = spec_.unravel(i);
      if (k[axis] != 0) continue;
      // Distance to the last member seen on the left, then sweep right to left.
      int last = -1000000;
      for (int t = 0; t < N; ++t) {
        if (cur.bits_[i + t * stride]) last = t;
        if (t - last <= r) next.bits_[i + t * stride] = 1;
      }
      last = 1000000;
      for (int t = N - 1; t >= 0; --t) {
        if (cur.bits_[i + t * stride]) last = t;
        if (last - t <= r) next.bits_[i + t * stride] = 1;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

Index DyadicCube::first_cell(const GridSpec& spec) const {
  const int s = side_cells(spec);
  Index c{0, 0, 0};
  for (int i = 0; i < spec.d; ++i) c[i] = corner[i] * s;
  return c;
}

Point DyadicCube::center(const GridSpec& spec) const {
  const int s = side_cells(spec);
  const Index c = first_cell(spec);
  Point x{0, 0, 0};
  for (int i = 0; i < spec.d; ++i) x[i] = -spec.L + (c[i] + 0.5 * s) * spec.h();
  return x;
}

bool DyadicCube::contains_cell(const GridSpec& spec, const Index& c) const {
  const int s = side_cells(spec);
  const Index f = first_cell(spec);
  for (int i = 0; i < spec.d; ++i)
    if (c[i] < f[i] || c[i] >= f[i] + s) return false;
  return true;
}

namespace {

template <class Fn>
void for_each_cell(const Index& lo, const Index& hi, int d, Fn&& fn) {
  Index k{lo[0], d > 1 ? lo[1] : 0, d > 2 ? lo[2] : 0};
  const int h1 = d > 1 ? hi[1] : 0;
  const int h2 = d > 2 ? hi[2] : 0;
  for (k[0] = lo[0]; k[0] <= hi[0]; ++k[0])
    for (k[1] = d > 1 ? lo[1] : 0; k[1] <= h1; ++k[1])
      for (k[2] = d > 2 ? lo[2] : 0; k[2] <= h2; ++k[2]) fn(k);
}

/// Summed-area table over the lattice with inclusive box queries.
class BoxCounter {
 public:
  BoxCounter(const NodeSet& set, bool members) : spec_(set.spec()) {
    const int M = spec_.N + 1;
    Eigen::Index total = 1;
    for (int i = 0; i < spec_.d; ++i) total *= M;
    sat_.assign(static_cast<std::size_t>(total), 0);
    for (Eigen::Index i = 0; i < spec_.size(); ++i) {
      if (set[i] != members) continue;
      Index k = spec_.unravel(i);
      for (int a = 0; a < spec_.d; ++a) k[a] += 1;
      sat_[pos(k)] = 1;
    }
    Eigen::Index stride = 1;
    for (int axis = spec_.d - 1; axis >= 0; --axis) {
      for (Eigen::Index p = 0; p < total; ++p) {
        const Eigen::Index coord = (p / stride) % M;
        if (coord > 0) sat_[p] += sat_[p - stride];
      }
      stride *= M;
    }
  }

  /// Members in the inclusive box [lo, hi], clipped to the lattice.
  [[nodiscard]] std::int64_t count(Index lo, Index hi) const {
    for (int a = 0; a < spec_.d; ++a) {
      lo[a] = std::max(lo[a], 0);
      hi[a] = std::min(hi[a], spec_.N - 1);
      if (lo[a] > hi[a]) return 0;
    }
    std::int64_t acc = 0;
    for (int mask = 0; mask < (1 << spec_.d); ++mask) {
      Index k{0, 0, 0};
      int sign = 1;
      for (int a = 0; a < spec_.d; ++a) {
        if (mask & (1 << a)) {
          k[a] = lo[a];
          sign = -sign;
        } else {
          k[a] = hi[a] + 1;
        }
      }
      acc += sign * sat_[pos(k)];
    }
    return acc;
  }

 private:
  [[nodiscard]] Eigen::Index pos(const Index& k) const {
    Eigen::Index p = 0;
    for (int a = 0; a < spec_.d; ++a) p = p * (spec_.N + 1) + k[a];
    return p;
  }

  GridSpec spec_;
  std::vector<std::int64_t> sat_;
};

std::int64_t gap_axis(int c, int q, int s) { return std::max({0, c - (q + s), q - (c + 1)}); }

std::int64_t exterior_gap2(const GridSpec& spec, const Index& q, int s) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (int a = 0; a < spec.d; ++a) {
    const std::int64_t lo = q[a];
    const std::int64_t hi = spec.N - (q[a] + s);
    best = std::min({best, lo * lo, hi * hi});
  }
  return best;
}

/// Minimum squared gap over complement cells whose per-axis gap is at most R.
std::int64_t scan_gap2(const NodeSet& G, const Index& q, int s, int R) {
  const GridSpec& spec = G.spec();
  Index lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < spec.d; ++a) {
    lo[a] = std::max(q[a] - 1 - R, 0);
    hi[a] = std::min(q[a] + s + R, spec.N - 1);
  }
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for_each_cell(lo, hi, spec.d, [&](const Index& c) {
    if (G.contains(c)) return;
    std::int64_t g2 = 0;
    for (int a = 0; a < spec.d; ++a) {
      const std::int64_t g = gap_axis(c[a], q[a], s);
      g2 += g * g;
    }
    best = std::min(best, g2);
  });
  return best;
}

std::int64_t isqrt_floor(std::int64_t v) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

}  // namespace

std::vector<Eigen::Index> DyadicCube::cells(const GridSpec& spec) const {
  const int s = side_cells(spec);
  const Index f = first_cell(spec);
  Index hi{0, 0, 0};
  for (int i = 0; i < spec.d; ++i) hi[i] = f[i] + s - 1;
  std::vector<Eigen::Index> out;
  for_each_cell(f, hi, spec.d, [&](const Index& k) { out.push_back(spec.ravel(k)); });
  return out;
}

double DyadicCube::measure(const GridSpec& spec) const { return std::pow(side(spec), spec.d); }

DyadicCube DyadicCube::child(int which, int d) const {
  DyadicCube c{generation + 1, {0, 0, 0}};
  for (int i = 0; i < d; ++i) c.corner[i] = 2 * corner[i] + ((which >> (d - 1 - i)) & 1);
  return c;
}

int max_generation(const GridSpec& spec) {
  int j = 0;
  while ((spec.N >> j) > 1) ++j;
  return j;
}

bool disjoint(const GridSpec& spec, const DyadicCube& a, const DyadicCube& b) {
  const int sa = a.side_cells(spec), sb = b.side_cells(spec);
  const Index fa = a.first_cell(spec), fb = b.first_cell(spec);
  for (int i = 0; i < spec.d; ++i)
    if (fa[i] + sa <= fb[i] || fb[i] + sb <= fa[i]) return true;
  return false;
}

bool nested_or_disjoint(const GridSpec& spec, const DyadicCube& a, const DyadicCube& b) {
  if (disjoint(spec, a, b)) return true;
  const DyadicCube& big = a.generation <= b.generation ? a : b;
  const DyadicCube& small = a.generation <= b.generation ? b : a;
  const Index f = small.first_cell(spec);
  Index l = f;
  for (int i = 0; i < spec.d; ++i) l[i] += small.side_cells(spec) - 1;
  return big.contains_cell(spec, f) && big.contains_cell(spec, l);
}

std::int64_t exact_gap2(const NodeSet& G, const DyadicCube& Q) {
  const GridSpec& spec = G.spec();
  const int s = Q.side_cells(spec);
  const Index q = Q.first_cell(spec);
  std::int64_t best = exterior_gap2(spec, q, s);
  for (int R = 1;; R *= 2) {
    best = std::min(best, scan_gap2(G, q, s, R));
    if (best <= static_cast<std::int64_t>(R) * R || R >= spec.N) return best;
  }
}

WhitneyCover whitney_decompose(const NodeSet& G) {
  const GridSpec& spec = G.spec();
  WhitneyCover cover{spec, G, {}, {}, {}, {}};
  if (G.empty()) return cover;
  if (G.full()) throw std::invalid_argument("set fills the whole domain; no complement to measure against");

  const BoxCounter inside(G, true);
  const BoxCounter outside(G, false);
  const int d = spec.d;

  auto admissible = [&](const Index& q, int s) {
    const std::int64_t need = static_cast<std::int64_t>(d) * s * s;
    if (exterior_gap2(spec, q, s) < need) return false;
    const int R = static_cast<int>(isqrt_floor(need - 1));
    Index lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      lo[a] = q[a] - 1 - R;
      hi[a] = q[a] + s + R;
    }
    if (outside.count(lo, hi) == 0) return true;
    return scan_gap2(G, q, s, R) >= need;
  };

  auto visit = [&](auto&& self, const DyadicCube& Q) -> void {
    const int s = Q.side_cells(spec);
    const Index q = Q.first_cell(spec);
    Index hi = q;
    for (int a = 0; a < d; ++a) hi[a] += s - 1;
    const std::int64_t cnt = inside.count(q, hi);
    if (cnt == 0) return;
    std::int64_t vol = 1;
    for (int a = 0; a < d; ++a) vol *= s;
    if (cnt == vol && admissible(q, s)) {
      cover.cubes.push_back(Q);
      cover.degenerate.push_back(false);
      return;
    }
    if (s == 1) {
      cover.cubes.push_back(Q);
      cover.degenerate.push_back(true);
      return;
    }
    for (int c = 0; c < (1 << d); ++c) self(self, Q.child(c, d));
  };
  visit(visit, DyadicCube{});

  for (const auto& Q : cover.cubes) {
    Index cell{0, 0, 0};
    cover.centers.push_back(enlarged_center(Q, cover, &cell));
    cover.center_cells.push_back(cell);
  }
  return cover;
}

Point enlarged_center(const DyadicCube& Q, const WhitneyCover& cover, Index* cell_out) {
  const GridSpec& spec = cover.spec;
  const int d = spec.d;
  const int s = Q.side_cells(spec);
  const Index q = Q.first_cell(spec);
  const double limit = 8.0 * std::sqrt(static_cast<double>(d)) * s;  // in cells

  auto in_complement = [&](const Index& c) {
    for (int a = 0; a < d; ++a)
      if (c[a] < 0 || c[a] >= spec.N) return true;
    return !cover.G.contains(c);
  };
  // Squared distance from the node of cell c to the box of Q, in half-cell units.
  auto dist2 = [&](const Index& c) {
    std::int64_t acc = 0;
    for (int a = 0; a < d; ++a) {
      const std::int64_t p = 2 * c[a] + 1;
      const std::int64_t g = std::max<std::int64_t>({0, 2 * q[a] - p, p - 2 * (q[a] + s)});
      acc += g * g;
    }
    return acc;
  };

  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  Index best_cell{0, 0, 0};
  for (int R = 1;; R *= 2) {
    Index lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      lo[a] = std::max(q[a] - R, -1);
      hi[a] = std::min(q[a] + s - 1 + R, spec.N);
    }
    for_each_cell(lo, hi, d, [&](const Index& c) {
      if (!in_complement(c)) return;
      const std::int64_t v = dist2(c);
      if (v < best || (v == best && c < best_cell)) {
        best = v;
        best_cell = c;
      }
    });
    // Every node closer than sqrt(best)/2 cells lies within radius R of Q.
    const bool settled = best != std::numeric_limits<std::int64_t>::max() &&
                         static_cast<double>(best) <= 4.0 * (R - 0.5) * (R - 0.5);
    if (settled) break;
    if (R > limit + 2) break;
  }
  if (best == std::numeric_limits<std::int64_t>::max() || std::sqrt(static_cast<double>(best)) / 2 > limit)
    throw std::runtime_error("no complement node within the search radius of a Whitney cube");
  if (cell_out) *cell_out = best_cell;
  Point y{0, 0, 0};
  for (int a = 0; a < d; ++a) y[a] = spec.coord(best_cell[a]);
  return y;
}

WhitneyReport verify_whitney(const WhitneyCover& cover) {
  const GridSpec& spec = cover.spec;
  const int d = spec.d;
  const double sd = std::sqrt(static_cast<double>(d));
  WhitneyReport rep;
  rep.cube_count = static_cast<int>(cover.cubes.size());
  std::vector<int> hits(static_cast<std::size_t>(spec.size()), 0);
  for (const auto& Q : cover.cubes)
    for (auto i : Q.cells(spec)) ++hits[i];
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    if (hits[i] > 1) rep.disjoint = false;
    if ((hits[i] > 0) != cover.G[i]) rep.union_exact = false;
  }

  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.min_center_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cover.cubes.size(); ++k) {
    const auto& Q = cover.cubes[k];
    const int s = Q.side_cells(spec);
    const std::int64_t g2 = exact_gap2(cover.G, Q);
    const std::int64_t s2 = static_cast<std::int64_t>(s) * s;
    const bool degenerate = k < cover.degenerate.size() && cover.degenerate[k];
    if (degenerate) ++rep.degenerate_count;
    if (g2 > 16 * d * s2) rep.upper_ok = false;
    if (s > 1 && g2 < d * s2) rep.lower_ok = false;
    const double ratio = std::sqrt(static_cast<double>(g2)) / s;
    if (!degenerate) {
      rep.min_ratio = std::min(rep.min_ratio, ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
    }

    if (k >= cover.centers.size()) {
      rep.centers_ok = false;
      continue;
    }
    const Index c = cover.center_cells[k];
    bool outside = false;
    for (int a = 0; a < d; ++a) outside = outside || c[a] < 0 || c[a] >= spec.N;
    if (!outside && cover.G.contains(c)) rep.centers_in_complement = false;
    const Point y = cover.centers[k];
    const Point qc = Q.center(spec);
    const double half = 0.5 * Q.side(spec);
    double dist2 = 0, cheb = 0;
    for (int a = 0; a < d; ++a) {
      const double off = std::abs(y[a] - qc[a]);
      const double g = std::max(0.0, off - half);
      dist2 += g * g;
      cheb = std::max(cheb, off + half);
    }
    const double cratio = std::sqrt(dist2) / Q.side(spec);
    if (cratio > 6 * sd * (1 + 1e-12)) rep.centers_ok = false;
    if (!degenerate) {
      if (cratio < 1 - 1e-12) rep.centers_ok = false;
      rep.min_center_ratio = std::min(rep.min_center_ratio, cratio);
      rep.max_center_ratio = std::max(rep.max_center_ratio, cratio);
    }
    rep.max_enlarged_volume_ratio = std::max(rep.max_enlarged_volume_ratio, std::pow(cheb / half, d));
  }
  if (!std::isfinite(rep.min_ratio)) rep.min_ratio = 0;
  if (!std::isfinite(rep.min_center_ratio)) rep.min_center_ratio = 0;
  return rep;
}

void write_cover_csv(std::ostream& os, const WhitneyCover& cover) {
  os << "generation,corner0,corner1,corner2,center0,center1,center2,degenerate\n";
  os.precision(17);
  for (std::size_t k = 0; k < cover.cubes.size(); ++k) {
    const auto& Q = cover.cubes[k];
    const Point y = cover.centers[k];
    os << Q.generation << "," << Q.corner[0] << "," << Q.corner[1] << "," << Q.corner[2] << "," << y[0] << ","
       << y[1] << "," << y[2] << "," << (cover.degenerate[k] ? 1 : 0) << "\n";
  }
}

}  // namespace calderon
