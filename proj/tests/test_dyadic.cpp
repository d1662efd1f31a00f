#include "calderon/dyadic.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace calderon;

namespace {

/// Brute-force squared gap, in cells, from the closed box of Q to the closed complement cells
/// and to the outside of the lattice.
std::int64_t brute_gap2(const NodeSet& G, const DyadicCube& Q) {
  const GridSpec& spec = G.spec();
  const int s = Q.side_cells(spec);
  const Index q = Q.first_cell(spec);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (int a = 0; a < spec.d; ++a) {
    const std::int64_t lo = q[a], hi = spec.N - q[a] - s;
    best = std::min({best, lo * lo, hi * hi});
  }
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    if (G[i]) continue;
    const Index c = spec.unravel(i);
    std::int64_t g2 = 0;
    for (int a = 0; a < spec.d; ++a) {
      const std::int64_t g = std::max({0, c[a] - (q[a] + s), q[a] - (c[a] + 1)});
      g2 += g * g;
    }
    best = std::min(best, g2);
  }
  return best;
}

/// Union of random boxes and balls, never the whole lattice.
NodeSet random_open_set(std::mt19937_64& rng, const GridSpec& spec) {
  std::uniform_real_distribution<double> u(0, 1);
  NodeSet G(spec);
  const int pieces = 1 + static_cast<int>(u(rng) * 5);
  for (int p = 0; p < pieces; ++p) {
    Point c{0, 0, 0};
    for (int a = 0; a < spec.d; ++a) c[a] = spec.L * (2 * u(rng) - 1);
    const double r = spec.L * (0.05 + 0.4 * u(rng));
    const bool ball = u(rng) < 0.5;
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      const Point x = spec.node(i);
      double m = 0, e = 0;
      for (int a = 0; a < spec.d; ++a) {
        m = std::max(m, std::abs(x[a] - c[a]));
        e += (x[a] - c[a]) * (x[a] - c[a]);
      }
      if ((ball ? std::sqrt(e) : m) < r) G.set(i);
    }
  }
  if (G.full()) G.set(0, false);
  return G;
}

void check_cover_exhaustively(const WhitneyCover& cover) {
  const GridSpec& spec = cover.spec;
  const std::int64_t d = spec.d;
  std::vector<int> hits(static_cast<std::size_t>(spec.size()), 0);
  for (std::size_t k = 0; k < cover.cubes.size(); ++k) {
    const DyadicCube& Q = cover.cubes[k];
    for (auto i : Q.cells(spec)) ++hits[i];
    const std::int64_t s = Q.side_cells(spec);
    const std::int64_t g2 = brute_gap2(cover.G, Q);
    CHECK(g2 == exact_gap2(cover.G, Q));
    CHECK(g2 <= 16 * d * s * s);
    if (s > 1) CHECK(g2 >= d * s * s);
    if (!cover.degenerate[k]) CHECK(g2 >= d * s * s);
  }
  for (Eigen::Index i = 0; i < spec.size(); ++i) CHECK(hits[i] == (cover.G[i] ? 1 : 0));
}

}  // namespace

TEST_CASE("dyadic cubes nest or are disjoint") {
  const GridSpec spec{2, 1.0, 32};
  std::mt19937_64 rng(1);
  auto random_cube = [&] {
    DyadicCube Q;
    const int j = static_cast<int>(rng() % 6);
    for (int g = 0; g < j; ++g) Q = Q.child(static_cast<int>(rng() % 4), 2);
    return Q;
  };
  for (int t = 0; t < 500; ++t) {
    const DyadicCube a = random_cube(), b = random_cube();
    CHECK(nested_or_disjoint(spec, a, b));
    // Independent check by cell overlap.
    const auto ca = a.cells(spec), cb = b.cells(spec);
    NodeSet sa(spec), sb(spec);
    for (auto i : ca) sa.set(i);
    for (auto i : cb) sb.set(i);
    int common = 0;
    for (auto i : cb) common += sa[i];
    const bool nested = common == static_cast<int>(std::min(ca.size(), cb.size()));
    CHECK((common == 0 || nested));
    CHECK(disjoint(spec, a, b) == (common == 0));
  }
  const DyadicCube root;
  CHECK(root.side(spec) == 2.0);
  CHECK(root.child(3, 2).side(spec) == 1.0);
  CHECK(root.child(3, 2).center(spec)[0] == 0.5);
}

TEST_CASE("Whitney cover of a single cell") {
  const GridSpec spec{2, 1.0, 16};
  NodeSet G(spec);
  G.set(spec.ravel({5, 9, 0}));
  const WhitneyCover cover = whitney_decompose(G);
  REQUIRE(cover.cubes.size() == 1);
  CHECK(cover.cubes[0].side_cells(spec) == 1);
  CHECK(cover.degenerate[0]);
  CHECK(exact_gap2(G, cover.cubes[0]) == 0);
  CHECK(verify_whitney(cover).all_ok());
}

TEST_CASE("Whitney cover of a concentric half cube") {
  for (int d : {1, 2, 3}) {
    const GridSpec spec{d, 1.0, d == 3 ? 16 : 64};
    const NodeSet G = NodeSet::from_predicate(spec, [&](Eigen::Index i) {
      const Point x = spec.node(i);
      for (int a = 0; a < d; ++a)
        if (std::abs(x[a]) >= 0.5) return false;
      return true;
    });
    const WhitneyCover cover = whitney_decompose(G);
    check_cover_exhaustively(cover);
    const WhitneyReport rep = verify_whitney(cover);
    CHECK(rep.all_ok());
    CHECK(rep.max_ratio <= 4 * std::sqrt(double(d)));
  }
}

TEST_CASE("Whitney cover of two separated cells") {
  const GridSpec spec{2, 1.0, 16};
  NodeSet G(spec);
  G.set(spec.ravel({2, 2, 0}));
  G.set(spec.ravel({12, 7, 0}));
  const WhitneyCover cover = whitney_decompose(G);
  REQUIRE(cover.cubes.size() == 2);
  CHECK(disjoint(spec, cover.cubes[0], cover.cubes[1]));
  CHECK(verify_whitney(cover).union_exact);
}

TEST_CASE("Whitney edge cases") {
  const GridSpec spec{2, 1.0, 16};
  CHECK(whitney_decompose(NodeSet(spec)).cubes.empty());
  CHECK_THROWS_AS(whitney_decompose(NodeSet(spec, true)), std::invalid_argument);
}

TEST_CASE("Whitney covers of random open sets") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 30; ++t) {
    const int d = 1 + t % 3;
    const GridSpec spec{d, 1.0, d == 3 ? 16 : d == 2 ? 32 : 64};
    const NodeSet G = random_open_set(rng, spec);
    const WhitneyCover cover = whitney_decompose(G);
    check_cover_exhaustively(cover);
    const WhitneyReport rep = verify_whitney(cover);
    CHECK(rep.all_ok());
    const double sd = std::sqrt(double(d));
    for (std::size_t k = 0; k < cover.cubes.size(); ++k) {
      const DyadicCube& Q = cover.cubes[k];
      // Centre is the nearest complement node, found here by brute force.
      const Index c = cover.center_cells[k];
      bool ext = false;
      for (int a = 0; a < d; ++a) ext = ext || c[a] < 0 || c[a] >= spec.N;
      CHECK((ext || !G.contains(c)));
      const Point qc = Q.center(spec);
      auto dist = [&](const Point& y) {
        double s = 0;
        for (int a = 0; a < d; ++a) {
          const double g = std::max(0.0, std::abs(y[a] - qc[a]) - Q.side(spec) / 2);
          s += g * g;
        }
        return std::sqrt(s);
      };
      double best = 1e300;
      for (Eigen::Index i = 0; i < spec.size(); ++i)
        if (!G[i]) best = std::min(best, dist(spec.node(i)));
      const double got = dist(cover.centers[k]);
      CHECK(got <= best + 1e-12);
      const double ratio = got / Q.side(spec);
      CHECK(ratio <= 6 * sd + 1e-12);
      if (!cover.degenerate[k]) CHECK(ratio >= 1 - 1e-12);
    }
  }
}

TEST_CASE("enlarged centre next to the boundary of G") {
  const GridSpec spec{2, 1.0, 32};
  const NodeSet G = NodeSet::from_predicate(spec, [&](Eigen::Index i) { return spec.node(i)[0] < 0.25; });
  const WhitneyCover cover = whitney_decompose(G);
  for (std::size_t k = 0; k < cover.cubes.size(); ++k) {
    const DyadicCube& Q = cover.cubes[k];
    if (Q.side_cells(spec) != 1) continue;
    if (Q.first_cell(spec)[0] != 19) continue;
    const Point y = cover.centers[k];
    const Point x = Q.center(spec);
    CHECK(std::hypot(y[0] - x[0], y[1] - x[1]) <= std::sqrt(2.0) * spec.h() + 1e-12);
  }
  // Determinism.
  const WhitneyCover again = whitney_decompose(G);
  REQUIRE(again.cubes.size() == cover.cubes.size());
  for (std::size_t k = 0; k < cover.cubes.size(); ++k) {
    CHECK(again.cubes[k] == cover.cubes[k]);
    CHECK(again.centers[k] == cover.centers[k]);
  }
}

TEST_CASE("verify_whitney negative control") {
  const GridSpec spec{2, 1.0, 32};
  const NodeSet G = NodeSet::from_predicate(spec, [&](Eigen::Index i) { return norm(spec.node(i), 2) < 0.5; });
  WhitneyCover cover = whitney_decompose(G);
  REQUIRE(verify_whitney(cover).all_ok());
  // Replace the largest cube by its parent, which overlaps its siblings or leaves G.
  std::size_t big = 0;
  for (std::size_t k = 0; k < cover.cubes.size(); ++k)
    if (cover.cubes[k].generation < cover.cubes[big].generation) big = k;
  DyadicCube& Q = cover.cubes[big];
  Q.generation -= 1;
  for (int a = 0; a < 2; ++a) Q.corner[a] /= 2;
  const WhitneyReport rep = verify_whitney(cover);
  CHECK_FALSE((rep.union_exact && rep.disjoint));
  CHECK_FALSE(rep.all_ok());
}

TEST_CASE("node set operations and cover csv") {
  const GridSpec spec{2, 1.0, 16};
  NodeSet a(spec);
  a.set(spec.ravel({8, 8, 0}));
  const NodeSet b = a.dilate(2);
  CHECK(b.count() == 25);
  CHECK(a.subset_of(b));
  CHECK_FALSE(b.subset_of(a));
  CHECK(b.complement().count() == spec.size() - 25);
  CHECK(NodeSet(spec).dilate(3).empty());

  std::ostringstream os;
  write_cover_csv(os, whitney_decompose(b));
  CHECK(os.str().rfind("generation,", 0) == 0);
}
