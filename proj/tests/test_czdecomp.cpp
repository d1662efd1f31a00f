#include "calderon/czdecomp.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace calderon;

namespace {

GridFunction random_density(std::mt19937_64& rng, const GridSpec& spec) {
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(spec.size());
  for (int k = 0; k < 6; ++k) {
    Point c{0, 0, 0};
    for (int a = 0; a < spec.d; ++a) c[a] = spec.L * (1.6 * u(rng) - 0.8);
    const double r = spec.L * (0.02 + 0.15 * u(rng));
    const double amp = std::pow(10.0, 3 * u(rng));
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      const Point x = spec.node(i);
      double e = 0;
      for (int a = 0; a < spec.d; ++a) e += (x[a] - c[a]) * (x[a] - c[a]);
      if (e < r * r) v[i] += amp * (1 + u(rng));
    }
  }
  return {spec, v};
}

}  // namespace

TEST_CASE("CZ decomposition properties on random densities") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 30; ++t) {
    const int d = 1 + t % 3;
    const GridSpec spec{d, 1.0, d == 3 ? 16 : d == 2 ? 64 : 256};
    const GridFunction f = random_density(rng, spec);
    const double mean = f.values().mean();
    if (mean == 0) continue;
    const double level = mean * (2 + 50 * (t % 5));
    const CZResult cz = cz_decompose(f, level);
    const double cell = spec.cell_volume();

    Eigen::ArrayXd rebuilt = cz.good.values();
    std::vector<int> hits(static_cast<std::size_t>(spec.size()), 0);
    for (const auto& p : cz.bad_pieces) {
      const GridFunction b = p.to_grid(spec);
      rebuilt += b.values();
      for (auto i : p.cube.cells(spec)) ++hits[i];
      // Zero mean, relative to the mass of f on the cube.
      double mass = 0;
      for (auto i : p.cube.cells(spec)) mass += f[i] * cell;
      CHECK(std::abs(p.integral(spec)) <= 1e-10 * mass);
      // Stopping rule: level < average <= 2^d level.
      CHECK(p.average > level);
      CHECK(p.average <= std::ldexp(level, d) * (1 + 1e-12));
    }
    CHECK(((rebuilt - f.values()).abs() <= 1e-14 * f.values().abs().maxCoeff()).all());
    for (int h : hits) CHECK(h <= 1);
    CHECK(cz.good.values().maxCoeff() <= std::ldexp(level, d) * (1 + 1e-12));
    for (Eigen::Index i = 0; i < spec.size(); ++i)
      if (!hits[i]) CHECK(cz.good[i] == f[i]);
    CHECK(cz.bad_set_measure <= lp_norm(f, 1) / level * (1 + 1e-12));
    CHECK(cz.bad_set().measure() == doctest::Approx(cz.bad_set_measure));
  }
}

TEST_CASE("CZ decomposition edge cases") {
  const GridSpec spec{2, 1.0, 16};
  const GridFunction f = sample([](const Point& x) { return x[0] > 0.5 && x[1] > 0.5 ? 40.0 : 0.0; }, spec);
  CHECK_THROWS_AS(cz_decompose(f, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cz_decompose(f, f.values().mean()), std::invalid_argument);
  CHECK_THROWS_AS(cz_decompose(f.scaled(-1), 1.0), std::invalid_argument);
  // The bright quadrant is a single dyadic child of the root.
  const CZResult cz = cz_decompose(f, 20.0);
  REQUIRE(cz.bad_pieces.size() == 1);
  CHECK(cz.bad_pieces[0].cube.generation == 2);
  CHECK(cz.bad_set_measure == doctest::Approx(0.25));
  // A level above the maximum leaves nothing bad.
  CHECK(cz_decompose(f, 41.0).bad_pieces.empty());
}

TEST_CASE("gradient split") {
  const GridSpec spec{2, 2.0, 64};
  const GridFunction A = sample([](const Point& x) { return std::sin(3 * x[0]) * std::exp(-x[1] * x[1]); }, spec);
  const GradientSplit s = apply_to_gradient_components(A, 1.5, 2.0, 2.0 / 3);
  REQUIRE(s.good.size() == 2);
  for (int j = 0; j < 2; ++j) {
    Eigen::ArrayXd rebuilt = s.good[j].values();
    for (const auto& p : s.bad[j]) {
      rebuilt += p.to_grid(spec).values();
      CHECK(std::abs(p.integral(spec)) <= 1e-12 * (1 + p.l1(spec)));
    }
    CHECK(((rebuilt - s.grad.components[j].values()).abs() <= 1e-13).all());
  }
  CHECK_THROWS_AS(apply_to_gradient_components(A, 2.0, 1.0, 1.0), std::invalid_argument);
}
