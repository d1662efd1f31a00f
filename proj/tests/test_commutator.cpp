#include "calderon/commutator.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace calderon;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

GridFunction smooth(std::uint64_t seed, const GridSpec& spec) { return random_test_family(seed, 1, spec, 0.25)[0]; }

std::vector<KernelSpec> kernels(int d, int n) {
  std::vector<KernelSpec> out;
  if (n % 2) out.push_back(power_even_kernel(d, n));
  out.push_back(homogeneous_smooth_kernel(d, n, 64));
  out.push_back(rough_kernel(d, n, [n](const Point& t) { return n % 2 ? std::abs(t[0]) : t[0] * std::abs(t[0]); }, 64));
  return out;
}

}  // namespace

TEST_CASE("kernel families") {
  const KernelSpec pe = power_even_kernel(2, 1);
  CHECK(pe.name() == "power-even");
  CHECK(pe({0.5, 0, 0}) == doctest::Approx(4.0));
  CHECK_THROWS_AS(power_even_kernel(2, 2), std::invalid_argument);
  CHECK_THROWS_AS(power_even_kernel(2, 0), std::invalid_argument);

  for (int d : {1, 2, 3})
    for (int n : {1, 2, 3}) {
      const KernelSpec k = homogeneous_smooth_kernel(d, n, d == 3 ? 2048 : 256);
      CHECK(k.name() == "smooth");
      CHECK(parity_defect(k) < 1e-12);
      CHECK(sampled_size(k) <= k.size_bound * (1 + 1e-12));
      if (d < 3) CHECK(moment_residual(k) < 1e-8);
    }
  // The Fibonacci rule integrates the cancellation only approximately.
  CHECK(moment_residual(homogeneous_smooth_kernel(3, 1, 4096)) < 1e-2);

  const KernelSpec odd = rough_kernel(2, 2, [](const Point& t) { return t[0] * t[0] * t[0]; }, 64);
  CHECK(parity_defect(odd) < 1e-14);
  CHECK(odd.name() == "rough");
  CHECK_THROWS_WITH_AS(rough_kernel(2, 1, [](const Point& t) { return t[0]; }, 64), doctest::Contains("parity"),
                       std::invalid_argument);
  CHECK_THROWS_AS(rough_kernel(2, 2, [](const Point& t) { return 1 + t[0] * 0; }, 64), std::invalid_argument);
}

TEST_CASE("cutoff and schedule") {
  CHECK(cutoff_weight(Cutoff::Sharp, 1.0, 1.0) == 0);
  CHECK(cutoff_weight(Cutoff::Sharp, 1.01, 1.0) == 1);
  CHECK(cutoff_weight(Cutoff::Smooth, 0.5, 1.0) == 0);
  CHECK(cutoff_weight(Cutoff::Smooth, 1.0, 1.0) == 1);
  CHECK(cutoff_weight(Cutoff::Smooth, 0.75, 1.0) == doctest::Approx(0.5));
  const GridSpec spec{2, 1.0, 64};
  const auto s = default_eps_schedule(spec, 3, 4);
  REQUIRE(s.size() == 4);
  CHECK(s.back() == doctest::Approx(4 * spec.h()));
  CHECK(s.front() == doctest::Approx(32 * spec.h()));
}

TEST_CASE("vanishing on constant symbols") {
  const GridSpec spec{2, 2.0, 32};
  const GridFunction f = smooth(1, spec), A = smooth(2, spec);
  const GridFunction c = sample([](const Point&) { return 0.37; }, spec);
  const auto eps = default_eps_schedule(spec, 2, 4);
  for (int n : {1, 2})
    for (const KernelSpec& k : kernels(2, n)) {
      std::vector<GridFunction> syms(n, A);
      syms.back() = c;
      for (const Point& x : {spec.node(100), Point{0.1234, -0.5678, 0}}) {
        for (double v : pv_truncations(k, syms, f, x, eps, Cutoff::Smooth)) CHECK(v == 0);
        for (double v : pv_truncations(k, syms, f, x, eps, Cutoff::Sharp)) CHECK(v == 0);
      }
      if (k.variant == KernelVariant::Rough)
        for (double v : rotations_truncations(k, syms, f, {0.3, 0.2, 0}, eps, Cutoff::Smooth)) CHECK(v == 0);
    }
}

TEST_CASE("multilinearity") {
  const GridSpec spec{2, 2.0, 32};
  const GridFunction f1 = smooth(3, spec), f2 = smooth(4, spec);
  const GridFunction A1 = smooth(5, spec), A2 = smooth(6, spec), B = smooth(7, spec);
  const auto eps = default_eps_schedule(spec, 2, 4);
  for (int n : {1, 2})
    for (const KernelSpec& k : kernels(2, n)) {
      for (const Point& x : {spec.node(333), Point{0.11, 0.42, 0}}) {
        std::vector<GridFunction> syms(n, A1);
        if (n == 2) syms[1] = A2;
        const double a = pv_extrapolate(k, syms, f1, x, eps).value;
        const double b = pv_extrapolate(k, syms, f2, x, eps).value;
        const double s = pv_extrapolate(k, syms, f1 + f2.scaled(-2), x, eps).value;
        CHECK(std::abs(s - (a - 2 * b)) <= 1e-10 * (std::abs(a) + 2 * std::abs(b)));
        for (int slot = 0; slot < n; ++slot) {
          std::vector<GridFunction> alt = syms, mix = syms;
          alt[slot] = B;
          mix[slot] = syms[slot].scaled(3) + B;
          const double c = pv_extrapolate(k, alt, f1, x, eps).value;
          const double m = pv_extrapolate(k, mix, f1, x, eps).value;
          CHECK(std::abs(m - (3 * a + c)) <= 1e-10 * (3 * std::abs(a) + std::abs(c)));
        }
      }
    }
}

TEST_CASE("Hilbert kernel oracle") {
  // d = 1, n = 1, K = 1/|x|, A(x) = x: the integrand is 1/(x - y), so the value at 2 is ln 3.
  const GridSpec spec{1, 4.0, 4096};
  const KernelSpec k = power_even_kernel(1, 1);
  const GridFunction A = sample([](const Point& x) { return x[0]; }, spec);
  const GridFunction f = sample([](const Point& x) { return std::abs(x[0]) < 1 ? 1.0 : 0.0; }, spec);
  const Point x{2, 0, 0};
  CHECK(std::abs(pv_truncated(k, {A}, f, x, 2 * spec.h()) - std::log(3.0)) < 1e-3);
  const PVResult r = pv_extrapolate(k, {A}, f, x, default_eps_schedule(spec, 3, 4));
  CHECK(std::abs(r.value - std::log(3.0)) < 1e-4);
  CHECK(r.truncations.size() == 4);
  // Inside the support the principal value is ln((1 + x) / (1 - x)).
  const Point y{0.5, 0, 0};
  const PVResult s = pv_extrapolate(k, {A}, f, y, default_eps_schedule(spec, 3, 4));
  CHECK(std::abs(s.value - std::log(3.0)) < 1e-4);
}

TEST_CASE("input validation") {
  const GridSpec spec{2, 1.0, 32};
  const GridFunction f = smooth(8, spec);
  const KernelSpec k = power_even_kernel(2, 1);
  CHECK_THROWS_WITH_AS(pv_truncated(k, {f}, f, {0, 0, 0}, spec.h()), doctest::Contains("2h"), std::invalid_argument);
  CHECK_THROWS_AS(pv_truncated(k, {f}, f, {1.5, 0, 0}, 4 * spec.h()), std::invalid_argument);
  CHECK_THROWS_AS(pv_truncated(k, {f, f}, f, {0, 0, 0}, 4 * spec.h()), std::invalid_argument);
  CHECK_THROWS_AS(pv_truncated(power_even_kernel(1, 1), {f}, f, {0, 0, 0}, 4 * spec.h()), std::invalid_argument);
  CHECK_THROWS_AS(pv_truncated(k, {smooth(8, GridSpec{2, 1.0, 64})}, f, {0, 0, 0}, 4 * spec.h()), std::invalid_argument);
  CHECK_THROWS_AS(pv_extrapolate(k, {f}, f, {0, 0, 0}, {0.2, 0.3}), std::invalid_argument);
  CHECK_THROWS_AS(rotations_evaluate(power_even_kernel(1, 1), {zeros(GridSpec{1, 1.0, 32})}, zeros(GridSpec{1, 1.0, 32}),
                                     {0, 0, 0}, 0.1),
                  std::invalid_argument);
}

TEST_CASE("Richardson extrapolation") {
  // C(eps) = c0 + c1 eps + c3 eps^3 is recovered exactly from three levels.
  const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
  std::vector<double> v;
  for (double e : eps) v.push_back(1.5 - 0.7 * e + 2.25 * e * e * e);
  const PVResult r = richardson(eps, v);
  CHECK(r.value == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(r.extrapolation_residual < 1e-13);
  CHECK(r.extrapolants.size() == 2);
  CHECK_THROWS_AS(richardson({0.1, 0.2}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(richardson({0.1}, {1, 2}), std::invalid_argument);
  const PVResult one = richardson({0.1}, {3});
  CHECK(one.value == 3);
}

TEST_CASE("smooth kernel truncations converge") {
  const GridSpec spec{2, 4.0, 256};
  const KernelSpec k = homogeneous_smooth_kernel(2, 1);
  // Bumps as wide as the domain, so eps >= h sits in the asymptotic range.
  const GridFunction f = random_test_family(10, 1, spec, 1.0)[0], A = random_test_family(11, 1, spec, 1.0)[0];
  const Point x = spec.node(spec.ravel({130, 121, 0}));
  const PVResult r = pv_extrapolate(k, {A}, f, x, default_eps_schedule(spec, 4, 4));
  // Successive differences of the raw ladder shrink by about 2 each halving.
  std::vector<double> diff;
  for (std::size_t j = 1; j < r.truncations.size(); ++j)
    diff.push_back(std::abs(r.truncations[j].second - r.truncations[j - 1].second));
  for (std::size_t j = 1; j < diff.size(); ++j) CHECK(diff[j] < diff[j - 1]);
  CHECK(r.extrapolation_residual < 0.05 * diff.back());
}

TEST_CASE("translation equivariance") {
  const GridSpec spec{2, 2.0, 64};
  const auto fexpr = [](const Point& x) { return bump_value(x, {0.1, -0.2, 0}, 0.7, 2); };
  const auto aexpr = [](const Point& x) { return bump_value(x, {-0.2, 0.1, 0}, 0.8, 2) * (1 + x[0]); };
  const double sx = 5 * spec.h(), sy = -3 * spec.h();
  const auto shift = [&](auto g) { return [=](const Point& x) { return g({x[0] - sx, x[1] - sy, 0}); }; };
  const GridFunction f = sample(fexpr, spec), A = sample(aexpr, spec);
  const GridFunction fs = sample(shift(fexpr), spec), As = sample(shift(aexpr), spec);
  const auto eps = default_eps_schedule(spec, 2, 4);
  for (const KernelSpec& k : kernels(2, 1)) {
    const Point x = spec.node(spec.ravel({30, 33, 0}));
    const Point xs{x[0] + sx, x[1] + sy, 0};
    const double a = pv_extrapolate(k, {A}, f, x, eps).value;
    const double b = pv_extrapolate(k, {As}, fs, xs, eps).value;
    CHECK(std::abs(a - b) <= 1e-10 * (1 + std::abs(a)));
  }
}

TEST_CASE("dilation covariance at a dyadic factor") {
  // A^s(x) = A(2x)/2 and f^s(x) = f(2x) on the half-size domain reproduce the original at 2x.
  const GridSpec big{2, 2.0, 64}, small{2, 1.0, 64};
  const auto fexpr = [](const Point& x) { return bump_value(x, {0.3, -0.2, 0}, 1.2, 2); };
  const auto aexpr = [](const Point& x) { return std::sin(x[0]) * bump_value(x, {0, 0.1, 0}, 1.5, 2); };
  const GridFunction f = sample(fexpr, big), A = sample(aexpr, big);
  const GridFunction fs = sample([&](const Point& x) { return fexpr({2 * x[0], 2 * x[1], 0}); }, small);
  const GridFunction As = sample([&](const Point& x) { return 0.5 * aexpr({2 * x[0], 2 * x[1], 0}); }, small);
  for (const KernelSpec& k : kernels(2, 1)) {
    const Point x = small.node(small.ravel({37, 22, 0}));
    const Point X{2 * x[0], 2 * x[1], 0};
    const double a = pv_extrapolate(k, {As}, fs, x, default_eps_schedule(small, 2, 4)).value;
    const double b = pv_extrapolate(k, {A}, f, X, default_eps_schedule(big, 2, 4)).value;
    CHECK(rel(a, b) < 1e-10);
  }
}

TEST_CASE("method of rotations") {
  const GridSpec spec{2, 2.0, 64};
  const GridFunction f = smooth(12, spec), A = smooth(13, spec);
  const KernelSpec zero = rough_kernel(2, 1, [](const Point&) { return 0.0; }, 64);
  CHECK(rotations_evaluate(zero, {A}, f, {0.1, 0.2, 0}, 4 * spec.h()) == 0);
  const KernelSpec k = rough_kernel(2, 1, [](const Point& t) { return std::abs(t[0]); }, 128);
  CHECK(rotations_evaluate(k, {A}, zeros(spec), {0.1, 0.2, 0}, 4 * spec.h()) == 0);
  // Bad parity is rejected even if the kernel was assembled by hand.
  KernelSpec bad = k;
  bad.omega = [](const Point& t) { return t[0]; };
  CHECK_THROWS_AS(rotations_evaluate(bad, {A}, f, {0.1, 0.2, 0}, 4 * spec.h()), std::invalid_argument);
  // Rough agreement with the direct sum already on a coarse lattice.
  const auto eps = default_eps_schedule(spec, 2, 4);
  const Point x{0.31, -0.17, 0};
  const double rot = rotations_extrapolate(k, {A}, f, x, eps).value;
  const double dir = pv_extrapolate(k, {A}, f, x, eps).value;
  CHECK(std::abs(rot - dir) < 0.05 * std::abs(dir) + 1e-3);
}

TEST_CASE("origin truncations grow on the cone construction") {
  const GridSpec spec{2, 1.0, 512};
  const KernelSpec k = power_even_kernel(2, 1);
  const Cone cone{4.0, 0.25, 0.25};
  const GridFunction A = sample([&](const Point& x) { return cone_power_A_value(x, 0.5, cone, 2); }, spec);
  const GridFunction f = sample([&](const Point& x) { return cone_power_f_value(x, 1.5, cone, 2); }, spec);
  const std::vector<double> deltas{0.25 / 8, 0.25 / 16, 0.25 / 32};
  const auto v = origin_truncations(k, {A}, f, {-0.5, 0, 0}, deltas);
  // C_delta is negative and its magnitude grows as delta shrinks.
  CHECK(v[0] < 0);
  CHECK(-v[1] > -v[0]);
  CHECK(-v[2] > -v[1]);
  // Lazy sampling from closed forms agrees with the sampled grid.
  const auto lazy = origin_truncations(k, {[&](const Point& x) { return cone_power_A_value(x, 0.5, cone, 2); }},
                                       [&](const Point& x) { return cone_power_f_value(x, 1.5, cone, 2); }, spec,
                                       {-0.5, 0, 0}, deltas, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
  for (std::size_t j = 0; j < v.size(); ++j) CHECK(rel(lazy[j], v[j]) < 1e-12);
}
