#include "calderon/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace calderon;

TEST_CASE("config defaults and validation") {
  for (const char* name : {"weak-type", "eval", "counterexample", "rotations-check", "audit", "frak", "weiss"})
    CHECK_NOTHROW(default_config(name).validate());
  CHECK_THROWS_AS(default_config("nope"), std::invalid_argument);

  ExperimentConfig c = default_config("weak-type");
  CHECK(c.r() == doctest::Approx(2.0 / 3));
  CHECK(c.endpoint() == doctest::Approx(2.0 / 3));
  c.q = {2.0, 2.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = default_config("weak-type");
  c.grid.N = 100;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = default_config("weak-type");
  c.eps_base = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  // A strong bound below the endpoint is refused.
  ExperimentConfig s = default_config("counterexample");
  CHECK(s.r() < s.endpoint());
  s.strong_assertion = true;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("strong"), std::invalid_argument);
}

TEST_CASE("config json round trip") {
  ExperimentConfig c = default_config("audit");
  c.seed = 42;
  c.sphere_ladder = {8, 16};
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json(), ExperimentConfig{});
  CHECK(back.to_json() == c.to_json());

  const auto path = std::filesystem::temp_directory_path() / "calderon_cfg.json";
  std::ofstream(path) << R"({"N": 32, "family": 3, "q": [1.25]})";
  const ExperimentConfig l = load_config(path.string(), default_config("audit"));
  CHECK(l.grid.N == 32);
  CHECK(l.family == 3);
  CHECK(l.q == std::vector<double>{1.25});
  CHECK(l.p == 2);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json", c), std::runtime_error);
}

TEST_CASE("kernels from config") {
  ExperimentConfig c;
  CHECK(make_kernel(c).variant == KernelVariant::PowerEven);
  c.kernel = "rough";
  CHECK(make_kernel(c).variant == KernelVariant::Rough);
  c.n = 2;
  c.q = {4, 4};
  CHECK(make_kernel(c).variant == KernelVariant::Rough);
  c.kernel = "smooth";
  CHECK(make_kernel(c).variant == KernelVariant::HomogeneousSmooth);
  c.kernel = "other";
  CHECK_THROWS_AS(make_kernel(c), std::invalid_argument);
}

TEST_CASE("ladders and the weak quasi-norm") {
  const auto l = geometric_ladder(0.1, 10, 5);
  REQUIRE(l.size() == 5);
  CHECK(l[2] == doctest::Approx(1.0));
  CHECK(l.back() == doctest::Approx(10.0));
  CHECK_THROWS_AS(geometric_ladder(1, 1, 4), std::invalid_argument);

  const GridSpec spec{2, 1.0, 16};
  CHECK(weak_quasi_norm(zeros(spec), l, 0.5) == 0);
  // An indicator of measure 2 gives the largest ladder level below 1.
  const GridFunction E = sample([](const Point& x) { return x[0] < 0 ? 1.0 : 0.0; }, spec);
  CHECK(weak_quasi_norm(E, l, 0.5) == doctest::Approx(std::sqrt(l[1]) * 2.0));
  // lambda^r m({|cF| > lambda}) scales like |c|^r.
  const GridFunction F = random_test_family(2, 1, spec, 0.3)[0];
  const auto fine = geometric_ladder(1e-3, 1e3, 400);
  const double w1 = weak_quasi_norm(F, fine, 2.0 / 3), w2 = weak_quasi_norm(F.scaled(8), fine, 2.0 / 3);
  CHECK(w2 / w1 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("weak-type run rejects the regime below the endpoint") {
  ExperimentConfig c = default_config("weak-type");
  c.q = {1.2};
  c.p = 1.2;
  c.lorentz_symbols = false;
  CHECK_THROWS_WITH_AS(run_weak_type(c), doctest::Contains("below"), std::invalid_argument);
}

TEST_CASE("small weak-type run") {
  ExperimentConfig c = default_config("weak-type");
  c.grid.N = 32;
  c.eval_n = 16;
  c.family = 2;
  c.eps_levels = 2;
  c.eps_base = 2;
  c.out_dir = (std::filesystem::temp_directory_path() / "calderon_weak_test").string();
  const ExperimentReport rep = run_weak_type(c);
  REQUIRE(rep.criteria.size() == 2);
  CHECK(rep.criteria[0].passed);
  CHECK(rep.results["W"].size() == 2);
  write_report(rep, c.out_dir);
  CHECK(std::filesystem::exists(c.out_dir + "/report.json"));
  CHECK(std::filesystem::exists(c.out_dir + "/weak_type.csv"));
  CHECK(std::filesystem::exists(c.out_dir + "/weak_curve.dat"));
  std::filesystem::remove_all(c.out_dir);

  c.eval_n = 32;
  CHECK_THROWS_AS(run_weak_type(c), std::invalid_argument);
}

TEST_CASE("experiment preconditions") {
  ExperimentConfig c = default_config("counterexample");
  c.alpha = 0.4;
  CHECK_THROWS_AS(run_counterexample(c), std::invalid_argument);
  ExperimentConfig r = default_config("rotations-check");
  r.d = 3;
  r.grid.d = 3;
  r.grid.N = 16;
  CHECK_THROWS_AS(run_rotations_check(r), std::invalid_argument);
  ExperimentConfig a = default_config("audit");
  a.q = {2.5};
  CHECK_THROWS_AS(run_decomposition_audit(a), std::invalid_argument);
}

TEST_CASE("report json") {
  ExperimentReport rep;
  rep.experiment = "x";
  rep.criteria.push_back({"a", true, 1, 2, ""});
  CHECK(rep.passed());
  rep.criteria.push_back({"b", false, 3, 2, "too big"});
  CHECK_FALSE(rep.passed());
  const auto j = rep.to_json();
  CHECK(j["passed"] == false);
  CHECK(j["criteria"].size() == 2);
}
