#pragma once

#include "calderon/commutator.hpp"
#include "calderon/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace calderon {

struct ExperimentConfig {
  int d = 2;
  int n = 1;
  /// power-even, smooth or rough.
  std::string kernel = "power-even";
  GridSpec grid{2, 4.0, 128};
  /// One exponent per symbol. q = d together with lorentz_symbols means the L^{d,1} norm.
  std::vector<double> q{2.0};
  bool lorentz_symbols = true;
  double p = 1;
  /// Geometric lambda ladder; relative to the median field value unless ladder_absolute.
  int ladder_levels = 16;
  double ladder_lo = 0.01;
  double ladder_hi = 100;
  bool ladder_absolute = false;
  /// eps_k = eps_base h 2^k, k = eps_levels-1 .. 0.
  int eps_levels = 4;
  double eps_base = 4;
  std::uint64_t seed = 1;
  int family = 16;
  /// Smallest bump radius as a fraction of L.
  double smoothness = 0.2;
  /// Lattice on which fields are evaluated.
  int eval_n = 64;
  /// Also run at 2N and compare.
  bool refine = true;
  /// Asks for a strong-type bound; refused below the endpoint.
  bool strong_assertion = false;
  std::string out_dir = "out";

  double alpha = 0.5;
  double beta = 1.5;
  double rho = 0.25;
  double cone_eps = 0.25;
  double kappa = 4;
  int cone_n = 16384;
  int delta_min_exp = 3;
  int delta_max_exp = 9;

  int points = 20;
  std::vector<int> sphere_ladder{16, 64, 256};

  /// 1/r = sum 1/q_i + 1/p.
  [[nodiscard]] double r() const;
  [[nodiscard]] double endpoint() const { return static_cast<double>(d) / (d + n); }
  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j, const ExperimentConfig& base);
};

/// Defaults for an experiment name (weak-type, counterexample, rotations-check, audit, frak, weiss).
ExperimentConfig default_config(const std::string& experiment);
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base);

KernelSpec make_kernel(const ExperimentConfig& cfg, int sphere_nodes = 256);

struct Criterion {
  std::string name;
  bool passed = false;
  double value = 0;
  double limit = 0;
  std::string detail;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json config;
  nlohmann::json results;
  std::vector<Criterion> criteria;
  /// Written as csv.
  std::vector<Table> tables;
  /// Two-column plot data, written as dat.
  std::vector<Table> plots;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

void write_report(const ExperimentReport& report, const std::string& dir);

/// Geometric ladder of count levels from lo to hi.
std::vector<double> geometric_ladder(double lo, double hi, int count);
/// sup over the ladder of lambda^r m({|F| > lambda}).
double weak_quasi_norm(const GridFunction& F, const std::vector<double>& ladder, double r);

ExperimentReport run_weak_type(const ExperimentConfig& cfg);
ExperimentReport run_counterexample(const ExperimentConfig& cfg);
ExperimentReport run_rotations_check(const ExperimentConfig& cfg);
ExperimentReport run_decomposition_audit(const ExperimentConfig& cfg);
/// Fractional maximal function against M_q of the gradient.
ExperimentReport run_frak_domination(const ExperimentConfig& cfg);
/// lambda^d m({M(grad A) > lambda}) against the L^{d,1} norm of grad A.
ExperimentReport run_weiss_endpoint(const ExperimentConfig& cfg);

}  // namespace calderon
