#include "calderon/commutator.hpp"
#include "calderon/czdecomp.hpp"
#include "calderon/dyadic.hpp"
#include "calderon/harness.hpp"
#include "calderon/maximal.hpp"
#include "calderon/rearrange.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace calderon;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config;
  std::string out_dir;
  std::int64_t seed = -1;
  int grid_n = 0;
  int dimension = 0;
  int order = 0;
};

ExperimentConfig resolve(const std::string& experiment, const Overrides& o) {
  ExperimentConfig c = default_config(experiment);
  if (!o.config.empty()) c = load_config(o.config, c);
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.grid_n > 0) c.grid.N = o.grid_n;
  if (o.dimension > 0) {
    c.d = o.dimension;
    c.grid.d = o.dimension;
  }
  if (o.order > 0) {
    c.n = o.order;
    c.q.resize(c.n, c.q.front());
  }
  return c;
}

int finish(const ExperimentReport& rep, const std::string& dir) {
  write_report(rep, dir);
  for (const auto& c : rep.criteria)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.value << " (limit " << c.limit << ")\n";
  std::cout << "report written to " << dir << "/report.json\n";
  return rep.passed() ? 0 : 1;
}

void write_json(const std::string& path, const json& j) { std::ofstream(path) << j.dump(2) << "\n"; }

GridSpec spec_of(const ExperimentConfig& c) { return {c.d, c.grid.L, c.grid.N}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calderon commutator laboratory"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON config file; keys mirror the experiment config");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--out-dir", o.out_dir, "output directory");
  app.add_option("--grid-n", o.grid_n, "lattice points per axis");
  app.add_option("--dimension", o.dimension, "spatial dimension d");
  app.add_option("--order", o.order, "commutator order n");

  auto* eval = app.add_subcommand("eval", "evaluate the commutator on the evaluation lattice");
  std::vector<double> point;
  eval->add_option("--point", point, "also report the truncation ladder at this point");

  auto* maximal = app.add_subcommand("maximal", "apply a maximal operator to a random input");
  std::string op = "weiss";
  double mq = 1;
  maximal->add_option("--op", op, "hl, weiss, frak, lambda, frak-probe or weiss-probe")
      ->check(CLI::IsMember({"hl", "weiss", "frak", "lambda", "frak-probe", "weiss-probe"}));
  maximal->add_option("--q", mq, "exponent for hl and frak");

  auto* whitney = app.add_subcommand("whitney", "Whitney cover of a superlevel set of a random input");
  double wlevel = 0.5;
  whitney->add_option("--level", wlevel, "superlevel threshold relative to the maximum");

  auto* cz = app.add_subcommand("cz", "Calderon-Zygmund decomposition of a random density");
  double czlevel = 0.5;
  cz->add_option("--level", czlevel, "level relative to the maximum");

  auto* lorentz = app.add_subcommand("lorentz", "rearrangement and Lorentz norms of a random input");
  double lp = 2, lq = 1;
  lorentz->add_option("--p", lp, "Lorentz p");
  lorentz->add_option("--q", lq, "Lorentz q (inf for weak)");

  auto* weak = app.add_subcommand("weak-type", "weak-type endpoint sweep");
  auto* counter = app.add_subcommand("counterexample", "log divergence below the endpoint");
  auto* rot = app.add_subcommand("rotations-check", "method of rotations against direct evaluation");
  auto* audit = app.add_subcommand("audit", "exceptional-set pipeline across a lambda ladder");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (weak->parsed()) {
      const auto c = resolve(name, o);
      return finish(run_weak_type(c), c.out_dir);
    }
    if (counter->parsed()) {
      const auto c = resolve(name, o);
      return finish(run_counterexample(c), c.out_dir);
    }
    if (rot->parsed()) {
      const auto c = resolve(name, o);
      return finish(run_rotations_check(c), c.out_dir);
    }
    if (audit->parsed()) {
      const auto c = resolve(name, o);
      return finish(run_decomposition_audit(c), c.out_dir);
    }
    if (maximal->parsed() && (op == "frak-probe" || op == "weiss-probe")) {
      const auto c = resolve(op == "frak-probe" ? "frak" : "weiss", o);
      return finish(op == "frak-probe" ? run_frak_domination(c) : run_weiss_endpoint(c), c.out_dir);
    }

    const auto c = resolve(name == "eval" ? "eval" : "weak-type", o);
    c.validate();
    const GridSpec spec = spec_of(c);
    std::filesystem::create_directories(c.out_dir);
    const GridFunction input = random_test_family(c.seed, 1, spec, c.smoothness)[0];
    json out;

    if (eval->parsed()) {
      std::vector<GridFunction> A;
      for (int i = 0; i < c.n; ++i) A.push_back(random_test_family(c.seed + 1000 * (i + 1), 1, spec, c.smoothness)[0]);
      const KernelSpec k = make_kernel(c);
      const auto schedule = default_eps_schedule(spec, c.eps_levels - 1, c.eps_base);
      const GridSpec ev{c.d, c.grid.L, c.eval_n};
      save_grid(c.out_dir + "/field.grid", evaluate_field(k, A, input, ev, schedule));
      if (!point.empty()) {
        Point x{0, 0, 0};
        for (std::size_t a = 0; a < point.size() && a < 3; ++a) x[a] = point[a];
        const PVResult r = pv_extrapolate(k, A, input, x, schedule);
        out["value"] = r.value;
        out["extrapolants"] = r.extrapolants;
        out["residual"] = r.extrapolation_residual;
        for (const auto& [e, v] : r.truncations) out["truncations"].push_back({e, v});
      }
      out["field"] = "field.grid";
    } else if (maximal->parsed()) {
      GridFunction M;
      if (op == "hl") M = hl_maximal_p(input, mq);
      if (op == "weiss") M = mary_weiss(input);
      if (op == "frak") M = frak_m_s(input, frak_exponent(mq, c.d), mq);
      if (op == "lambda") M = lambda_op(input);
      save_grid(c.out_dir + "/maximal.grid", M);
      out["operator"] = op;
      out["max"] = M.values().maxCoeff();
    } else if (whitney->parsed()) {
      const double thr = wlevel * input.values().maxCoeff();
      const NodeSet G = NodeSet::from_predicate(spec, [&](Eigen::Index i) { return input[i] > thr; });
      const WhitneyCover cover = whitney_decompose(G);
      std::ofstream os(c.out_dir + "/whitney.csv");
      write_cover_csv(os, cover);
      const WhitneyReport r = verify_whitney(cover);
      out = {{"cubes", r.cube_count},      {"degenerate", r.degenerate_count}, {"all_ok", r.all_ok()},
             {"min_ratio", r.min_ratio},   {"max_ratio", r.max_ratio},         {"min_center_ratio", r.min_center_ratio},
             {"max_center_ratio", r.max_center_ratio}};
    } else if (cz->parsed()) {
      const GridFunction f = input.abs();
      const CZResult r = cz_decompose(f, czlevel * f.values().maxCoeff());
      std::ofstream os(c.out_dir + "/cz.csv");
      write_cz_csv(os, r);
      save_grid(c.out_dir + "/good.grid", r.good);
      out = {{"level", r.level}, {"bad_cubes", r.bad_pieces.size()}, {"bad_set_measure", r.bad_set_measure}};
    } else if (lorentz->parsed()) {
      const RearrangementProfile prof = decreasing_rearrangement(input);
      std::ofstream os(c.out_dir + "/profile.csv");
      write_profile_csv(os, prof);
      out = {{"p", lp}, {"q", lq}, {"norm", lorentz_norm(prof, lp, lq)}, {"lp_norm", lp_norm(input, lp)}};
    }
    write_json(c.out_dir + "/report.json", out);
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
