#include "calderon/harness.hpp"

#include "calderon/czdecomp.hpp"
#include "calderon/dyadic.hpp"
#include "calderon/exceptional.hpp"
#include "calderon/maximal.hpp"
#include "calderon/rearrange.hpp"
#include "calderon/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace calderon {

using nlohmann::json;

double ExperimentConfig::r() const {
  double inv = 1.0 / p;
  for (double qi : q) inv += 1.0 / qi;
  return 1.0 / inv;
}

void ExperimentConfig::validate() const {
  if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (n < 1) throw std::invalid_argument("order must be at least 1");
  if (static_cast<int>(q.size()) != n) throw std::invalid_argument("need one exponent q_i per symbol");
  for (double qi : q)
    if (!(qi >= 1)) throw std::invalid_argument("exponents q_i must be at least 1");
  if (!(p >= 1)) throw std::invalid_argument("exponent p must be at least 1");
  if (grid.d != d) throw std::invalid_argument("grid dimension does not match d");
  grid.validate();
  if (ladder_levels < 2 || !(ladder_lo > 0 && ladder_lo < ladder_hi)) throw std::invalid_argument("bad lambda ladder");
  if (eps_levels < 1 || !(eps_base >= 2)) throw std::invalid_argument("bad eps schedule");
  if (family < 1) throw std::invalid_argument("family must be nonempty");
  if (strong_assertion && r() < endpoint())
    throw std::invalid_argument("strong bound requested with r < d/(d+n), where it is known to fail");
}

json ExperimentConfig::to_json() const {
  return json{{"d", d},
              {"n", n},
              {"kernel", kernel},
              {"L", grid.L},
              {"N", grid.N},
              {"q", q},
              {"lorentz_symbols", lorentz_symbols},
              {"p", p},
              {"r", r()},
              {"ladder_levels", ladder_levels},
              {"ladder_lo", ladder_lo},
              {"ladder_hi", ladder_hi},
              {"ladder_absolute", ladder_absolute},
              {"eps_levels", eps_levels},
              {"eps_base", eps_base},
              {"seed", seed},
              {"family", family},
              {"smoothness", smoothness},
              {"eval_n", eval_n},
              {"refine", refine},
              {"strong_assertion", strong_assertion},
              {"out_dir", out_dir},
              {"alpha", alpha},
              {"beta", beta},
              {"rho", rho},
              {"cone_eps", cone_eps},
              {"kappa", kappa},
              {"cone_n", cone_n},
              {"delta_min_exp", delta_min_exp},
              {"delta_max_exp", delta_max_exp},
              {"points", points},
              {"sphere_ladder", sphere_ladder}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const ExperimentConfig& base) {
  ExperimentConfig c = base;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("d", c.d);
  get("n", c.n);
  get("kernel", c.kernel);
  get("L", c.grid.L);
  get("N", c.grid.N);
  get("q", c.q);
  get("lorentz_symbols", c.lorentz_symbols);
  get("p", c.p);
  get("ladder_levels", c.ladder_levels);
  get("ladder_lo", c.ladder_lo);
  get("ladder_hi", c.ladder_hi);
  get("ladder_absolute", c.ladder_absolute);
  get("eps_levels", c.eps_levels);
  get("eps_base", c.eps_base);
  get("seed", c.seed);
  get("family", c.family);
  get("smoothness", c.smoothness);
  get("eval_n", c.eval_n);
  get("refine", c.refine);
  get("strong_assertion", c.strong_assertion);
  get("out_dir", c.out_dir);
  get("alpha", c.alpha);
  get("beta", c.beta);
  get("rho", c.rho);
  get("cone_eps", c.cone_eps);
  get("kappa", c.kappa);
  get("cone_n", c.cone_n);
  get("delta_min_exp", c.delta_min_exp);
  get("delta_max_exp", c.delta_max_exp);
  get("points", c.points);
  get("sphere_ladder", c.sphere_ladder);
  c.grid.d = c.d;
  return c;
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  if (experiment == "weak-type" || experiment == "eval") return c;
  if (experiment == "counterexample") {
    c.q = {1.2};
    c.p = 1.2;
    c.lorentz_symbols = false;
    c.grid = {2, 1.0, 16384};
    return c;
  }
  if (experiment == "rotations-check") {
    c.kernel = "rough";
    c.grid = {2, 4.0, 1024};
    c.smoothness = 0.25;
    c.eps_base = 8;
    return c;
  }
  if (experiment == "audit") {
    c.q = {1.5};
    c.p = 2;
    c.lorentz_symbols = false;
    c.grid = {2, 4.0, 64};
    c.family = 8;
    c.smoothness = 0.1;
    c.ladder_levels = 12;
    c.ladder_lo = 0.03;
    c.ladder_hi = 1;
    c.ladder_absolute = true;
    return c;
  }
  if (experiment == "frak") {
    c.n = 2;
    c.q = {1.0, 1.5};
    c.lorentz_symbols = false;
    c.grid = {2, 4.0, 64};
    c.family = 50;
    return c;
  }
  if (experiment == "weiss") {
    c.lorentz_symbols = true;
    c.smoothness = 0.1;
    c.grid = {2, 4.0, 128};
    return c;
  }
  throw std::invalid_argument("unknown experiment: " + experiment);
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  return ExperimentConfig::from_json(json::parse(is), base);
}

namespace {

double abs_first(const Point& t) { return std::abs(t[0]); }
double signed_first(const Point& t) { return t[0] * std::abs(t[0]); }

}  // namespace

KernelSpec make_kernel(const ExperimentConfig& cfg, int sphere_nodes) {
  if (cfg.kernel == "power-even") return power_even_kernel(cfg.d, cfg.n);
  if (cfg.kernel == "smooth") return homogeneous_smooth_kernel(cfg.d, cfg.n, sphere_nodes);
  if (cfg.kernel == "rough")
    return rough_kernel(cfg.d, cfg.n, cfg.n % 2 ? SphericalFunction(abs_first) : SphericalFunction(signed_first),
                        sphere_nodes);
  throw std::invalid_argument("unknown kernel: " + cfg.kernel);
}

bool ExperimentReport::passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.passed; });
}

json ExperimentReport::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["config"] = config;
  j["results"] = results;
  j["passed"] = passed();
  j["criteria"] = json::array();
  for (const auto& c : criteria)
    j["criteria"].push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit},
                             {"detail", c.detail}});
  j["tables"] = json::object();
  for (const auto& t : tables) j["tables"][t.name] = t.columns;
  for (const auto& t : plots) j["tables"][t.name + ".dat"] = t.columns;
  return j;
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir + "/report.json") << report.to_json().dump(2) << "\n";
  for (const auto& t : report.tables) {
    std::ofstream os(dir + "/" + t.name + ".csv");
    os.precision(12);
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
      os << "\n";
    }
  }
  for (const auto& t : report.plots) {
    std::ofstream os(dir + "/" + t.name + ".dat");
    os.precision(12);
    os << "# " << t.columns.at(0) << " " << t.columns.at(1) << "\n";
    for (const auto& row : t.rows) os << row.at(0) << " " << row.at(1) << "\n";
  }
}

std::vector<double> geometric_ladder(double lo, double hi, int count) {
  if (!(lo > 0 && hi > lo) || count < 2) throw std::invalid_argument("bad ladder");
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
  return out;
}

double weak_quasi_norm(const GridFunction& F, const std::vector<double>& ladder, double r) {
  double w = 0;
  for (double lam : ladder) w = std::max(w, std::pow(lam, r) * distribution(F, lam));
  return w;
}

namespace {

Criterion criterion(std::string name, bool ok, double value, double limit, std::string detail = "") {
  return {std::move(name), ok, value, limit, std::move(detail)};
}

/// max(a/b, b/a); 1 when both vanish.
double drift(double a, double b) {
  if (a == 0 && b == 0) return 1;
  if (a == 0 || b == 0) return std::numeric_limits<double>::infinity();
  return std::max(a / b, b / a);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

double median_abs(const GridFunction& F) {
  std::vector<double> v(F.size());
  for (Eigen::Index i = 0; i < F.size(); ++i) v[i] = std::abs(F[i]);
  return median(std::move(v));
}

std::vector<int> refinement_levels(const ExperimentConfig& cfg) {
  std::vector<int> out{cfg.grid.N};
  if (cfg.refine) out.push_back(2 * cfg.grid.N);
  return out;
}

double symbol_norm(const GridFunction& A, double q, bool lorentz) {
  const GridFunction mag = gradient(A).magnitude();
  if (lorentz && q == A.spec().d) return lorentz_norm(mag, q, 1);
  return lp_norm(mag, q);
}

struct Inputs {
  std::vector<std::vector<GridFunction>> A;
  std::vector<GridFunction> f;
};

/// Random bump sums, each symbol and density normalised to unit norm.
Inputs normalised_family(const ExperimentConfig& cfg, const GridSpec& spec) {
  Inputs in;
  in.f = random_test_family(cfg.seed, cfg.family, spec, cfg.smoothness);
  std::vector<std::vector<GridFunction>> sym;
  for (int i = 0; i < cfg.n; ++i)
    sym.push_back(random_test_family(cfg.seed + 1000 * (i + 1), cfg.family, spec, cfg.smoothness));
  for (int m = 0; m < cfg.family; ++m) {
    std::vector<GridFunction> As;
    for (int i = 0; i < cfg.n; ++i) {
      const double nrm = symbol_norm(sym[i][m], cfg.q[i], cfg.lorentz_symbols);
      As.push_back(nrm > 0 ? sym[i][m].scaled(1.0 / nrm) : sym[i][m]);
    }
    in.A.push_back(std::move(As));
    const double fn = lp_norm(in.f[m], cfg.p);
    if (fn > 0) in.f[m] = in.f[m].scaled(1.0 / fn);
  }
  return in;
}

}  // namespace

ExperimentReport run_weak_type(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.r() < cfg.endpoint() - 1e-12)
    throw std::invalid_argument("r lies below d/(d+n); no weak-type bound holds there");
  const KernelSpec kernel = make_kernel(cfg);
  ExperimentReport rep;
  rep.experiment = "weak-type";
  rep.config = cfg.to_json();
  const double r = cfg.r();
  Table per{"weak_type", {"member", "N", "W", "median_abs_C", "max_abs_C"}, {}};
  Table curve{"weak_curve", {"lambda", "lambda^r m(E_lambda)"}, {}};
  std::vector<double> Wmax;
  std::vector<std::vector<double>> ladders(cfg.family);
  for (int N : refinement_levels(cfg)) {
    const GridSpec spec{cfg.d, cfg.grid.L, N};
    const GridSpec eval{cfg.d, cfg.grid.L, cfg.eval_n};
    if (N % cfg.eval_n != 0 || (N / cfg.eval_n) % 2 != 0)
      throw std::invalid_argument("eval_n must divide N with an even ratio");
    const Inputs in = normalised_family(cfg, spec);
    const auto schedule = default_eps_schedule(spec, cfg.eps_levels - 1, cfg.eps_base);
    double wmax = 0;
    for (int m = 0; m < cfg.family; ++m) {
      const GridFunction C = evaluate_field(kernel, in.A[m], in.f[m], eval, schedule, Cutoff::Smooth);
      const double med = median_abs(C);
      if (ladders[m].empty() && med > 0)
        ladders[m] = cfg.ladder_absolute ? geometric_ladder(cfg.ladder_lo, cfg.ladder_hi, cfg.ladder_levels)
                                         : geometric_ladder(cfg.ladder_lo * med, cfg.ladder_hi * med, cfg.ladder_levels);
      const double W = ladders[m].empty() ? 0.0 : weak_quasi_norm(C, ladders[m], r);
      wmax = std::max(wmax, W);
      per.rows.push_back({double(m), double(N), W, med, C.values().abs().maxCoeff()});
      if (m == 0 && N == cfg.grid.N)
        for (double lam : ladders[m]) curve.rows.push_back({lam, std::pow(lam, r) * distribution(C, lam)});
    }
    Wmax.push_back(wmax);
  }
  rep.results["W"] = Wmax;
  rep.results["r"] = r;
  const bool finite = std::all_of(Wmax.begin(), Wmax.end(), [](double w) { return std::isfinite(w); });
  rep.criteria.push_back(criterion("weak quasi-norm finite", finite, Wmax.front(), kInfinity));
  if (Wmax.size() == 2) {
    const double dr = drift(Wmax[0], Wmax[1]);
    rep.results["drift"] = dr;
    rep.criteria.push_back(criterion("refinement drift of sup W", dr <= 2.0, dr, 2.0));
  }
  rep.tables.push_back(std::move(per));
  rep.plots.push_back(std::move(curve));
  return rep;
}

ExperimentReport run_counterexample(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kernel != "power-even") throw std::invalid_argument("the cone construction uses the power-even kernel");
  if (std::abs(cfg.n * cfg.alpha + cfg.beta - cfg.d) > 1e-12)
    throw std::invalid_argument("exponents must satisfy n alpha + beta = d");
  if (cfg.d < 2) throw std::invalid_argument("the cone construction needs d >= 2");
  const KernelSpec kernel = power_even_kernel(cfg.d, cfg.n);
  const int d = cfg.d;
  const Cone cone{cfg.kappa, cfg.rho, cfg.cone_eps};
  const GridSpec spec{d, cfg.grid.L, cfg.grid.N};
  spec.validate();

  ExperimentReport rep;
  rep.experiment = "counterexample";
  rep.config = cfg.to_json();

  const Point z0{-2 * cfg.cone_eps, 0, 0};
  std::vector<double> deltas;
  for (int k = cfg.delta_min_exp; k <= cfg.delta_max_exp; ++k) deltas.push_back(cfg.rho * std::ldexp(1.0, -k));
  if (deltas.back() < 2 * spec.h()) throw std::invalid_argument("smallest delta is below lattice resolution");
  const double alpha = cfg.alpha, beta = cfg.beta;
  std::vector<PointFunction> A(cfg.n, [&](const Point& x) { return cone_power_A_value(x, alpha, cone, d); });
  const PointFunction f = [&](const Point& x) { return cone_power_f_value(x, beta, cone, d); };
  Point lo{0, 0, 0}, hi{cfg.rho, 0, 0};
  for (int a = 1; a < d; ++a) {
    lo[a] = -cfg.rho / std::sqrt(cfg.kappa);
    hi[a] = cfg.rho / std::sqrt(cfg.kappa);
  }
  const auto C = origin_truncations(kernel, A, f, spec, z0, deltas, lo, hi);

  const double scale = std::pow(norm(z0, d), d + cfg.n);
  std::vector<double> X, Y;
  Table ladder{"truncations", {"delta", "log_inv_delta", "C_delta", "scaled_neg_C"}, {}};
  Table plot{"divergence", {"log(1/delta)", "-C_delta |z0|^(d+n)"}, {}};
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    X.push_back(std::log(1 / deltas[k]));
    Y.push_back(-C[k] * scale);
    ladder.rows.push_back({deltas[k], X.back(), C[k], Y.back()});
    plot.rows.push_back({X.back(), Y.back()});
  }
  const double mx = std::accumulate(X.begin(), X.end(), 0.0) / X.size();
  const double my = std::accumulate(Y.begin(), Y.end(), 0.0) / Y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    sxy += (X[k] - mx) * (Y[k] - my);
    sxx += (X[k] - mx) * (X[k] - mx);
  }
  const double slope = sxy / sxx;

  // Directions of the inner cone, integrated on a fine sphere rule.
  const SphereRule rule = sphere_rule(d, d == 2 ? 1 << 16 : 1 << 17);
  const double kappa = cfg.kappa;
  const double sigma = sphere_integral(rule, [&](const Point& t) {
    double s = 0;
    for (int a = 1; a < d; ++a) s += t[a] * t[a];
    return t[0] > 0 && std::sqrt(kappa * s) < t[0] ? 1.0 : 0.0;
  });
  const double ratio = slope / sigma;
  bool monotone = true;
  for (std::size_t k = 1; k < Y.size(); ++k) monotone = monotone && Y[k] > Y[k - 1];

  rep.results["slope"] = slope;
  rep.results["sigma_quadrature"] = sigma;
  rep.results["sigma_closed_form"] = cone.solid_angle(d);
  rep.results["ratio"] = ratio;
  rep.results["z0"] = {z0[0], z0[1], z0[2]};
  rep.criteria.push_back(criterion("slope within 15% of cone solid angle", std::abs(ratio - 1) <= 0.15,
                                   std::abs(ratio - 1), 0.15));
  rep.criteria.push_back(criterion("truncations monotone in 1/delta", monotone, monotone ? 1 : 0, 1));

  // Norm finiteness by refinement on materialised grids.
  const double qf = std::max(1.0, 0.75 * d / (1 + alpha));
  const double pf = std::max(1.0, 0.75 * d / beta);
  const double pd = 1.5 * d / beta;
  Table norms{"input_norms", {"N", "grad_A_q_finite", "f_p_finite", "f_p_divergent"}, {}};
  std::vector<double> sa, sf, sd;
  for (int N : {256, 512, 1024}) {
    const GridSpec g{d, spec.L, N};
    const GridFunction Ag = cone_power_A(alpha, cfg.rho, cfg.cone_eps, cfg.kappa, g);
    const GridFunction fg = cone_power_f(beta, cfg.rho, cfg.kappa, g);
    sa.push_back(std::pow(lp_norm(gradient(Ag).magnitude(), qf), qf));
    sf.push_back(std::pow(lp_norm(fg, pf), pf));
    sd.push_back(std::pow(lp_norm(fg, pd), pd));
    norms.rows.push_back({double(N), sa.back(), sf.back(), sd.back()});
  }
  auto contraction = [](const std::vector<double>& s) { return (s[2] - s[1]) / (s[1] - s[0]); };
  const double ca = contraction(sa), cf = contraction(sf), cd = contraction(sd);
  rep.results["norm_exponents"] = {{"q_finite", qf}, {"p_finite", pf}, {"p_divergent", pd}};
  rep.results["increment_ratios"] = {{"grad_A", ca}, {"f_finite", cf}, {"f_divergent", cd}};
  rep.criteria.push_back(criterion("grad A in L^q below d/(1+alpha)", ca < 0.9, ca, 0.9, "increment ratio"));
  rep.criteria.push_back(criterion("f in L^p below d/beta", cf < 0.9, cf, 0.9, "increment ratio"));
  rep.criteria.push_back(criterion("f not in L^p above d/beta", cd > 1.0, cd, 1.0, "increment ratio"));
  rep.tables.push_back(std::move(ladder));
  rep.tables.push_back(std::move(norms));
  rep.plots.push_back(std::move(plot));
  return rep;
}

ExperimentReport run_rotations_check(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.d != 2) throw std::invalid_argument("the rotations check runs in d = 2");
  const GridSpec spec{cfg.d, cfg.grid.L, cfg.grid.N};
  ExperimentReport rep;
  rep.experiment = "rotations-check";
  rep.config = cfg.to_json();

  std::vector<GridFunction> A;
  for (int i = 0; i < cfg.n; ++i) A.push_back(random_test_family(cfg.seed + 1000 * (i + 1), 1, spec, cfg.smoothness)[0]);
  const GridFunction f = random_test_family(cfg.seed, 1, spec, cfg.smoothness)[0];
  const double fmax = f.values().maxCoeff();
  std::vector<Eigen::Index> cand;
  for (Eigen::Index i = 0; i < spec.size(); ++i)
    if (f[i] > 0.05 * fmax) cand.push_back(i);
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(cand.begin(), cand.end(), rng);
  cand.resize(std::min<std::size_t>(cand.size(), cfg.points));
  std::sort(cand.begin(), cand.end());
  std::vector<Point> pts;
  for (auto i : cand) pts.push_back(spec.node(i));

  const auto schedule = default_eps_schedule(spec, cfg.eps_levels - 1, cfg.eps_base);
  const KernelSpec direct_kernel = make_kernel(cfg, cfg.sphere_ladder.back());
  std::vector<double> direct;
  double dmax = 0;
  for (const auto& x : pts) {
    direct.push_back(pv_extrapolate(direct_kernel, A, f, x, schedule).value);
    dmax = std::max(dmax, std::abs(direct.back()));
  }
  Table t{"rotations", {"sphere_nodes", "point", "x0", "x1", "direct", "rotations"}, {}};
  Table plot{"rotations_deviation", {"sphere_nodes", "max relative deviation"}, {}};
  std::vector<double> dev;
  for (int M : cfg.sphere_ladder) {
    const KernelSpec k = make_kernel(cfg, M);
    double worst = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double rot = rotations_extrapolate(k, A, f, pts[i], schedule).value;
      worst = std::max(worst, std::abs(rot - direct[i]));
      t.rows.push_back({double(M), double(i), pts[i][0], pts[i][1], direct[i], rot});
    }
    dev.push_back(dmax > 0 ? worst / dmax : worst);
    plot.rows.push_back({double(M), dev.back()});
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < dev.size(); ++k) decreasing = decreasing && dev[k] < dev[k - 1];
  rep.results["deviation"] = dev;
  rep.results["max_abs_direct"] = dmax;
  rep.criteria.push_back(criterion("max relative deviation", dev.back() <= 1e-3, dev.back(), 1e-3));
  if (dev.size() > 1)
    rep.criteria.push_back(criterion("deviation decreases with sphere nodes", decreasing, decreasing ? 1 : 0, 1));
  rep.tables.push_back(std::move(t));
  rep.plots.push_back(std::move(plot));
  return rep;
}

namespace {

struct AuditLevel {
  bool skipped = false;
  std::string reason;
  double mG = 0;
  double contributing = 0;
  double law = 0;
  double lipschitz_C = 0;
  bool whitney_ok = true;
  bool inflation_ok = true;
  bool certificate_exhaustive = true;
  NodeSet G;
};

}  // namespace

ExperimentReport run_decomposition_audit(const ExperimentConfig& cfg) {
  cfg.validate();
  const int d = cfg.d;
  for (double qi : cfg.q)
    if (!(qi < d)) throw std::invalid_argument("the audit covers the regime q_i < d");
  const double r = cfg.r();
  const auto ladder = geometric_ladder(cfg.ladder_lo, cfg.ladder_hi, cfg.ladder_levels);
  ExperimentReport rep;
  rep.experiment = "audit";
  rep.config = cfg.to_json();
  Table t{"audit",
          {"N", "member", "lambda", "skipped", "m_B", "m_D", "m_F", "m_H", "m_G", "m_G_lambda_r", "lipschitz_C",
           "whitney_ok"},
          {}};
  Table plot{"measure_law", {"lambda", "max m(G) lambda^r"}, {}};

  std::vector<double> law_sup, lip_sup;
  bool monotone = true, whitney = true, inflation = true;
  int skipped = 0;
  for (int N : refinement_levels(cfg)) {
    const GridSpec spec{d, cfg.grid.L, N};
    const Inputs in = normalised_family(cfg, spec);
    double sup_law = 0, sup_lip = 0;
    std::vector<double> per_level(ladder.size(), 0.0);
    for (int m = 0; m < cfg.family; ++m) {
      std::vector<GridFunction> frak;
      std::vector<VectorField> grads;
      std::vector<std::vector<GridFunction>> base;
      for (int i = 0; i < cfg.n; ++i) {
        const GridFunction& Ai = in.A[m][i];
        frak.push_back(frak_m_s(Ai, frak_exponent(cfg.q[i], d), cfg.q[i]));
        grads.push_back(gradient(Ai));
        std::vector<GridFunction> b;
        for (int j = 0; j < d; ++j) b.push_back(layer_potential(grads.back().components[j], j));
        base.push_back(std::move(b));
      }
      NodeSet prev;
      for (std::size_t k = 0; k < ladder.size(); ++k) {
        const double lam = ladder[k];
        ExceptionalSets S;
        S.spec = spec;
        S.lambda = lam;
        S.q = cfg.q;
        S.p = cfg.p;
        S.r = r;
        S.J = S.B = S.D = S.F = S.H = NodeSet(spec);
        AuditLevel lv;
        try {
          for (int i = 0; i < cfg.n; ++i) {
            const double thr = std::pow(lam, r / cfg.q[i]);
            const GradientSplit split = apply_to_gradient_components(in.A[m][i], cfg.q[i], lam, r);
            for (int j = 0; j < d; ++j) {
              S.B |= split.exceptional[j];
              for (const auto& pc : split.bad[j]) S.bad_cubes.push_back(pc.cube);
            }
            S.D |= superlevel(frak[i], thr);
            S.F |= exceptional_F(split.densities);
            for (int j = 0; j < d; ++j) {
              const GridFunction bad = grads[i].components[j] - split.good[j];
              GridFunction Ag = base[i][j];
              if ((bad.values() != 0).any()) Ag = Ag - layer_potential(bad, j);
              S.H |= exceptional_J(Ag, thr);
            }
          }
          WhitneyCover cover;
          S = assemble_G(std::move(S), &cover);
          lv.whitney_ok = verify_whitney(cover).all_ok();
          lv.mG = S.G.measure();
          lv.contributing = S.contributing_measure();
          lv.inflation_ok = lv.mG <= std::pow(20.0, d) * lv.contributing * (1 + 1e-12);
          lv.law = lv.mG * std::pow(lam, r);
          const NodeSet good = S.G.complement();
          for (int i = 0; i < cfg.n; ++i) {
            const double L = std::pow(lam, r / cfg.q[i]);
            const auto cert = lipschitz_certificate(in.A[m][i], good, L);
            lv.lipschitz_C = std::max(lv.lipschitz_C, cert.ratio / L);
            lv.certificate_exhaustive = lv.certificate_exhaustive && cert.exhaustive;
          }
        } catch (const std::invalid_argument& e) {
          lv.skipped = true;
          lv.reason = e.what();
        }
        t.rows.push_back({double(N), double(m), lam, lv.skipped ? 1.0 : 0.0, S.B.measure(), S.D.measure(),
                          S.F.measure(), S.H.measure(), lv.mG, lv.law, lv.lipschitz_C, lv.whitney_ok ? 1.0 : 0.0});
        if (lv.skipped) {
          ++skipped;
          continue;
        }
        if (prev.defined()) monotone = monotone && S.G.subset_of(prev);
        prev = S.G;
        whitney = whitney && lv.whitney_ok;
        inflation = inflation && lv.inflation_ok;
        sup_law = std::max(sup_law, lv.law);
        sup_lip = std::max(sup_lip, lv.lipschitz_C);
        per_level[k] = std::max(per_level[k], lv.law);
      }
    }
    if (N == cfg.grid.N)
      for (std::size_t k = 0; k < ladder.size(); ++k) plot.rows.push_back({ladder[k], per_level[k]});
    law_sup.push_back(sup_law);
    lip_sup.push_back(sup_lip);
  }
  rep.results["sup_measure_law"] = law_sup;
  rep.results["sup_lipschitz_C"] = lip_sup;
  rep.results["skipped_levels"] = skipped;
  rep.results["r"] = r;
  rep.criteria.push_back(criterion("m(G) lambda^r bounded", std::isfinite(law_sup.front()) && law_sup.front() > 0,
                                   law_sup.front(), kInfinity));
  rep.criteria.push_back(criterion("G shrinks as lambda grows", monotone, monotone ? 1 : 0, 1));
  rep.criteria.push_back(criterion("m(G) <= 20^d sum of contributing sets", inflation, inflation ? 1 : 0, 1));
  rep.criteria.push_back(criterion("Whitney cover of G verified", whitney, whitney ? 1 : 0, 1));
  if (law_sup.size() == 2) {
    const double a = drift(law_sup[0], law_sup[1]);
    const double b = drift(lip_sup[0], lip_sup[1]);
    rep.results["measure_law_drift"] = a;
    rep.results["lipschitz_drift"] = b;
    rep.criteria.push_back(criterion("refinement drift of m(G) lambda^r", a <= 2, a, 2));
    rep.criteria.push_back(criterion("refinement drift of Lipschitz constant", b <= 2, b, 2));
  }
  rep.tables.push_back(std::move(t));
  rep.plots.push_back(std::move(plot));
  return rep;
}

ExperimentReport run_frak_domination(const ExperimentConfig& cfg) {
  if (cfg.d < 2) throw std::invalid_argument("needs d >= 2");
  const int d = cfg.d;
  ExperimentReport rep;
  rep.experiment = "frak";
  rep.config = cfg.to_json();
  Table t{"frak_domination", {"q", "s", "N", "member", "ratio"}, {}};
  for (double q : cfg.q) {
    const double s = frak_exponent(q, d);
    std::vector<double> C;
    for (int N : refinement_levels(cfg)) {
      const GridSpec spec{d, cfg.grid.L, N};
      const auto fam = random_test_family(cfg.seed, cfg.family, spec, cfg.smoothness);
      double worst = 0;
      for (int m = 0; m < cfg.family; ++m) {
        const GridFunction F = frak_m_s(fam[m], s, q);
        const GridFunction Mq = hl_maximal_p(gradient(fam[m]).magnitude(), q);
        const double floor = 1e-12 * Mq.values().maxCoeff();
        double ratio = 0;
        for (Eigen::Index i = 0; i < spec.size(); ++i)
          if (Mq[i] > floor) ratio = std::max(ratio, F[i] / Mq[i]);
        worst = std::max(worst, ratio);
        t.rows.push_back({q, s, double(N), double(m), ratio});
      }
      C.push_back(worst);
    }
    const std::string tag = "q=" + std::to_string(q).substr(0, 4);
    rep.results[tag] = C;
    rep.criteria.push_back(criterion("domination constant finite (" + tag + ")", std::isfinite(C[0]), C[0], kInfinity));
    if (C.size() == 2) {
      const double dr = std::abs(C[1] / C[0] - 1);
      rep.criteria.push_back(criterion("constant drift under refinement (" + tag + ")", dr <= 0.25, dr, 0.25));
    }
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

ExperimentReport run_weiss_endpoint(const ExperimentConfig& cfg) {
  const int d = cfg.d;
  ExperimentReport rep;
  rep.experiment = "weiss";
  rep.config = cfg.to_json();
  Table t{"weiss_endpoint", {"N", "member", "lorentz_norm", "C"}, {}};
  Table plot{"weiss_curve", {"lambda", "lambda^d m / norm^d"}, {}};
  std::vector<double> C;
  std::vector<std::vector<double>> ladders(cfg.family);
  for (int N : refinement_levels(cfg)) {
    const GridSpec spec{d, cfg.grid.L, N};
    const auto fam = random_indicator_family(cfg.seed, cfg.family, spec, cfg.smoothness);
    double worst = 0;
    for (int m = 0; m < cfg.family; ++m) {
      const GridFunction A = kernel_potential(fam[m]);
      const double nu = lorentz_norm(gradient(A).magnitude(), d, 1);
      const GridFunction M = mary_weiss(A);
      if (ladders[m].empty())
        ladders[m] = cfg.ladder_absolute ? geometric_ladder(cfg.ladder_lo, cfg.ladder_hi, cfg.ladder_levels)
                                         : geometric_ladder(cfg.ladder_lo * median_abs(M), cfg.ladder_hi * median_abs(M),
                                                            cfg.ladder_levels);
      double c = 0;
      for (double lam : ladders[m]) {
        const double v = std::pow(lam, d) * distribution(M, lam) / std::pow(nu, d);
        c = std::max(c, v);
        if (m == 0 && N == cfg.grid.N) plot.rows.push_back({lam, v});
      }
      worst = std::max(worst, c);
      t.rows.push_back({double(N), double(m), nu, c});
    }
    C.push_back(worst);
  }
  rep.results["C"] = C;
  rep.criteria.push_back(criterion("endpoint constant finite", std::isfinite(C[0]), C[0], kInfinity));
  if (C.size() == 2) {
    const double dr = drift(C[0], C[1]);
    rep.results["drift"] = dr;
    rep.criteria.push_back(criterion("refinement drift of constant", dr <= 2, dr, 2));
  }
  rep.tables.push_back(std::move(t));
  rep.plots.push_back(std::move(plot));
  return rep;
}

}  // namespace calderon
