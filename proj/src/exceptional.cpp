#include "calderon/exceptional.hpp"

#include "calderon/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace calderon {

double ExceptionalSets::contributing_measure() const {
  double m = 0;
  for (const NodeSet* s : {&J, &B, &D, &F, &H})
    if (s->defined()) m += s->measure();
  return m;
}

double ExceptionalSets::inflation() const {
  const double c = contributing_measure();
  return c > 0 ? G.measure() / c : 0.0;
}

namespace {

std::string violation_message(double ratio, double bound) {
  std::ostringstream os;
  os << "restriction is not Lipschitz with the given bound: ratio " << ratio << " > " << bound;
  return os.str();
}

}  // namespace

LipschitzViolation::LipschitzViolation(const Point& x_, const Point& y_, double ratio_, double bound)
    : std::runtime_error(violation_message(ratio_, bound)), x(x_), y(y_), ratio(ratio_) {}

NodeSet superlevel(const GridFunction& f, double threshold) {
  return NodeSet::from_predicate(f.spec(), [&](Eigen::Index i) { return f[i] > threshold; });
}

NodeSet exceptional_J(const GridFunction& A, double threshold) { return superlevel(mary_weiss(A), threshold); }

NodeSet exceptional_D(const GridFunction& A, double q, double threshold) {
  const double s = frak_exponent(q, A.spec().d);
  return superlevel(frak_m_s(A, s, q), threshold);
}

double delta_value(const std::vector<DyadicCube>& cubes, const GridSpec& spec, const Point& x) {
  const int d = spec.d;
  double acc = 0;
  for (const auto& Q : cubes) {
    const double l = Q.side(spec);
    const Point c = Q.center(spec);
    Point z{0, 0, 0};
    for (int a = 0; a < d; ++a) z[a] = x[a] - c[a];
    acc += l * Q.measure(spec) / std::pow(l + norm(z, d), d + 1);
  }
  return acc;
}

GridFunction delta_field(const std::vector<DyadicCube>& cubes, const GridSpec& spec) {
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(spec.size());
  if (!cubes.empty())
    for (Eigen::Index i = 0; i < spec.size(); ++i) v[i] = delta_value(cubes, spec, spec.node(i));
  return {spec, std::move(v)};
}

NodeSet exceptional_F(const std::vector<CZResult>& cz) {
  if (cz.empty()) throw std::invalid_argument("no decompositions given");
  const GridSpec& spec = cz.front().good.spec();
  NodeSet out(spec);
  for (const auto& c : cz) {
    std::vector<DyadicCube> cubes;
    for (const auto& p : c.bad_pieces) cubes.push_back(p.cube);
    out |= superlevel(delta_field(cubes, spec), 1.0);
  }
  return out;
}

GridFunction good_potential(const GridFunction& g, int axis) { return layer_potential(g, axis); }

NodeSet exceptional_H(const std::vector<GridFunction>& g, double threshold) {
  if (g.empty()) throw std::invalid_argument("no good parts given");
  NodeSet out(g.front().spec());
  for (std::size_t j = 0; j < g.size(); ++j) {
    if ((g[j].values() == 0).all()) continue;
    out |= exceptional_J(good_potential(g[j], static_cast<int>(j)), threshold);
  }
  return out;
}

ExceptionalSets assemble_G(ExceptionalSets sets, WhitneyCover* cover) {
  const GridSpec& spec = sets.spec;
  const int d = spec.d;
  NodeSet cells(spec);
  for (NodeSet* s : {&sets.J, &sets.D, &sets.F, &sets.H})
    if (s->defined()) cells |= *s;
  NodeSet G = cells.dilate(5);
  for (const auto& Q : sets.bad_cubes) {
    const int s = Q.side_cells(spec);
    const Index first = Q.first_cell(spec);
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
      const double c = first[a] + 0.5 * s;
      lo[a] = std::max(0, static_cast<int>(std::floor(c - 5.0 * s)));
      hi[a] = std::min(spec.N - 1, static_cast<int>(std::ceil(c + 5.0 * s)) - 1);
    }
    Index k{0, 0, 0};
    for (k[0] = lo[0]; k[0] <= hi[0]; ++k[0])
      for (k[1] = lo[1]; k[1] <= hi[1]; ++k[1])
        for (k[2] = lo[2]; k[2] <= hi[2]; ++k[2]) G.set(spec.ravel(k));
  }
  if (G.full()) throw std::invalid_argument("lambda too small for this domain: G covers every node");
  sets.G = std::move(G);
  if (cover) *cover = whitney_decompose(sets.G);
  return sets;
}

namespace {

struct Members {
  std::vector<Eigen::Index> idx;
  std::vector<Point> pts;
  std::vector<double> val;
};

Members members(const GridFunction& A, const NodeSet& F) {
  const GridSpec& spec = A.spec();
  Members m;
  for (Eigen::Index i = 0; i < spec.size(); ++i)
    if (F[i]) {
      m.idx.push_back(i);
      m.pts.push_back(spec.node(i));
      m.val.push_back(A[i]);
    }
  return m;
}

double dist(const Point& a, const Point& b, int d) {
  double s = 0;
  for (int k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

void exhaustive_pairs(const Members& m, int d, LipschitzCertificate& cert) {
  const std::size_t n = m.idx.size();
  std::size_t bi = 0, bj = 0;
  double worst = -1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = std::abs(m.val[i] - m.val[j]) / dist(m.pts[i], m.pts[j], d);
      if (r > worst) {
        worst = r;
        bi = i;
        bj = j;
      }
    }
  cert.sample_count = static_cast<std::int64_t>(n * (n - 1) / 2);
  if (worst >= 0) {
    cert.ratio = worst;
    cert.x = m.pts[bi];
    cert.y = m.pts[bj];
  }
}

}  // namespace

GridFunction lipschitz_extend(const GridFunction& A, const NodeSet& F, double L) {
  const GridSpec& spec = A.spec();
  if (!(F.spec() == spec)) throw std::invalid_argument("set and function live on different grids");
  if (!(L >= 0)) throw std::invalid_argument("Lipschitz bound must be nonnegative");
  if (F.empty()) throw std::invalid_argument("cannot extend from an empty set");
  const Members m = members(A, F);
  LipschitzCertificate cert;
  exhaustive_pairs(m, spec.d, cert);
  if (cert.ratio > L * (1 + 1e-12)) throw LipschitzViolation(cert.x, cert.y, cert.ratio, L);
  Eigen::ArrayXd out(spec.size());
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    if (F[i]) {
      out[i] = A[i];
      continue;
    }
    const Point x = spec.node(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m.idx.size(); ++k) best = std::min(best, m.val[k] + L * dist(x, m.pts[k], spec.d));
    out[i] = best;
  }
  return {spec, std::move(out)};
}

LipschitzCertificate lipschitz_certificate(const GridFunction& A, const NodeSet& F, double L, std::int64_t cutoff,
                                           std::uint64_t seed) {
  const GridSpec& spec = A.spec();
  const int d = spec.d;
  LipschitzCertificate cert;
  cert.bound = L;
  cert.cutoff = cutoff;
  const Members m = members(A, F);
  const auto n = static_cast<std::int64_t>(m.idx.size());
  if (n <= cutoff) {
    cert.exhaustive = true;
    exhaustive_pairs(m, d, cert);
    return cert;
  }
  // Every pair within 3 cells, then uniform random pairs.
  cert.exhaustive = false;
  auto consider = [&](std::size_t i, std::size_t j) {
    ++cert.sample_count;
    const double r = std::abs(m.val[i] - m.val[j]) / dist(m.pts[i], m.pts[j], d);
    if (r > cert.ratio) {
      cert.ratio = r;
      cert.x = m.pts[i];
      cert.y = m.pts[j];
    }
  };
  std::vector<std::int64_t> pos(static_cast<std::size_t>(spec.size()), -1);
  for (std::size_t k = 0; k < m.idx.size(); ++k) pos[m.idx[k]] = static_cast<std::int64_t>(k);
  const int R = 3;
  for (std::size_t k = 0; k < m.idx.size(); ++k) {
    const Index c = spec.unravel(m.idx[k]);
    Index o{0, 0, 0};
    for (o[0] = -R; o[0] <= R; ++o[0])
      for (o[1] = d > 1 ? -R : 0; o[1] <= (d > 1 ? R : 0); ++o[1])
        for (o[2] = d > 2 ? -R : 0; o[2] <= (d > 2 ? R : 0); ++o[2]) {
          Index t{0, 0, 0};
          bool ok = true;
          for (int a = 0; a < d; ++a) {
            t[a] = c[a] + o[a];
            if (t[a] < 0 || t[a] >= spec.N) ok = false;
          }
          if (!ok) continue;
          const auto j = pos[spec.ravel(t)];
          if (j > static_cast<std::int64_t>(k)) consider(k, static_cast<std::size_t>(j));
        }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, m.idx.size() - 1);
  const std::int64_t extra = 16 * n;
  for (std::int64_t s = 0; s < extra; ++s) {
    const std::size_t i = pick(rng), j = pick(rng);
    if (i != j) consider(i, j);
  }
  return cert;
}

double symbol_product(const std::vector<GridFunction>& A, Eigen::Index x, Eigen::Index y) {
  if (x == y) throw std::invalid_argument("x and y must differ");
  const GridSpec& spec = A.front().spec();
  const double r = dist(spec.node(x), spec.node(y), spec.d);
  double prod = 1;
  for (const auto& a : A) prod *= (a[x] - a[y]) / r;
  return prod;
}

double symbol_decomposition(const std::vector<GridFunction>& A, const std::vector<GridFunction>& A_tilde,
                            Eigen::Index yk, Eigen::Index x, Eigen::Index y, const std::vector<int>& part) {
  if (x == y) throw std::invalid_argument("x and y must differ");
  if (A.size() != A_tilde.size() || A.size() != part.size()) throw std::invalid_argument("size mismatch");
  const GridSpec& spec = A.front().spec();
  const double r = dist(spec.node(x), spec.node(y), spec.d);
  double prod = 1;
  for (std::size_t i = 0; i < A.size(); ++i) {
    switch (part[i]) {
      case 1:
        prod *= (A_tilde[i][x] - A_tilde[i][y]) / r;
        break;
      case 2:
        prod *= (A_tilde[i][y] - A_tilde[i][yk]) / r;
        break;
      case 3:
        prod *= (A[i][yk] - A[i][y]) / r;
        break;
      default:
        throw std::invalid_argument("partition labels must be 1, 2 or 3");
    }
  }
  return prod;
}

void write_bitmap(std::ostream& os, const NodeSet& s) {
  const GridSpec& spec = s.spec();
  os << spec.d << "," << spec.L << "," << spec.N << "\n";
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    os << (s[i] ? '1' : '0');
    if ((i + 1) % spec.N == 0) os << '\n';
  }
}

nlohmann::json exceptional_summary(const ExceptionalSets& sets) {
  nlohmann::json j;
  j["lambda"] = sets.lambda;
  j["q"] = sets.q;
  j["p"] = sets.p;
  j["r"] = sets.r;
  j["grid"] = {{"d", sets.spec.d}, {"L", sets.spec.L}, {"N", sets.spec.N}};
  auto m = [](const NodeSet& s) { return s.defined() ? s.measure() : 0.0; };
  j["measures"] = {{"J", m(sets.J)}, {"B", m(sets.B)}, {"D", m(sets.D)},
                   {"F", m(sets.F)}, {"H", m(sets.H)}, {"G", m(sets.G)}};
  j["bad_cubes"] = sets.bad_cubes.size();
  j["inflation"] = sets.inflation();
  return j;
}

void save_exceptional(const std::string& dir, const ExceptionalSets& sets) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const NodeSet*> named[] = {{"J", &sets.J}, {"B", &sets.B}, {"D", &sets.D},
                                                           {"F", &sets.F}, {"H", &sets.H}, {"G", &sets.G}};
  for (const auto& [name, s] : named) {
    if (!s->defined()) continue;
    std::ofstream os(dir + "/" + name + ".bitmap");
    write_bitmap(os, *s);
  }
  std::ofstream js(dir + "/exceptional.json");
  js << exceptional_summary(sets).dump(2) << "\n";
}

}  // namespace calderon
