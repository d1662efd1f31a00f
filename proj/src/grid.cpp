#include "calderon/grid.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace calderon {

double GridSpec::cell_volume() const { return std::pow(h(), d); }

Eigen::Index GridSpec::size() const {
  Eigen::Index n = 1;
  for (int i = 0; i < d; ++i) n *= N;
  return n;
}

Index GridSpec::unravel(Eigen::Index lin) const {
  Index k{0, 0, 0};
  for (int i = d - 1; i >= 0; --i) {
    k[i] = static_cast<int>(lin % N);
    lin /= N;
  }
  return k;
}

Eigen::Index GridSpec::ravel(const Index& k) const {
  Eigen::Index lin = 0;
  for (int i = 0; i < d; ++i) lin = lin * N + k[i];
  return lin;
}

Point GridSpec::node(Eigen::Index lin) const {
  const Index k = unravel(lin);
  Point x{0, 0, 0};
  for (int i = 0; i < d; ++i) x[i] = coord(k[i]);
  return x;
}

bool GridSpec::contains(const Point& x) const {
  for (int i = 0; i < d; ++i)
    if (!(x[i] >= -L && x[i] <= L)) return false;
  return true;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void GridSpec::validate() const {
  if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (!(L > 0)) throw std::invalid_argument("half extent must be positive");
  if (N < 8 || !is_power_of_two(N)) throw std::invalid_argument("N must be a power of two >= 8");
}

double norm(const Point& x, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

GridFunction::GridFunction(const GridSpec& spec, Eigen::ArrayXd values)
    : spec_(spec), values_(std::move(values)) {
  spec_.validate();
  if (values_.size() != spec_.size()) throw std::invalid_argument("value count does not match grid");
  if (!values_.allFinite()) {
    for (Eigen::Index i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i]))
        throw std::domain_error("non-finite value at node " + std::to_string(i));
  }
}

GridFunction GridFunction::scaled(double c) const { return {spec_, values_ * c}; }
GridFunction GridFunction::abs() const { return {spec_, values_.abs()}; }

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  if (!(a.spec() == b.spec())) throw std::invalid_argument("grid mismatch");
  return {a.spec(), a.values() + b.values()};
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  if (!(a.spec() == b.spec())) throw std::invalid_argument("grid mismatch");
  return {a.spec(), a.values() - b.values()};
}

GridFunction VectorField::magnitude() const {
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(spec.size());
  for (const auto& c : components) s += c.values().square();
  return {spec, s.sqrt()};
}

GridFunction sample(const PointFunction& expr, const GridSpec& spec) {
  spec.validate();
  Eigen::ArrayXd v(spec.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const Point x = spec.node(i);
    v[i] = expr(x);
    if (!std::isfinite(v[i])) {
      std::ostringstream msg;
      msg << "non-finite sample at node " << i << " (";
      for (int a = 0; a < spec.d; ++a) msg << (a ? ", " : "") << x[a];
      msg << ")";
      throw std::domain_error(msg.str());
    }
  }
  return {spec, std::move(v)};
}

GridFunction zeros(const GridSpec& spec) { return {spec, Eigen::ArrayXd::Zero(spec.size())}; }

VectorField gradient(const GridFunction& A) {
  const GridSpec& s = A.spec();
  const double h = s.h();
  VectorField out{s, {}};
  for (int axis = 0; axis < s.d; ++axis) {
    Eigen::ArrayXd g(s.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      Index k = s.unravel(i);
      const int c = k[axis];
      auto val = [&](int j) {
        k[axis] = j;
        return A.at(k);
      };
      if (c == 0)
        g[i] = (-3 * val(0) + 4 * val(1) - val(2)) / (2 * h);
      else if (c == s.N - 1)
        g[i] = (3 * val(c) - 4 * val(c - 1) + val(c - 2)) / (2 * h);
      else
        g[i] = (val(c + 1) - val(c - 1)) / (2 * h);
    }
    out.components.emplace_back(s, std::move(g));
  }
  return out;
}

double lp_norm(const GridFunction& f, double p) {
  if (!(p >= 1)) throw std::invalid_argument("lp_norm needs p >= 1");
  if (std::isinf(p)) return f.values().abs().maxCoeff();
  const double s = f.values().abs().pow(p).sum() * f.spec().cell_volume();
  return std::pow(s, 1.0 / p);
}

double smoothstep(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double bump_value(const Point& x, const Point& center, double radius, int d) {
  double r2 = 0;
  for (int i = 0; i < d; ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
  const double u = r2 / (radius * radius);
  if (u >= 1) return 0;
  return std::exp(1.0 - 1.0 / (1.0 - u));
}

GridFunction bump(const Point& center, double radius, const GridSpec& spec) {
  for (int i = 0; i < spec.d; ++i)
    if (std::abs(center[i]) + radius > spec.L) throw std::invalid_argument("bump leaves the domain");
  return sample([&](const Point& x) { return bump_value(x, center, radius, spec.d); }, spec);
}

namespace {

double transverse(const Point& x, int d, double kappa) {
  double s = 0;
  for (int j = 1; j < d; ++j) s += x[j] * x[j];
  return std::sqrt(kappa * s);
}

}  // namespace

bool Cone::inner(const Point& x, int d) const {
  if (!(x[0] > 0 && x[0] < rho)) return false;
  const double a = transverse(x, d, kappa);
  return a < x[0];
}

bool Cone::outer(const Point& x, int d) const {
  if (!(x[0] > -eps && x[0] < rho + eps)) return false;
  const double a = transverse(x, d, kappa);
  return a < x[0] + eps;
}

double Cone::ramp(const Point& x, int d) const {
  if (!outer(x, d)) return 0;
  if (inner(x, d)) return 1;
  const double a = transverse(x, d, kappa);
  const double t1 = (x[0] + eps - a) / eps;
  const double t2 = (x[0] + eps) / eps;
  const double t3 = (rho + eps - x[0]) / eps;
  return smoothstep(t1) * smoothstep(t2) * smoothstep(t3);
}

double Cone::half_angle() const { return std::atan(1.0 / std::sqrt(kappa)); }

double Cone::solid_angle(int d) const {
  const double phi = half_angle();
  if (d == 1) return 1.0;
  if (d == 2) return 2 * phi;
  return 2 * std::numbers::pi * (1 - std::cos(phi));
}

double cone_power_A_value(const Point& x, double alpha, const Cone& cone, int d) {
  const double w = cone.ramp(x, d);
  if (w == 0) return 0;
  return w * std::pow(norm(x, d), -alpha);
}

double cone_power_f_value(const Point& x, double beta, const Cone& cone, int d) {
  if (!cone.inner(x, d)) return 0;
  return std::pow(norm(x, d), -beta);
}

GridFunction cone_power_A(double alpha, double rho, double eps, double kappa, const GridSpec& spec) {
  if (!(kappa > 0 && rho > 0 && eps > 0)) throw std::invalid_argument("cone parameters must be positive");
  if (!(alpha >= -1 && alpha < 1)) throw std::invalid_argument("alpha must lie in [-1, 1)");
  const Cone cone{kappa, rho, eps};
  return sample([&](const Point& x) { return cone_power_A_value(x, alpha, cone, spec.d); }, spec);
}

GridFunction cone_power_f(double beta, double rho, double kappa, const GridSpec& spec) {
  if (!(kappa > 0 && rho > 0)) throw std::invalid_argument("cone parameters must be positive");
  if (!(beta >= 0)) throw std::invalid_argument("beta must be nonnegative");
  const Cone cone{kappa, rho, 1.0};
  return sample([&](const Point& x) { return cone_power_f_value(x, beta, cone, spec.d); }, spec);
}

namespace {

struct Ball {
  Point c;
  double r;
  double amp;
};

std::vector<Ball> random_balls(std::mt19937_64& rng, const GridSpec& spec, double rmin, double rmax) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Ball> balls(count(rng));
  for (auto& b : balls) {
    b.r = rmin + (rmax - rmin) * unit(rng);
    const double reach = spec.L - b.r;
    b.c = {0, 0, 0};
    for (int i = 0; i < spec.d; ++i) b.c[i] = reach * (2 * unit(rng) - 1) * 0.7;
    b.amp = 0.5 + unit(rng);
  }
  return balls;
}

}  // namespace

std::vector<GridFunction> random_test_family(std::uint64_t seed, int count, const GridSpec& spec,
                                             double smoothness) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::vector<GridFunction> out;
  const double rmin = smoothness * spec.L;
  for (int m = 0; m < count; ++m) {
    const auto balls = random_balls(rng, spec, rmin, 2 * rmin);
    out.push_back(sample(
        [&](const Point& x) {
          double s = 0;
          for (const auto& b : balls) s += b.amp * bump_value(x, b.c, b.r, spec.d);
          return s;
        },
        spec));
  }
  return out;
}

std::vector<GridFunction> random_indicator_family(std::uint64_t seed, int count, const GridSpec& spec,
                                                  double radius_fraction) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::vector<GridFunction> out;
  const double rmin = radius_fraction * spec.L;
  for (int m = 0; m < count; ++m) {
    const auto balls = random_balls(rng, spec, rmin, 2 * rmin);
    out.push_back(sample(
        [&](const Point& x) {
          for (const auto& b : balls) {
            double r2 = 0;
            for (int i = 0; i < spec.d; ++i) r2 += (x[i] - b.c[i]) * (x[i] - b.c[i]);
            if (r2 < b.r * b.r) return 1.0;
          }
          return 0.0;
        },
        spec));
  }
  return out;
}

Stencil Stencil::at(const GridSpec& spec, const Point& x) {
  Stencil st;
  st.d = spec.d;
  st.N = spec.N;
  const double h = spec.h();
  for (int i = 0; i < spec.d; ++i) {
    const double u = (x[i] + spec.L) / h - 0.5;
    double fl = std::floor(u);
    double t = u - fl;
    if (t < 1e-12) {
      t = 0;
    } else if (t > 1 - 1e-12) {
      fl += 1;
      t = 0;
    }
    st.base[i] = static_cast<int>(fl) - 1;
    st.w[i][0] = -t * (t - 1) * (t - 2) / 6;
    st.w[i][1] = (t + 1) * (t - 1) * (t - 2) / 2;
    st.w[i][2] = -(t + 1) * t * (t - 2) / 2;
    st.w[i][3] = (t + 1) * t * (t - 1) / 6;
  }
  return st;
}

double Stencil::apply(const GridFunction& f) const {
  // Difference form about the first stencil value, so constants are reproduced exactly.
  const double* v = f.values().data();
  const int n1 = d > 1 ? 4 : 1;
  const int n2 = d > 2 ? 4 : 1;
  const Eigen::Index s1 = d > 1 ? N : 1;
  const Eigen::Index s2 = d > 2 ? N : 1;
  bool have_ref = false;
  double ref = 0;
  double acc = 0;
  for (int a = 0; a < 4; ++a) {
    if (w[0][a] == 0) continue;
    const int k0 = base[0] + a;
    for (int b = 0; b < n1; ++b) {
      const double w1 = d > 1 ? w[1][b] : 1.0;
      if (w1 == 0) continue;
      const int k1 = d > 1 ? base[1] + b : 0;
      for (int c = 0; c < n2; ++c) {
        const double w2 = d > 2 ? w[2][c] : 1.0;
        if (w2 == 0) continue;
        const int k2 = d > 2 ? base[2] + c : 0;
        const bool inside = k0 >= 0 && k0 < N && k1 >= 0 && k1 < N && k2 >= 0 && k2 < N;
        const double val = inside ? v[(k0 * s1 + k1) * s2 + k2] : 0.0;
        if (!have_ref) {
          ref = val;
          have_ref = true;
        }
        acc += w[0][a] * w1 * w2 * (val - ref);
      }
    }
  }
  return ref + acc;
}

double interpolate(const GridFunction& f, const Point& x) { return Stencil::at(f.spec(), x).apply(f); }

void write_grid(std::ostream& os, const GridFunction& f) {
  const GridSpec& s = f.spec();
  os.precision(17);
  os << s.d << "," << s.L << "," << s.N << "\n";
  for (Eigen::Index i = 0; i < f.size(); ++i) os << f[i] << "\n";
}

GridFunction read_grid(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("missing grid header");
  GridSpec s;
  char c1 = 0, c2 = 0;
  std::istringstream hs(line);
  if (!(hs >> s.d >> c1 >> s.L >> c2 >> s.N) || c1 != ',' || c2 != ',')
    throw std::runtime_error("bad grid header: " + line);
  s.validate();
  Eigen::ArrayXd v(s.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!(is >> v[i])) throw std::runtime_error("truncated grid data");
  return {s, std::move(v)};
}

void save_grid(const std::string& path, const GridFunction& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_grid(os, f);
}

}  // namespace calderon
