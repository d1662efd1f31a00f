#include "calderon/commutator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace calderon {

double KernelSpec::operator()(const Point& z) const {
  const double r = norm(z, d);
  Point t{0, 0, 0};
  for (int a = 0; a < d; ++a) t[a] = z[a] / r;
  return omega(t) / std::pow(r, d);
}

std::string KernelSpec::name() const {
  switch (variant) {
    case KernelVariant::PowerEven:
      return "power-even";
    case KernelVariant::HomogeneousSmooth:
      return "smooth";
    case KernelVariant::Rough:
      return "rough";
  }
  return "unknown";
}

namespace {

int default_nodes(int d) { return d == 1 ? 2 : d == 2 ? 256 : 1024; }

double legendre(int n, double x) {
  double p0 = 1, p1 = x;
  if (n == 0) return p0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

void check_parity(const KernelSpec& k) {
  if (parity_defect(k) > 1e-12 * std::max(1.0, k.size_bound))
    throw std::invalid_argument("Omega violates the parity Omega(-t) = (-1)^(n+1) Omega(t)");
}

}  // namespace

KernelSpec power_even_kernel(int d, int n) {
  if (n < 1) throw std::invalid_argument("order must be at least 1");
  if (n % 2 == 0) throw std::invalid_argument("the even power kernel needs odd n");
  KernelSpec k;
  k.variant = KernelVariant::PowerEven;
  k.d = d;
  k.n = n;
  k.omega = [](const Point&) { return 1.0; };
  k.sphere = sphere_rule(d, default_nodes(d));
  k.size_bound = 1;
  return k;
}

KernelSpec homogeneous_smooth_kernel(int d, int n, int sphere_nodes) {
  if (n < 1) throw std::invalid_argument("order must be at least 1");
  KernelSpec k;
  k.variant = KernelVariant::HomogeneousSmooth;
  k.d = d;
  k.n = n;
  if (d == 1) {
    k.omega = [n](const Point& t) { return n % 2 ? 1.0 : t[0]; };
  } else if (d == 2) {
    k.omega = [n](const Point& t) { return std::cos((n + 1) * std::atan2(t[1], t[0])); };
  } else {
    k.omega = [n](const Point& t) { return legendre(n + 1, t[2]); };
  }
  k.sphere = sphere_rule(d, d == 1 ? 2 : sphere_nodes);
  k.size_bound = 1;
  return k;
}

KernelSpec rough_kernel(int d, int n, SphericalFunction omega, int sphere_nodes) {
  if (n < 1) throw std::invalid_argument("order must be at least 1");
  KernelSpec k;
  k.variant = KernelVariant::Rough;
  k.d = d;
  k.n = n;
  k.omega = std::move(omega);
  k.sphere = sphere_rule(d, sphere_nodes);
  double mx = 0;
  for (const auto& t : k.sphere.nodes) mx = std::max(mx, std::abs(k.omega(t)));
  k.size_bound = mx;
  check_parity(k);
  return k;
}

double parity_defect(const KernelSpec& k) {
  const double sign = (k.n + 1) % 2 == 0 ? 1.0 : -1.0;
  double worst = 0;
  for (std::size_t i = 0; i < k.sphere.size(); ++i) {
    const double a = k.omega(k.sphere.nodes[i]);
    const double b = k.omega(k.sphere.nodes[k.sphere.antipode(i)]);
    worst = std::max(worst, std::abs(b - sign * a));
  }
  return worst;
}

double moment_residual(const KernelSpec& k) {
  const int d = k.d;
  double scale = 0;
  for (std::size_t i = 0; i < k.sphere.size(); ++i)
    scale += k.sphere.weights[i] * std::abs(k.omega(k.sphere.nodes[i]));
  if (scale == 0) return 0;
  double worst = 0;
  // Every multi-index a with |a| = n.
  const int n = k.n;
  for (int a0 = 0; a0 <= n; ++a0)
    for (int a1 = 0; a1 <= (d > 1 ? n - a0 : 0); ++a1) {
      const int a2 = n - a0 - a1;
      if (d == 1 && a0 != n) continue;
      if (d == 2 && a2 != 0) continue;
      double acc = 0;
      for (std::size_t i = 0; i < k.sphere.size(); ++i) {
        const Point& t = k.sphere.nodes[i];
        acc += k.sphere.weights[i] * k.omega(t) * std::pow(t[0], a0) * std::pow(t[1], a1) * std::pow(t[2], a2);
      }
      worst = std::max(worst, std::abs(acc) / scale);
    }
  return worst;
}

double sampled_size(const KernelSpec& k) {
  double mx = 0;
  for (const auto& t : k.sphere.nodes) mx = std::max(mx, std::abs(k(t)));
  return mx;
}

double cutoff_weight(Cutoff c, double r, double eps) {
  if (c == Cutoff::Sharp) return r > eps ? 1.0 : 0.0;
  const double s = r / eps;
  if (s >= 1) return 1;
  if (s <= 0.5) return 0;
  return smoothstep(2 * s - 1);
}

std::vector<double> default_eps_schedule(const GridSpec& spec, int K, double base) {
  std::vector<double> out;
  for (int k = K; k >= 0; --k) out.push_back(base * spec.h() * std::pow(2.0, k));
  return out;
}

namespace {

void validate_inputs(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                     const Point& x, const std::vector<double>& eps) {
  const GridSpec& spec = f.spec();
  if (static_cast<int>(A.size()) != kernel.n) throw std::invalid_argument("need exactly n symbols A_i");
  if (kernel.d != spec.d) throw std::invalid_argument("kernel dimension does not match the grid");
  for (const auto& a : A)
    if (!(a.spec() == spec)) throw std::invalid_argument("all inputs must share one grid");
  if (!spec.contains(x)) throw std::invalid_argument("evaluation point outside the domain");
  for (double e : eps)
    if (!(e >= 2 * spec.h() * (1 - 1e-12))) throw std::invalid_argument("eps below 2h is not resolved by the lattice");
}

/// Node or half-node in every coordinate, so x - y runs over a symmetric offset set.
bool symmetry_point(const GridSpec& spec, const Point& x) {
  for (int a = 0; a < spec.d; ++a) {
    const double u = 2 * (x[a] + spec.L) / spec.h();
    if (std::abs(u - std::round(u)) > 1e-9) return false;
  }
  return true;
}

struct Accumulator {
  const KernelSpec& kernel;
  const std::vector<double>& eps;
  Cutoff cutoff;
  double rmin;
  std::vector<long double> acc;

  Accumulator(const KernelSpec& k, const std::vector<double>& e, Cutoff c) : kernel(k), eps(e), cutoff(c) {
    rmin = *std::min_element(e.begin(), e.end()) * (c == Cutoff::Smooth ? 0.5 : 1.0);
    acc.assign(e.size(), 0.0L);
  }

  /// Adds K(z) prod_i diff_i / |z| * fy * weight.
  void add(const Point& z, const double* diff, double fy, double weight) {
    const int d = kernel.d;
    const double r = norm(z, d);
    if (r <= rmin) return;
    Point t{0, 0, 0};
    for (int a = 0; a < d; ++a) t[a] = z[a] / r;
    double term = kernel.omega(t) / std::pow(r, d) * fy * weight;
    for (int i = 0; i < kernel.n; ++i) term *= diff[i] / r;
    if (term == 0) return;
    for (std::size_t e = 0; e < eps.size(); ++e) acc[e] += term * cutoff_weight(cutoff, r, eps[e]);
  }
};

}  // namespace

std::vector<double> pv_truncations(const KernelSpec& kernel, const std::vector<GridFunction>& A,
                                   const GridFunction& f, const Point& x, const std::vector<double>& eps,
                                   Cutoff cutoff) {
  validate_inputs(kernel, A, f, x, eps);
  const GridSpec& spec = f.spec();
  const int d = spec.d;
  const int n = kernel.n;
  const double cell = spec.cell_volume();
  const Stencil sx = Stencil::at(spec, x);
  std::vector<double> ax(n), diff(n);
  for (int i = 0; i < n; ++i) ax[i] = sx.apply(A[i]);

  Accumulator acc(kernel, eps, cutoff);
  if (symmetry_point(spec, x)) {
    // Offsets x - y come in antipodal pairs, so the plain sum is already paired.
    for (Eigen::Index j = 0; j < spec.size(); ++j) {
      const double fy = f[j];
      if (fy == 0) continue;
      const Point y = spec.node(j);
      Point z{0, 0, 0};
      for (int a = 0; a < d; ++a) z[a] = x[a] - y[a];
      for (int i = 0; i < n; ++i) diff[i] = ax[i] - A[i][j];
      acc.add(z, diff.data(), fy, cell);
    }
  } else {
    // Average each node term with its mirror image 2x - y, read by interpolation.
    for (Eigen::Index j = 0; j < spec.size(); ++j) {
      const Point y = spec.node(j);
      Point z{0, 0, 0}, m{0, 0, 0};
      for (int a = 0; a < d; ++a) {
        z[a] = x[a] - y[a];
        m[a] = x[a] + z[a];
      }
      if (f[j] != 0) {
        for (int i = 0; i < n; ++i) diff[i] = ax[i] - A[i][j];
        acc.add(z, diff.data(), f[j], 0.5 * cell);
      }
      const Stencil sm = Stencil::at(spec, m);
      const double fm = sm.apply(f);
      if (fm != 0) {
        Point mz{0, 0, 0};
        for (int a = 0; a < d; ++a) mz[a] = -z[a];
        for (int i = 0; i < n; ++i) diff[i] = ax[i] - sm.apply(A[i]);
        acc.add(mz, diff.data(), fm, 0.5 * cell);
      }
    }
  }
  return {acc.acc.begin(), acc.acc.end()};
}

double pv_truncated(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                    const Point& x, double eps, Cutoff cutoff) {
  return pv_truncations(kernel, A, f, x, {eps}, cutoff)[0];
}

PVResult richardson(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size() || eps.empty()) throw std::invalid_argument("ladder size mismatch");
  for (std::size_t k = 1; k < eps.size(); ++k)
    if (!(eps[k] < eps[k - 1])) throw std::invalid_argument("eps schedule must be strictly decreasing");
  PVResult res;
  for (std::size_t k = 0; k < eps.size(); ++k) res.truncations.emplace_back(eps[k], values[k]);
  std::vector<double> row = values;
  // The paired truncation error has only odd powers of eps.
  for (int stage = 1; stage <= 2 && row.size() >= 2; ++stage) {
    std::vector<double> next;
    for (std::size_t k = 0; k + 1 < row.size(); ++k) {
      const double t = std::pow(eps[k] / eps[k + 1], 2 * stage - 1);
      next.push_back((t * row[k + 1] - row[k]) / (t - 1));
    }
    row = std::move(next);
  }
  res.extrapolants = row;
  res.value = row.back();
  if (row.size() >= 2)
    res.extrapolation_residual = std::abs(row[row.size() - 1] - row[row.size() - 2]);
  else if (values.size() >= 2)
    res.extrapolation_residual = std::abs(row.back() - values.back());
  return res;
}

PVResult pv_extrapolate(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                        const Point& x, const std::vector<double>& eps_schedule, Cutoff cutoff) {
  for (std::size_t k = 1; k < eps_schedule.size(); ++k)
    if (!(eps_schedule[k] < eps_schedule[k - 1])) throw std::invalid_argument("eps schedule must be strictly decreasing");
  return richardson(eps_schedule, pv_truncations(kernel, A, f, x, eps_schedule, cutoff));
}

std::vector<PVResult> evaluate_points(const KernelSpec& kernel, const std::vector<GridFunction>& A,
                                      const GridFunction& f, const std::vector<Point>& points,
                                      const std::vector<double>& eps_schedule, Cutoff cutoff) {
  std::vector<PVResult> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(pv_extrapolate(kernel, A, f, x, eps_schedule, cutoff));
  return out;
}

GridFunction evaluate_field(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                            const GridSpec& eval, const std::vector<double>& eps_schedule, Cutoff cutoff) {
  eval.validate();
  if (eval.d != f.spec().d || eval.L != f.spec().L) throw std::invalid_argument("evaluation lattice must share the domain");
  std::vector<Point> pts;
  for (Eigen::Index i = 0; i < eval.size(); ++i) pts.push_back(eval.node(i));
  const auto res = evaluate_points(kernel, A, f, pts, eps_schedule, cutoff);
  Eigen::ArrayXd v(eval.size());
  for (Eigen::Index i = 0; i < eval.size(); ++i) v[i] = res[i].value;
  return {eval, std::move(v)};
}

std::vector<double> rotations_truncations(const KernelSpec& kernel, const std::vector<GridFunction>& A,
                                          const GridFunction& f, const Point& x, const std::vector<double>& eps,
                                          Cutoff cutoff, double dr_cells) {
  validate_inputs(kernel, A, f, x, eps);
  const GridSpec& spec = f.spec();
  const int d = spec.d;
  if (d < 2) throw std::invalid_argument("the method of rotations needs d >= 2");
  check_parity(kernel);
  const int n = kernel.n;
  const double h = spec.h();
  const double dr = dr_cells * h;

  // Bounding box of supp f, widened by the interpolation reach.
  Point lo{0, 0, 0}, hi{0, 0, 0};
  bool any = false;
  for (Eigen::Index j = 0; j < spec.size(); ++j) {
    if (f[j] == 0) continue;
    const Point y = spec.node(j);
    for (int a = 0; a < d; ++a) {
      lo[a] = any ? std::min(lo[a], y[a]) : y[a];
      hi[a] = any ? std::max(hi[a], y[a]) : y[a];
    }
    any = true;
  }
  std::vector<double> total(eps.size(), 0.0);
  if (!any) return total;
  for (int a = 0; a < d; ++a) {
    lo[a] -= 2 * h;
    hi[a] += 2 * h;
  }

  const Stencil sx = Stencil::at(spec, x);
  std::vector<double> ax(n);
  for (int i = 0; i < n; ++i) ax[i] = sx.apply(A[i]);
  const double rmin = *std::min_element(eps.begin(), eps.end()) * (cutoff == Cutoff::Smooth ? 0.5 : 1.0);

  const SphereRule& rule = kernel.sphere;
  const std::size_t half = rule.size() / 2;
  std::vector<long double> line(eps.size());
  for (std::size_t k = 0; k < half; ++k) {
    const Point& th = rule.nodes[k];
    const double om = kernel.omega(th);
    if (om == 0) continue;
    // Parameter range where x - r th stays in the box.
    double rlo = -1e300, rhi = 1e300;
    bool empty = false;
    for (int a = 0; a < d; ++a) {
      if (std::abs(th[a]) < 1e-15) {
        if (x[a] < lo[a] || x[a] > hi[a]) empty = true;
        continue;
      }
      double r1 = (x[a] - hi[a]) / th[a], r2 = (x[a] - lo[a]) / th[a];
      if (r1 > r2) std::swap(r1, r2);
      rlo = std::max(rlo, r1);
      rhi = std::min(rhi, r2);
    }
    if (empty || rlo > rhi) continue;
    std::fill(line.begin(), line.end(), 0.0L);
    auto sample_at = [&](double r) {
      if (std::abs(r) <= rmin) return;
      Point y{0, 0, 0};
      for (int a = 0; a < d; ++a) y[a] = x[a] - r * th[a];
      const Stencil sy = Stencil::at(spec, y);
      const double fy = sy.apply(f);
      if (fy == 0) return;
      double g = fy / r;
      for (int i = 0; i < n; ++i) g *= (ax[i] - sy.apply(A[i])) / r;
      if (g == 0) return;
      for (std::size_t e = 0; e < eps.size(); ++e) line[e] += g * cutoff_weight(cutoff, std::abs(r), eps[e]);
    };
    // Midpoints r = +-(j + 1/2) dr, symmetric about x.
    if (rhi > 0) {
      const long j0 = std::max(0L, static_cast<long>(std::floor(std::max(rlo, 0.0) / dr - 0.5)));
      const long j1 = static_cast<long>(std::ceil(rhi / dr - 0.5));
      for (long j = j0; j <= j1; ++j) {
        const double r = (j + 0.5) * dr;
        if (r >= rlo && r <= rhi) sample_at(r);
      }
    }
    if (rlo < 0) {
      const long j0 = std::max(0L, static_cast<long>(std::floor(std::max(-rhi, 0.0) / dr - 0.5)));
      const long j1 = static_cast<long>(std::ceil(-rlo / dr - 0.5));
      for (long j = j0; j <= j1; ++j) {
        const double r = -(j + 0.5) * dr;
        if (r >= rlo && r <= rhi) sample_at(r);
      }
    }
    for (std::size_t e = 0; e < eps.size(); ++e)
      total[e] += static_cast<double>(rule.weights[k] * om * line[e] * dr);
  }
  return total;
}

double rotations_evaluate(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                          const Point& x, double eps, Cutoff cutoff) {
  return rotations_truncations(kernel, A, f, x, {eps}, cutoff)[0];
}

PVResult rotations_extrapolate(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                               const Point& x, const std::vector<double>& eps_schedule, Cutoff cutoff) {
  return richardson(eps_schedule, rotations_truncations(kernel, A, f, x, eps_schedule, cutoff));
}

namespace {

std::vector<double> finish_origin(std::vector<long double>& acc) { return {acc.begin(), acc.end()}; }

}  // namespace

std::vector<double> origin_truncations(const KernelSpec& kernel, const std::vector<PointFunction>& A,
                                       const PointFunction& f, const GridSpec& spec, const Point& x,
                                       const std::vector<double>& deltas, const Point& lo, const Point& hi) {
  spec.validate();
  if (static_cast<int>(A.size()) != kernel.n) throw std::invalid_argument("need exactly n symbols A_i");
  const int d = spec.d;
  const int n = kernel.n;
  const double h = spec.h();
  const double cell = spec.cell_volume();
  int klo[3] = {0, 0, 0}, khi[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    klo[a] = std::max(0, static_cast<int>(std::ceil((lo[a] + spec.L) / h - 0.5)));
    khi[a] = std::min(spec.N - 1, static_cast<int>(std::floor((hi[a] + spec.L) / h - 0.5)));
  }
  std::vector<double> ax(n);
  for (int i = 0; i < n; ++i) ax[i] = A[i](x);
  std::vector<long double> acc(deltas.size(), 0.0L);
  Point y{0, 0, 0};
  for (int k0 = klo[0]; k0 <= khi[0]; ++k0) {
    y[0] = spec.coord(k0);
    for (int k1 = klo[1]; k1 <= khi[1]; ++k1) {
      if (d > 1) y[1] = spec.coord(k1);
      for (int k2 = klo[2]; k2 <= khi[2]; ++k2) {
        if (d > 2) y[2] = spec.coord(k2);
        const double fy = f(y);
        if (fy == 0) continue;
        Point z{0, 0, 0};
        for (int a = 0; a < d; ++a) z[a] = x[a] - y[a];
        const double r = norm(z, d);
        if (r == 0) continue;
        Point t{0, 0, 0};
        for (int a = 0; a < d; ++a) t[a] = z[a] / r;
        double term = kernel.omega(t) / std::pow(r, d) * fy * cell;
        for (int i = 0; i < n; ++i) term *= (ax[i] - A[i](y)) / r;
        const double ry = norm(y, d);
        for (std::size_t e = 0; e < deltas.size(); ++e)
          if (ry > deltas[e]) acc[e] += term;
      }
    }
  }
  return finish_origin(acc);
}

std::vector<double> origin_truncations(const KernelSpec& kernel, const std::vector<GridFunction>& A,
                                       const GridFunction& f, const Point& x, const std::vector<double>& deltas) {
  const GridSpec& spec = f.spec();
  if (static_cast<int>(A.size()) != kernel.n) throw std::invalid_argument("need exactly n symbols A_i");
  const int d = spec.d;
  const int n = kernel.n;
  const double cell = spec.cell_volume();
  const Stencil sx = Stencil::at(spec, x);
  std::vector<double> ax(n);
  for (int i = 0; i < n; ++i) ax[i] = sx.apply(A[i]);
  std::vector<long double> acc(deltas.size(), 0.0L);
  for (Eigen::Index j = 0; j < spec.size(); ++j) {
    const double fy = f[j];
    if (fy == 0) continue;
    const Point y = spec.node(j);
    Point z{0, 0, 0};
    for (int a = 0; a < d; ++a) z[a] = x[a] - y[a];
    const double r = norm(z, d);
    if (r == 0) continue;
    Point t{0, 0, 0};
    for (int a = 0; a < d; ++a) t[a] = z[a] / r;
    double term = kernel.omega(t) / std::pow(r, d) * fy * cell;
    for (int i = 0; i < n; ++i) term *= (ax[i] - A[i][j]) / r;
    const double ry = norm(y, d);
    for (std::size_t e = 0; e < deltas.size(); ++e)
      if (ry > deltas[e]) acc[e] += term;
  }
  return finish_origin(acc);
}

}  // namespace calderon
