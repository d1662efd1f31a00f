#include "calderon/maximal.hpp"

#include "calderon/prefix_sum.hpp"
#include "calderon/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace calderon {

namespace {

struct Padded {
  int n0, n1, n2;
  explicit Padded(const GridSpec& s) : n0(s.N), n1(s.d > 1 ? s.N : 1), n2(s.d > 2 ? s.N : 1) {}
  [[nodiscard]] Eigen::Index at(int a, int b, int c) const { return (static_cast<Eigen::Index>(a) * n1 + b) * n2 + c; }
};

/// table[|dx|] for every absolute lattice offset.
template <class Fn>
std::vector<double> offset_table(const GridSpec& spec, Fn&& fn) {
  const Padded P(spec);
  std::vector<double> t(static_cast<std::size_t>(spec.size()));
  for (int a = 0; a < P.n0; ++a)
    for (int b = 0; b < P.n1; ++b)
      for (int c = 0; c < P.n2; ++c) t[P.at(a, b, c)] = fn(a, b, c);
  return t;
}

/// out(x) = sum_y f(y) table[|x-y|] (times sign of (x-y)_axis when axis >= 0).
/// The innermost loop runs along the last axis, split at y so it has no branches.
GridFunction offset_convolution(const GridFunction& f, const std::vector<double>& table, int odd_axis) {
  const GridSpec& spec = f.spec();
  const int d = spec.d;
  const int N = spec.N;
  const int last = d - 1;
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(spec.size());
  const Eigen::Index rows = spec.size() / N;
  for (Eigen::Index iy = 0; iy < spec.size(); ++iy) {
    const double fy = f[iy];
    if (fy == 0) continue;
    const Index y = spec.unravel(iy);
    const int yl = y[last];
    for (Eigen::Index row = 0; row < rows; ++row) {
      // Row index over the leading axes, as offsets into the table.
      Eigen::Index rem = row, trow = 0, stride = N;
      double sign = 1;
      for (int a = last - 1; a >= 0; --a) {
        const int xa = static_cast<int>(rem % N);
        rem /= N;
        trow += static_cast<Eigen::Index>(std::abs(xa - y[a])) * stride;
        stride *= N;
        if (odd_axis == a) sign = xa > y[a] ? 1.0 : -1.0;
      }
      const double c = fy * sign;
      const double cneg = odd_axis == last ? -c : c;
      const double* t = &table[trow];
      double* o = &out[row * N];
      for (int x = 0; x < yl; ++x) o[x] += cneg * t[yl - x];
      for (int x = yl; x < N; ++x) o[x] += c * t[x - yl];
    }
  }
  return {spec, std::move(out)};
}

long double ipow(long double v, int e) {
  long double r = 1;
  for (int i = 0; i < e; ++i) r *= v;
  return r;
}

}  // namespace

std::vector<int> cube_half_widths(const GridSpec& spec) {
  std::vector<int> out;
  for (int k = -2;; ++k) {
    const double r = std::pow(2.0, k / 2.0);  // in units of h
    const int m = std::max(0, static_cast<int>(std::lround(r - 0.5)));
    if (out.empty() || m != out.back()) out.push_back(m);
    if (m >= spec.N) break;
  }
  return out;
}

std::vector<double> ball_radii(const GridSpec& spec) {
  std::vector<double> out;
  const double diam = 2 * spec.L * std::sqrt(static_cast<double>(spec.d));
  for (int k = -2;; ++k) {
    const double r = spec.h() * std::pow(2.0, k / 2.0);
    out.push_back(r);
    if (r > diam) break;
  }
  return out;
}

MaximalField hl_maximal_p(const GridFunction& f, double p) {
  if (!(p >= 1)) throw std::invalid_argument("M_p needs p >= 1");
  const GridSpec& spec = f.spec();
  const Eigen::ArrayXd fp = f.values().abs().pow(p);
  const PrefixSum<long double> ps(spec, [&](Eigen::Index i) { return fp[i]; });
  const auto widths = cube_half_widths(spec);
  Eigen::ArrayXd out(spec.size());
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    const Index k = spec.unravel(i);
    long double best = 0;
    for (int m : widths) {
      long double vol = 1;
      for (int a = 0; a < spec.d; ++a) vol *= 2 * m + 1;
      best = std::max(best, ps.cube(k, m) / vol);
    }
    out[i] = std::pow(static_cast<double>(std::max(best, 0.0L)), 1.0 / p);
  }
  return {spec, std::move(out)};
}

MaximalField mary_weiss(const GridFunction& A) {
  const GridSpec& spec = A.spec();
  const Padded P(spec);
  const double h = spec.h();
  const int d = spec.d;
  const int B = std::min(8, spec.N);
  const int nb = spec.N / B;
  const int nb1 = d > 1 ? nb : 1, nb2 = d > 2 ? nb : 1;
  const int B1 = d > 1 ? B : 1, B2 = d > 2 ? B : 1;

  const auto inv = offset_table(spec, [&](int a, int b, int c) {
    const double r2 = double(a) * a + double(b) * b + double(c) * c;
    return r2 == 0 ? 0.0 : 1.0 / (h * std::sqrt(r2));
  });

  struct Block {
    int lo0, lo1, lo2;
    double mn, mx;
  };
  std::vector<Block> blocks;
  for (int b0 = 0; b0 < nb; ++b0)
    for (int b1 = 0; b1 < nb1; ++b1)
      for (int b2 = 0; b2 < nb2; ++b2) {
        Block blk{b0 * B, b1 * B1, b2 * B2, 1e300, -1e300};
        for (int a = 0; a < B; ++a)
          for (int b = 0; b < B1; ++b)
            for (int c = 0; c < B2; ++c) {
              const double v = A[P.at(blk.lo0 + a, blk.lo1 + b, blk.lo2 + c)];
              blk.mn = std::min(blk.mn, v);
              blk.mx = std::max(blk.mx, v);
            }
        blocks.push_back(blk);
      }

  const double* vals = A.values().data();
  Eigen::ArrayXd out(spec.size());
  for (int x0 = 0; x0 < P.n0; ++x0)
    for (int x1 = 0; x1 < P.n1; ++x1)
      for (int x2 = 0; x2 < P.n2; ++x2) {
        const double a = vals[P.at(x0, x1, x2)];
        double best = 0;
        auto scan = [&](const Block& blk) {
          for (int i = 0; i < B; ++i) {
            const int y0 = blk.lo0 + i;
            const int d0 = std::abs(y0 - x0);
            for (int j = 0; j < B1; ++j) {
              const int y1 = blk.lo1 + j;
              const int d1 = std::abs(y1 - x1);
              const double* row = vals + P.at(y0, y1, blk.lo2);
              const double* irow = &inv[P.at(d0, d1, 0)];
              for (int k = 0; k < B2; ++k) {
                const double v = std::abs(row[k] - a) * irow[std::abs(blk.lo2 + k - x2)];
                if (v > best) best = v;
              }
            }
          }
        };
        const int c0 = x0 / B, c1 = x1 / B1, c2 = x2 / B2;
        auto neighbour = [&](const Block& blk) {
          return std::abs(blk.lo0 / B - c0) <= 1 && std::abs(blk.lo1 / B1 - c1) <= 1 &&
                 std::abs(blk.lo2 / B2 - c2) <= 1;
        };
        for (const auto& blk : blocks)
          if (neighbour(blk)) scan(blk);
        for (const auto& blk : blocks) {
          if (neighbour(blk)) continue;
          const int g0 = std::max({0, blk.lo0 - x0, x0 - (blk.lo0 + B - 1)});
          const int g1 = std::max({0, blk.lo1 - x1, x1 - (blk.lo1 + B1 - 1)});
          const int g2 = std::max({0, blk.lo2 - x2, x2 - (blk.lo2 + B2 - 1)});
          const double spread = std::max(blk.mx - a, a - blk.mn);
          if (spread * inv[P.at(g0, g1, g2)] > best) scan(blk);
        }
        out[P.at(x0, x1, x2)] = best;
      }
  return {spec, std::move(out)};
}

double frak_exponent(double q, int d) {
  if (!(q >= 1 && q < d)) throw std::invalid_argument("fractional maximal function needs 1 <= q < d");
  return 1.0 / (1.0 / q - 1.0 / d);
}

MaximalField frak_m_s(const GridFunction& A, double s, double q) {
  const GridSpec& spec = A.spec();
  const double expected = frak_exponent(q, spec.d);
  if (std::abs(s - expected) > 1e-9 * expected) throw std::invalid_argument("s does not satisfy 1/s = 1/q - 1/d");
  const int d = spec.d;
  const double h = spec.h();
  const int si = static_cast<int>(std::lround(s));
  const bool even = std::abs(s - si) < 1e-12 && si % 2 == 0 && si <= 12;
  constexpr int kDirect = 6;

  std::vector<PrefixSum<long double>> powers;
  if (even)
    for (int e = 1; e <= si; ++e)
      powers.emplace_back(spec, [&](Eigen::Index i) { return ipow(A[i], e); });
  std::vector<long double> binom(si + 1, 1);
  for (int k = 1; k <= si; ++k) binom[k] = binom[k - 1] * (si - k + 1) / k;

  auto widths = cube_half_widths(spec);
  widths.erase(std::remove(widths.begin(), widths.end(), 0), widths.end());

  Eigen::ArrayXd out(spec.size());
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    const Index k = spec.unravel(i);
    const double a = A[i];
    double best = 0;
    for (int m : widths) {
      long double vol = 1;
      for (int ax = 0; ax < d; ++ax) vol *= 2 * m + 1;
      long double S = 0;
      if (m <= kDirect || !even) {
        long double inside = 0;
        Index lo{0, 0, 0}, hi{0, 0, 0};
        for (int ax = 0; ax < d; ++ax) {
          lo[ax] = std::max(k[ax] - m, 0);
          hi[ax] = std::min(k[ax] + m, spec.N - 1);
        }
        Index y{0, 0, 0};
        for (y[0] = lo[0]; y[0] <= hi[0]; ++y[0])
          for (y[1] = lo[1]; y[1] <= hi[1]; ++y[1])
            for (y[2] = lo[2]; y[2] <= hi[2]; ++y[2]) {
              S += even ? ipow(a - A.at(y), si) : std::pow(std::abs(a - A.at(y)), s);
              inside += 1;
            }
        S += (vol - inside) * (even ? ipow(a, si) : std::pow(std::abs(a), s));
      } else {
        std::vector<long double> ap(si + 1, 1);
        for (int e = 1; e <= si; ++e) ap[e] = ap[e - 1] * a;
        S = ap[si] * vol;
        for (int e = 1; e <= si; ++e) {
          const long double term = binom[e] * ap[si - e] * powers[e - 1].cube(k, m);
          S += (e % 2 ? -term : term);
        }
      }
      const double r = (m + 0.5) * h;
      const double val = std::pow(static_cast<double>(std::max(S / vol, 0.0L)), 1.0 / s) / r;
      best = std::max(best, val);
    }
    out[i] = best;
  }
  return {spec, std::move(out)};
}

MaximalField lambda_op(const GridFunction& f) {
  const GridSpec& spec = f.spec();
  const int d = spec.d;
  const double cell = spec.cell_volume();
  const auto radii = ball_radii(spec);
  const double rmax = radii.back();
  const int R = static_cast<int>(std::ceil(rmax / spec.h()));

  struct Off {
    int a, b, c;
    double r;
  };
  std::vector<Off> offs;
  for (int a = -R; a <= R; ++a)
    for (int b = (d > 1 ? -R : 0); b <= (d > 1 ? R : 0); ++b)
      for (int c = (d > 2 ? -R : 0); c <= (d > 2 ? R : 0); ++c) {
        const double r = spec.h() * std::sqrt(double(a) * a + double(b) * b + double(c) * c);
        if (r <= rmax) offs.push_back({a, b, c, r});
      }
  std::sort(offs.begin(), offs.end(), [](const Off& x, const Off& y) { return x.r < y.r; });

  Eigen::ArrayXd out(spec.size());
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    const Index k = spec.unravel(i);
    vals.clear();
    std::size_t next = 0;
    double best = 0;
    for (double r : radii) {
      while (next < offs.size() && offs[next].r <= r) {
        const Index y{k[0] + offs[next].a, k[1] + offs[next].b, k[2] + offs[next].c};
        bool in = true;
        for (int ax = 0; ax < d; ++ax) in = in && y[ax] >= 0 && y[ax] < spec.N;
        if (in) vals.push_back(f.at(y));
        ++next;
      }
      const double ball = static_cast<double>(next) * cell;
      const double num = lorentz_norm(decreasing_rearrangement(vals, cell), d, 1);
      best = std::max(best, num / std::pow(ball, 1.0 / d));
    }
    out[i] = best;
  }
  return {spec, std::move(out)};
}

MaximalField t_s_operator(const std::vector<DyadicCube>& cubes, const SphericalFunction& Omega, double s,
                          const GridFunction& f) {
  const GridSpec& spec = f.spec();
  if (!(s > 0)) throw std::invalid_argument("T_s needs s > 0");
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(spec.size()), 0);
  for (const auto& Q : cubes)
    for (auto i : Q.cells(spec)) {
      if (hit[i]) throw std::invalid_argument("cubes overlap");
      hit[i] = 1;
    }
  const int d = spec.d;
  const SphereRule rule = sphere_rule(d, d == 3 ? 512 : 256);
  const double omega_mean =
      sphere_integral(rule, [&](const Point& t) { return std::abs(Omega(t)); }) / sphere_measure(d);
  const double cell = spec.cell_volume();

  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(spec.size());
  for (const auto& Q : cubes) {
    const double l = Q.side(spec);
    const double ls = std::pow(l, s);
    for (auto j : Q.cells(spec)) {
      const double fy = std::abs(f[j]);
      if (fy == 0) continue;
      const Point y = spec.node(j);
      for (Eigen::Index i = 0; i < spec.size(); ++i) {
        const Point x = spec.node(i);
        Point z{0, 0, 0};
        for (int a = 0; a < d; ++a) z[a] = x[a] - y[a];
        const double r = norm(z, d);
        double om = omega_mean;
        if (r > 0) {
          for (int a = 0; a < d; ++a) z[a] /= r;
          om = std::abs(Omega(z));
        }
        out[i] += om * ls / std::pow(l + r, d + s) * fy * cell;
      }
    }
  }
  return {spec, std::move(out)};
}

GridFunction kernel_potential(const GridFunction& f) {
  const GridSpec& spec = f.spec();
  const int d = spec.d;
  const double h = spec.h();
  const double cell = spec.cell_volume();
  // Integral of |u|^{1-d} over one cell, divided by h.
  const double self = d == 1 ? 1.0 : d == 2 ? 4 * std::log(1 + std::sqrt(2.0)) : 7.6741242224437320236;
  const auto table = offset_table(spec, [&](int a, int b, int c) {
    const double r2 = double(a) * a + double(b) * b + double(c) * c;
    if (r2 == 0) return self * h;
    return cell * std::pow(h * std::sqrt(r2), 1.0 - d);
  });
  return offset_convolution(f, table, -1);
}

GridFunction layer_potential(const GridFunction& g, int axis) {
  const GridSpec& spec = g.spec();
  const int d = spec.d;
  if (axis < 0 || axis >= d) throw std::invalid_argument("axis out of range");
  const double h = spec.h();
  const double c = spec.cell_volume() / sphere_measure(d);
  const auto table = offset_table(spec, [&](int a, int b, int cc) {
    const double r2 = double(a) * a + double(b) * b + double(cc) * cc;
    if (r2 == 0) return 0.0;
    const int comp = axis == 0 ? a : axis == 1 ? b : cc;
    return c * (comp * h) / std::pow(h * std::sqrt(r2), d);
  });
  return offset_convolution(g, table, axis);
}

}  // namespace calderon
