#pragma once

#include "calderon/grid.hpp"

#include <algorithm>
#include <vector>

namespace calderon {

/// Summed-volume table over the lattice; box queries are clipped, so cells outside count as zero.
template <class T = long double>
class PrefixSum {
 public:
  template <class Fn>
  PrefixSum(const GridSpec& spec, Fn&& value) : spec_(spec), M_(spec.N + 1) {
    Eigen::Index total = 1;
    for (int i = 0; i < spec.d; ++i) total *= M_;
    sat_.assign(static_cast<std::size_t>(total), T(0));
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      Index k = spec.unravel(i);
      for (int a = 0; a < spec.d; ++a) k[a] += 1;
      sat_[pos(k)] = static_cast<T>(value(i));
    }
    Eigen::Index stride = 1;
    for (int axis = spec.d - 1; axis >= 0; --axis) {
      for (Eigen::Index p = 0; p < total; ++p)
        if ((p / stride) % M_ > 0) sat_[p] += sat_[p - stride];
      stride *= M_;
    }
  }

  /// Sum over the inclusive cell box [lo, hi].
  [[nodiscard]] T sum(Index lo, Index hi) const {
    for (int a = 0; a < spec_.d; ++a) {
      lo[a] = std::max(lo[a], 0);
      hi[a] = std::min(hi[a], spec_.N - 1);
      if (lo[a] > hi[a]) return T(0);
    }
    T acc(0);
    for (int mask = 0; mask < (1 << spec_.d); ++mask) {
      Index k{0, 0, 0};
      bool neg = false;
      for (int a = 0; a < spec_.d; ++a) {
        if (mask & (1 << a)) {
          k[a] = lo[a];
          neg = !neg;
        } else {
          k[a] = hi[a] + 1;
        }
      }
      if (neg)
        acc -= sat_[pos(k)];
      else
        acc += sat_[pos(k)];
    }
    return acc;
  }

  /// Sum over the cube of half-width m cells around cell k.
  [[nodiscard]] T cube(const Index& k, int m) const {
    Index lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < spec_.d; ++a) {
      lo[a] = k[a] - m;
      hi[a] = k[a] + m;
    }
    return sum(lo, hi);
  }

 private:
  [[nodiscard]] Eigen::Index pos(const Index& k) const {
    Eigen::Index p = 0;
    for (int a = 0; a < spec_.d; ++a) p = p * M_ + k[a];
    return p;
  }

  GridSpec spec_;
  int M_;
  std::vector<T> sat_;
};

}  // namespace calderon
