#include "calderon/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>

namespace calderon {

double RearrangementProfile::distribution(double lambda) const {
  // value is decreasing, so the measure is t at the last step above lambda.
  auto it = std::partition_point(value.begin(), value.end(), [&](double v) { return v > lambda; });
  if (it == value.begin()) return 0;
  return t[static_cast<std::size_t>(it - value.begin()) - 1];
}

double RearrangementProfile::operator()(double s) const {
  auto it = std::upper_bound(t.begin(), t.end(), s);
  if (it == t.end()) return 0;
  return value[static_cast<std::size_t>(it - t.begin())];
}

double distribution(const GridFunction& f, double lambda) {
  return static_cast<double>((f.values().abs() > lambda).count()) * f.spec().cell_volume();
}

RearrangementProfile decreasing_rearrangement(std::vector<double> magnitudes, double cell) {
  for (auto& m : magnitudes) m = std::abs(m);
  std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
  RearrangementProfile prof;
  std::size_t k = 0;
  while (k < magnitudes.size() && magnitudes[k] > 0) {
    std::size_t e = k;
    while (e < magnitudes.size() && magnitudes[e] == magnitudes[k]) ++e;
    prof.value.push_back(magnitudes[k]);
    prof.t.push_back(static_cast<double>(e) * cell);
    k = e;
  }
  return prof;
}

RearrangementProfile decreasing_rearrangement(const GridFunction& f) {
  std::vector<double> m(f.values().data(), f.values().data() + f.size());
  return decreasing_rearrangement(std::move(m), f.spec().cell_volume());
}

double lorentz_norm(const RearrangementProfile& prof, double p, double q) {
  if (!(p > 0)) throw std::invalid_argument("Lorentz exponent p must be positive");
  if (!(q > 0)) throw std::invalid_argument("Lorentz exponent q must be positive");
  if (std::isinf(q)) {
    double s = 0;
    for (std::size_t k = 0; k < prof.t.size(); ++k) s = std::max(s, std::pow(prof.t[k], 1.0 / p) * prof.value[k]);
    return s;
  }
  // Closed form per step: f_k^q (t_k^{q/p} - t_{k-1}^{q/p}).
  long double acc = 0;
  double prev = 0;
  for (std::size_t k = 0; k < prof.t.size(); ++k) {
    const double cur = std::pow(prof.t[k], q / p);
    acc += static_cast<long double>(std::pow(prof.value[k], q)) * (cur - prev);
    prev = cur;
  }
  return std::pow(static_cast<double>(acc), 1.0 / q);
}

double lorentz_norm(const GridFunction& f, double p, double q) { return lorentz_norm(decreasing_rearrangement(f), p, q); }

void write_profile_csv(std::ostream& os, const RearrangementProfile& prof) {
  os << "t,fstar\n";
  os.precision(17);
  for (std::size_t k = 0; k < prof.t.size(); ++k) os << prof.t[k] << "," << prof.value[k] << "\n";
}

}  // namespace calderon
