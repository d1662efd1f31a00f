#pragma once

#include "calderon/grid.hpp"

#include <iosfwd>
#include <limits>
#include <vector>

namespace calderon {

/// Step function f*: value[k] on [t[k-1], t[k]) with t[-1] = 0. Values strictly decrease.
struct RearrangementProfile {
  std::vector<double> t;
  std::vector<double> value;

  /// m({f* > lambda}).
  [[nodiscard]] double distribution(double lambda) const;
  [[nodiscard]] double operator()(double s) const;
};

double distribution(const GridFunction& f, double lambda);
RearrangementProfile decreasing_rearrangement(const GridFunction& f);
/// Rearrangement of arbitrary magnitudes, each carrying mass cell.
RearrangementProfile decreasing_rearrangement(std::vector<double> magnitudes, double cell);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Lorentz quasi-norm with the normalisation ((q/p) int (t^{1/p} f*)^q dt/t)^{1/q}; q = inf gives the weak norm.
double lorentz_norm(const RearrangementProfile& prof, double p, double q);
double lorentz_norm(const GridFunction& f, double p, double q);

void write_profile_csv(std::ostream& os, const RearrangementProfile& prof);

}  // namespace calderon
