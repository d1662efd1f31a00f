#include "calderon/sphere.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace calderon {

double sphere_measure(int d) {
  if (d == 1) return 2.0;
  if (d == 2) return 2 * std::numbers::pi;
  if (d == 3) return 4 * std::numbers::pi;
  throw std::invalid_argument("dimension must be 1, 2 or 3");
}

SphereRule sphere_rule(int d, int m) {
  SphereRule rule;
  rule.d = d;
  if (d == 1) {
    rule.nodes = {{1, 0, 0}, {-1, 0, 0}};
    rule.weights = {1, 1};
    return rule;
  }
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("sphere rule needs an even node count");
  const double w = sphere_measure(d) / m;
  if (d == 2) {
    for (int k = 0; k < m; ++k) {
      const double phi = 2 * std::numbers::pi * (k + 0.5) / m;
      rule.nodes.push_back({std::cos(phi), std::sin(phi), 0});
    }
  } else if (d == 3) {
    const int half = m / 2;
    const double golden = std::numbers::pi * (3 - std::sqrt(5.0));
    for (int k = 0; k < half; ++k) {
      const double z = 1 - (2 * k + 1.0) / half;
      const double rr = std::sqrt(std::max(0.0, 1 - z * z));
      const double phi = golden * k;
      rule.nodes.push_back({rr * std::cos(phi), rr * std::sin(phi), z});
    }
    for (int k = 0; k < half; ++k) {
      const Point p = rule.nodes[k];
      rule.nodes.push_back({-p[0], -p[1], -p[2]});
    }
  } else {
    throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
  rule.weights.assign(rule.nodes.size(), w);
  return rule;
}

double sphere_integral(const SphereRule& rule, const SphericalFunction& g) {
  double acc = 0;
  for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.weights[k] * g(rule.nodes[k]);
  return acc;
}

}  // namespace calderon
