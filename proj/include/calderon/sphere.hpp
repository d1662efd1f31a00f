#pragma once

#include "calderon/grid.hpp"

#include <functional>
#include <vector>

namespace calderon {

/// Quadrature on the unit sphere, closed under x -> -x: node k + size/2 is the antipode of node k.
struct SphereRule {
  int d = 2;
  std::vector<Point> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
  [[nodiscard]] std::size_t antipode(std::size_t k) const { return (k + size() / 2) % size(); }
};

/// d=1: {-1, 1}. d=2: m equispaced angles at half-step offsets. d=3: m Fibonacci points, symmetrised.
SphereRule sphere_rule(int d, int m);

double sphere_measure(int d);

using SphericalFunction = std::function<double(const Point&)>;

double sphere_integral(const SphereRule& rule, const SphericalFunction& g);

}  // namespace calderon
