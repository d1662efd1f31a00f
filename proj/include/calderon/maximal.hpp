#pragma once

#include "calderon/dyadic.hpp"
#include "calderon/grid.hpp"
#include "calderon/sphere.hpp"

#include <vector>

namespace calderon {

/// Pointwise maximal function on the lattice; values are nonnegative.
using MaximalField = GridFunction;

/// Half-widths m (cube side (2m+1)h) from the ladder r = h 2^{k/2}, deduplicated, up to the domain size.
std::vector<int> cube_half_widths(const GridSpec& spec);
/// Ball radii h 2^{k/2} starting at h/2, up to the domain diameter.
std::vector<double> ball_radii(const GridSpec& spec);

MaximalField hl_maximal_p(const GridFunction& f, double p);
MaximalField mary_weiss(const GridFunction& A);
/// Fractional maximal function of grad A with 1/s = 1/q - 1/d.
MaximalField frak_m_s(const GridFunction& A, double s, double q);
double frak_exponent(double q, int d);
MaximalField lambda_op(const GridFunction& f);
MaximalField t_s_operator(const std::vector<DyadicCube>& cubes, const SphericalFunction& Omega, double s,
                          const GridFunction& f);

/// h^d sum_y |x-y|^{1-d} f(y); the diagonal term uses the exact cell integral of the kernel.
GridFunction kernel_potential(const GridFunction& f);
/// |S^{d-1}|^{-1} h^d sum_{y != x} (x_j - y_j)/|x-y|^d g(y).
GridFunction layer_potential(const GridFunction& g, int axis);

}  // namespace calderon
