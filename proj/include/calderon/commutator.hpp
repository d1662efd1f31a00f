#pragma once

#include "calderon/grid.hpp"
#include "calderon/sphere.hpp"

#include <string>
#include <utility>
#include <vector>

namespace calderon {

enum class KernelVariant { PowerEven, HomogeneousSmooth, Rough };

/// Sharp: weight 1 for |x-y| > eps. Smooth: C-infinity ramp from 0 at eps/2 to 1 at eps.
enum class Cutoff { Sharp, Smooth };

struct KernelSpec {
  KernelVariant variant = KernelVariant::PowerEven;
  int d = 2;
  int n = 1;
  SphericalFunction omega;
  SphereRule sphere;
  /// Bound on |K(x)| |x|^d.
  double size_bound = 1;

  [[nodiscard]] double omega_at(const Point& theta) const { return omega(theta); }
  [[nodiscard]] double operator()(const Point& z) const;
  [[nodiscard]] std::string name() const;
};

KernelSpec power_even_kernel(int d, int n);
KernelSpec homogeneous_smooth_kernel(int d, int n, int sphere_nodes = 256);
KernelSpec rough_kernel(int d, int n, SphericalFunction omega, int sphere_nodes);

/// Largest |Omega(-t) - (-1)^{n+1} Omega(t)| over paired sphere nodes.
double parity_defect(const KernelSpec& k);
/// Largest |int Omega(t) t^a dsigma| over |a| = n, relative to int |Omega|.
double moment_residual(const KernelSpec& k);
/// Largest |K(t)| over the sphere nodes; compared against size_bound.
double sampled_size(const KernelSpec& k);

struct PVResult {
  double value = 0;
  /// (eps, C_eps), eps decreasing.
  std::vector<std::pair<double, double>> truncations;
  std::vector<double> extrapolants;
  double extrapolation_residual = 0;
};

double cutoff_weight(Cutoff c, double r, double eps);

/// eps_k = base h 2^k for k = K..0.
std::vector<double> default_eps_schedule(const GridSpec& spec, int K = 3, double base = 8);

/// Truncated sums for every eps in one pass over the lattice.
std::vector<double> pv_truncations(const KernelSpec& kernel, const std::vector<GridFunction>& A,
                                   const GridFunction& f, const Point& x, const std::vector<double>& eps,
                                   Cutoff cutoff);
double pv_truncated(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                    const Point& x, double eps, Cutoff cutoff = Cutoff::Sharp);
/// Richardson extrapolation in eps and eps^3 of a truncation ladder.
PVResult richardson(const std::vector<double>& eps, const std::vector<double>& values);
PVResult pv_extrapolate(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                        const Point& x, const std::vector<double>& eps_schedule, Cutoff cutoff = Cutoff::Smooth);

std::vector<PVResult> evaluate_points(const KernelSpec& kernel, const std::vector<GridFunction>& A,
                                      const GridFunction& f, const std::vector<Point>& points,
                                      const std::vector<double>& eps_schedule, Cutoff cutoff = Cutoff::Smooth);
/// Extrapolated field on the nodes of eval (same domain, coarser or equal lattice).
GridFunction evaluate_field(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                            const GridSpec& eval, const std::vector<double>& eps_schedule,
                            Cutoff cutoff = Cutoff::Smooth);

/// Method of rotations: half the sphere average of Omega times 1-d truncated line integrals.
std::vector<double> rotations_truncations(const KernelSpec& kernel, const std::vector<GridFunction>& A,
                                          const GridFunction& f, const Point& x, const std::vector<double>& eps,
                                          Cutoff cutoff, double dr_cells = 0.5);
double rotations_evaluate(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                          const Point& x, double eps, Cutoff cutoff = Cutoff::Sharp);
PVResult rotations_extrapolate(const KernelSpec& kernel, const std::vector<GridFunction>& A, const GridFunction& f,
                               const Point& x, const std::vector<double>& eps_schedule,
                               Cutoff cutoff = Cutoff::Smooth);

/// Sums over lattice nodes y with |y| > delta (truncation about the origin, not about x),
/// for inputs given as closed forms sampled node by node inside [lo, hi].
std::vector<double> origin_truncations(const KernelSpec& kernel, const std::vector<PointFunction>& A,
                                       const PointFunction& f, const GridSpec& spec, const Point& x,
                                       const std::vector<double>& deltas, const Point& lo, const Point& hi);
std::vector<double> origin_truncations(const KernelSpec& kernel, const std::vector<GridFunction>& A,
                                       const GridFunction& f, const Point& x, const std::vector<double>& deltas);

}  // namespace calderon
