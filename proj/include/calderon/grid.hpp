#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace calderon {

using Point = std::array<double, 3>;
using Index = std::array<int, 3>;

/// Regular half-offset lattice over the cube [-L, L]^d.
struct GridSpec {
  int d = 2;
  double L = 4.0;
  int N = 64;

  [[nodiscard]] double h() const { return 2.0 * L / N; }
  [[nodiscard]] double cell_volume() const;
  [[nodiscard]] Eigen::Index size() const;
  [[nodiscard]] double coord(int k) const { return -L + (k + 0.5) * h(); }
  [[nodiscard]] Index unravel(Eigen::Index lin) const;
  [[nodiscard]] Eigen::Index ravel(const Index& k) const;
  [[nodiscard]] Point node(Eigen::Index lin) const;
  [[nodiscard]] bool contains(const Point& x) const;
  void validate() const;

  bool operator==(const GridSpec& o) const { return d == o.d && L == o.L && N == o.N; }
};

[[nodiscard]] double norm(const Point& x, int d);
[[nodiscard]] bool is_power_of_two(int n);

/// Real function sampled at the lattice nodes. Values are fixed at construction.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(const GridSpec& spec, Eigen::ArrayXd values);

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] const Eigen::ArrayXd& values() const { return values_; }
  [[nodiscard]] double operator[](Eigen::Index i) const { return values_[i]; }
  [[nodiscard]] double at(const Index& k) const { return values_[spec_.ravel(k)]; }
  [[nodiscard]] Eigen::Index size() const { return values_.size(); }

  [[nodiscard]] GridFunction scaled(double c) const;
  [[nodiscard]] GridFunction abs() const;

 private:
  GridSpec spec_;
  Eigen::ArrayXd values_;
};

GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);

struct VectorField {
  GridSpec spec;
  std::vector<GridFunction> components;

  /// Euclidean length of the vector at every node.
  [[nodiscard]] GridFunction magnitude() const;
};

using PointFunction = std::function<double(const Point&)>;

GridFunction sample(const PointFunction& expr, const GridSpec& spec);
GridFunction zeros(const GridSpec& spec);
VectorField gradient(const GridFunction& A);
double lp_norm(const GridFunction& f, double p);

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smoothstep(double t);

double bump_value(const Point& x, const Point& center, double radius, int d);
GridFunction bump(const Point& center, double radius, const GridSpec& spec);

struct Cone {
  double kappa = 4.0;
  double rho = 1.0;
  double eps = 0.125;

  [[nodiscard]] bool inner(const Point& x, int d) const;
  [[nodiscard]] bool outer(const Point& x, int d) const;
  /// Smooth weight equal to 1 on the inner cone and 0 off the outer one.
  [[nodiscard]] double ramp(const Point& x, int d) const;
  /// Half opening angle of the inner cone.
  [[nodiscard]] double half_angle() const;
  /// Surface measure of the cone's directions on the unit sphere.
  [[nodiscard]] double solid_angle(int d) const;
};

double cone_power_A_value(const Point& x, double alpha, const Cone& cone, int d);
double cone_power_f_value(const Point& x, double beta, const Cone& cone, int d);
GridFunction cone_power_A(double alpha, double rho, double eps, double kappa, const GridSpec& spec);
GridFunction cone_power_f(double beta, double rho, double kappa, const GridSpec& spec);

/// Sums of randomly placed bumps. smoothness is the smallest bump radius as a fraction of L.
std::vector<GridFunction> random_test_family(std::uint64_t seed, int count, const GridSpec& spec,
                                             double smoothness);
/// Sums of indicators of random balls, radius fraction as above.
std::vector<GridFunction> random_indicator_family(std::uint64_t seed, int count, const GridSpec& spec,
                                                  double radius_fraction);

/// Tensor 4-point Lagrange weights at a point; nodes outside the lattice read as zero.
struct Stencil {
  int d = 1;
  int N = 8;
  int base[3] = {0, 0, 0};
  double w[3][4] = {{1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}};

  static Stencil at(const GridSpec& spec, const Point& x);
  [[nodiscard]] double apply(const GridFunction& f) const;
};

double interpolate(const GridFunction& f, const Point& x);

void write_grid(std::ostream& os, const GridFunction& f);
GridFunction read_grid(std::istream& is);
void save_grid(const std::string& path, const GridFunction& f);

}  // namespace calderon
