#pragma once

#include "calderon/czdecomp.hpp"
#include "calderon/dyadic.hpp"
#include "calderon/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace calderon {

struct ExceptionalSets {
  GridSpec spec;
  NodeSet J, B, D, F, H, G;
  /// Dyadic cubes behind B; they are dilated about their own centres.
  std::vector<DyadicCube> bad_cubes;
  double lambda = 0;
  std::vector<double> q;
  double p = 1;
  double r = 1;

  /// m(J) + m(B) + m(D) + m(F) + m(H).
  [[nodiscard]] double contributing_measure() const;
  /// m(G) over the contributing measure; 0 when nothing contributes.
  [[nodiscard]] double inflation() const;
};

struct LipschitzCertificate {
  double bound = 0;
  Point x{0, 0, 0};
  Point y{0, 0, 0};
  double ratio = 0;
  std::int64_t sample_count = 0;
  bool exhaustive = true;
  /// Node count above which pairs are sampled.
  std::int64_t cutoff = 0;

  [[nodiscard]] bool passes() const { return ratio <= bound * (1 + 1e-12); }
};

class LipschitzViolation : public std::runtime_error {
 public:
  LipschitzViolation(const Point& x, const Point& y, double ratio, double bound);
  Point x, y;
  double ratio;
};

/// {f > threshold}.
NodeSet superlevel(const GridFunction& f, double threshold);

NodeSet exceptional_J(const GridFunction& A, double threshold);
NodeSet exceptional_D(const GridFunction& A, double q, double threshold);

/// sum_Q l(Q) m(Q) / (l(Q) + |x - y_Q|)^{d+1}, y_Q the centre of Q.
double delta_value(const std::vector<DyadicCube>& cubes, const GridSpec& spec, const Point& x);
GridFunction delta_field(const std::vector<DyadicCube>& cubes, const GridSpec& spec);
NodeSet exceptional_F(const std::vector<CZResult>& cz);

/// Potential whose gradient is the double Riesz transform of g along axis j.
GridFunction good_potential(const GridFunction& g, int axis);
/// Union over j of {M(grad A^g_j) > threshold}, g[j] the good part of the j-th derivative.
NodeSet exceptional_H(const std::vector<GridFunction>& g, double threshold);

/// Node sets are dilated by 5 cells; every bad cube Q by 10 about its centre.
ExceptionalSets assemble_G(ExceptionalSets sets, WhitneyCover* cover = nullptr);

/// inf over y in F of A(y) + L |x - y|. Throws LipschitzViolation if A is not L-Lipschitz on F.
GridFunction lipschitz_extend(const GridFunction& A, const NodeSet& F, double L);
LipschitzCertificate lipschitz_certificate(const GridFunction& A, const NodeSet& F, double L,
                                           std::int64_t cutoff = 128 * 128, std::uint64_t seed = 7);

/// part[i] in {1, 2, 3} picks the factor used for symbol i; points are node indices, y_k may be any node.
double symbol_decomposition(const std::vector<GridFunction>& A, const std::vector<GridFunction>& A_tilde,
                            Eigen::Index yk, Eigen::Index x, Eigen::Index y, const std::vector<int>& part);
/// prod_i (A_i(x) - A_i(y)) / |x - y|.
double symbol_product(const std::vector<GridFunction>& A, Eigen::Index x, Eigen::Index y);

/// One character per node, rows along the last axis.
void write_bitmap(std::ostream& os, const NodeSet& s);
nlohmann::json exceptional_summary(const ExceptionalSets& sets);
void save_exceptional(const std::string& dir, const ExceptionalSets& sets);

}  // namespace calderon
