#pragma once

#include "calderon/dyadic.hpp"
#include "calderon/grid.hpp"

#include <iosfwd>
#include <vector>

namespace calderon {

/// b_Q stored on the cells of its cube, in DyadicCube::cells order.
struct BadPiece {
  DyadicCube cube;
  double average = 0;
  Eigen::ArrayXd values;

  [[nodiscard]] GridFunction to_grid(const GridSpec& spec) const;
  [[nodiscard]] double integral(const GridSpec& spec) const;
  [[nodiscard]] double l1(const GridSpec& spec) const;
};

struct CZResult {
  double level = 0;
  GridFunction good;
  std::vector<BadPiece> bad_pieces;
  double bad_set_measure = 0;

  [[nodiscard]] NodeSet bad_set() const;
};

CZResult cz_decompose(const GridFunction& f, double level);

/// Decomposition of every |d_j A|^q at level lambda^r, with the matching split of d_j A itself.
struct GradientSplit {
  double q = 1;
  double level = 0;
  VectorField grad;
  std::vector<CZResult> densities;
  std::vector<GridFunction> good;
  std::vector<std::vector<BadPiece>> bad;
  std::vector<NodeSet> exceptional;
};

GradientSplit apply_to_gradient_components(const GridFunction& A, double q, double lambda, double r);

void write_cz_csv(std::ostream& os, const CZResult& cz);

}  // namespace calderon
