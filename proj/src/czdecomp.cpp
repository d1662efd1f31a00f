#include "calderon/czdecomp.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace calderon {

GridFunction BadPiece::to_grid(const GridSpec& spec) const {
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(spec.size());
  const auto cells = cube.cells(spec);
  for (std::size_t k = 0; k < cells.size(); ++k) v[cells[k]] = values[static_cast<Eigen::Index>(k)];
  return {spec, std::move(v)};
}

double BadPiece::integral(const GridSpec& spec) const { return values.sum() * spec.cell_volume(); }
double BadPiece::l1(const GridSpec& spec) const { return values.abs().sum() * spec.cell_volume(); }

NodeSet CZResult::bad_set() const {
  const GridSpec& spec = good.spec();
  NodeSet s(spec);
  for (const auto& p : bad_pieces)
    for (auto i : p.cube.cells(spec)) s.set(i);
  return s;
}

namespace {

/// Per-generation cube sums, generation 0 being the root.
std::vector<std::vector<long double>> pyramid(const GridFunction& f) {
  const GridSpec& spec = f.spec();
  const int J = max_generation(spec);
  std::vector<std::vector<long double>> sums(J + 1);
  sums[J].resize(static_cast<std::size_t>(spec.size()));
  for (Eigen::Index i = 0; i < spec.size(); ++i) sums[J][i] = f[i];
  for (int j = J - 1; j >= 0; --j) {
    const int n = 1 << j;
    std::size_t total = 1;
    for (int a = 0; a < spec.d; ++a) total *= n;
    sums[j].assign(total, 0.0L);
    const int nf = 2 * n;
    for (std::size_t p = 0; p < sums[j + 1].size(); ++p) {
      std::size_t rem = p, coarse = 0, mul = 1;
      Index k{0, 0, 0};
      for (int a = spec.d - 1; a >= 0; --a) {
        k[a] = static_cast<int>(rem % nf);
        rem /= nf;
      }
      for (int a = spec.d - 1; a >= 0; --a) {
        coarse += mul * (k[a] / 2);
        mul *= n;
      }
      sums[j][coarse] += sums[j + 1][p];
    }
  }
  return sums;
}

std::size_t pyramid_pos(const DyadicCube& Q, int d) {
  const std::size_t n = std::size_t{1} << Q.generation;
  std::size_t p = 0;
  for (int a = 0; a < d; ++a) p = p * n + static_cast<std::size_t>(Q.corner[a]);
  return p;
}

/// Zero-mean piece of f on Q; returns the average actually subtracted.
double split_piece(const GridFunction& f, const std::vector<Eigen::Index>& cells, Eigen::ArrayXd& piece) {
  const auto n = static_cast<Eigen::Index>(cells.size());
  long double acc = 0;
  for (auto i : cells) acc += f[i];
  const double avg = static_cast<double>(acc / n);
  piece.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) piece[k] = f[cells[k]] - avg;
  long double rest = 0;
  for (Eigen::Index k = 0; k < n; ++k) rest += piece[k];
  const double shift = static_cast<double>(rest / n);
  piece -= shift;
  return avg + shift;
}

}  // namespace

CZResult cz_decompose(const GridFunction& f, double level) {
  const GridSpec& spec = f.spec();
  if (!(level > 0)) throw std::invalid_argument("level must be positive");
  if ((f.values() < 0).any()) throw std::invalid_argument("density must be nonnegative");
  const auto sums = pyramid(f);
  const int J = max_generation(spec);
  const double root_avg = static_cast<double>(sums[0][0] / static_cast<long double>(spec.size()));
  if (root_avg >= level) throw std::invalid_argument("level below global average");

  CZResult out;
  out.level = level;
  std::vector<DyadicCube> bad;
  auto visit = [&](auto&& self, const DyadicCube& Q) -> void {
    for (int c = 0; c < (1 << spec.d); ++c) {
      const DyadicCube C = Q.child(c, spec.d);
      long double vol = 1;
      for (int a = 0; a < spec.d; ++a) vol *= static_cast<long double>(spec.N >> C.generation);
      const long double avg = sums[C.generation][pyramid_pos(C, spec.d)] / vol;
      if (avg > level)
        bad.push_back(C);
      else if (C.generation < J)
        self(self, C);
    }
  };
  visit(visit, DyadicCube{});

  Eigen::ArrayXd g = f.values();
  for (const auto& Q : bad) {
    BadPiece piece{Q, 0, {}};
    const auto cells = Q.cells(spec);
    piece.average = split_piece(f, cells, piece.values);
    for (auto i : cells) g[i] = piece.average;
    out.bad_set_measure += Q.measure(spec);
    out.bad_pieces.push_back(std::move(piece));
  }
  out.good = GridFunction(spec, std::move(g));
  return out;
}

GradientSplit apply_to_gradient_components(const GridFunction& A, double q, double lambda, double r) {
  const GridSpec& spec = A.spec();
  if (!(q >= 1 && q < spec.d)) throw std::invalid_argument("gradient split needs 1 <= q < d");
  GradientSplit out;
  out.q = q;
  out.level = std::pow(lambda, r);
  out.grad = gradient(A);
  for (int j = 0; j < spec.d; ++j) {
    const GridFunction& dj = out.grad.components[j];
    const GridFunction density(spec, dj.values().abs().pow(q));
    CZResult cz = cz_decompose(density, out.level);
    Eigen::ArrayXd g = dj.values();
    std::vector<BadPiece> pieces;
    for (const auto& p : cz.bad_pieces) {
      BadPiece piece{p.cube, 0, {}};
      const auto cells = p.cube.cells(spec);
      piece.average = split_piece(dj, cells, piece.values);
      for (auto i : cells) g[i] = piece.average;
      pieces.push_back(std::move(piece));
    }
    out.exceptional.push_back(cz.bad_set());
    out.good.emplace_back(spec, std::move(g));
    out.bad.push_back(std::move(pieces));
    out.densities.push_back(std::move(cz));
  }
  return out;
}

void write_cz_csv(std::ostream& os, const CZResult& cz) {
  const GridSpec& spec = cz.good.spec();
  os << "generation,corner0,corner1,corner2,side,average,integral\n";
  os.precision(17);
  for (const auto& p : cz.bad_pieces)
    os << p.cube.generation << "," << p.cube.corner[0] << "," << p.cube.corner[1] << "," << p.cube.corner[2] << ","
       << p.cube.side(spec) << "," << p.average << "," << p.integral(spec) << "\n";
}

}  // namespace calderon
