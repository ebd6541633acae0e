#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <utility>

namespace pioham {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Uniform grid on the truncated domain [0, eta_max].
struct Grid {
  double eta_max = 0.0;
  Index n = 0;
  double h = 0.0;
  Vector nodes;
};

enum class OperatorKind { D1, D2, D3, EmbeddedL };

/// Dense N x N differentiation matrix. Rows are banded: D1/D2 carry at most
/// 4 nonzeros per row, the composed D3 at most 7.
struct DiscreteOperator {
  OperatorKind kind = OperatorKind::D1;
  Matrix entries;
  Eigen::SparseMatrix<double> banded;  // sparse copy of entries, for fast apply

  DiscreteOperator() = default;
  DiscreteOperator(OperatorKind k, Matrix m)
      : kind(k), entries(std::move(m)), banded(entries.sparseView()) {}

  Index n() const { return entries.rows(); }

  Vector apply(const Vector& v) const { return banded * v; }
};

inline Grid build_grid(double eta_max, Index n) {
  if (!(eta_max > 0.0)) {
    throw std::invalid_argument("build_grid: eta_max must be positive");
  }
  if (n < 6) {
    throw std::invalid_argument("build_grid: need at least 6 nodes");
  }
  Grid g;
  g.eta_max = eta_max;
  g.n = n;
  g.h = eta_max / static_cast<double>(n - 1);
  g.nodes = Vector::LinSpaced(n, 0.0, eta_max);
  return g;
}

/// First derivative, second-order accurate: central interior rows, one-sided
/// three-point rows at both ends.
inline DiscreteOperator build_d1(const Grid& grid) {
  const Index n = grid.n;
  const double inv2h = 1.0 / (2.0 * grid.h);
  Matrix d = Matrix::Zero(n, n);
  d(0, 0) = -3.0 * inv2h;
  d(0, 1) = 4.0 * inv2h;
  d(0, 2) = -1.0 * inv2h;
  for (Index i = 1; i < n - 1; ++i) {
    d(i, i - 1) = -inv2h;
    d(i, i + 1) = inv2h;
  }
  d(n - 1, n - 1) = 3.0 * inv2h;
  d(n - 1, n - 2) = -4.0 * inv2h;
  d(n - 1, n - 3) = 1.0 * inv2h;
  return {OperatorKind::D1, std::move(d)};
}

/// Second derivative: three-point interior rows, one-sided four-point rows at
/// both ends.
inline DiscreteOperator build_d2(const Grid& grid) {
  const Index n = grid.n;
  const double invh2 = 1.0 / (grid.h * grid.h);
  Matrix d = Matrix::Zero(n, n);
  d(0, 0) = 2.0 * invh2;
  d(0, 1) = -5.0 * invh2;
  d(0, 2) = 4.0 * invh2;
  d(0, 3) = -1.0 * invh2;
  for (Index i = 1; i < n - 1; ++i) {
    d(i, i - 1) = invh2;
    d(i, i) = -2.0 * invh2;
    d(i, i + 1) = invh2;
  }
  d(n - 1, n - 1) = 2.0 * invh2;
  d(n - 1, n - 2) = -5.0 * invh2;
  d(n - 1, n - 3) = 4.0 * invh2;
  d(n - 1, n - 4) = -1.0 * invh2;
  return {OperatorKind::D2, std::move(d)};
}

/// Third derivative as the materialized product D1 * D2. Materialized (not
/// applied factor-by-factor) because the embedded linear operator is built
/// from its rows.
inline DiscreteOperator build_d3(const DiscreteOperator& d1,
                                 const DiscreteOperator& d2) {
  return {OperatorKind::D3, d1.entries * d2.entries};
}

inline DiscreteOperator build_d3(const Grid& grid) {
  return build_d3(build_d1(grid), build_d2(grid));
}

}  // namespace pioham
