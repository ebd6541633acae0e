#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>

#include "pioham/grid.hpp"

namespace pioham {

struct SingularOperatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Auxiliary linear operator: D3 with rows 0, 1, N-1 replaced by the boundary
/// constraints f(0) = 0, f'(0) = 0, f'(eta_max) = 0 (discrete D1 stencils).
struct EmbeddedOperator {
  DiscreteOperator base;  // kind == EmbeddedL

  Index n() const { return base.n(); }
};

inline EmbeddedOperator build_embedded_operator(const DiscreteOperator& d3,
                                                const DiscreteOperator& d1) {
  if (d3.n() != d1.n()) {
    throw std::invalid_argument("build_embedded_operator: operator size mismatch");
  }
  const Index n = d3.n();
  Matrix m = d3.entries;
  m.row(0).setZero();
  m(0, 0) = 1.0;
  m.row(1) = d1.entries.row(0);
  m.row(n - 1) = d1.entries.row(n - 1);
  return {DiscreteOperator{OperatorKind::EmbeddedL, std::move(m)}};
}

/// One-shot LU factorization of the embedded operator, reused for every HAM
/// order and every (hbar, a) candidate on a fixed grid. Immutable after
/// construction; concurrent solves are safe.
class Factorization {
 public:
  explicit Factorization(const EmbeddedOperator& op) : lu_(op.base.entries) {
    const double scale = op.base.entries.cwiseAbs().maxCoeff();
    const double pivot_floor = 1e-12 * scale;
    const auto pivots = lu_.matrixLU().diagonal().cwiseAbs();
    if ((pivots.array() <= pivot_floor).any()) {
      throw SingularOperatorError("factorize: effectively-zero pivot, operator singular");
    }
  }

  Index n() const { return lu_.rows(); }

  /// Solves L u = b with the boundary entries of b zeroed first, so every
  /// solution satisfies the homogeneous constraints u(0) = u'(0) = u'(end) = 0.
  Vector solve_homogeneous(Vector b) const {
    b(0) = 0.0;
    b(1) = 0.0;
    b(b.size() - 1) = 0.0;
    return lu_.solve(b);
  }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
};

inline Factorization factorize(const EmbeddedOperator& op) {
  return Factorization(op);
}

inline Vector solve_homogeneous(const Factorization& fac, Vector b) {
  return fac.solve_homogeneous(std::move(b));
}

}  // namespace pioham
