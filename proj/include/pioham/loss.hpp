#pragma once

#include <optional>
#include <stdexcept>

#include "pioham/grid.hpp"

namespace pioham {

struct LossWeights {
  double lambda_bc = 1.0;
  double lambda_data = 0.0;
};

struct LossBreakdown {
  double j_res = 0.0;
  double j_bc = 0.0;
  double j_data = 0.0;
  double j_total = 0.0;
};

/// Mean squared Blasius residual D3 F + 1/2 F .* (D2 F) over all N nodes,
/// boundary rows included.
inline double residual_loss(const Vector& f, const DiscreteOperator& d2,
                            const DiscreteOperator& d3) {
  Vector r = d3.apply(f) + 0.5 * f.cwiseProduct(d2.apply(f));
  return r.squaredNorm() / static_cast<double>(f.size());
}

/// F(0)^2 + F'(0)^2 + (F'(eta_max) - 1)^2 with derivatives taken from the
/// one-sided D1 boundary stencils.
inline double bc_loss(const Vector& f, const DiscreteOperator& d1) {
  const Index n = f.size();
  const double fp0 = d1.entries.row(0).head(3).dot(f.head(3));
  const double fpn = d1.entries.row(n - 1).tail(3).dot(f.tail(3));
  return f(0) * f(0) + fp0 * fp0 + (fpn - 1.0) * (fpn - 1.0);
}

inline double data_loss(const Vector& f, const Vector& f_ref) {
  if (f.size() != f_ref.size()) {
    throw std::invalid_argument("data_loss: length mismatch");
  }
  return (f - f_ref).squaredNorm() / static_cast<double>(f.size());
}

/// J = J_res + lambda_bc * J_bc + lambda_data * J_data. When a reference is
/// supplied, J_data is evaluated and reported even at zero weight.
inline LossBreakdown total_loss(const Vector& f, const LossWeights& weights,
                                const Vector* f_ref, const DiscreteOperator& d1,
                                const DiscreteOperator& d2,
                                const DiscreteOperator& d3) {
  if (weights.lambda_data > 0.0 && f_ref == nullptr) {
    throw std::invalid_argument("total_loss: data weight is positive but no reference given");
  }
  LossBreakdown out;
  out.j_res = residual_loss(f, d2, d3);
  out.j_bc = bc_loss(f, d1);
  out.j_data = (f_ref != nullptr) ? data_loss(f, *f_ref) : 0.0;
  out.j_total = out.j_res + weights.lambda_bc * out.j_bc +
                weights.lambda_data * out.j_data;
  return out;
}

}  // namespace pioham
