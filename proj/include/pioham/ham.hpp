#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pioham/grid.hpp"
#include "pioham/linear_solver.hpp"

namespace pioham {

struct NonfiniteTermError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HamParams {
  double hbar = -0.22222;      // convergence-control parameter, < 0 in practice
  double a = 1.118889;         // initial-guess shape parameter, > 0
  int max_order = 60;
  double eps_ham = 1e-10;      // term-wise truncation tolerance
};

/// Series of correction terms f_0 .. f_M with running partial sums.
/// Second-derivative images of every term are cached so the residual
/// convolution of each new order is a plain elementwise pass.
struct HamSeries {
  std::vector<Vector> terms;
  std::vector<Vector> sums;       // sums[M] = f_0 + ... + f_M
  std::vector<Vector> d2_terms;   // d2_terms[m] = D2 * f_m
  bool truncated_early = false;

  int orders_computed() const { return static_cast<int>(terms.size()) - 1; }

  void push_term(Vector f, const DiscreteOperator& d2) {
    d2_terms.push_back(d2.apply(f));
    if (sums.empty()) {
      sums.push_back(f);
    } else {
      sums.push_back(sums.back() + f);
    }
    terms.push_back(std::move(f));
  }
};

/// f0(eta; a) = eta - (1 - exp(-a*eta)) / a, satisfying f0(0) = 0,
/// f0'(0) = 0 and f0' -> 1 in the far field.
inline Vector initial_guess(const Grid& grid, double a) {
  if (!(a > 0.0)) {
    throw std::invalid_argument("initial_guess: shape parameter must be positive");
  }
  Vector f0 = grid.nodes.array() - (1.0 - (-a * grid.nodes.array()).exp()) / a;
  f0(0) = 0.0;
  return f0;
}

/// R_m = D3 f_{m-1} + 1/2 * sum_{k=0}^{m-1} f_k .* (D2 f_{m-1-k}).
/// Full convolution, no averaging or linearization.
inline Vector ham_residual(const HamSeries& series, int m,
                           const DiscreteOperator& d2,
                           const DiscreteOperator& d3) {
  if (m < 1 || m > series.orders_computed() + 1 ||
      static_cast<int>(series.terms.size()) < m) {
    throw std::out_of_range("ham_residual: terms f_0..f_{m-1} not available");
  }
  Vector r = d3.apply(series.terms[m - 1]);
  Vector conv = Vector::Zero(r.size());
  for (int k = 0; k <= m - 1; ++k) {
    conv += series.terms[k].cwiseProduct(series.d2_terms[m - 1 - k]);
  }
  r += 0.5 * conv;
  return r;
}

/// f_m = chi_m f_{m-1} + hbar * L^{-1} R_m, with chi_1 = 0, chi_m = 1 (m >= 2).
inline Vector ham_step(const Factorization& fac, const HamSeries& series,
                       double hbar, int m, const DiscreteOperator& d2,
                       const DiscreteOperator& d3) {
  if (m < 1) {
    throw std::out_of_range("ham_step: order must be >= 1");
  }
  Vector r = ham_residual(series, m, d2, d3);
  Vector f = hbar * fac.solve_homogeneous(std::move(r));
  if (m >= 2) {
    f += series.terms[m - 1];
  }
  return f;
}

/// Extends a series in place up to target_order, honoring the term-wise
/// stopping criterion ||f_m - f_{m-1}||_inf < eps_ham.
inline void extend_series(HamSeries& series, const Grid& grid,
                          const DiscreteOperator& d2, const DiscreteOperator& d3,
                          const Factorization& fac, const HamParams& params,
                          int target_order) {
  if (series.terms.empty()) {
    series.push_term(initial_guess(grid, params.a), d2);
  }
  for (int m = series.orders_computed() + 1; m <= target_order; ++m) {
    Vector f = ham_step(fac, series, params.hbar, m, d2, d3);
    if (!f.allFinite()) {
      throw NonfiniteTermError("ham series diverged: nonfinite term at order " +
                               std::to_string(m));
    }
    const double step = (f - series.terms.back()).lpNorm<Eigen::Infinity>();
    series.push_term(std::move(f), d2);
    // eps_ham = inf means the criterion is disabled, never fires
    if (std::isfinite(params.eps_ham) && step < params.eps_ham) {
      series.truncated_early = true;
      break;
    }
  }
}

inline HamSeries run_series(const Grid& grid, const DiscreteOperator& d2,
                            const DiscreteOperator& d3, const Factorization& fac,
                            const HamParams& params, int target_order) {
  if (target_order > params.max_order) {
    throw std::invalid_argument("run_series: target_order exceeds max_order");
  }
  HamSeries series;
  extend_series(series, grid, d2, d3, fac, params, target_order);
  return series;
}

inline const Vector& partial_sum(const HamSeries& series, int order) {
  if (order < 0 || order > series.orders_computed()) {
    throw std::out_of_range("partial_sum: order not computed");
  }
  return series.sums[order];
}

}  // namespace pioham
