#pragma once

#include <cmath>
#include <stdexcept>

#include "pioham/grid.hpp"

namespace pioham {

/// Literature benchmark for the Blasius wall shear f''(0).
inline constexpr double kWallShearBenchmark = 0.332057;

struct NonfiniteStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BracketFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reference profile from shooting: f, f' and f'' sampled exactly at the
/// grid nodes, plus the converged wall shear.
struct OracleProfile {
  Vector nodes;
  Vector f;
  Vector fp;
  Vector fpp;
  double fpp0 = 0.0;
};

namespace detail {

struct BlasiusState {
  double f, g, w;  // f, f', f''
};

inline BlasiusState blasius_rhs(const BlasiusState& s) {
  return {s.g, s.w, -0.5 * s.f * s.w};
}

inline BlasiusState rk4_step(const BlasiusState& s, double dt) {
  const BlasiusState k1 = blasius_rhs(s);
  const BlasiusState k2 = blasius_rhs({s.f + 0.5 * dt * k1.f, s.g + 0.5 * dt * k1.g, s.w + 0.5 * dt * k1.w});
  const BlasiusState k3 = blasius_rhs({s.f + 0.5 * dt * k2.f, s.g + 0.5 * dt * k2.g, s.w + 0.5 * dt * k2.w});
  const BlasiusState k4 = blasius_rhs({s.f + dt * k3.f, s.g + dt * k3.g, s.w + dt * k3.w});
  return {s.f + dt / 6.0 * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f),
          s.g + dt / 6.0 * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g),
          s.w + dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
}

}  // namespace detail

/// Classical RK4 on f' = g, g' = w, w' = -f w / 2 from (0, 0, fpp0), with
/// `substeps` internal steps per grid interval; node values are recorded
/// directly, no interpolation.
inline OracleProfile integrate_ivp(double fpp0, const Grid& grid, int substeps) {
  if (!(fpp0 >= 0.0)) {
    throw std::invalid_argument("integrate_ivp: initial curvature must be nonnegative");
  }
  if (substeps < 1) {
    throw std::invalid_argument("integrate_ivp: substeps must be >= 1");
  }
  OracleProfile p;
  p.nodes = grid.nodes;
  p.f.resize(grid.n);
  p.fp.resize(grid.n);
  p.fpp.resize(grid.n);
  p.fpp0 = fpp0;

  detail::BlasiusState s{0.0, 0.0, fpp0};
  p.f(0) = s.f;
  p.fp(0) = s.g;
  p.fpp(0) = s.w;
  const double dt = grid.h / static_cast<double>(substeps);
  for (Index i = 1; i < grid.n; ++i) {
    for (int k = 0; k < substeps; ++k) {
      s = detail::rk4_step(s, dt);
    }
    if (!(std::isfinite(s.f) && std::isfinite(s.g) && std::isfinite(s.w))) {
      throw NonfiniteStateError("integrate_ivp: integration blew up");
    }
    p.f(i) = s.f;
    p.fp(i) = s.g;
    p.fpp(i) = s.w;
  }
  return p;
}

/// Bisection on s = f''(0) over the bracket [0.1, 0.6] until
/// |f'(eta_max; s) - 1| <= tol.
inline OracleProfile solve_reference(const Grid& grid, double tol,
                                     int substeps = 10) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("solve_reference: tolerance must be positive");
  }
  const auto far_field_defect = [&](double s) {
    return integrate_ivp(s, grid, substeps).fp(grid.n - 1) - 1.0;
  };

  double lo = 0.1, hi = 0.6;
  double flo = far_field_defect(lo);
  const double fhi = far_field_defect(hi);
  if (flo * fhi > 0.0) {
    throw BracketFailureError("solve_reference: bracket [0.1, 0.6] does not straddle the root");
  }

  double mid = lo, fmid = flo;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    mid = 0.5 * (lo + hi);
    fmid = far_field_defect(mid);
    if (std::abs(fmid) <= tol) {
      break;
    }
    if (flo * fmid <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  return integrate_ivp(mid, grid, substeps);
}

/// |F''(0) - 0.332057| with F''(0) taken from the D2 boundary stencil.
inline double error_fpp0(const Vector& f, const DiscreteOperator& d2) {
  const double fpp0 = d2.entries.row(0).head(4).dot(f.head(4));
  return std::abs(fpp0 - kWallShearBenchmark);
}

}  // namespace pioham
