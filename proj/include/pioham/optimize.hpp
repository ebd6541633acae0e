#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pioham/blasius_reference.hpp"
#include "pioham/grid.hpp"
#include "pioham/ham.hpp"
#include "pioham/linear_solver.hpp"
#include "pioham/loss.hpp"

namespace pioham {

struct AllDivergentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OptimConfig {
  double hbar_min = -1.0;
  double hbar_max = -0.05;
  double a_min = 0.6;
  double a_max = 2.0;
  int sweep_hbar = 10;
  int sweep_a = 10;
  double eps_tol = 1e-7;
  double eps_imp = 1e-10;
  int max_order = 60;
  int first_order = 2;
  double eps_ham = 1e-10;
  LossWeights weights{1.0, 0.0};
};

enum class StopReason { TolReached, ImprovementStalled, MaxOrder };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::TolReached: return "tol-reached";
    case StopReason::ImprovementStalled: return "improvement-stalled";
    case StopReason::MaxOrder: return "max-order";
  }
  return "unknown";
}

struct OrderRecord {
  int order = 0;
  LossBreakdown loss;
  double hbar = 0.0;
  double a = 0.0;
  double abs_err_fpp0 = 0.0;
  double seconds_cumulative = 0.0;
};

struct OptimResult {
  double hbar_star = 0.0;
  double a_star = 0.0;
  int m_star = 0;
  std::vector<OrderRecord> history;
  StopReason stop_reason = StopReason::MaxOrder;
};

/// Read-only evaluation context shared by all candidates. The factorization
/// depends on the grid only, never on (hbar, a), so it is computed once.
struct Context {
  const Grid* grid = nullptr;
  const DiscreteOperator* d1 = nullptr;
  const DiscreteOperator* d2 = nullptr;
  const DiscreteOperator* d3 = nullptr;
  const Factorization* fac = nullptr;
  LossWeights weights;
  const Vector* f_ref = nullptr;  // may be null when lambda_data == 0
  double eps_ham = 1e-10;
};

/// Composite loss of the order-M truncation at (hbar, a). Divergent series
/// map to +inf instead of throwing so sweeps can ride over bad candidates.
inline LossBreakdown objective(double hbar, double a, int order, const Context& ctx) {
  try {
    const HamParams params{hbar, a, std::max(order, 1), ctx.eps_ham};
    const HamSeries series =
        run_series(*ctx.grid, *ctx.d2, *ctx.d3, *ctx.fac, params, order);
    const Vector& f = partial_sum(series, std::min(order, series.orders_computed()));
    return total_loss(f, ctx.weights, ctx.f_ref, *ctx.d1, *ctx.d2, *ctx.d3);
  } catch (const NonfiniteTermError&) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return LossBreakdown{inf, inf, inf, inf};
  }
}

/// Evaluates all candidates over a read-only context. Output order matches
/// input order and is bit-identical to a sequential pass for any worker count.
inline std::vector<LossBreakdown> parallel_map_candidates(
    const std::vector<std::pair<double, double>>& candidates, int order,
    const Context& ctx, int workers = 0) {
  std::vector<LossBreakdown> out(candidates.size());
  if (candidates.empty()) {
    return out;
  }
  unsigned nthreads = workers > 0 ? static_cast<unsigned>(workers)
                                  : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<unsigned>(nthreads, static_cast<unsigned>(candidates.size()));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      out[i] = objective(candidates[i].first, candidates[i].second, order, ctx);
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < candidates.size(); i = next.fetch_add(1)) {
      out[i] = objective(candidates[i].first, candidates[i].second, order, ctx);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (unsigned t = 0; t < nthreads; ++t) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) {
    t.join();
  }
  return out;
}

struct SweepResult {
  double hbar = 0.0;
  double a = 0.0;
  LossBreakdown loss;
};

namespace detail {

inline std::vector<double> sweep_values(double lo, double hi, int count) {
  if (count <= 1) {
    return {lo};
  }
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return v;
}

inline double clamp(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

}  // namespace detail

/// Stage 1: exhaustive tensor-grid sweep, endpoints inclusive. Ties go to the
/// lexicographically smallest (hbar, a), which is the enumeration order here.
inline SweepResult coarse_sweep(const OptimConfig& cfg, int order, const Context& ctx,
                                int workers = 0) {
  const auto hbars = detail::sweep_values(cfg.hbar_min, cfg.hbar_max, cfg.sweep_hbar);
  const auto as = detail::sweep_values(cfg.a_min, cfg.a_max, cfg.sweep_a);
  std::vector<std::pair<double, double>> candidates;
  candidates.reserve(hbars.size() * as.size());
  for (double hb : hbars) {
    for (double a : as) {
      candidates.emplace_back(hb, a);
    }
  }
  const auto losses = parallel_map_candidates(candidates, order, ctx, workers);
  std::size_t best = 0;
  for (std::size_t i = 1; i < losses.size(); ++i) {
    if (losses[i].j_total < losses[best].j_total) {
      best = i;
    }
  }
  if (std::isinf(losses[best].j_total)) {
    throw AllDivergentError("coarse_sweep: every candidate diverged");
  }
  return {candidates[best].first, candidates[best].second, losses[best]};
}

/// Stage 2: bound-constrained quasi-Newton (BFGS) descent with central
/// finite-difference gradients. Probes clamp to the box; the result never
/// worsens the starting loss.
inline SweepResult local_refine(double hbar0, double a0, const OptimConfig& cfg,
                                int order, const Context& ctx) {
  const double lo[2] = {cfg.hbar_min, cfg.a_min};
  const double hi[2] = {cfg.hbar_max, cfg.a_max};
  double x[2] = {detail::clamp(hbar0, lo[0], hi[0]), detail::clamp(a0, lo[1], hi[1])};

  auto eval = [&](const double p[2]) { return objective(p[0], p[1], order, ctx); };

  LossBreakdown fx = eval(x);
  SweepResult best{x[0], x[1], fx};
  if (std::isinf(fx.j_total)) {
    return best;
  }

  auto gradient = [&](const double p[2], double g[2]) {
    for (int d = 0; d < 2; ++d) {
      const double step = std::max(1e-4 * std::abs(p[d]), 1e-6);
      double pp[2] = {p[0], p[1]};
      double pm[2] = {p[0], p[1]};
      pp[d] = detail::clamp(p[d] + step, lo[d], hi[d]);
      pm[d] = detail::clamp(p[d] - step, lo[d], hi[d]);
      const double denom = pp[d] - pm[d];
      g[d] = denom > 0.0 ? (eval(pp).j_total - eval(pm).j_total) / denom : 0.0;
    }
  };

  double g[2];
  gradient(x, g);
  double hinv[2][2] = {{1.0, 0.0}, {0.0, 1.0}};  // inverse Hessian estimate

  for (int it = 0; it < 40; ++it) {
    if (!std::isfinite(g[0]) || !std::isfinite(g[1])) {
      break;
    }
    double dir[2] = {-(hinv[0][0] * g[0] + hinv[0][1] * g[1]),
                     -(hinv[1][0] * g[0] + hinv[1][1] * g[1])};
    if (dir[0] * g[0] + dir[1] * g[1] > 0.0) {  // not a descent direction, reset
      dir[0] = -g[0];
      dir[1] = -g[1];
      hinv[0][0] = hinv[1][1] = 1.0;
      hinv[0][1] = hinv[1][0] = 0.0;
    }

    double t = 1.0;
    double y[2];
    LossBreakdown fy;
    bool accepted = false;
    for (int ls = 0; ls < 25; ++ls) {
      y[0] = detail::clamp(x[0] + t * dir[0], lo[0], hi[0]);
      y[1] = detail::clamp(x[1] + t * dir[1], lo[1], hi[1]);
      fy = eval(y);
      if (fy.j_total < fx.j_total) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      break;
    }

    double gnew[2];
    gradient(y, gnew);
    const double s[2] = {y[0] - x[0], y[1] - x[1]};
    const double yk[2] = {gnew[0] - g[0], gnew[1] - g[1]};
    const double sy = s[0] * yk[0] + s[1] * yk[1];
    if (sy > 1e-300) {  // BFGS inverse update (2x2, written out)
      const double rho = 1.0 / sy;
      double hy[2] = {hinv[0][0] * yk[0] + hinv[0][1] * yk[1],
                      hinv[1][0] * yk[0] + hinv[1][1] * yk[1]};
      const double yhy = yk[0] * hy[0] + yk[1] * hy[1];
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          hinv[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j] -
                        rho * (s[i] * hy[j] + hy[i] * s[j]);
        }
      }
    }

    const double improvement = fx.j_total - fy.j_total;
    x[0] = y[0];
    x[1] = y[1];
    fx = fy;
    g[0] = gnew[0];
    g[1] = gnew[1];
    if (fx.j_total < best.loss.j_total) {
      best = {x[0], x[1], fx};
    }
    if (improvement < 1e-6 * std::max(std::abs(fx.j_total), 1e-300)) {
      break;
    }
  }
  return best;
}

/// Order-adaptive driver: full sweep + refine at the first order, refine-only
/// warm starts thereafter; an order that worsens the evaluated optimum keeps
/// the previous parameters for its record, so recorded losses never increase.
inline OptimResult order_adaptive_solve(const OptimConfig& cfg, const Context& ctx,
                                        int workers = 0) {
  if (cfg.max_order < 1) {
    throw std::invalid_argument("order_adaptive_solve: max_order must be >= 1");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  OptimResult result;

  // Incumbent series cache: extended order by order while the parameters hold.
  HamSeries cache;
  double cache_hbar = std::numeric_limits<double>::quiet_NaN();
  double cache_a = cache_hbar;
  auto incumbent_error = [&](double hbar, double a, int order) {
    if (hbar != cache_hbar || a != cache_a) {
      cache = HamSeries{};
      cache_hbar = hbar;
      cache_a = a;
    }
    const HamParams params{hbar, a, std::max(order, 1), ctx.eps_ham};
    extend_series(cache, *ctx.grid, *ctx.d2, *ctx.d3, *ctx.fac, params, order);
    const Vector& f = partial_sum(cache, std::min(order, cache.orders_computed()));
    return error_fpp0(f, *ctx.d2);
  };

  const int first = std::min(cfg.first_order, cfg.max_order);
  const SweepResult seed = coarse_sweep(cfg, first, ctx, workers);
  SweepResult current = local_refine(seed.hbar, seed.a, cfg, first, ctx);

  auto record = [&](int order) {
    result.history.push_back({order, current.loss, current.hbar, current.a,
                              incumbent_error(current.hbar, current.a, order),
                              elapsed()});
    result.hbar_star = current.hbar;
    result.a_star = current.a;
    result.m_star = order;
  };

  record(first);
  if (current.loss.j_total < cfg.eps_tol) {
    result.stop_reason = StopReason::TolReached;
    return result;
  }

  for (int order = first + 1; order <= cfg.max_order; ++order) {
    const double prev_total = result.history.back().loss.j_total;
    const SweepResult refined = local_refine(current.hbar, current.a, cfg, order, ctx);
    if (refined.loss.j_total <= prev_total) {
      current = refined;
    } else {
      current.loss = result.history.back().loss;  // hold parameters and value
    }
    record(order);
    if (current.loss.j_total < cfg.eps_tol) {
      result.stop_reason = StopReason::TolReached;
      return result;
    }
    if (std::abs(current.loss.j_total - prev_total) < cfg.eps_imp) {
      result.stop_reason = StopReason::ImprovementStalled;
      return result;
    }
  }
  result.stop_reason = StopReason::MaxOrder;
  return result;
}

}  // namespace pioham
