// pioham: numerical HAM solver for the Blasius boundary layer with
// physics-informed tuning of the convergence-control parameters.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pioham/run.hpp"

namespace {

// Flags shared by every subcommand. Flag values override same-named keys of
// the optional JSON config file.
void add_common_options(CLI::App* cmd, pioham::RunConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file; flags override its keys");
  cmd->add_option("--eta-max", cfg.eta_max, "domain truncation point");
  cmd->add_option("--n-points", cfg.n_points, "grid node count");
  cmd->add_option("--max-order", cfg.optim.max_order, "maximum series order");
  cmd->add_option("--hbar-min", cfg.optim.hbar_min, "lower bound for hbar");
  cmd->add_option("--hbar-max", cfg.optim.hbar_max, "upper bound for hbar");
  cmd->add_option("--a-min", cfg.optim.a_min, "lower bound for a");
  cmd->add_option("--a-max", cfg.optim.a_max, "upper bound for a");
  cmd->add_option("--sweep-hbar", cfg.optim.sweep_hbar, "sweep count along hbar");
  cmd->add_option("--sweep-a", cfg.optim.sweep_a, "sweep count along a");
  cmd->add_option("--w-bc", cfg.optim.weights.lambda_bc, "boundary-condition loss weight");
  cmd->add_option("--w-data", cfg.optim.weights.lambda_data, "data loss weight");
  cmd->add_option("--eps-tol", cfg.optim.eps_tol, "total-loss stopping tolerance");
  cmd->add_option("--eps-imp", cfg.optim.eps_imp, "loss-improvement stopping tolerance");
  cmd->add_option("--eps-ham", cfg.optim.eps_ham, "term-wise series truncation tolerance");
  cmd->add_option("--substeps", cfg.substeps, "RK4 substeps per grid interval");
  cmd->add_option("--workers", cfg.workers, "worker threads for candidate evaluation (0 = all cores)");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_flag("--emit-profile", cfg.emit_profile, "also write profile.csv");
}

void apply_config_file(const CLI::App* cmd, const std::string& config_path,
                       pioham::RunConfig& cfg) {
  if (config_path.empty()) {
    return;
  }
  std::ifstream is(config_path);
  if (!is) {
    throw std::runtime_error("cannot read config file: " + config_path);
  }
  pioham::RunConfig from_file = cfg;
  pioham::from_json_into(pioham::json::parse(is), from_file);
  // Re-apply every flag the user actually passed on top of the file values.
  pioham::RunConfig merged = from_file;
  auto keep = [&](const std::string& flag, auto member_ptr) {
    if (cmd->count(flag) > 0) {
      merged.*member_ptr = cfg.*member_ptr;
    }
  };
  keep("--eta-max", &pioham::RunConfig::eta_max);
  keep("--n-points", &pioham::RunConfig::n_points);
  keep("--substeps", &pioham::RunConfig::substeps);
  keep("--workers", &pioham::RunConfig::workers);
  keep("--out", &pioham::RunConfig::out_dir);
  keep("--emit-profile", &pioham::RunConfig::emit_profile);
  auto keep_opt = [&](const std::string& flag, auto member_ptr) {
    if (cmd->count(flag) > 0) {
      merged.optim.*member_ptr = cfg.optim.*member_ptr;
    }
  };
  keep_opt("--max-order", &pioham::OptimConfig::max_order);
  keep_opt("--hbar-min", &pioham::OptimConfig::hbar_min);
  keep_opt("--hbar-max", &pioham::OptimConfig::hbar_max);
  keep_opt("--a-min", &pioham::OptimConfig::a_min);
  keep_opt("--a-max", &pioham::OptimConfig::a_max);
  keep_opt("--sweep-hbar", &pioham::OptimConfig::sweep_hbar);
  keep_opt("--sweep-a", &pioham::OptimConfig::sweep_a);
  keep_opt("--eps-tol", &pioham::OptimConfig::eps_tol);
  keep_opt("--eps-imp", &pioham::OptimConfig::eps_imp);
  keep_opt("--eps-ham", &pioham::OptimConfig::eps_ham);
  if (cmd->count("--w-bc") > 0) merged.optim.weights.lambda_bc = cfg.optim.weights.lambda_bc;
  if (cmd->count("--w-data") > 0) merged.optim.weights.lambda_data = cfg.optim.weights.lambda_data;
  cfg = merged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physics-informed optimal HAM solver for the Blasius equation"};
  app.require_subcommand(1);

  pioham::RunConfig cfg;
  std::string config_path;

  auto* solve = app.add_subcommand("solve", "order-adaptive optimized solve");
  auto* bench = app.add_subcommand("bench-orders", "error vs order benchmark table");
  auto* weights = app.add_subcommand("weight-study", "loss-weight preset comparison");
  auto* oracle = app.add_subcommand("oracle", "shooting reference profile");
  for (auto* cmd : {solve, bench, weights, oracle}) {
    add_common_options(cmd, cfg, config_path);
  }
  CLI11_PARSE(app, argc, argv);
  auto* cmd = app.get_subcommands().front();

  // Weight-study walks every order of all four presets; keep its default cap
  // low enough for interactive runs.
  if (cmd == weights && cmd->count("--max-order") == 0) {
    cfg.optim.max_order = 30;
  }

  try {
    apply_config_file(cmd, config_path, cfg);
    if (cmd == solve) {
      const auto report = pioham::cmd_solve(cfg);
      std::printf("stop_reason=%s m_star=%d hbar=%.6f a=%.6f j_total=%.6e fpp0=%.9f\n",
                  pioham::to_string(report.result.stop_reason), report.result.m_star,
                  report.result.hbar_star, report.result.a_star,
                  report.result.history.back().loss.j_total, report.fpp0);
    } else if (cmd == bench) {
      const auto res = pioham::cmd_bench_orders(cfg);
      std::printf("bench complete: %zu orders recorded, hbar=%.6f a=%.6f\n",
                  res.history.size(), res.hbar_star, res.a_star);
    } else if (cmd == weights) {
      const auto rows = pioham::cmd_weight_study(cfg);
      for (const auto& row : rows) {
        std::printf("preset bc=%.1f data=%.1f: order@jres<=1e-4 = %d, %.1fs\n",
                    row.preset.w_bc, row.preset.w_data, row.order_to_jres_threshold,
                    row.total_seconds);
      }
    } else {
      const double fpp0 = pioham::cmd_oracle(cfg);
      std::printf("fpp0=%.9f\n", fpp0);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
