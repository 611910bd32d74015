// okr — online kernel regression on dependent samples: chain simulation,
// mixing coefficients, oracle construction, training runs and bound reports.
// Exit codes: 0 success, 1 assertion failure, 2 usage/config error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "experiment.hpp"
#include "okr/chain.hpp"

namespace {

using namespace okr;
using namespace okr::harness;

struct GlobalArgs {
  std::string config_path;
  std::string out_override;
  int jobs = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed_base = 1;
};

Value load_config(const GlobalArgs& g) {
  if (g.config_path.empty()) throw std::invalid_argument("--config <path> is required");
  return parse_config_file(g.config_path);
}

ExperimentConfig load_experiment(const GlobalArgs& g) {
  auto cfg = experiment_from_value(load_config(g), g.seed_base);
  if (!g.out_override.empty()) cfg.output_dir = g.out_override;
  return cfg;
}

SsmgdConfig load_ssmgd(const GlobalArgs& g) {
  auto cfg = ssmgd_from_value(load_config(g), g.seed_base);
  if (!g.out_override.empty()) cfg.output_dir = g.out_override;
  return cfg;
}

int cmd_chain(const GlobalArgs& g) {
  const Value root = load_config(g);
  ChainConfig cc;
  cc.copula = copula_from_value(root.at("copula"));
  cc.length = long(root.at("chain_length").as_integer());
  cc.seed = g.seed_base;
  if (const Value* v = root.find("burn_in")) cc.burn_in = long(v->as_integer());
  const auto u = sample_chain(cc);

  const double mean = u.mean();
  const double sd = std::sqrt((u.array() - mean).square().sum() / double(u.size()));
  double lag1 = 0;
  if (u.size() > 1) {
    const auto a = u.head(u.size() - 1), b = u.tail(u.size() - 1);
    lag1 = ((a.array() - a.mean()) * (b.array() - b.mean())).sum() /
           (std::sqrt((a.array() - a.mean()).square().sum()) *
            std::sqrt((b.array() - b.mean()).square().sum()));
  }
  Eigen::VectorXd sorted = u;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  double ks = 0;
  for (Eigen::Index i = 0; i < sorted.size(); ++i) {
    ks = std::max(ks, std::abs(double(i + 1) / double(sorted.size()) - sorted[i]));
    ks = std::max(ks, std::abs(sorted[i] - double(i) / double(sorted.size())));
  }
  std::printf("chain: n=%ld seed=%llu copula=%s\n", long(u.size()),
              (unsigned long long)cc.seed, cc.copula.canonical().c_str());
  std::printf("  mean=%.6f sd=%.6f lag1_corr=%.6f ks_vs_uniform=%.6f\n", mean, sd, lag1, ks);

  std::string out_dir = !g.out_override.empty()
                            ? g.out_override
                            : (root.find("output_dir") ? root.at("output_dir").as_string() : "out");
  std::filesystem::create_directories(out_dir);
  CsvWriter csv(out_dir + "/chain.csv", "t,u");
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    csv.field(long(i + 1));
    csv.field(u[i]);
    csv.end_row();
  }
  std::printf("  wrote %s/chain.csv\n", out_dir.c_str());
  return 0;
}

int cmd_mixing(const GlobalArgs& g) {
  const Value root = load_config(g);
  const auto copula = copula_from_value(root.at("copula"));
  const int tmax = root.find("mixing_tmax") ? int(root.at("mixing_tmax").as_integer()) : 6;
  const int grid_n = root.find("mixing_grid_n") ? int(root.at("mixing_grid_n").as_integer()) : 512;
  const auto rep = mixing_report(copula, tmax, grid_n);

  std::printf("%4s %12s %12s\n", "t", "phi", "beta");
  for (const auto& [t, phi, beta] : rep.table) std::printf("%4ld %12.6g %12.6g\n", t, phi, beta);
  std::printf("phi envelope:  D=%.6g r=%.6g\n", rep.phi_envelope.D, rep.phi_envelope.r);
  std::printf("beta envelope: D=%.6g r=%.6g\n", rep.beta_envelope.D, rep.beta_envelope.r);

  std::string out_dir = !g.out_override.empty()
                            ? g.out_override
                            : (root.find("output_dir") ? root.at("output_dir").as_string() : "out");
  std::filesystem::create_directories(out_dir);
  CsvWriter csv(out_dir + "/mixing.csv", kMixingCsvHeader);
  for (const auto& [t, phi, beta] : rep.table) {
    csv.field(t);
    csv.field(phi);
    csv.field(beta);
    csv.field(rep.phi_envelope.D);
    csv.field(rep.phi_envelope.r);
    csv.end_row();
  }
  std::printf("wrote %s/mixing.csv\n", out_dir.c_str());
  return 0;
}

int cmd_oracle(const GlobalArgs& g) {
  const auto cfg = load_experiment(g);
  const auto bundle = build_oracle(cfg);
  std::printf("oracle: kernel=%s n=%d\n", cfg.kernel.canonical().c_str(), cfg.quadrature_n);
  std::printf("  spectral_radius=%.9g (C_K^2=%.9g)\n", bundle.T->spectral_radius(),
              cfg.kernel.sup_bound_sq());
  std::printf("  ridge residual_sup=%.3e (lambda=%g)\n", bundle.ridge.residual_sup, cfg.lambda);
  std::printf("  approx_err=%.6g <= bound=%.6g (lambda^nu ||g||)\n", bundle.approx_err,
              bundle.approx_bound);
  const std::string cache_dir = (std::filesystem::path(cfg.output_dir) / "cache").string();
  const std::string path = oracle_cache_path(cache_dir, cfg.kernel, cfg.quadrature_n);
  save_oracle_cache(path, *bundle.T);
  std::printf("  cached -> %s\n", path.c_str());
  return bundle.ridge.residual_sup <= 1e-8 ? 0 : 1;
}

int cmd_train(const GlobalArgs& g) {
  auto cfg = load_experiment(g);
  cfg.seeds.resize(1);  // single run: first seed
  const auto rep = run_experiment(cfg, 1);
  std::printf("train: seed=%llu out=%s\n", (unsigned long long)cfg.seeds[0], rep.out_dir.c_str());
  std::printf("%10s %14s %14s %14s\n", "t", "k_dist", "rho_dist", "rho_to_frho");
  for (std::size_t c = 0; c < rep.agg.t.size(); ++c)
    std::printf("%10ld %14.6g %14.6g %14.6g\n", rep.agg.t[c], rep.agg.k[c].mean,
                rep.agg.rho[c].mean, rep.agg.frho[c].mean);
  return rep.assertions_ok ? 0 : 1;
}

int cmd_experiment(const GlobalArgs& g) {
  const auto cfg = load_experiment(g);
  const auto rep = run_experiment(cfg, g.jobs);
  std::printf("experiment: %zu seeds, out=%s\n", cfg.seeds.size(), rep.out_dir.c_str());
  std::printf("  oracle residual=%.3e approx_err=%.6g (bound %.6g)\n", rep.oracle_residual,
              rep.approx_err, rep.approx_bound);
  std::printf("  phi envelope D=%.4g r=%.4g\n", rep.mixing.phi_envelope.D,
              rep.mixing.phi_envelope.r);
  std::printf("  mean k-dist slope=%.4f (r2=%.3f), rho slope=%.4f\n", rep.k_slope.slope,
              rep.k_slope.r2, rep.rho_slope.slope);
  std::printf("  wall=%.1fs assertions=%s\n", rep.wall_seconds, rep.assertions_ok ? "ok" : "FAILED");
  return rep.assertions_ok ? 0 : 1;
}

int cmd_coverage(const GlobalArgs& g, double delta_override) {
  const auto cfg = load_experiment(g);
  const double delta = delta_override > 0 ? delta_override : cfg.delta;
  const auto rep = coverage_report(cfg, delta, g.jobs);
  std::printf("coverage at delta=%.3f over %zu seeds:\n", delta, cfg.seeds.size());
  for (std::size_t c = 0; c < rep.t.size(); ++c)
    std::printf("  t=%-8ld bound=%-12.6g violation_fraction=%.4f\n", rep.t[c], rep.bound[c],
                rep.fraction[c]);
  std::printf("coverage %s\n", rep.pass ? "PASS" : "FAIL");
  return rep.pass ? 0 : 1;
}

int cmd_compare(const GlobalArgs& g, double slope_tol) {
  const auto cfg = load_experiment(g);
  const auto rep = compare_iid_vs_markov(cfg, g.jobs, slope_tol);
  std::printf("compare (iid arm vs %s):\n", cfg.copula.canonical().c_str());
  std::printf("%10s %14s %14s %10s\n", "t", "k_mean_iid", "k_mean_dep", "ratio");
  for (std::size_t c = 0; c < rep.t.size(); ++c)
    std::printf("%10ld %14.6g %14.6g %10.4f\n", rep.t[c], rep.iid_mean[c], rep.dep_mean[c],
                rep.ratio[c]);
  std::printf("slopes: iid=%.4f dep=%.4f |diff|=%.4f (tol %.2f); final constants ratio %.4f\n",
              rep.iid_slope.slope, rep.dep_slope.slope, rep.slope_diff, slope_tol, rep.mean_ratio);
  std::printf("compare %s\n", rep.pass ? "PASS" : "FAIL");
  return rep.pass ? 0 : 1;
}

int cmd_bounds(const GlobalArgs& g) {
  const Value root = load_config(g);
  const auto rows = bounds_table(root);
  std::string out_dir = !g.out_override.empty()
                            ? g.out_override
                            : (root.find("output_dir") ? root.at("output_dir").as_string() : "out");
  std::filesystem::create_directories(out_dir);
  CsvWriter csv(out_dir + "/bounds.csv", kBoundsCsvHeader);
  std::printf("%6s %8s %6s %6s %6s %6s %6s %8s %13s %14s %13s %14s\n", "theta", "lambda", "ck2",
              "M", "delta", "D", "r", "t", "e_init", "e_samp_sq", "mix_factor", "composite");
  for (const auto& r : rows) {
    std::printf("%6.3f %8.4g %6.3g %6.3g %6.3f %6.3g %6.3g %8ld %13.6g %14.6g %13.6g %14.6g\n",
                r.theta, r.lambda, r.ck2, r.M, r.delta, r.D, r.r, r.t, r.e_init, r.e_samp_sq,
                r.mixing_factor, r.composite_rate);
    csv.field(r.theta);
    csv.field(r.lambda);
    csv.field(r.ck2);
    csv.field(r.M);
    csv.field(r.delta);
    csv.field(r.D);
    csv.field(r.r);
    csv.field(r.t);
    csv.field(r.e_init);
    csv.field(r.e_samp_sq);
    csv.field(r.mixing_factor);
    csv.field(r.composite_rate);
    csv.end_row();
  }
  std::printf("wrote %s/bounds.csv\n", out_dir.c_str());
  return 0;
}

int cmd_ssmgd(const GlobalArgs& g) {
  const auto cfg = load_ssmgd(g);
  const auto rep = run_ssmgd_experiment(cfg, g.jobs);
  std::printf("ssmgd: dim=%d theta=%.3f %zu seeds, out=%s\n", cfg.dim, cfg.theta,
              cfg.seeds.size(), rep.out_dir.c_str());
  std::printf("  sigma^2=%.6g kappa_hat=%.4f eta_hat=%.4f ||w*||=%.4f\n",
              rep.assumptions.sigma_sq, rep.assumptions.kappa_hat, rep.assumptions.eta_hat,
              rep.w_star_norm);
  std::printf("  phi envelope D=%.4g r=%.4g\n", rep.mixing.phi_envelope.D,
              rep.mixing.phi_envelope.r);
  for (std::size_t c = 0; c < rep.bound.size(); ++c)
    std::printf("  t=%-8ld mean_err=%-12.6g bound=%-12.6g violation_fraction=%.4f\n",
                rep.agg.t[c], rep.agg.k[c].mean, rep.bound[c], rep.fraction[c]);
  std::printf("coverage %s (delta=%.3f)\n", rep.coverage_pass ? "PASS" : "FAIL", cfg.delta);
  return rep.coverage_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"okr: online kernel regression on mixing Markov chains"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_path, "config file path");
  app.add_option("--jobs", g.jobs, "worker threads for multi-seed runs");
  app.add_option("--out", g.out_override, "output directory (overrides config output_dir)");
  app.add_option("--seed-base", g.seed_base, "base seed when the config uses num_seeds");

  auto* chain = app.add_subcommand("chain", "sample a copula chain and print stats");
  auto* mixing = app.add_subcommand("mixing", "phi/beta table and envelope fit");
  auto* oracle = app.add_subcommand("oracle", "build the discretized operator; residual report");
  auto* train = app.add_subcommand("train", "single-seed training run");
  auto* experiment = app.add_subcommand("experiment", "multi-seed experiment with reports");
  auto* coverage = app.add_subcommand("coverage", "high-probability bound coverage check");
  auto* compare = app.add_subcommand("compare", "same experiment under iid vs the configured copula");
  auto* bounds = app.add_subcommand("bounds", "bound table over a parameter grid");
  auto* ssmgd = app.add_subcommand("ssmgd", "finite-dimensional quadratic SS-MGD runs");

  double delta_override = -1;
  coverage->add_option("--delta", delta_override, "coverage level (defaults to config delta)");
  double slope_tol = 0.1;
  compare->add_option("--slope-tol", slope_tol, "max allowed |slope difference|");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (chain->parsed()) return cmd_chain(g);
    if (mixing->parsed()) return cmd_mixing(g);
    if (oracle->parsed()) return cmd_oracle(g);
    if (train->parsed()) return cmd_train(g);
    if (experiment->parsed()) return cmd_experiment(g);
    if (coverage->parsed()) return cmd_coverage(g, delta_override);
    if (compare->parsed()) return cmd_compare(g, slope_tol);
    if (bounds->parsed()) return cmd_bounds(g);
    if (ssmgd->parsed()) return cmd_ssmgd(g);
  } catch (const okr::harness::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 1;
  }
  return 2;
}
