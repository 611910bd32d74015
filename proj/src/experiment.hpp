#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "config.hpp"
#include "okr/bounds.hpp"
#include "okr/learner.hpp"
#include "okr/mixing.hpp"
#include "okr/oracle.hpp"
#include "okr/run_trace.hpp"
#include "okr/ssmgd.hpp"

namespace okr::harness {

inline constexpr const char* kRngIdentity = "splitmix64-v1";

/// Ground-truth context shared by all seeds of an experiment.
struct OracleBundle {
  QuadratureD q;
  std::shared_ptr<const DiscretizedOperatorD> T;
  TargetSpecD target_spec;
  RidgeSolution<double> ridge;
  double target_knorm = 0;  // ||f_lambda||_K = ||f_1 - f_lambda||_K for f_1 = 0
  double approx_err = 0;    // ||f_lambda - f_rho||_rho
  double approx_bound = 0;  // lambda^nu ||g||_rho
};

OracleBundle build_oracle(const ExperimentConfig& cfg);

/// phi/beta table for t = 1..tmax plus fitted envelopes. Chains whose
/// computed coefficients all sit at numerical zero get the D = 0 profile.
struct MixingReport {
  std::vector<std::tuple<long, double, double>> table;  // (t, phi_t, beta_t)
  MixingProfileD phi_envelope;
  MixingProfileD beta_envelope;
};

MixingReport mixing_report(const CopulaD& copula, int tmax, int grid_n);

struct SeedResult {
  std::uint64_t seed = 0;
  RunTrace trace;
  double wall_seconds = 0;
};

struct CheckpointStats {
  double mean = 0, median = 0, p10 = 0, p90 = 0;
};

struct Aggregate {
  std::vector<long> t;
  std::vector<CheckpointStats> k, rho, frho;
};

/// Permutation-invariant in seed order (seeds are sorted internally).
Aggregate aggregate_results(const std::vector<SeedResult>& results);

struct ExperimentReport {
  std::string out_dir;
  MixingReport mixing;
  Aggregate agg;
  SlopeFit k_slope, rho_slope;
  double approx_err = 0, approx_bound = 0;
  double oracle_residual = 0;
  std::vector<double> init_bounds, samp_sq_bounds;  // per checkpoint, at cfg.delta
  bool assertions_ok = false;
  double wall_seconds = 0;
};

/// Full multi-seed experiment: builds the oracle, computes the mixing
/// profile, runs every seed, and writes seed_<s>.csv, aggregate.csv,
/// mixing.csv, bounds.csv, report.svg and manifest.json under
/// <output_dir>/<config_hash>/.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int jobs);

struct CoverageReport {
  std::vector<long> t;
  std::vector<double> bound;     // init + sqrt(samp^2) at delta
  std::vector<double> fraction;  // violating seeds / seeds
  double delta = 0;
  bool pass = false;
};

/// Theorem-style coverage: needs >= 100 seeds.
CoverageReport coverage_report(const ExperimentConfig& cfg, double delta, int jobs);

struct CompareReport {
  std::vector<long> t;
  std::vector<double> iid_mean, dep_mean, ratio;
  SlopeFit iid_slope, dep_slope;
  double slope_diff = 0;
  double mean_ratio = 0;  // informational constants ratio at the last checkpoint
  bool pass = false;
};

/// Same experiment under (a) the independence copula and (b) the configured
/// copula, same seeds; asserts the fitted slopes agree within slope_tol.
CompareReport compare_iid_vs_markov(const ExperimentConfig& cfg, int jobs, double slope_tol);

struct SsmgdReport {
  std::string out_dir;
  MixingReport mixing;
  Aggregate agg;  // k column carries ||w_t - w*||
  AssumptionReport<double> assumptions;
  double w_star_norm = 0;
  std::vector<double> bound;     // init + sqrt(samp^2) at cfg.delta
  std::vector<double> fraction;  // coverage violations per checkpoint
  bool coverage_pass = false;
  double wall_seconds = 0;
};

SsmgdReport run_ssmgd_experiment(const SsmgdConfig& cfg, int jobs);

/// Bound-table evaluation for the `bounds` subcommand: the cross product of
/// the (scalar or array) keys theta, lambda, ck2, M, delta, D, r, t and a
/// fixed init_dist. Rows follow kBoundsCsvHeader.
struct BoundsRow {
  double theta, lambda, ck2, M, delta, D, r;
  long t;
  double e_init, e_samp_sq, mixing_factor, composite_rate;
};

std::vector<BoundsRow> bounds_table(const Value& root);

/// Oracle disk cache: flat binary arrays keyed by fnv1a64(kernel canonical
/// descriptor + resolution). Returns the cache path used.
std::string oracle_cache_path(const std::string& dir, const KernelD& kernel, int n);
void save_oracle_cache(const std::string& path, const DiscretizedOperatorD& T);
std::shared_ptr<const DiscretizedOperatorD> load_oracle_cache(const std::string& path,
                                                              const KernelD& kernel, int n);
/// Load when a valid cache file exists, otherwise build and store.
std::shared_ptr<const DiscretizedOperatorD> load_or_build_oracle(const std::string& cache_dir,
                                                                 const KernelD& kernel, int n);

}  // namespace okr::harness
