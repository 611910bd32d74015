#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "csv.hpp"
#include "json.hpp"
#include "okr/chain.hpp"
#include "svg.hpp"

namespace okr::harness {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// index-parallel loop; first worker exception rethrows after join
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min<int>(jobs, int(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(jobs));
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

double percentile(std::vector<double> sorted, double q) {
  const double idx = q * double(sorted.size() - 1);
  const std::size_t lo = std::size_t(idx);
  const double frac = idx - double(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return (1 - frac) * sorted[lo] + frac * sorted[lo + 1];
}

CheckpointStats stats_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  CheckpointStats s;
  double acc = 0;
  for (double v : values) acc += v;
  s.mean = acc / double(values.size());
  s.median = percentile(values, 0.5);
  s.p10 = percentile(values, 0.1);
  s.p90 = percentile(values, 0.9);
  return s;
}

std::vector<SeedResult> execute_seeds(const ExperimentConfig& cfg, const OracleBundle& oracle,
                                      int jobs) {
  const LearnerConfigD lcfg(cfg.lambda, cfg.theta, cfg.kernel, cfg.M);
  std::vector<SeedResult> results(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), jobs, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const double t0 = now_seconds();
    const auto chain = sample_chain({cfg.copula, cfg.chain_length, seed, 0});
    const auto stream = label_stream(
        chain, [&](double x) { return oracle.target_spec.frho_extension.evaluate(x); },
        cfg.noise_sd, cfg.M, seed);
    RunTrace trace = run<double>(stream.x, stream.y, lcfg, cfg.checkpoints,
                                 oracle.ridge.expansion, oracle.target_spec.frho_nodes, oracle.q);
    results[i] = SeedResult{seed, std::move(trace), now_seconds() - t0};
  });
  return results;
}

void write_seed_csv(const std::string& path, const SeedResult& r) {
  CsvWriter csv(path, kSeedCsvHeader);
  for (const auto& cp : r.trace.checkpoints) {
    csv.field(cp.t);
    csv.field(cp.k_dist_to_target);
    csv.field(cp.rho_dist_to_target);
    csv.field(cp.rho_dist_to_frho);
    csv.field(cp.atoms);
    csv.end_row();
  }
}

void write_aggregate_csv(const std::string& path, const Aggregate& agg) {
  CsvWriter csv(path, kAggregateCsvHeader);
  for (std::size_t i = 0; i < agg.t.size(); ++i) {
    csv.field(agg.t[i]);
    for (const auto* col : {&agg.k[i], &agg.rho[i], &agg.frho[i]}) {
      csv.field(col->mean);
      csv.field(col->median);
      csv.field(col->p10);
      csv.field(col->p90);
    }
    csv.end_row();
  }
}

void write_mixing_csv(const std::string& path, const MixingReport& mix) {
  CsvWriter csv(path, kMixingCsvHeader);
  for (const auto& [t, phi, beta] : mix.table) {
    csv.field(t);
    csv.field(phi);
    csv.field(beta);
    csv.field(mix.phi_envelope.D);
    csv.field(mix.phi_envelope.r);
    csv.end_row();
  }
}

double composite_rate(double theta, double lambda, double ck2, long t) {
  if (theta < 1)
    return std::pow(lambda, -composite_rate_tau(theta)) * std::pow(double(t), -theta / 2);
  const double alpha = alpha_ratio(lambda, ck2);
  return std::pow(lambda, -1.0) * std::pow(double(t), -alpha / 2);
}

json slope_json(const SlopeFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

json mixing_json(const MixingReport& mix) {
  json table = json::array();
  for (const auto& [t, phi, beta] : mix.table) table.push_back({{"t", t}, {"phi", phi}, {"beta", beta}});
  return json{{"table", table},
              {"phi_envelope", {{"D", mix.phi_envelope.D}, {"r", mix.phi_envelope.r}}},
              {"beta_envelope", {{"D", mix.beta_envelope.D}, {"r", mix.beta_envelope.r}}}};
}

std::vector<std::pair<double, double>> mean_series(const Aggregate& agg,
                                                   const std::vector<CheckpointStats>& col) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < agg.t.size(); ++i) pts.emplace_back(double(agg.t[i]), col[i].mean);
  return pts;
}

}  // namespace

OracleBundle build_oracle(const ExperimentConfig& cfg) {
  QuadratureD q = QuadratureD::gauss_legendre(cfg.quadrature_n);
  auto T = std::make_shared<const DiscretizedOperatorD>(cfg.kernel, q);
  Eigen::VectorXd g_nodes(q.nodes.size());
  const auto g = target_function(cfg.target_g);
  for (Eigen::Index i = 0; i < q.nodes.size(); ++i) g_nodes[i] = g(q.nodes[i]);
  TargetSpecD spec = source_target(*T, g_nodes, cfg.target_nu);
  RidgeSolution<double> ridge = ridge_solution(*T, cfg.lambda, spec.frho_nodes);
  const double knorm = ridge.expansion.k_norm();
  const auto [err, bound] = approx_error_check(*T, cfg.lambda, spec, q);
  return OracleBundle{std::move(q),   std::move(T), std::move(spec),
                      std::move(ridge), knorm,      err,
                      bound};
}

MixingReport mixing_report(const CopulaD& copula, int tmax, int grid_n) {
  MixingReport rep;
  std::vector<std::pair<long, double>> phi_vals, beta_vals;
  for (int t = 1; t <= tmax; ++t) {
    const auto ct = iterate_copula(copula, t, grid_n);
    const double phi = phi_coefficient(ct);
    const double beta = beta_coefficient(ct);
    rep.table.emplace_back(t, phi, beta);
    if (phi > 1e-14) phi_vals.emplace_back(t, phi);
    if (beta > 1e-14) beta_vals.emplace_back(t, beta);
  }
  rep.phi_envelope = phi_vals.size() >= 2
                         ? fit_mixing_profile(phi_vals, MixingKind::exponential)
                         : MixingProfileD::iid();
  rep.beta_envelope = beta_vals.size() >= 2
                          ? fit_mixing_profile(beta_vals, MixingKind::exponential)
                          : MixingProfileD::iid();
  return rep;
}

Aggregate aggregate_results(const std::vector<SeedResult>& results) {
  if (results.empty()) throw StatisticsError("aggregate: no results");
  std::vector<const SeedResult*> ordered;
  ordered.reserve(results.size());
  for (const auto& r : results) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const SeedResult* a, const SeedResult* b) { return a->seed < b->seed; });

  const std::size_t ncp = ordered.front()->trace.checkpoints.size();
  Aggregate agg;
  for (std::size_t c = 0; c < ncp; ++c) {
    agg.t.push_back(ordered.front()->trace.checkpoints[c].t);
    std::vector<double> k, rho, frho;
    for (const auto* r : ordered) {
      if (r->trace.checkpoints.size() != ncp)
        throw StatisticsError("aggregate: ragged checkpoint lists");
      k.push_back(r->trace.checkpoints[c].k_dist_to_target);
      rho.push_back(r->trace.checkpoints[c].rho_dist_to_target);
      frho.push_back(r->trace.checkpoints[c].rho_dist_to_frho);
    }
    agg.k.push_back(stats_of(std::move(k)));
    agg.rho.push_back(stats_of(std::move(rho)));
    agg.frho.push_back(stats_of(std::move(frho)));
  }
  return agg;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int jobs) {
  const double t0 = now_seconds();
  cfg.validate();
  ExperimentReport rep;

  const OracleBundle oracle = build_oracle(cfg);
  rep.oracle_residual = oracle.ridge.residual_sup;
  rep.approx_err = oracle.approx_err;
  rep.approx_bound = oracle.approx_bound;
  rep.mixing = mixing_report(cfg.copula, cfg.mixing_tmax, cfg.mixing_grid_n);

  const auto results = execute_seeds(cfg, oracle, jobs);
  rep.agg = aggregate_results(results);

  std::vector<std::pair<double, double>> k_pts = mean_series(rep.agg, rep.agg.k);
  std::vector<std::pair<double, double>> rho_pts = mean_series(rep.agg, rep.agg.rho);
  rep.k_slope = slope_fit(k_pts);
  rep.rho_slope = slope_fit(rho_pts);

  BoundInputsD bin;
  bin.lambda = cfg.lambda;
  bin.ck2 = cfg.kernel.sup_bound_sq();
  bin.M = cfg.M;
  bin.theta = cfg.theta;
  bin.delta = cfg.delta;
  bin.init_dist = oracle.target_knorm;
  bin.profile = rep.mixing.phi_envelope;
  for (long t : cfg.checkpoints) {
    bin.t = t;
    rep.init_bounds.push_back(init_bound(bin));
    rep.samp_sq_bounds.push_back(samp_bound(bin));
  }

  // output tree: <out>/<hash>/...
  const fs::path dir = fs::path(cfg.output_dir) / cfg.hash;
  fs::create_directories(dir);
  rep.out_dir = dir.string();

  for (const auto& r : results)
    write_seed_csv((dir / ("seed_" + std::to_string(r.seed) + ".csv")).string(), r);
  write_aggregate_csv((dir / "aggregate.csv").string(), rep.agg);
  write_mixing_csv((dir / "mixing.csv").string(), rep.mixing);

  {
    CsvWriter csv((dir / "bounds.csv").string(), kBoundsCsvHeader);
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
      csv.field(cfg.theta);
      csv.field(cfg.lambda);
      csv.field(bin.ck2);
      csv.field(cfg.M);
      csv.field(cfg.delta);
      csv.field(rep.mixing.phi_envelope.D);
      csv.field(rep.mixing.phi_envelope.r);
      csv.field(cfg.checkpoints[i]);
      csv.field(rep.init_bounds[i]);
      csv.field(rep.samp_sq_bounds[i]);
      csv.field(mixing_factor(cfg.theta, rep.mixing.phi_envelope.D, rep.mixing.phi_envelope.r));
      csv.field(composite_rate(cfg.theta, cfg.lambda, bin.ck2, cfg.checkpoints[i]));
      csv.end_row();
    }
  }

  {
    std::vector<SvgSeries> series;
    series.push_back({"mean ||f_t - f_lambda||_K", "#1f77b4", false, k_pts});
    series.push_back({"mean ||f_t - f_lambda||_rho", "#2ca02c", false, rho_pts});
    std::vector<std::pair<double, double>> bound_pts;
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i)
      bound_pts.emplace_back(double(cfg.checkpoints[i]),
                             rep.init_bounds[i] + std::sqrt(rep.samp_sq_bounds[i]));
    series.push_back({"init + sqrt(samp^2) bound", "#d62728", true, bound_pts});
    std::vector<std::pair<double, double>> approx_pts{
        {double(cfg.checkpoints.front()), rep.approx_err},
        {double(cfg.checkpoints.back()), rep.approx_err}};
    series.push_back({"||f_lambda - f_rho||_rho", "#7f7f7f", true, approx_pts});
    write_file((dir / "report.svg").string(), render_loglog_svg("online kernel run", series));
  }

  rep.assertions_ok = rep.oracle_residual <= 1e-8 &&
                      rep.approx_err <= rep.approx_bound * (1 + 1e-6);
  for (const auto& [t, phi, beta] : rep.mixing.table) {
    if (phi > 1e-14 && rep.mixing.phi_envelope.envelope(t) < phi * (1 - 1e-9))
      rep.assertions_ok = false;
    if (beta > phi + 1e-12) rep.assertions_ok = false;
  }
  rep.wall_seconds = now_seconds() - t0;

  {
    json manifest;
    manifest["schema_version"] = kCsvSchemaVersion;
    manifest["rng"] = kRngIdentity;
    manifest["kind"] = "experiment";
    manifest["config_hash"] = cfg.hash;
    manifest["config_canonical"] = cfg.canonical;
    manifest["seeds"] = cfg.seeds;
    manifest["oracle"] = {
        {"residual_sup", rep.oracle_residual},
        {"approx_err", rep.approx_err},
        {"approx_bound", rep.approx_bound},
        {"target_note",
         "mu is Lebesgue on [0,1]; f_rho = T^nu g with a named g — the concrete "
         "targets are artifact choices, not prescribed by the theory"}};
    manifest["mixing"] = mixing_json(rep.mixing);
    manifest["slopes"] = {{"k", slope_json(rep.k_slope)}, {"rho", slope_json(rep.rho_slope)}};
    manifest["assertions_ok"] = rep.assertions_ok;
    manifest["wall_seconds"] = rep.wall_seconds;
    json walls = json::array();
    for (const auto& r : results) walls.push_back({{"seed", r.seed}, {"wall", r.wall_seconds}});
    manifest["per_seed_wall"] = walls;
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
  return rep;
}

CoverageReport coverage_report(const ExperimentConfig& cfg, double delta, int jobs) {
  if (cfg.seeds.size() < 100)
    throw StatisticsError("coverage_report: need at least 100 seeds");
  if (!(delta > 0 && delta < 1))
    throw std::invalid_argument("coverage_report: delta must lie in (0,1)");

  const OracleBundle oracle = build_oracle(cfg);
  const MixingReport mix = mixing_report(cfg.copula, cfg.mixing_tmax, cfg.mixing_grid_n);
  const auto results = execute_seeds(cfg, oracle, jobs);

  BoundInputsD bin;
  bin.lambda = cfg.lambda;
  bin.ck2 = cfg.kernel.sup_bound_sq();
  bin.M = cfg.M;
  bin.theta = cfg.theta;
  bin.delta = delta;
  bin.init_dist = oracle.target_knorm;
  bin.profile = mix.phi_envelope;

  CoverageReport rep;
  rep.delta = delta;
  rep.pass = true;
  for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
    bin.t = cfg.checkpoints[c];
    const double bound = init_bound(bin) + std::sqrt(samp_bound(bin));
    long violations = 0;
    for (const auto& r : results)
      if (r.trace.checkpoints[c].k_dist_to_target > bound) ++violations;
    const double fraction = double(violations) / double(results.size());
    rep.t.push_back(cfg.checkpoints[c]);
    rep.bound.push_back(bound);
    rep.fraction.push_back(fraction);
    if (fraction > delta) rep.pass = false;
  }

  const fs::path dir = fs::path(cfg.output_dir) / cfg.hash;
  fs::create_directories(dir);
  CsvWriter csv((dir / "coverage.csv").string(), kCoverageCsvHeader);
  for (std::size_t c = 0; c < rep.t.size(); ++c) {
    csv.field(rep.t[c]);
    csv.field(rep.bound[c]);
    csv.field(long(std::lround(rep.fraction[c] * double(results.size()))));
    csv.field(long(results.size()));
    csv.field(rep.fraction[c]);
    csv.field(delta);
    csv.end_row();
  }
  return rep;
}

CompareReport compare_iid_vs_markov(const ExperimentConfig& cfg, int jobs, double slope_tol) {
  ExperimentConfig iid_cfg = cfg;
  iid_cfg.copula = CopulaD::independence();

  const OracleBundle oracle = build_oracle(cfg);  // same oracle for both arms
  const auto dep_results = execute_seeds(cfg, oracle, jobs);
  const auto iid_results = execute_seeds(iid_cfg, oracle, jobs);
  const Aggregate dep = aggregate_results(dep_results);
  const Aggregate iid = aggregate_results(iid_results);

  CompareReport rep;
  rep.t = dep.t;
  for (std::size_t c = 0; c < dep.t.size(); ++c) {
    rep.iid_mean.push_back(iid.k[c].mean);
    rep.dep_mean.push_back(dep.k[c].mean);
    rep.ratio.push_back(iid.k[c].mean > 0 ? dep.k[c].mean / iid.k[c].mean : 0.0);
  }
  rep.iid_slope = slope_fit(mean_series(iid, iid.k));
  rep.dep_slope = slope_fit(mean_series(dep, dep.k));
  rep.slope_diff = std::abs(rep.iid_slope.slope - rep.dep_slope.slope);
  rep.mean_ratio = rep.ratio.back();
  rep.pass = rep.slope_diff <= slope_tol;

  const fs::path dir = fs::path(cfg.output_dir) / cfg.hash;
  fs::create_directories(dir);
  CsvWriter csv((dir / "compare.csv").string(), kCompareCsvHeader);
  for (std::size_t c = 0; c < rep.t.size(); ++c) {
    csv.field(rep.t[c]);
    csv.field(rep.iid_mean[c]);
    csv.field(rep.dep_mean[c]);
    csv.field(rep.ratio[c]);
    csv.end_row();
  }
  return rep;
}

SsmgdReport run_ssmgd_experiment(const SsmgdConfig& cfg, int jobs) {
  const double t0 = now_seconds();
  cfg.validate();
  SsmgdReport rep;

  const auto q = QuadratureD::gauss_legendre(64);
  const auto problem = QuadraticProblemD::diagonal_sine(cfg.dim, cfg.kappa, cfg.eta,
                                                        cfg.problem_seed);
  rep.assumptions = validate_assumptions(problem, q);
  const auto w_star = minimizer(problem, q);
  rep.w_star_norm = w_star.norm();
  rep.mixing = mixing_report(cfg.copula, cfg.mixing_tmax, cfg.mixing_grid_n);

  std::vector<SeedResult> results(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), jobs, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const double s0 = now_seconds();
    const auto chain = sample_chain({cfg.copula, cfg.chain_length, seed, 0});
    RunTrace trace = run_ssmgd(problem, chain, cfg.theta, cfg.checkpoints, q);
    results[i] = SeedResult{seed, std::move(trace), now_seconds() - s0};
  });
  rep.agg = aggregate_results(results);

  const double alpha = rep.assumptions.kappa_hat / rep.assumptions.eta_hat;
  rep.coverage_pass = true;
  for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
    const long t = cfg.checkpoints[c];
    const double init = init_bound_general(cfg.theta, alpha, t, rep.w_star_norm);
    const double samp_sq =
        samp_bound_general(rep.assumptions.sigma_sq, rep.assumptions.eta_hat, alpha, cfg.theta,
                           cfg.delta, t, rep.mixing.phi_envelope.D, rep.mixing.phi_envelope.r);
    const double bound = init + std::sqrt(samp_sq);
    long violations = 0;
    for (const auto& r : results)
      if (r.trace.checkpoints[c].k_dist_to_target > bound) ++violations;
    const double fraction = double(violations) / double(results.size());
    rep.bound.push_back(bound);
    rep.fraction.push_back(fraction);
    if (fraction > cfg.delta) rep.coverage_pass = false;
  }

  const fs::path dir = fs::path(cfg.output_dir) / cfg.hash;
  fs::create_directories(dir);
  rep.out_dir = dir.string();
  for (const auto& r : results)
    write_seed_csv((dir / ("seed_" + std::to_string(r.seed) + ".csv")).string(), r);
  write_aggregate_csv((dir / "aggregate.csv").string(), rep.agg);
  write_mixing_csv((dir / "mixing.csv").string(), rep.mixing);
  {
    CsvWriter csv((dir / "coverage.csv").string(), kCoverageCsvHeader);
    for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
      csv.field(cfg.checkpoints[c]);
      csv.field(rep.bound[c]);
      csv.field(long(std::lround(rep.fraction[c] * double(results.size()))));
      csv.field(long(results.size()));
      csv.field(rep.fraction[c]);
      csv.field(cfg.delta);
      csv.end_row();
    }
  }
  rep.wall_seconds = now_seconds() - t0;
  {
    json manifest;
    manifest["schema_version"] = kCsvSchemaVersion;
    manifest["rng"] = kRngIdentity;
    manifest["kind"] = "ssmgd";
    manifest["config_hash"] = cfg.hash;
    manifest["config_canonical"] = cfg.canonical;
    manifest["seeds"] = cfg.seeds;
    manifest["assumptions"] = {{"sigma_sq", rep.assumptions.sigma_sq},
                               {"kappa_hat", rep.assumptions.kappa_hat},
                               {"eta_hat", rep.assumptions.eta_hat},
                               {"w_star_norm", rep.w_star_norm}};
    manifest["mixing"] = mixing_json(rep.mixing);
    manifest["coverage_pass"] = rep.coverage_pass;
    manifest["wall_seconds"] = rep.wall_seconds;
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
  return rep;
}

namespace {

std::vector<double> as_real_list(const Value& root, const char* key, double fallback) {
  const Value* v = root.find(key);
  if (!v) return {fallback};
  if (v->kind == Value::Kind::array) {
    std::vector<double> out;
    for (const auto& e : v->arr) out.push_back(e.as_real());
    return out;
  }
  return {v->as_real()};
}

std::vector<long> as_long_list(const Value& root, const char* key, long fallback) {
  const Value* v = root.find(key);
  if (!v) return {fallback};
  if (v->kind == Value::Kind::array) {
    std::vector<long> out;
    for (const auto& e : v->arr) out.push_back(long(e.as_integer()));
    return out;
  }
  return {long(v->as_integer())};
}

}  // namespace

std::vector<BoundsRow> bounds_table(const Value& root) {
  const Value& spec = root.find("bounds") ? root.at("bounds") : root;
  const auto thetas = as_real_list(spec, "theta", 0.75);
  const auto lambdas = as_real_list(spec, "lambda", 0.1);
  const auto ck2s = as_real_list(spec, "ck2", 1.0);
  const auto Ms = as_real_list(spec, "M", 1.0);
  const auto deltas = as_real_list(spec, "delta", 0.1);
  const auto Ds = as_real_list(spec, "D", 0.0);
  const auto rs = as_real_list(spec, "r", 0.5);
  const auto ts = as_long_list(spec, "t", 1000);
  const auto init = as_real_list(spec, "init_dist", 1.0);

  std::vector<BoundsRow> rows;
  for (double theta : thetas)
    for (double lambda : lambdas)
      for (double ck2 : ck2s)
        for (double M : Ms)
          for (double delta : deltas)
            for (double D : Ds)
              for (double r : rs)
                for (long t : ts) {
                  BoundInputsD in;
                  in.lambda = lambda;
                  in.ck2 = ck2;
                  in.M = M;
                  in.theta = theta;
                  in.delta = delta;
                  in.t = t;
                  in.init_dist = init.front();
                  in.profile = MixingProfileD::exponential(D, r);
                  rows.push_back(BoundsRow{theta, lambda, ck2, M, delta, D, r, t, init_bound(in),
                                           samp_bound(in), mixing_factor(theta, D, r),
                                           composite_rate(theta, lambda, ck2, t)});
                }
  return rows;
}

std::string oracle_cache_path(const std::string& dir, const KernelD& kernel, int n) {
  const std::uint64_t key = fnv1a64(kernel.canonical() + ":" + std::to_string(n));
  return (fs::path(dir) / ("oracle_" + hash_hex(key) + ".bin")).string();
}

namespace {
constexpr std::uint32_t kCacheMagic = 0x4F4B5243u;  // "OKRC"
constexpr std::uint32_t kCacheVersion = 1;

void write_doubles(std::ofstream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), std::streamsize(n * sizeof(double)));
}

bool read_doubles(std::ifstream& in, double* data, std::size_t n) {
  in.read(reinterpret_cast<char*>(data), std::streamsize(n * sizeof(double)));
  return bool(in);
}
}  // namespace

void save_oracle_cache(const std::string& path, const DiscretizedOperatorD& T) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::uint64_t n = std::uint64_t(T.quadrature().nodes.size());
  const std::uint64_t khash = fnv1a64(T.kernel().canonical());
  out.write(reinterpret_cast<const char*>(&kCacheMagic), 4);
  out.write(reinterpret_cast<const char*>(&kCacheVersion), 4);
  out.write(reinterpret_cast<const char*>(&khash), 8);
  out.write(reinterpret_cast<const char*>(&n), 8);
  write_doubles(out, T.quadrature().nodes.data(), n);
  write_doubles(out, T.quadrature().weights.data(), n);
  write_doubles(out, T.matrix().data(), n * n);
  write_doubles(out, T.eigenvalues().data(), n);
  write_doubles(out, T.eigenvectors().data(), n * n);
}

std::shared_ptr<const DiscretizedOperatorD> load_oracle_cache(const std::string& path,
                                                              const KernelD& kernel, int n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return nullptr;
  std::uint32_t magic = 0, version = 0;
  std::uint64_t khash = 0, fn = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&khash), 8);
  in.read(reinterpret_cast<char*>(&fn), 8);
  if (!in || magic != kCacheMagic || version != kCacheVersion ||
      khash != fnv1a64(kernel.canonical()) || fn != std::uint64_t(n))
    return nullptr;
  QuadratureD q;
  q.nodes.resize(n);
  q.weights.resize(n);
  Eigen::MatrixXd matrix(n, n), eigvecs(n, n);
  Eigen::VectorXd eigvals(n);
  if (!read_doubles(in, q.nodes.data(), std::size_t(n)) ||
      !read_doubles(in, q.weights.data(), std::size_t(n)) ||
      !read_doubles(in, matrix.data(), std::size_t(n) * n) ||
      !read_doubles(in, eigvals.data(), std::size_t(n)) ||
      !read_doubles(in, eigvecs.data(), std::size_t(n) * n))
    return nullptr;
  return std::make_shared<const DiscretizedOperatorD>(DiscretizedOperatorD::from_parts(
      kernel, std::move(q), std::move(matrix), std::move(eigvals), std::move(eigvecs)));
}

std::shared_ptr<const DiscretizedOperatorD> load_or_build_oracle(const std::string& cache_dir,
                                                                 const KernelD& kernel, int n) {
  const std::string path = oracle_cache_path(cache_dir, kernel, n);
  if (auto cached = load_oracle_cache(path, kernel, n)) return cached;
  auto built = std::make_shared<const DiscretizedOperatorD>(kernel,
                                                            QuadratureD::gauss_legendre(n));
  save_oracle_cache(path, *built);
  return built;
}

}  // namespace okr::harness
