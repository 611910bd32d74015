#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "okr/copula.hpp"
#include "okr/rng.hpp"

namespace okr {

/// Strictly stationary copula chain: u_1 ~ Uniform(0,1), then
/// u_{t+1} = C_{,1}(u_t, .)^{-1}(xi_t). Starting from the uniform law means
/// the chain is stationary from step one; burn_in exists for experiments
/// that want extra decorrelation anyway.
struct ChainConfig {
  CopulaD copula = CopulaD::independence();
  long length = 1;
  std::uint64_t seed = 0;
  long burn_in = 0;
};

namespace detail {

// Solve C_{,1}(u, v) = xi for v by bisection. Conditional CDFs are
// nondecreasing with range [0,1], so [0,1] always brackets; 60 halvings
// push the bracket far below the 1e-12 target.
inline double invert_conditional(const CopulaD& c, double u, double xi) {
  double lo = 0.0, hi = 1.0;
  double mid = 0.5;
  for (int it = 0; it < 60; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = c.conditional_cdf(u, mid);
    if (std::abs(f - xi) <= 1e-12) return mid;
    if (f < xi)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

}  // namespace detail

/// Sampled trajectory of length cfg.length, deterministic in cfg.seed.
inline Eigen::VectorXd sample_chain(const ChainConfig& cfg) {
  if (cfg.length < 1) throw std::invalid_argument("sample_chain: length must be >= 1");
  if (cfg.burn_in < 0) throw std::invalid_argument("sample_chain: burn_in must be >= 0");
  SplitMix64 rng = substream(cfg.seed, /*tag=*/1);
  Eigen::VectorXd us(cfg.length);
  double u = rng.next_uniform();
  for (long t = 0; t < cfg.burn_in; ++t) u = detail::invert_conditional(cfg.copula, u, rng.next_uniform());
  us[0] = u;
  for (long t = 1; t < cfg.length; ++t) {
    u = detail::invert_conditional(cfg.copula, u, rng.next_uniform());
    us[t] = u;
  }
  return us;
}

struct LabeledStream {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Labels y_t = clamp(f(x_t) + eps_t, -M, M) with eps_t i.i.d. centered
/// Gaussian(noise_sd) truncated at 3 sigma. The noise stream is independent
/// of the chain stream for the same seed, so changing noise_sd never
/// perturbs the trajectory. Warns (return flag) when |f| + 3 sd can exceed M.
inline LabeledStream label_stream(const Eigen::VectorXd& us,
                                  const std::function<double(double)>& target, double noise_sd,
                                  double M, std::uint64_t seed, bool* range_warning = nullptr) {
  if (!(M > 0)) throw std::invalid_argument("label_stream: M must be positive");
  if (noise_sd < 0) throw std::invalid_argument("label_stream: noise_sd must be nonnegative");
  SplitMix64 noise = substream(seed, /*tag=*/2);
  LabeledStream out;
  out.x = us;
  out.y.resize(us.size());
  bool warn = false;
  for (Eigen::Index t = 0; t < us.size(); ++t) {
    const double f = target(us[t]);
    if (std::abs(f) + 3 * noise_sd > M) warn = true;
    double y = f + noise.next_truncated_normal(noise_sd);
    if (y > M) y = M;
    if (y < -M) y = -M;
    out.y[t] = y;
  }
  if (range_warning) *range_warning = warn;
  return out;
}

}  // namespace okr
