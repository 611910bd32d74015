#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "okr/errors.hpp"
#include "okr/mixing.hpp"

namespace okr {

/// Conditioning ratio alpha = lambda / (lambda + C_K^2) in (0,1]
/// (equivalently kappa/eta for the general quadratic problem).
template <typename Scalar>
Scalar alpha_ratio(Scalar lambda, Scalar ck2) {
  if (!(lambda > 0)) throw std::invalid_argument("alpha: lambda must be positive");
  if (ck2 < 0) throw std::invalid_argument("alpha: C_K^2 must be nonnegative");
  return lambda / (lambda + ck2);
}

/// C_theta = 8 + (2/(2 theta - 1)) (theta / (e (2 - 2^theta)))^{theta/(1-theta)},
/// defined for theta strictly inside (1/2, 1); it blows up at 1/2 and is not
/// defined at 1 (the theta = 1 schedule has a separate bound path).
template <typename Scalar>
Scalar c_theta(Scalar theta) {
  if (!(theta > Scalar(0.5) && theta < 1))
    throw std::domain_error("c_theta: theta must lie strictly inside (1/2, 1)");
  const Scalar e = std::exp(Scalar(1));
  const Scalar base = theta / (e * (2 - std::pow(Scalar(2), theta)));
  return 8 + (2 / (2 * theta - 1)) * std::pow(base, theta / (1 - theta));
}

/// Gradient-noise bound at the ridge target:
/// sigma^2 = (2 M C_K^2 (lambda + C_K^2) / lambda)^2.
template <typename Scalar>
Scalar sigma_sq(Scalar M, Scalar ck2, Scalar lambda) {
  if (!(M > 0 && ck2 > 0 && lambda > 0))
    throw std::invalid_argument("sigma_sq: all arguments must be positive");
  const Scalar s = 2 * M * ck2 * (lambda + ck2) / lambda;
  return s * s;
}

/// Dependence factor: 1 + 4 D r / (1 - r) for theta < 1, 1 + 6 D r / (1 - r)
/// on the theta = 1 path. D = 0 gives exactly 1 (the independent case).
template <typename Scalar>
Scalar mixing_factor(Scalar theta, Scalar D, Scalar r) {
  if (!(D >= 0) || !(r > 0 && r < 1))
    throw std::invalid_argument("mixing_factor: need D >= 0 and r in (0,1)");
  const Scalar c = (theta < 1) ? Scalar(4) : Scalar(6);
  return 1 + c * D * r / (1 - r);
}

enum class MixingFamily { phi, beta };

/// Everything the error-bound evaluators consume. init_dist is
/// ||f_1 - f_target|| in the norm of the ambient space; the profile must be
/// an exponential envelope (fit one first, or use MixingProfile::iid()).
template <typename Scalar = double>
struct BoundInputs {
  Scalar lambda;
  Scalar ck2;
  Scalar M;
  Scalar theta;
  Scalar delta;
  long t;
  Scalar init_dist;
  MixingProfile<Scalar> profile;
  MixingFamily family = MixingFamily::phi;

  void validate() const {
    if (!(lambda > 0)) throw std::invalid_argument("bounds: lambda must be positive");
    if (ck2 < 0) throw std::invalid_argument("bounds: C_K^2 must be nonnegative");
    if (!(M > 0)) throw std::invalid_argument("bounds: M must be positive");
    if (!(theta > Scalar(0.5) && theta <= 1))
      throw std::invalid_argument("bounds: theta must lie in (1/2, 1]");
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("bounds: delta must lie in (0,1)");
    if (t < 1) throw std::invalid_argument("bounds: t must be >= 1");
    if (init_dist < 0) throw std::invalid_argument("bounds: init_dist must be nonnegative");
    if (profile.kind != MixingKind::exponential)
      throw std::invalid_argument("bounds: an exponential mixing envelope is required");
  }
};

/// E_init(t) <= exp((2 alpha / (1-theta)) (1 - t^{1-theta})) ||w_1 - w*||
/// for theta < 1;  (1/t)^alpha ||w_1 - w*|| at theta = 1.
template <typename Scalar>
Scalar init_bound_general(Scalar theta, Scalar alpha, long t, Scalar init_dist) {
  if (theta < 1)
    return std::exp((2 * alpha / (1 - theta)) * (1 - std::pow(Scalar(t), 1 - theta))) * init_dist;
  return std::pow(Scalar(t), -alpha) * init_dist;
}

/// Bound on E^2_samp(t) for the general Hilbert-space iteration with
/// gamma_t = 1/(eta t^theta), holding with probability >= 1 - delta:
///   theta < 1: (sigma^2 C_theta / (delta eta^2)) (1/alpha)^{theta/(1-theta)}
///              (1/t)^theta (1 + 4 D r/(1-r))
///   theta = 1: (4 sigma^2 / (delta eta^2)) (1/(1-2 alpha)) (1/t)^alpha
///              (1 + 6 D r/(1-r)),  requires alpha < 1/2.
template <typename Scalar>
Scalar samp_bound_general(Scalar sigma2, Scalar eta, Scalar alpha, Scalar theta, Scalar delta,
                          long t, Scalar D, Scalar r) {
  const Scalar factor = mixing_factor(theta, D, r);
  if (theta < 1) {
    return (sigma2 * c_theta(theta) / (delta * eta * eta)) *
           std::pow(1 / alpha, theta / (1 - theta)) * std::pow(Scalar(t), -theta) * factor;
  }
  if (!(alpha < Scalar(0.5)))
    throw std::invalid_argument("samp_bound: theta = 1 requires alpha < 1/2 (lambda < C_K^2)");
  return (4 * sigma2 / (delta * eta * eta)) * (1 / (1 - 2 * alpha)) *
         std::pow(Scalar(t), -alpha) * factor;
}

/// RKHS instantiation: eta = lambda + C_K^2, alpha = lambda/eta and
/// sigma^2 = (2 M C_K^2 eta / lambda)^2, which turns the general bound into
/// the (c' C_theta / (delta lambda^2)) form with c' = 4 (M C_K^2)^2. The phi
/// and beta families share the formula; they differ only in which envelope
/// (D, r) vs (D_1, r_1) the caller fitted into `profile`.
template <typename Scalar>
Scalar init_bound(const BoundInputs<Scalar>& in) {
  in.validate();
  return init_bound_general(in.theta, alpha_ratio(in.lambda, in.ck2), in.t, in.init_dist);
}

template <typename Scalar>
Scalar samp_bound(const BoundInputs<Scalar>& in) {
  in.validate();
  const Scalar eta = in.lambda + in.ck2;
  const Scalar alpha = in.lambda / eta;
  return samp_bound_general(sigma_sq(in.M, in.ck2, in.lambda), eta, alpha, in.theta, in.delta,
                            in.t, in.profile.D, in.profile.r);
}

/// Remark-style composite rate exponent tau(theta) = (2-theta)/(2(1-theta)):
/// the bound scales like lambda^{-tau(theta)} t^{-theta/2} for theta < 1.
template <typename Scalar>
Scalar composite_rate_tau(Scalar theta) {
  if (!(theta > Scalar(0.5) && theta < 1))
    throw std::domain_error("composite_rate_tau: theta must lie strictly inside (1/2, 1)");
  return (2 - theta) / (2 * (1 - theta));
}

/// Convergence-rate regime under polynomial mixing decay phi_t <= b t^{-k}:
///   0 < k < 1: O(t^{(1-k-theta)/2});  k = 1: O(t^{-theta/2} (log t)^{1/2});
///   k > 1: O(t^{-theta/2}).
/// The k < 1 exponent is only a decay when k + theta > 1.
struct RateRegime {
  double exponent_t = 0;
  bool log_factor = false;
  std::string description;
};

template <typename Scalar>
RateRegime poly_rate(Scalar theta, Scalar k) {
  if (!(k > 0)) throw std::domain_error("poly_rate: k must be positive");
  if (!(theta > Scalar(0.5) && theta < 1))
    throw std::domain_error("poly_rate: theta must lie strictly inside (1/2, 1)");
  if (k < 1) return RateRegime{double((1 - k - theta) / 2), false, "slow mixing, 0 < k < 1"};
  if (k == 1) return RateRegime{double(-theta / 2), true, "boundary k = 1, extra sqrt(log t)"};
  return RateRegime{double(-theta / 2), false, "fast mixing, k > 1: i.i.d.-matching rate"};
}

/// OLS fit of log(value) against log(t): slope, intercept, r^2.
struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

template <typename Scalar>
SlopeFit slope_fit(const std::vector<std::pair<Scalar, Scalar>>& points) {
  if (points.size() < 3) throw FitError("slope_fit: need at least three points");
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> design(n, 2);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [t, v] = points[static_cast<std::size_t>(i)];
    if (!(t > 0 && v > 0)) throw FitError("slope_fit: values must be strictly positive");
    design(i, 0) = 1;
    design(i, 1) = std::log(t);
    target[i] = std::log(v);
  }
  const Eigen::Matrix<Scalar, 2, 1> beta = design.colPivHouseholderQr().solve(target);
  const Scalar mean = target.mean();
  const Scalar ss_tot = (target.array() - mean).square().sum();
  const Scalar ss_res = (target - design * beta).squaredNorm();
  const Scalar r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1;
  return SlopeFit{double(beta[1]), double(beta[0]), double(r2)};
}

using BoundInputsD = BoundInputs<double>;

}  // namespace okr
