#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "okr/kernel.hpp"
#include "okr/oracle.hpp"
#include "okr/quadrature.hpp"
#include "okr/rkhs.hpp"
#include "okr/run_trace.hpp"

namespace okr {

/// Online regularized least squares in the RKHS:
///   f_{t+1} = f_t - gamma_t ((f_t(x_t) - y_t) K_{x_t} + lambda f_t),
///   gamma_t = 1 / ((lambda + C_K^2) t^theta).
/// theta is restricted to (1/2, 1]; theta = 1 is the boundary schedule with
/// its own bound path, anything at or below 1/2 has no covered theory.
template <typename Scalar = double>
struct LearnerConfig {
  Scalar lambda;
  Scalar theta;
  Kernel<Scalar> kernel;
  Scalar M;

  LearnerConfig(Scalar lambda_, Scalar theta_, Kernel<Scalar> kernel_, Scalar M_)
      : lambda(lambda_), theta(theta_), kernel(std::move(kernel_)), M(M_) {
    if (!(lambda > 0)) throw std::invalid_argument("learner: lambda must be positive");
    if (!(theta > Scalar(0.5) && theta <= 1))
      throw std::invalid_argument("learner: theta must lie in (1/2, 1]");
    if (!(M > 0)) throw std::invalid_argument("learner: M must be positive");
  }
};

template <typename Scalar>
Scalar step_size(long t, const LearnerConfig<Scalar>& cfg) {
  return Scalar(1) / ((cfg.lambda + cfg.kernel.sup_bound_sq()) * std::pow(Scalar(t), cfg.theta));
}

/// V_z(f) = 1/2 ((f(x) - y)^2 + lambda ||f||_K^2).
template <typename Scalar>
Scalar loss(Scalar x, Scalar y, const RkhsFunction<Scalar>& f, Scalar lambda) {
  const Scalar resid = f.evaluate(x) - y;
  const Scalar norm = f.k_norm();
  return (resid * resid + lambda * norm * norm) / 2;
}

/// grad V_z(f) = (f(x) - y) K_x + lambda f, as a fresh expansion.
template <typename Scalar>
RkhsFunction<Scalar> gradient(Scalar x, Scalar y, const RkhsFunction<Scalar>& f, Scalar lambda) {
  const Scalar resid = f.evaluate(x) - y;
  if (lambda == 0) return RkhsFunction<Scalar>::atom(f.kernel(), x, resid);
  RkhsFunction<Scalar> g(f.kernel(), f.support(), f.coeffs(), f.scale());
  g.scaled_update(lambda, x, resid);
  return g;
}

template <typename Scalar = double>
struct LearnerState {
  long t = 1;
  RkhsFunction<Scalar> f;

  explicit LearnerState(RkhsFunction<Scalar> f1) : f(std::move(f1)) {}
  static LearnerState zero(const LearnerConfig<Scalar>& cfg) {
    return LearnerState(RkhsFunction<Scalar>::zero(cfg.kernel));
  }
};

/// One step of the recursion, realized as the O(1) scaled update
///   f <- (1 - gamma_t lambda) f - gamma_t (f(x_t) - y_t) K_{x_t}.
/// The schedule keeps 1 - gamma_t lambda inside (0,1).
template <typename Scalar>
void update(LearnerState<Scalar>& state, Scalar x, Scalar y, const LearnerConfig<Scalar>& cfg) {
  const Scalar gamma = step_size(state.t, cfg);
  const Scalar resid = state.f.evaluate(x) - y;
  state.f.scaled_update(1 - gamma * cfg.lambda, x, -gamma * resid);
  ++state.t;
}

/// Full run with checkpointed distances against the ridge target and f_rho.
///
/// Checkpoint t records the state before sample t is consumed (t = 1 is the
/// initial function). The three recorded distances come from running scalar
/// recursions rather than a joint Gram solve at each checkpoint:
///   n_t = ||f_t||_K^2, p_t = <f_t, target>_K, v_t = f_t on the nodes
/// all update exactly under f <- a f + b K_x, so
/// ||f_t - target||_K^2 = n_t - 2 p_t + ||target||_K^2 is the same joint-Gram
/// quadratic form, accumulated incrementally (a unit test pins the two
/// routes against each other). Cost per step is O(atoms_t + nodes).
template <typename Scalar>
RunTrace run(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& xs,
             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& ys, const LearnerConfig<Scalar>& cfg,
             const std::vector<long>& checkpoints, const RkhsFunction<Scalar>& target,
             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& frho_nodes,
             const Quadrature<Scalar>& q,
             std::optional<RkhsFunction<Scalar>> f1 = std::nullopt) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (xs.size() != ys.size()) throw std::invalid_argument("run: stream length mismatch");
  if (frho_nodes.size() != q.nodes.size())
    throw std::invalid_argument("run: f_rho node values do not match the quadrature");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > xs.size() + 1)
      throw std::invalid_argument("run: checkpoint outside [1, stream length + 1]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw std::invalid_argument("run: checkpoints must be strictly increasing");
  }
  if (!target.kernel().same_as(cfg.kernel))
    throw std::invalid_argument("run: target lives in a different kernel");

  LearnerState<Scalar> state = f1 ? LearnerState<Scalar>(std::move(*f1))
                                  : LearnerState<Scalar>::zero(cfg);
  state.f.reserve(xs.size() + state.f.atom_count() + 1);

  const Scalar target_norm_sq = target.k_norm_sq();
  const Vector target_nodes = [&] {
    Vector v(q.nodes.size());
    for (Eigen::Index j = 0; j < q.nodes.size(); ++j) v[j] = target.evaluate(q.nodes[j]);
    return v;
  }();

  // running state: ||f||_K^2, <f, target>_K, f on the quadrature nodes
  Scalar norm_sq = state.f.k_norm_sq();
  Scalar inner = k_inner(state.f, target);
  Vector f_nodes(q.nodes.size());
  for (Eigen::Index j = 0; j < q.nodes.size(); ++j) f_nodes[j] = state.f.evaluate(q.nodes[j]);

  const Scalar norm_cap = cfg.M * cfg.kernel.sup_bound() / cfg.lambda;
  const bool f1_is_zero = state.f.atom_count() == 0;

  RunTrace trace;
  trace.checkpoints.reserve(checkpoints.size());
  auto record = [&](long t) {
    Scalar k_sq = norm_sq - 2 * inner + target_norm_sq;
    k_sq = detail::clamp_quadratic_form(k_sq);
    trace.checkpoints.push_back(Checkpoint{
        t, double(std::sqrt(k_sq)),
        double(rho_norm_nodes<Scalar>(f_nodes - target_nodes, q)),
        double(rho_norm_nodes<Scalar>(f_nodes - frho_nodes, q)),
        long(state.f.atom_count())});
  };

  std::size_t next_cp = 0;
  const auto nodes_arr = q.nodes.array();
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == state.t) record(state.t), ++next_cp;
    if (next_cp == checkpoints.size() && checkpoints.size() > 0) break;

    const Scalar x = xs[i];
    const Scalar y = ys[i];
    const Scalar gamma = step_size(state.t, cfg);
    const Scalar a = 1 - gamma * cfg.lambda;
    const Scalar fx = state.f.evaluate(x);
    const Scalar b = -gamma * (fx - y);

    state.f.scaled_update(a, x, b);
    ++state.t;

    const Scalar kxx = cfg.kernel.eval_unchecked(x, x);
    norm_sq = a * a * norm_sq + 2 * a * b * fx + b * b * kxx;
    inner = a * inner + b * target.evaluate(x);
    f_nodes = a * f_nodes + b * cfg.kernel.row(nodes_arr, x).matrix();

    // bounded-iterate invariant (Markov or not): with f_1 = 0 the iterates
    // stay inside the ball of radius M C_K / lambda
    assert(!f1_is_zero || norm_sq <= norm_cap * norm_cap * (1 + 1e-9) + 1e-12);
    (void)norm_cap;
    (void)f1_is_zero;
  }
  while (next_cp < checkpoints.size() && checkpoints[next_cp] == state.t)
    record(state.t), ++next_cp;
  if (next_cp < checkpoints.size())
    throw std::invalid_argument("run: stream ended before the last checkpoint");
  return trace;
}

using LearnerConfigD = LearnerConfig<double>;
using LearnerStateD = LearnerState<double>;

}  // namespace okr
