#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "okr/quadrature.hpp"
#include "okr/rng.hpp"
#include "okr/run_trace.hpp"

namespace okr {

/// Random quadratic objective V_z(w) = 1/2 <A(z) w, w> + <B(z), w> driven by
/// a chain state z in [0,1], with kappa I <= A(z) <= eta I for every z. The
/// stationary law of the driving chain is uniform, so the population
/// objective has minimizer w* = -Ahat^{-1} Bhat with Ahat = E A(z),
/// Bhat = E B(z).
template <typename Scalar = double>
struct QuadraticProblem {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  int dim;
  Scalar kappa;
  Scalar eta;
  std::function<Matrix(Scalar)> a_map;
  std::function<Vector(Scalar)> b_map;

  /// Default family: A(z) = diag(kappa + (eta - kappa) s_i(z)) with
  /// s_i(z) = (1 + sin(2 pi z + phase_i)) / 2, and B(z) a quadratic
  /// polynomial in z with coefficients drawn once from the seed. Smooth in
  /// z, so the stationary averages are quadrature-exact; the sine averages
  /// to 1/2, giving Ahat = ((kappa + eta)/2) I.
  static QuadraticProblem diagonal_sine(int dim, Scalar kappa, Scalar eta, std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("quadratic problem: dim must be >= 1");
    if (!(kappa > 0 && eta >= kappa))
      throw std::invalid_argument("quadratic problem: need 0 < kappa <= eta");
    constexpr Scalar two_pi = Scalar(6.283185307179586476925286766559);
    SplitMix64 rng = substream(seed, /*tag=*/7);
    std::vector<Scalar> phase(static_cast<std::size_t>(dim));
    Matrix poly(dim, 3);
    for (int i = 0; i < dim; ++i) {
      phase[static_cast<std::size_t>(i)] = two_pi * Scalar(rng.next_uniform());
      for (int j = 0; j < 3; ++j) poly(i, j) = Scalar(2 * rng.next_uniform() - 1);
    }
    QuadraticProblem p;
    p.dim = dim;
    p.kappa = kappa;
    p.eta = eta;
    p.a_map = [dim, kappa, eta, phase, two_pi](Scalar z) {
      Matrix a = Matrix::Zero(dim, dim);
      for (int i = 0; i < dim; ++i) {
        const Scalar s = (1 + std::sin(two_pi * z + phase[static_cast<std::size_t>(i)])) / 2;
        a(i, i) = kappa + (eta - kappa) * s;
      }
      return a;
    };
    p.b_map = [dim, poly](Scalar z) {
      Vector b(dim);
      for (int i = 0; i < dim; ++i) b[i] = poly(i, 0) + poly(i, 1) * z + poly(i, 2) * z * z;
      return b;
    };
    return p;
  }
};

/// w* = -Ahat^{-1} Bhat with the stationary averages taken by quadrature;
/// the solve residual must vanish to 1e-10.
template <typename Scalar>
typename QuadraticProblem<Scalar>::Vector minimizer(const QuadraticProblem<Scalar>& p,
                                                    const Quadrature<Scalar>& q) {
  using Matrix = typename QuadraticProblem<Scalar>::Matrix;
  using Vector = typename QuadraticProblem<Scalar>::Vector;
  Matrix ahat = Matrix::Zero(p.dim, p.dim);
  Vector bhat = Vector::Zero(p.dim);
  for (Eigen::Index j = 0; j < q.nodes.size(); ++j) {
    ahat += q.weights[j] * p.a_map(q.nodes[j]);
    bhat += q.weights[j] * p.b_map(q.nodes[j]);
  }
  const Vector w = ahat.ldlt().solve(-bhat);
  if ((ahat * w + bhat).norm() > Scalar(1e-10))
    throw std::runtime_error("minimizer: stationarity residual exceeds 1e-10");
  return w;
}

/// Checked constants for the bound machinery: the gradient-noise sup at w*,
/// and the observed curvature range over a z-grid. Also asserts the
/// mean-zero noise identity E[grad V_z(w*)] = 0 by quadrature.
template <typename Scalar>
struct AssumptionReport {
  Scalar sigma_sq;
  Scalar kappa_hat;
  Scalar eta_hat;
};

template <typename Scalar>
AssumptionReport<Scalar> validate_assumptions(const QuadraticProblem<Scalar>& p,
                                              const Quadrature<Scalar>& q, int grid_n = 2048) {
  using Vector = typename QuadraticProblem<Scalar>::Vector;
  const Vector w_star = minimizer(p, q);

  Vector mean_grad = Vector::Zero(p.dim);
  for (Eigen::Index j = 0; j < q.nodes.size(); ++j)
    mean_grad += q.weights[j] * (p.a_map(q.nodes[j]) * w_star + p.b_map(q.nodes[j]));
  if (mean_grad.norm() > Scalar(1e-8))
    throw std::runtime_error("validate_assumptions: noise at optimum is not mean-zero");

  AssumptionReport<Scalar> rep{0, std::numeric_limits<Scalar>::infinity(), 0};
  for (int g = 0; g < grid_n; ++g) {
    const Scalar z = (g + Scalar(0.5)) / grid_n;
    const auto a = p.a_map(z);
    const Vector grad = a * w_star + p.b_map(z);
    rep.sigma_sq = std::max(rep.sigma_sq, Scalar(grad.squaredNorm()));
    Eigen::SelfAdjointEigenSolver<typename QuadraticProblem<Scalar>::Matrix> es(a);
    rep.kappa_hat = std::min(rep.kappa_hat, es.eigenvalues().minCoeff());
    rep.eta_hat = std::max(rep.eta_hat, es.eigenvalues().maxCoeff());
  }
  return rep;
}

/// w - gamma (A(z) w + B(z)); the schedule keeps gamma inside (0, 1/eta].
template <typename Scalar>
typename QuadraticProblem<Scalar>::Vector ssmgd_step(
    const typename QuadraticProblem<Scalar>::Vector& w, Scalar z, Scalar gamma,
    const QuadraticProblem<Scalar>& p) {
  if (!(gamma > 0 && gamma <= 1 / p.eta))
    throw std::invalid_argument("ssmgd_step: gamma must lie in (0, 1/eta]");
  return w - gamma * (p.a_map(z) * w + p.b_map(z));
}

/// SS-MGD run with gamma_t = 1/(eta t^theta), recording ||w_t - w*|| at the
/// checkpoints (checkpoint t is the state before sample t, as in the kernel
/// runs). w_1 = 0 unless given.
template <typename Scalar>
RunTrace run_ssmgd(const QuadraticProblem<Scalar>& p,
                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& chain, Scalar theta,
                   const std::vector<long>& checkpoints, const Quadrature<Scalar>& q,
                   const typename QuadraticProblem<Scalar>::Vector* w1 = nullptr) {
  using Vector = typename QuadraticProblem<Scalar>::Vector;
  if (!(theta > Scalar(0.5) && theta <= 1))
    throw std::invalid_argument("run_ssmgd: theta must lie in (1/2, 1]");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > chain.size() + 1)
      throw std::invalid_argument("run_ssmgd: checkpoint outside [1, chain length + 1]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw std::invalid_argument("run_ssmgd: checkpoints must be strictly increasing");
  }

  const Vector w_star = minimizer(p, q);
  Vector w = w1 ? *w1 : Vector::Zero(p.dim);

  RunTrace trace;
  trace.checkpoints.reserve(checkpoints.size());
  auto record = [&](long t) {
    const double d = double((w - w_star).norm());
    trace.checkpoints.push_back(Checkpoint{t, d, d, 0.0, long(p.dim)});
  };

  long t = 1;
  std::size_t next_cp = 0;
  for (Eigen::Index i = 0; i < chain.size(); ++i) {
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) record(t), ++next_cp;
    if (next_cp == checkpoints.size()) break;
    const Scalar gamma = 1 / (p.eta * std::pow(Scalar(t), theta));
    w = ssmgd_step(w, chain[i], gamma, p);
    ++t;
  }
  while (next_cp < checkpoints.size() && checkpoints[next_cp] == t) record(t), ++next_cp;
  if (next_cp < checkpoints.size())
    throw std::invalid_argument("run_ssmgd: chain ended before the last checkpoint");
  return trace;
}

using QuadraticProblemD = QuadraticProblem<double>;

}  // namespace okr
