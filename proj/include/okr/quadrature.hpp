#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "okr/rkhs.hpp"

namespace okr {

/// Quadrature rule for the uniform (Lebesgue) measure on [0,1]:
/// weights are positive and sum to 1, nodes strictly increasing.
template <typename Scalar = double>
struct Quadrature {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector nodes;
  Vector weights;

  /// Gauss-Legendre on [0,1] via Golub-Welsch on the Jacobi matrix.
  static Quadrature gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
    Vector diag = Vector::Zero(n);
    Vector sub(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) sub[k - 1] = Scalar(k) / std::sqrt(Scalar(4) * k * k - 1);
    Eigen::SelfAdjointEigenSolver<typename Kernel<Scalar>::Matrix> es;
    es.computeFromTridiagonal(diag, sub);
    Quadrature q;
    q.nodes = (es.eigenvalues().array() + 1) / 2;            // [-1,1] -> [0,1]
    q.weights = es.eigenvectors().row(0).transpose().array().square();
    return q;  // weights on [-1,1] sum to 2; the halved interval makes them sum to 1
  }

  int size() const { return static_cast<int>(nodes.size()); }

  void validate() const {
    if (nodes.size() != weights.size() || nodes.size() == 0)
      throw std::invalid_argument("quadrature: node/weight size mismatch");
    if ((weights.array() <= 0).any()) throw std::invalid_argument("quadrature: weights must be positive");
    if (std::abs(weights.sum() - Scalar(1)) > Scalar(1e-12))
      throw std::invalid_argument("quadrature: weights must sum to 1");
    for (Eigen::Index i = 1; i < nodes.size(); ++i)
      if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("quadrature: nodes must be strictly increasing");
  }
};

/// ||f||_rho = sqrt(sum_j w_j f(x_j)^2) for any pointwise-evaluable f.
template <typename Scalar, typename F>
  requires std::is_invocable_r_v<Scalar, F, Scalar>
Scalar rho_norm(F&& f, const Quadrature<Scalar>& q) {
  Scalar acc = 0;
  for (Eigen::Index j = 0; j < q.nodes.size(); ++j) {
    const Scalar v = f(q.nodes[j]);
    acc += q.weights[j] * v * v;
  }
  return std::sqrt(acc);
}

template <typename Scalar>
Scalar rho_norm(const RkhsFunction<Scalar>& f, const Quadrature<Scalar>& q) {
  return rho_norm([&](Scalar x) { return f.evaluate(x); }, q);
}

/// Same norm from values already tabulated on the quadrature nodes.
template <typename Scalar>
Scalar rho_norm_nodes(const typename Quadrature<Scalar>::Vector& values, const Quadrature<Scalar>& q) {
  return std::sqrt((q.weights.array() * values.array().square()).sum());
}

using QuadratureD = Quadrature<double>;

}  // namespace okr
