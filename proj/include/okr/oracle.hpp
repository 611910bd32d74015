#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "okr/errors.hpp"
#include "okr/kernel.hpp"
#include "okr/quadrature.hpp"
#include "okr/rkhs.hpp"

namespace okr {

/// Nystrom discretization of the integral operator
///   (T f)(x) = integral K(x, s) f(s) ds      (uniform measure on [0,1])
/// on the quadrature nodes: matrix[i][j] = K(x_i, x_j) w_j. The operator is
/// similar to the symmetric PSD matrix S = W^{1/2} K W^{1/2}; its cached
/// eigendecomposition drives fractional powers and spectral identities.
/// Eigenfunctions phi_i = W^{-1/2} v_i are orthonormal in the discrete
/// L2(mu) inner product.
template <typename Scalar = double>
class DiscretizedOperator {
 public:
  using Matrix = typename Kernel<Scalar>::Matrix;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  DiscretizedOperator(Kernel<Scalar> kernel, Quadrature<Scalar> q)
      : kernel_(std::move(kernel)), q_(std::move(q)) {
    q_.validate();
    const Matrix gram = kernel_.gram(q_.nodes.array());
    matrix_ = gram * q_.weights.asDiagonal();
    const Vector sqrt_w = q_.weights.array().sqrt();
    sqrt_w_ = sqrt_w.array();
    const Matrix sym = sqrt_w.asDiagonal() * gram * sqrt_w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("discretize_operator: eigendecomposition failed");
    eigvals_ = es.eigenvalues();
    eigvecs_ = es.eigenvectors();
    if (eigvals_.minCoeff() < Scalar(-1e-8))
      throw PsdError("discretize_operator: symmetrized operator not PSD");
  }

  /// Rebuilds an operator from previously computed pieces (disk cache path);
  /// sizes are validated, content is trusted to the cache key.
  static DiscretizedOperator from_parts(Kernel<Scalar> kernel, Quadrature<Scalar> q, Matrix matrix,
                                        Vector eigvals, Matrix eigvecs) {
    const Eigen::Index n = q.nodes.size();
    if (matrix.rows() != n || matrix.cols() != n || eigvals.size() != n || eigvecs.rows() != n ||
        eigvecs.cols() != n)
      throw std::invalid_argument("discretized operator: cached part sizes do not match");
    DiscretizedOperator T(std::move(kernel), std::move(q), std::move(matrix), std::move(eigvals),
                          std::move(eigvecs));
    return T;
  }

  const Kernel<Scalar>& kernel() const { return kernel_; }
  const Quadrature<Scalar>& quadrature() const { return q_; }
  const Matrix& matrix() const { return matrix_; }
  const Matrix& eigenvectors() const { return eigvecs_; }  // of W^{1/2} K W^{1/2}
  const Vector& eigenvalues() const { return eigvals_; }   // ascending

  Scalar spectral_radius() const { return eigvals_.maxCoeff(); }

  /// i-th eigenfunction tabulated on the nodes, ||.||_rho = 1.
  Vector eigenfunction_nodes(Eigen::Index i) const {
    return (eigvecs_.col(i).array() / sqrt_w_).matrix();
  }

  /// (T f) at the nodes from f at the nodes.
  Vector apply(const Vector& node_values) const { return matrix_ * node_values; }

  /// (T^nu f) at the nodes via the symmetrized eigendecomposition;
  /// eigenvalues below 1e-14 are treated as exactly zero.
  Vector apply_power(Scalar nu, const Vector& node_values) const {
    const Vector coeffs = eigvecs_.transpose() * (sqrt_w_ * node_values.array()).matrix();
    Vector scaled(coeffs.size());
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
      const Scalar s = eigvals_[i];
      scaled[i] = (s < Scalar(1e-14)) ? Scalar(0) : std::pow(s, nu) * coeffs[i];
    }
    return ((eigvecs_ * scaled).array() / sqrt_w_).matrix();
  }

 private:
  DiscretizedOperator(Kernel<Scalar> kernel, Quadrature<Scalar> q, Matrix matrix, Vector eigvals,
                      Matrix eigvecs)
      : kernel_(std::move(kernel)),
        q_(std::move(q)),
        matrix_(std::move(matrix)),
        eigvals_(std::move(eigvals)),
        eigvecs_(std::move(eigvecs)) {
    q_.validate();
    sqrt_w_ = q_.weights.array().sqrt();
  }

  Kernel<Scalar> kernel_;
  Quadrature<Scalar> q_;
  Matrix matrix_;
  Vector eigvals_;
  Matrix eigvecs_;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> sqrt_w_;
};

template <typename Scalar>
DiscretizedOperator<Scalar> discretize_operator(Kernel<Scalar> kernel, Quadrature<Scalar> q) {
  return DiscretizedOperator<Scalar>(std::move(kernel), std::move(q));
}

/// Ridge regularization target f_* = (T + lambda I)^{-1} T f_rho, returned
/// both as node values and as an exact kernel expansion on the nodes via the
/// stationarity identity f_* = (1/lambda) T (f_rho - f_*), whose quadrature
/// form reads off coefficients c_j = w_j (f_rho_j - f_*_j) / lambda.
template <typename Scalar>
struct RidgeSolution {
  RkhsFunction<Scalar> expansion;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> node_values;
  Scalar residual_sup = 0;  // ||(T + lambda I) f_* - T f_rho||_inf over nodes
};

template <typename Scalar, typename Derived>
RidgeSolution<Scalar> ridge_solution(const DiscretizedOperator<Scalar>& T, Scalar lambda,
                                     const Eigen::MatrixBase<Derived>& frho_expr) {
  if (!(lambda > 0)) throw std::invalid_argument("ridge_solution: lambda must be positive");
  using Matrix = typename DiscretizedOperator<Scalar>::Matrix;
  using Vector = typename DiscretizedOperator<Scalar>::Vector;
  const Vector frho_nodes = frho_expr;
  if (frho_nodes.size() != T.quadrature().nodes.size())
    throw std::invalid_argument("ridge_solution: node-value length mismatch");

  Matrix lhs = T.matrix();
  lhs.diagonal().array() += lambda;
  const Vector rhs = T.matrix() * frho_nodes;
  const Vector a = lhs.partialPivLu().solve(rhs);

  RidgeSolution<Scalar> out{
      RkhsFunction<Scalar>(T.kernel(), T.quadrature().nodes.array(),
                           (T.quadrature().weights.array() * (frho_nodes - a).array()) / lambda),
      a, (lhs * a - rhs).template lpNorm<Eigen::Infinity>()};
  return out;
}

/// Source-condition target f_rho = T^nu g for nu in (0,1]. Alongside the
/// node values we keep the Nystrom extension
///   f_rho(x) = sum_j w_j K(x, x_j) (T^{nu-1} g)(x_j),
/// a kernel expansion that reproduces the node values exactly and lets the
/// harness evaluate f_rho at arbitrary chain states.
template <typename Scalar>
struct TargetSpec {
  Scalar nu;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g_nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> frho_nodes;
  RkhsFunction<Scalar> frho_extension;
};

template <typename Scalar, typename Derived>
TargetSpec<Scalar> source_target(const DiscretizedOperator<Scalar>& T,
                                 const Eigen::MatrixBase<Derived>& g_expr, Scalar nu) {
  if (!(nu > 0 && nu <= 1)) throw std::invalid_argument("source_target: nu must lie in (0,1]");
  const typename DiscretizedOperator<Scalar>::Vector g_nodes = g_expr;
  const auto h = T.apply_power(nu - 1, g_nodes);  // shares the eigenvalue clamp with apply_power
  return TargetSpec<Scalar>{
      nu, g_nodes, T.apply(h),
      RkhsFunction<Scalar>(T.kernel(), T.quadrature().nodes.array(),
                           T.quadrature().weights.array() * h.array())};
}

/// Evaluates ||f_{lambda} - f_rho||_rho against the source-condition bound
/// lambda^nu ||g||_rho; a violation beyond 1e-6 relative slack means the
/// discretization itself is broken.
template <typename Scalar>
std::pair<Scalar, Scalar> approx_error_check(const DiscretizedOperator<Scalar>& T, Scalar lambda,
                                             const TargetSpec<Scalar>& spec,
                                             const Quadrature<Scalar>& q) {
  const auto ridge = ridge_solution(T, lambda, spec.frho_nodes);
  const Scalar err = rho_norm_nodes<Scalar>(ridge.node_values - spec.frho_nodes, q);
  const Scalar bound = std::pow(lambda, spec.nu) * rho_norm_nodes<Scalar>(spec.g_nodes, q);
  if (err > bound * (1 + Scalar(1e-6)))
    throw LemmaCheckError("approx_error_check: approximation error exceeds lambda^nu ||g||");
  return {err, bound};
}

/// Named g functions for configs: smooth shapes with O(1) norms.
inline std::function<double(double)> target_function(const std::string& name) {
  if (name == "sin") return [](double x) { return std::sin(6.283185307179586476925286766559 * x); };
  if (name == "poly") return [](double x) { return x * x; };
  if (name == "bump") {
    return [](double x) {
      const double z = (x - 0.5) / 0.15;
      return std::exp(-0.5 * z * z);
    };
  }
  throw std::invalid_argument("unknown target function '" + name + "' (expected sin, poly or bump)");
}

using DiscretizedOperatorD = DiscretizedOperator<double>;
using TargetSpecD = TargetSpec<double>;

}  // namespace okr
