#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "okr/errors.hpp"
#include "okr/kernel.hpp"

namespace okr {

/// Finite kernel expansion  f(x) = scale * sum_i coeffs[i] K(support[i], x).
///
/// The global scale makes the recurring "f <- s*f + w*K_x" update O(1):
/// it multiplies the scale and appends one atom instead of rescaling every
/// stored coefficient. Atom storage grows geometrically so a long online
/// run does one allocation per doubling.
template <typename Scalar = double>
class RkhsFunction {
 public:
  using Array = typename Kernel<Scalar>::Array;
  using Matrix = typename Kernel<Scalar>::Matrix;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit RkhsFunction(Kernel<Scalar> kernel) : kernel_(std::move(kernel)) {}

  RkhsFunction(Kernel<Scalar> kernel, Array support, Array coeffs, Scalar scale = 1)
      : kernel_(std::move(kernel)) {
    if (support.size() != coeffs.size())
      throw std::invalid_argument("rkhs function: support/coeffs length mismatch");
    if (!(scale > 0)) throw std::invalid_argument("rkhs function: scale must be positive");
    for (Eigen::Index i = 0; i < support.size(); ++i) kernel_.require_in_domain(support[i]);
    support_ = std::move(support);
    coeffs_ = std::move(coeffs);
    n_ = support_.size();
    scale_ = scale;
  }

  static RkhsFunction zero(Kernel<Scalar> kernel) { return RkhsFunction(std::move(kernel)); }

  static RkhsFunction atom(Kernel<Scalar> kernel, Scalar x, Scalar w) {
    RkhsFunction f(std::move(kernel));
    f.kernel_.require_in_domain(x);
    f.append(x, w);
    return f;
  }

  const Kernel<Scalar>& kernel() const { return kernel_; }
  Eigen::Index atom_count() const { return n_; }
  Scalar scale() const { return scale_; }
  auto support() const { return support_.head(n_); }
  auto coeffs() const { return coeffs_.head(n_); }

  Scalar evaluate(Scalar x) const {
    kernel_.require_in_domain(x);
    if (n_ == 0) return Scalar(0);
    return scale_ * (coeffs_.head(n_) * kernel_.row(support_.head(n_), x)).sum();
  }

  /// f <- s*f + w*K_x. O(1) amortized; requires s > 0 (the scale stays
  /// positive, matching the contraction factors this artifact uses).
  void scaled_update(Scalar s, Scalar x, Scalar w) {
    if (!(s > 0)) throw std::invalid_argument("scaled_update: scale factor must be positive");
    kernel_.require_in_domain(x);
    scale_ *= s;
    append(x, w / scale_);
  }

  /// Fold the global scale into the coefficients; pointwise a no-op.
  void fold_scale() {
    coeffs_.head(n_) *= scale_;
    scale_ = Scalar(1);
  }

  /// sqrt(scale^2 c^T G c); quadratic forms within -1e-10 of zero clamp to
  /// zero, anything lower signals kernel misuse. O(atoms^2).
  Scalar k_norm() const {
    return std::sqrt(k_norm_sq());
  }

  Scalar k_norm_sq() const {
    if (n_ == 0) return Scalar(0);
    const Matrix g = kernel_.gram(support_.head(n_));
    const Vector c = coeffs_.head(n_).matrix();
    Scalar q = scale_ * scale_ * c.dot(g * c);
    if (q < 0) {
      if (q < Scalar(-1e-10)) throw PsdError("k_norm: Gram quadratic form negative beyond tolerance");
      q = 0;
    }
    return q;
  }

  /// Merge atoms whose support points are within tol of the first point of
  /// their (sorted) cluster; tol = 0 merges exact duplicates only. The merged
  /// atom sits at the cluster anchor, so the pointwise perturbation is at
  /// most (merged coefficient mass) * Lip(K) * tol.
  RkhsFunction compact(Scalar tol) const {
    if (tol < 0) throw std::invalid_argument("compact: tol must be nonnegative");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return support_[a] < support_[b]; });

    std::vector<Scalar> xs, ws;
    xs.reserve(order.size());
    ws.reserve(order.size());
    for (Eigen::Index idx : order) {
      const Scalar x = support_[idx];
      const Scalar w = coeffs_[idx];
      if (!xs.empty() && x - xs.back() <= tol) {
        ws.back() += w;
      } else {
        xs.push_back(x);
        ws.push_back(w);
      }
    }
    RkhsFunction out(kernel_);
    out.scale_ = scale_;
    out.reserve(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) out.append(xs[i], ws[i]);
    return out;
  }

  void reserve(Eigen::Index capacity) {
    if (capacity <= support_.size()) return;
    Array s(capacity), c(capacity);
    s.head(n_) = support_.head(n_);
    c.head(n_) = coeffs_.head(n_);
    support_.swap(s);
    coeffs_.swap(c);
  }

  void append(Scalar x, Scalar coeff) {
    if (n_ == support_.size()) reserve(std::max<Eigen::Index>(16, 2 * support_.size()));
    support_[n_] = x;
    coeffs_[n_] = coeff;
    ++n_;
  }

 private:
  Kernel<Scalar> kernel_;
  Array support_{0};
  Array coeffs_{0};
  Eigen::Index n_ = 0;
  Scalar scale_ = 1;
};

namespace detail {
template <typename Scalar>
Scalar clamp_quadratic_form(Scalar q) {
  if (q < 0) {
    if (q < Scalar(-1e-10)) throw PsdError("k-distance: joint Gram quadratic form negative beyond tolerance");
    return Scalar(0);
  }
  return q;
}
}  // namespace detail

/// <f, g>_K through the cross-Gram of the two supports.
template <typename Scalar>
Scalar k_inner(const RkhsFunction<Scalar>& f, const RkhsFunction<Scalar>& g) {
  if (!f.kernel().same_as(g.kernel())) throw std::invalid_argument("k_inner: kernel mismatch");
  if (f.atom_count() == 0 || g.atom_count() == 0) return Scalar(0);
  Scalar acc = 0;
  for (Eigen::Index j = 0; j < g.atom_count(); ++j)
    acc += g.coeffs()[j] * (f.coeffs() * f.kernel().row(f.support(), g.support()[j])).sum();
  return f.scale() * g.scale() * acc;
}

/// ||f - g||_K via the joint Gram quadratic form of f (+) (-g).
template <typename Scalar>
Scalar k_distance(const RkhsFunction<Scalar>& f, const RkhsFunction<Scalar>& g) {
  if (!f.kernel().same_as(g.kernel())) throw std::invalid_argument("k_distance: kernel mismatch");
  const Scalar q = f.k_norm_sq() - 2 * k_inner(f, g) + g.k_norm_sq();
  return std::sqrt(detail::clamp_quadratic_form(q));
}

using RkhsFunctionD = RkhsFunction<double>;

}  // namespace okr
