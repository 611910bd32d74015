#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace okr {

enum class KernelFamily { gaussian, polynomial, linear };

/// Mercer kernel on a compact interval of the real line.
///
/// Shipped families (all continuous, symmetric, positive semi-definite):
///   gaussian(bandwidth)        K(x,y) = exp(-(x-y)^2 / (2 bandwidth^2))
///   polynomial(degree,offset)  K(x,y) = (x*y + offset)^degree
///   linear                     K(x,y) = x*y
///
/// The diagonal sup C_K = sup_x sqrt(K(x,x)) is closed-form per family:
/// gaussian has K(x,x) = 1 identically; polynomial and linear have a
/// diagonal monotone in |x|, so the sup sits on an interval endpoint.
template <typename Scalar = double>
class Kernel {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  static Kernel gaussian(Scalar bandwidth, Scalar lo = 0, Scalar hi = 1) {
    if (!(bandwidth > 0)) throw std::invalid_argument("gaussian kernel: bandwidth must be positive");
    Kernel k(KernelFamily::gaussian, lo, hi);
    k.bandwidth_ = bandwidth;
    k.inv_two_bw2_ = Scalar(1) / (2 * bandwidth * bandwidth);
    return k;
  }

  static Kernel polynomial(int degree, Scalar offset, Scalar lo = 0, Scalar hi = 1) {
    if (degree < 1) throw std::invalid_argument("polynomial kernel: degree must be a positive integer");
    if (offset < 0) throw std::invalid_argument("polynomial kernel: offset must be nonnegative");
    Kernel k(KernelFamily::polynomial, lo, hi);
    k.degree_ = degree;
    k.offset_ = offset;
    return k;
  }

  static Kernel linear(Scalar lo = 0, Scalar hi = 1) {
    return Kernel(KernelFamily::linear, lo, hi);
  }

  KernelFamily family() const { return family_; }
  Scalar domain_lo() const { return lo_; }
  Scalar domain_hi() const { return hi_; }
  Scalar bandwidth() const { return bandwidth_; }
  int degree() const { return degree_; }
  Scalar offset() const { return offset_; }

  bool in_domain(Scalar x) const { return x >= lo_ && x <= hi_; }

  void require_in_domain(Scalar x) const {
    if (!in_domain(x)) throw std::domain_error("kernel: point outside domain");
  }

  /// K(x, y); both points must lie in the domain.
  Scalar operator()(Scalar x, Scalar y) const {
    require_in_domain(x);
    require_in_domain(y);
    return eval_unchecked(x, y);
  }

  Scalar eval_unchecked(Scalar x, Scalar y) const {
    switch (family_) {
      case KernelFamily::gaussian: {
        const Scalar d = x - y;
        return std::exp(-d * d * inv_two_bw2_);
      }
      case KernelFamily::polynomial:
        return ipow(x * y + offset_, degree_);
      case KernelFamily::linear:
        return x * y;
    }
    return Scalar(0);
  }

  /// Vectorized row K(xs_i, y). Assumes xs already validated (hot path).
  template <typename Derived>
  Array row(const Eigen::ArrayBase<Derived>& xs, Scalar y) const {
    switch (family_) {
      case KernelFamily::gaussian:
        return (-(xs - y).square() * inv_two_bw2_).exp();
      case KernelFamily::polynomial: {
        Array base = xs * y + offset_;
        Array acc = base;
        for (int i = 1; i < degree_; ++i) acc *= base;
        return acc;
      }
      case KernelFamily::linear:
        return xs * y;
    }
    return Array::Zero(xs.size());
  }

  /// Gram matrix of a point set (symmetric, PSD up to roundoff).
  template <typename Derived>
  Matrix gram(const Eigen::ArrayBase<Derived>& pts) const {
    const Eigen::Index n = pts.size();
    Matrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j) g.col(j) = row(pts, pts[j]).matrix();
    return g;
  }

  /// C_K = sup_x sqrt(K(x,x)) over the domain.
  Scalar sup_bound() const {
    switch (family_) {
      case KernelFamily::gaussian:
        return Scalar(1);
      case KernelFamily::polynomial: {
        const Scalar m = std::max(std::abs(lo_), std::abs(hi_));
        return std::sqrt(ipow(m * m + offset_, degree_));
      }
      case KernelFamily::linear:
        return std::max(std::abs(lo_), std::abs(hi_));
    }
    return Scalar(0);
  }

  Scalar sup_bound_sq() const {
    const Scalar c = sup_bound();
    return c * c;
  }

  bool same_as(const Kernel& other) const {
    return family_ == other.family_ && lo_ == other.lo_ && hi_ == other.hi_ &&
           bandwidth_ == other.bandwidth_ && degree_ == other.degree_ && offset_ == other.offset_;
  }

  /// Stable textual descriptor, used for config hashing and cache keys.
  std::string canonical() const {
    char buf[160];
    switch (family_) {
      case KernelFamily::gaussian:
        std::snprintf(buf, sizeof(buf), "gaussian(bandwidth=%.17g,domain=[%.17g,%.17g])",
                      double(bandwidth_), double(lo_), double(hi_));
        break;
      case KernelFamily::polynomial:
        std::snprintf(buf, sizeof(buf), "polynomial(degree=%d,offset=%.17g,domain=[%.17g,%.17g])",
                      degree_, double(offset_), double(lo_), double(hi_));
        break;
      case KernelFamily::linear:
        std::snprintf(buf, sizeof(buf), "linear(domain=[%.17g,%.17g])", double(lo_), double(hi_));
        break;
    }
    return buf;
  }

 private:
  Kernel(KernelFamily f, Scalar lo, Scalar hi) : family_(f), lo_(lo), hi_(hi) {
    if (!(lo < hi)) throw std::invalid_argument("kernel: domain must be a nondegenerate interval");
  }

  static Scalar ipow(Scalar base, int e) {
    Scalar acc = 1;
    for (int i = 0; i < e; ++i) acc *= base;
    return acc;
  }

  KernelFamily family_;
  Scalar lo_, hi_;
  Scalar bandwidth_ = 0;
  Scalar inv_two_bw2_ = 0;
  int degree_ = 0;
  Scalar offset_ = 0;
};

using KernelD = Kernel<double>;

}  // namespace okr
