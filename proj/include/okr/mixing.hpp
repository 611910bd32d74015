#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "okr/copula.hpp"
#include "okr/errors.hpp"

namespace okr {

// phi_t = sup_B ess sup_u |int_B (c_t(u,v) - 1) dv| over Borel B in [0,1].
// For a fixed u the supremum over B is attained at B = {v : c_t(u,v) > 1},
// where it equals the integral of the positive part. Row-stochasticity gives
// int (c_t(u,v) - 1) dv = 0, so positive and negative parts carry equal mass
// and the supremum equals half the L1 row integral:
//   phi_t = max_u (1/2) int |c_t(u,v) - 1| dv.
// The same reduction applied under the x-average gives beta_t. Both are
// cross-checked in the tests against direct maximization over threshold sets.
namespace detail {
template <typename Scalar>
Scalar half_l1_row(const GridCopula<Scalar>& ct, int row) {
  const auto& m = ct.density_matrix();
  const int n = ct.resolution();
  const Scalar row_integral = m.row(row).sum() / n;
  if (std::abs(row_integral - 1) > Scalar(1e-6))
    throw InvalidCopulaError("mixing coefficient: row integral deviates from 1 beyond 1e-6");
  return (m.row(row).array() - 1).abs().sum() / (2 * Scalar(n));
}
}  // namespace detail

// The row values h_i are midpoint samples of h(u) = (1/2) int |c_t(u,v)-1| dv,
// whose supremum for the shipped families sits on the boundary u in {0,1}.
// max_i h_i alone undershoots such a boundary supremum by h'/(2n) — at the
// acceptance resolution that quantization floor exceeds the FGM tolerance —
// so the estimate adds a one-sided linear extrapolation to each boundary
// (exact for row profiles linear in u, a no-op for flat ones).
template <typename Scalar>
Scalar phi_coefficient(const GridCopula<Scalar>& ct) {
  const int n = ct.resolution();
  Scalar best = 0;
  Scalar h0 = 0, h1 = 0, hm1 = 0, hm2 = 0;
  for (int i = 0; i < n; ++i) {
    const Scalar h = detail::half_l1_row(ct, i);
    best = std::max(best, h);
    if (i == 0) h0 = h;
    if (i == 1) h1 = h;
    if (i == n - 2) hm2 = h;
    if (i == n - 1) hm1 = h;
  }
  if (n >= 2) {
    best = std::max(best, h0 + (h0 - h1) / 2);
    best = std::max(best, hm1 + (hm1 - hm2) / 2);
  }
  return std::min(best, Scalar(1));
}

template <typename Scalar>
Scalar beta_coefficient(const GridCopula<Scalar>& ct) {
  Scalar acc = 0;
  for (int i = 0; i < ct.resolution(); ++i) acc += detail::half_l1_row(ct, i);
  return acc / ct.resolution();
}

enum class MixingKind { exponential, polynomial, exact };

/// Decay envelope for a phi_t / beta_t sequence:
///   exponential   phi_t <= D r^t,  D > 0, r in (0,1)
///   polynomial    phi_t <= b t^{-k},  b > 0, k > 0
///   exact         the raw sequence, kept for reporting
template <typename Scalar = double>
struct MixingProfile {
  MixingKind kind = MixingKind::exponential;
  Scalar D = 0;  // exponential amplitude
  Scalar r = Scalar(0.5);
  Scalar b = 0;  // polynomial amplitude
  Scalar k = 1;
  std::vector<std::pair<long, Scalar>> values;  // exact kind only

  static MixingProfile exponential(Scalar D, Scalar r) {
    if (!(D >= 0) || !(r > 0 && r < 1))
      throw std::invalid_argument("mixing profile: need D >= 0 and r in (0,1)");
    MixingProfile p;
    p.kind = MixingKind::exponential;
    p.D = D;
    p.r = r;
    return p;
  }

  static MixingProfile polynomial(Scalar b, Scalar k) {
    if (!(b > 0 && k > 0)) throw std::invalid_argument("mixing profile: need b > 0 and k > 0");
    MixingProfile p;
    p.kind = MixingKind::polynomial;
    p.b = b;
    p.k = k;
    return p;
  }

  static MixingProfile exact(std::vector<std::pair<long, Scalar>> vals) {
    MixingProfile p;
    p.kind = MixingKind::exact;
    p.values = std::move(vals);
    return p;
  }

  /// Independent samples: D = 0 collapses every dependence factor to 1.
  static MixingProfile iid() { return exponential(0, Scalar(0.5)); }

  Scalar envelope(long t) const {
    switch (kind) {
      case MixingKind::exponential:
        return D * std::pow(r, Scalar(t));
      case MixingKind::polynomial:
        return b * std::pow(Scalar(t), -k);
      case MixingKind::exact:
        for (const auto& [tt, v] : values)
          if (tt == t) return v;
        throw std::invalid_argument("mixing profile: exact sequence has no value at requested t");
    }
    return 0;
  }
};

/// Least-squares envelope fit of log phi_t against t (exponential) or log t
/// (polynomial), then the amplitude is inflated minimally so the envelope
/// dominates every input point. Nonpositive values are the caller's problem:
/// drop zeros first.
template <typename Scalar>
MixingProfile<Scalar> fit_mixing_profile(const std::vector<std::pair<long, Scalar>>& values,
                                         MixingKind kind) {
  if (values.size() < 2) throw FitError("fit_mixing_profile: need at least two points");
  for (const auto& [t, v] : values)
    if (!(v > 0)) throw FitError("fit_mixing_profile: values must be strictly positive");
  if (kind == MixingKind::exact) return MixingProfile<Scalar>::exact(values);

  const Eigen::Index n = static_cast<Eigen::Index>(values.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> design(n, 2);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar t = Scalar(values[static_cast<std::size_t>(i)].first);
    design(i, 0) = 1;
    design(i, 1) = (kind == MixingKind::exponential) ? t : std::log(t);
    target[i] = std::log(values[static_cast<std::size_t>(i)].second);
  }
  const Eigen::Matrix<Scalar, 2, 1> beta = design.colPivHouseholderQr().solve(target);

  if (kind == MixingKind::exponential) {
    Scalar r = std::exp(beta[1]);
    if (!(r < 1)) r = Scalar(1) - Scalar(1e-12);  // nonincreasing data can sit on the boundary
    if (!(r > 0)) throw FitError("fit_mixing_profile: degenerate exponential rate");
    Scalar D = std::exp(beta[0]);
    for (const auto& [t, v] : values) D = std::max(D, v / std::pow(r, Scalar(t)));
    return MixingProfile<Scalar>::exponential(D, r);
  }
  Scalar k = -beta[1];
  if (!(k > 0)) k = Scalar(1e-12);
  Scalar b = std::exp(beta[0]);
  for (const auto& [t, v] : values) b = std::max(b, v * std::pow(Scalar(t), k));
  return MixingProfile<Scalar>::polynomial(b, k);
}

using MixingProfileD = MixingProfile<double>;

}  // namespace okr
