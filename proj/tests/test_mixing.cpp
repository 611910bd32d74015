#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "okr/copula.hpp"
#include "okr/mixing.hpp"

using okr::CopulaD;
using okr::GridCopulaD;
using okr::MixingKind;
using okr::MixingProfileD;

namespace {

// Direct maximization over threshold sets {v : c(u,v) > 1} for one row: the
// sup over Borel B of |int_B (c - 1)| is attained there, so this cross-checks
// the half-L1 row reduction without assuming it.
double row_sup_by_threshold_sets(const GridCopulaD& g, int row) {
  const int n = g.resolution();
  double pos = 0, neg = 0;
  for (int j = 0; j < n; ++j) {
    const double d = g.density_matrix()(row, j) - 1.0;
    if (d > 0) pos += d;
    else neg -= d;
  }
  return std::max(pos, neg) / n;
}

double row_half_l1(const GridCopulaD& g, int row) {
  return (g.density_matrix().row(row).array() - 1).abs().sum() / (2.0 * g.resolution());
}

}  // namespace

TEST_SUITE("mixing") {

TEST_CASE("independence has zero coefficients") {
  const auto g = okr::render_grid(CopulaD::independence(), 256);
  CHECK(okr::phi_coefficient(g) == 0.0);
  CHECK(okr::beta_coefficient(g) == 0.0);
}

TEST_CASE("FGM closed forms: phi_t = rho_t/4, beta_t = rho_t/8") {
  const double rho = 0.9;
  for (int t = 1; t <= 3; ++t) {
    const double rho_t = 3 * std::pow(rho / 3, t);
    const auto g = okr::iterate_copula(CopulaD::fgm(rho), t, 2048);
    CHECK(std::abs(okr::phi_coefficient(g) - rho_t / 4) <= 1e-4);
    CHECK(std::abs(okr::beta_coefficient(g) - rho_t / 8) <= 1e-4);
  }
}

TEST_CASE("half-L1 row reduction equals direct threshold-set maximization") {
  for (const auto& c : {CopulaD::fgm(0.9), CopulaD::mixture(0.3, CopulaD::fgm(-0.8)),
                        okr::make_polynomial_decay_fixture<double>()}) {
    for (int t : {1, 2}) {
      const auto g = okr::iterate_copula(c, t, 256);
      for (int row = 0; row < g.resolution(); row += 17)
        CHECK(row_half_l1(g, row) ==
              doctest::Approx(row_sup_by_threshold_sets(g, row)).epsilon(1e-12));
      // the reported coefficient dominates every row and stays in [0,1]
      double max_row = 0;
      for (int row = 0; row < g.resolution(); ++row)
        max_row = std::max(max_row, row_half_l1(g, row));
      CHECK(okr::phi_coefficient(g) >= max_row - 1e-15);
      CHECK(okr::phi_coefficient(g) <= 1.0);
    }
  }
}

TEST_CASE("boundary-corrected ess-sup hits the continuous FGM value") {
  // the max over midpoint rows alone sits (rho/4) / n below rho/4; the
  // extrapolated estimate removes that quantization floor
  const auto g = okr::iterate_copula(CopulaD::fgm(0.9), 1, 2048);
  CHECK(std::abs(okr::phi_coefficient(g) - 0.225) <= 1e-6);
}

TEST_CASE("ordering beta <= phi and monotone decay for FGM") {
  double prev_phi = 1.0;
  for (int t = 1; t <= 6; ++t) {
    const auto g = okr::iterate_copula(CopulaD::fgm(0.9), t, 256);
    const double phi = okr::phi_coefficient(g);
    const double beta = okr::beta_coefficient(g);
    CHECK(beta <= phi + 1e-15);
    CHECK(phi <= 1.0);
    CHECK(phi <= prev_phi + 1e-12);
    prev_phi = phi;
  }
}

TEST_CASE("row-integral violation raises invalid-copula") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Constant(64, 64, 1.0);
  bad.row(5).array() += 1e-4;
  CHECK_THROWS_AS(okr::phi_coefficient(GridCopulaD(bad)), okr::InvalidCopulaError);
}

TEST_CASE("mixture density lower bound gives an exponential envelope") {
  // the eps floor is the paper-style b > 0 condition; the computed phi
  // sequence must fit an exponential envelope with r < 1
  const auto c = CopulaD::mixture(0.25, CopulaD::fgm(0.9));
  CHECK(c.density_lower_bound() >= 0.25);
  std::vector<std::pair<long, double>> vals;
  for (int t = 1; t <= 6; ++t)
    vals.emplace_back(t, okr::phi_coefficient(okr::iterate_copula(c, t, 256)));
  const auto prof = okr::fit_mixing_profile(vals, MixingKind::exponential);
  CHECK(prof.r < 1.0);
  CHECK(prof.r > 0.0);
  for (const auto& [t, v] : vals) CHECK(prof.envelope(t) >= v * (1 - 1e-12));
}

TEST_CASE("fit_mixing_profile") {
  SUBCASE("exact geometric data recovers (D, r) to 1e-9") {
    std::vector<std::pair<long, double>> vals;
    for (int t = 1; t <= 8; ++t) vals.emplace_back(t, 0.75 * std::pow(0.3, t));
    const auto prof = okr::fit_mixing_profile(vals, MixingKind::exponential);
    CHECK(prof.D == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(prof.r == doctest::Approx(0.3).epsilon(1e-9));
  }
  SUBCASE("computed FGM(0.9) coefficients give r = 0.3 within 1e-3") {
    std::vector<std::pair<long, double>> vals;
    for (int t = 1; t <= 6; ++t)
      vals.emplace_back(t, okr::phi_coefficient(okr::iterate_copula(CopulaD::fgm(0.9), t, 1024)));
    const auto prof = okr::fit_mixing_profile(vals, MixingKind::exponential);
    CHECK(prof.r == doctest::Approx(0.3).epsilon(1e-3));
  }
  SUBCASE("exact power-law data recovers (b, k)") {
    std::vector<std::pair<long, double>> vals;
    for (int t = 1; t <= 8; ++t) vals.emplace_back(t, 0.4 * std::pow(double(t), -2.0));
    const auto prof = okr::fit_mixing_profile(vals, MixingKind::polynomial);
    CHECK(prof.b == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(prof.k == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("nonpositive values are a fit error") {
    std::vector<std::pair<long, double>> zeros{{1, 0.0}, {2, 0.0}};
    CHECK_THROWS_AS(okr::fit_mixing_profile(zeros, MixingKind::exponential), okr::FitError);
    std::vector<std::pair<long, double>> one{{1, 0.5}};
    CHECK_THROWS_AS(okr::fit_mixing_profile(one, MixingKind::exponential), okr::FitError);
  }
}

TEST_CASE("profile envelopes and validation") {
  CHECK(MixingProfileD::iid().envelope(3) == 0.0);
  CHECK(MixingProfileD::exponential(0.5, 0.4).envelope(2) == doctest::Approx(0.08));
  CHECK(MixingProfileD::polynomial(2.0, 2.0).envelope(4) == doctest::Approx(0.125));
  CHECK_THROWS_AS(MixingProfileD::exponential(0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MixingProfileD::polynomial(0.0, 1.0), std::invalid_argument);
}

}  // TEST_SUITE
