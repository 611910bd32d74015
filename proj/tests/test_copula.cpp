#include <cmath>

#include "doctest.h"
#include "okr/copula.hpp"
#include "okr/rng.hpp"

using okr::CopulaD;
using okr::GridCopulaD;
using okr::SplitMix64;

namespace {

// closed-form FGM density, written independently of the library
double fgm_density(double rho, double u, double v) {
  return 1.0 + rho * (1 - 2 * u) * (1 - 2 * v);
}

double max_cell_deviation(const GridCopulaD& g, double rho) {
  const int n = g.resolution();
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    for (int j = 0; j < n; ++j) {
      const double v = (j + 0.5) / n;
      worst = std::max(worst, std::abs(g.density_matrix()(i, j) - fgm_density(rho, u, v)));
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("copula") {

TEST_CASE("densities") {
  CHECK(CopulaD::independence().density(0.31, 0.77) == 1.0);
  CHECK(CopulaD::fgm(0.9).density(0.0, 0.0) == doctest::Approx(1.9).epsilon(1e-15));
  const auto mix = CopulaD::mixture(0.5, CopulaD::fgm(0.8));
  CHECK(mix.density(0.0, 0.0) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK_THROWS_AS(CopulaD::fgm(0.5).density(1.2, 0.5), std::domain_error);
  CHECK_THROWS_AS(CopulaD::fgm(1.5), std::invalid_argument);
}

TEST_CASE("conditional cdf") {
  CHECK(CopulaD::independence().conditional_cdf(0.4, 0.3) == doctest::Approx(0.3));
  // analytic integral of the FGM density in v
  const double rho = 0.7, u = 0.2, v = 0.6;
  CHECK(CopulaD::fgm(rho).conditional_cdf(u, v) ==
        doctest::Approx(v + rho * (1 - 2 * u) * (v - v * v)).epsilon(1e-15));
  for (const auto& c : {CopulaD::independence(), CopulaD::fgm(-0.8),
                        CopulaD::mixture(0.25, CopulaD::fgm(0.9))}) {
    CHECK(c.conditional_cdf(0.37, 0.0) == doctest::Approx(0.0));
    CHECK(c.conditional_cdf(0.37, 1.0) == doctest::Approx(1.0));
  }
  SUBCASE("nondecreasing in v and matching a numeric integral of the density") {
    SplitMix64 rng(3);
    const auto c = CopulaD::mixture(0.3, CopulaD::fgm(0.85));
    for (int rep = 0; rep < 10; ++rep) {
      const double uu = rng.next_uniform();
      double prev = 0, acc = 0;
      const int steps = 2000;
      for (int s = 1; s <= steps; ++s) {
        const double vv = double(s) / steps;
        acc += c.density(uu, (s - 0.5) / steps) / steps;
        const double cc = c.conditional_cdf(uu, vv);
        CHECK(cc >= prev - 1e-14);
        CHECK(cc == doctest::Approx(acc).epsilon(1e-5));
        prev = cc;
      }
    }
  }
}

TEST_CASE("grid copula invariants and lookups") {
  const auto g = okr::render_grid(CopulaD::fgm(0.9), 256);
  g.validate(1e-10, 1e-8);
  CHECK(g.density(0.001, 0.001) == doctest::Approx(fgm_density(0.9, 0.5 / 256, 0.5 / 256)));
  CHECK(g.conditional_cdf(0.5, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(g.density(-0.1, 0.5), std::domain_error);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Constant(32, 32, 1.0);
  bad(0, 0) = 3.0;
  CHECK_THROWS_AS(GridCopulaD(bad).validate(), okr::InvalidCopulaError);
  Eigen::MatrixXd neg = Eigen::MatrixXd::Constant(32, 32, 1.0);
  neg(3, 4) = -0.01;
  CHECK_THROWS_AS((GridCopulaD{neg}), okr::InvalidCopulaError);
}

TEST_CASE("darsow product: independence is a null element") {
  const auto prod = okr::darsow_product(CopulaD::independence(), CopulaD::fgm(0.9), 256);
  CHECK((prod.density_matrix().array() - 1).abs().maxCoeff() <= 1e-8);
  const auto prod2 = okr::darsow_product(CopulaD::fgm(0.9), CopulaD::independence(), 256);
  CHECK((prod2.density_matrix().array() - 1).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("darsow product: FGM semigroup fgm(a) * fgm(b) = fgm(ab/3)") {
  const double a = 0.9, b = -0.6;
  const auto prod = okr::darsow_product(CopulaD::fgm(a), CopulaD::fgm(b), 512);
  prod.validate(1e-8, 1e-6);
  CHECK(max_cell_deviation(prod, a * b / 3.0) <= 1e-4);
}

TEST_CASE("darsow product is associative on FGM inputs") {
  const double a = 0.9, b = 0.8, c = -0.7;
  const auto left = okr::darsow_product(
      CopulaD::grid(okr::darsow_product(CopulaD::fgm(a), CopulaD::fgm(b), 512)), CopulaD::fgm(c),
      512);
  const auto right = okr::darsow_product(
      CopulaD::fgm(a), CopulaD::grid(okr::darsow_product(CopulaD::fgm(b), CopulaD::fgm(c), 512)),
      512);
  CHECK((left.density_matrix() - right.density_matrix()).array().abs().maxCoeff() <= 1e-4);
  // both equal the closed-form triple product fgm(abc/9)
  CHECK(max_cell_deviation(left, a * b * c / 9.0) <= 1e-4);
  CHECK(max_cell_deviation(right, a * b * c / 9.0) <= 1e-4);
}

TEST_CASE("comonotone copula is the *-identity (integral definition)") {
  // (M * C)(u,v) = integral_0^u C_{,1}(t, v) dt = C(u,v); and symmetrically
  // C * M through the FGM symmetry. Midpoint rule on the conditional CDF.
  const auto c = CopulaD::fgm(0.8);
  const int n = 4096;
  for (double u : {0.25, 0.5, 0.9}) {
    for (double v : {0.1, 0.5, 0.75}) {
      double acc = 0;
      const int cells = static_cast<int>(u * n);
      for (int i = 0; i < cells; ++i) acc += c.conditional_cdf((i + 0.5) / n, v) / n;
      acc += c.conditional_cdf((cells + (u * n - cells) / 2) / n, v) * (u - double(cells) / n);
      CHECK(acc == doctest::Approx(c.cdf(u, v)).epsilon(1e-6));
    }
  }
}

TEST_CASE("iterate_copula") {
  SUBCASE("t = 1 renders the copula itself") {
    const auto g = okr::iterate_copula(CopulaD::independence(), 1, 64);
    CHECK((g.density_matrix().array() - 1).abs().maxCoeff() == 0.0);
  }
  SUBCASE("FGM t-step parameter is 3 (rho/3)^t") {
    const double rho = 0.9;
    const auto g3 = okr::iterate_copula(CopulaD::fgm(rho), 3, 512);
    CHECK(max_cell_deviation(g3, 3 * std::pow(rho / 3, 3)) <= 1e-4);  // 0.081
  }
  SUBCASE("ergodic flattening: sup |c_t - 1| decreases in t") {
    double prev = std::numeric_limits<double>::infinity();
    for (int t = 1; t <= 6; ++t) {
      const auto g = okr::iterate_copula(CopulaD::fgm(0.9), t, 128);
      const double dev = (g.density_matrix().array() - 1).abs().maxCoeff();
      CHECK(dev < prev);
      prev = dev;
    }
  }
  SUBCASE("products keep row-stochasticity and total mass at n >= 256") {
    for (int t : {2, 4}) {
      const auto g = okr::iterate_copula(CopulaD::mixture(0.25, CopulaD::fgm(0.9)), t, 256);
      g.validate(1e-6, 1e-6);
    }
  }
}

TEST_CASE("polynomial-decay fixture is a valid copula") {
  const auto fixture = okr::make_polynomial_decay_fixture<double>();
  const auto& g = fixture.grid_copula();
  g.validate(1e-10, 1e-10);
  CHECK(fixture.density_lower_bound() > 0);
}

}  // TEST_SUITE
