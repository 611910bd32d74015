#include <cmath>

#include "doctest.h"
#include "okr/quadrature.hpp"

using okr::QuadratureD;

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Legendre rules validate and integrate polynomials exactly") {
  for (int n : {4, 64, 256}) {
    const auto q = QuadratureD::gauss_legendre(n);
    q.validate();
    CHECK(q.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    // degree 2n-1 exactness: integral of x^5 over [0,1] = 1/6
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += q.weights[i] * std::pow(q.nodes[i], 5);
    CHECK(acc == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  }
}

TEST_CASE("rho_norm") {
  const auto q = QuadratureD::gauss_legendre(64);
  CHECK(okr::rho_norm<double>([](double) { return 0.0; }, q) == 0.0);
  CHECK(okr::rho_norm<double>([](double) { return 1.0; }, q) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(okr::rho_norm<double>([](double x) { return x; }, q) - std::sqrt(1.0 / 3.0)) <=
        1e-12);
}

TEST_CASE("invalid rules are rejected") {
  auto q = QuadratureD::gauss_legendre(8);
  q.weights[3] = -q.weights[3];
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);

  auto q2 = QuadratureD::gauss_legendre(8);
  q2.weights[0] += 1e-6;
  CHECK_THROWS_AS(q2.validate(), std::invalid_argument);

  auto q3 = QuadratureD::gauss_legendre(8);
  std::swap(q3.nodes[2], q3.nodes[3]);
  CHECK_THROWS_AS(q3.validate(), std::invalid_argument);
}

}  // TEST_SUITE
