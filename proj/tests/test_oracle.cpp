#include <cmath>

#include "doctest.h"
#include "okr/oracle.hpp"
#include "okr/rng.hpp"

using okr::DiscretizedOperatorD;
using okr::KernelD;
using okr::QuadratureD;

namespace {

Eigen::VectorXd tabulate(const std::function<double(double)>& f, const QuadratureD& q) {
  Eigen::VectorXd v(q.nodes.size());
  for (Eigen::Index i = 0; i < q.nodes.size(); ++i) v[i] = f(q.nodes[i]);
  return v;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("a flat kernel averages: T f = integral of f") {
  // gaussian with huge bandwidth is K = 1 to machine precision on [0,1]
  const auto q = QuadratureD::gauss_legendre(64);
  const DiscretizedOperatorD T(KernelD::gaussian(1e8), q);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(64);
  CHECK((T.apply(ones) - ones).lpNorm<Eigen::Infinity>() <= 1e-14);
  const auto fx = tabulate([](double x) { return x; }, q);
  CHECK((T.apply(fx).array() - 0.5).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("spectral radius is bounded by C_K^2") {
  const auto q = QuadratureD::gauss_legendre(256);
  for (const auto& k : {KernelD::gaussian(0.5), KernelD::polynomial(2, 1.0), KernelD::linear()}) {
    const DiscretizedOperatorD T(k, q);
    CHECK(T.spectral_radius() <= k.sup_bound_sq() + 1e-8);
    CHECK(T.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("top eigenvalue is stable under grid refinement") {
  const DiscretizedOperatorD T256(KernelD::gaussian(0.5), QuadratureD::gauss_legendre(256));
  const DiscretizedOperatorD T512(KernelD::gaussian(0.5), QuadratureD::gauss_legendre(512));
  CHECK(std::abs(T256.spectral_radius() - T512.spectral_radius()) <= 1e-8);
}

TEST_CASE("ridge_solution") {
  const auto q = QuadratureD::gauss_legendre(256);
  const DiscretizedOperatorD T(KernelD::gaussian(0.5), q);

  SUBCASE("zero target gives the zero function") {
    const auto sol = okr::ridge_solution(T, 0.1, Eigen::VectorXd::Zero(256));
    CHECK(sol.node_values.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(sol.expansion.k_norm() <= 1e-12);
  }

  SUBCASE("huge lambda crushes the solution by C_K^2 / lambda") {
    const auto frho = tabulate([](double x) { return std::sin(2 * M_PI * x); }, q);
    const double lambda = 1e8;
    const auto sol = okr::ridge_solution(T, lambda, frho);
    const double frho_rho = okr::rho_norm_nodes<double>(frho, q);
    CHECK(okr::rho_norm_nodes<double>(sol.node_values, q) <= frho_rho * 1.0 / lambda);
  }

  SUBCASE("rank-1 spectral identity on the top eigenfunction") {
    const Eigen::Index top = T.eigenvalues().size() - 1;
    const double s1 = T.eigenvalues()[top];
    const Eigen::VectorXd phi1 = T.eigenfunction_nodes(top);
    const double lambda = 0.05;
    const auto sol = okr::ridge_solution(T, lambda, phi1);
    CHECK((sol.node_values - (s1 / (s1 + lambda)) * phi1).lpNorm<Eigen::Infinity>() <= 1e-6);
  }

  SUBCASE("residual stays below 1e-8 across lambdas and kernels") {
    for (const auto& k : {KernelD::gaussian(0.5), KernelD::polynomial(3, 0.5)}) {
      const DiscretizedOperatorD Tk(k, q);
      const auto frho = tabulate([](double x) { return std::sin(2 * M_PI * x) + x; }, q);
      for (double lambda : {1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
        const auto sol = okr::ridge_solution(Tk, lambda, frho);
        CHECK(sol.residual_sup <= 1e-8);
      }
    }
  }

  SUBCASE("expansion reproduces the node values") {
    const auto frho = tabulate([](double x) { return x * x; }, q);
    const auto sol = okr::ridge_solution(T, 0.1, frho);
    for (Eigen::Index i = 0; i < 256; i += 37)
      CHECK(sol.expansion.evaluate(q.nodes[i]) ==
            doctest::Approx(sol.node_values[i]).epsilon(1e-11));
  }

  SUBCASE("lambda <= 0 is rejected") {
    CHECK_THROWS_AS(okr::ridge_solution(T, 0.0, Eigen::VectorXd::Zero(256)),
                    std::invalid_argument);
  }
}

TEST_CASE("source_target") {
  const auto q = QuadratureD::gauss_legendre(256);
  const DiscretizedOperatorD T(KernelD::gaussian(0.5), q);
  const auto g = tabulate(okr::target_function("sin"), q);

  SUBCASE("nu = 1 equals one application of the matrix") {
    const auto spec = okr::source_target(T, g, 1.0);
    CHECK((spec.frho_nodes - T.apply(g)).lpNorm<Eigen::Infinity>() <= 1e-8);
  }

  SUBCASE("eigenfunction input scales by s^nu") {
    const Eigen::Index top = T.eigenvalues().size() - 1;
    const double s1 = T.eigenvalues()[top];
    const Eigen::VectorXd phi1 = T.eigenfunction_nodes(top);
    for (double nu : {0.25, 0.5, 1.0}) {
      const auto spec = okr::source_target(T, phi1, nu);
      CHECK((spec.frho_nodes - std::pow(s1, nu) * phi1).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
  }

  SUBCASE("fractional powers form a semigroup") {
    const auto half = okr::source_target(T, g, 0.5);
    const auto again = okr::source_target(T, half.frho_nodes, 0.5);
    const auto full = okr::source_target(T, g, 1.0);
    CHECK((again.frho_nodes - full.frho_nodes).lpNorm<Eigen::Infinity>() <= 1e-8);
  }

  SUBCASE("Nystrom extension reproduces the node values") {
    const auto spec = okr::source_target(T, g, 0.5);
    for (Eigen::Index i = 0; i < 256; i += 31)
      CHECK(spec.frho_extension.evaluate(q.nodes[i]) ==
            doctest::Approx(spec.frho_nodes[i]).epsilon(1e-10));
  }

  SUBCASE("nu outside (0,1] is rejected") {
    CHECK_THROWS_AS(okr::source_target(T, g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(okr::source_target(T, g, 1.5), std::invalid_argument);
  }
}

TEST_CASE("approx_error_check holds over the (lambda, nu, g) sweep") {
  const auto q = QuadratureD::gauss_legendre(256);
  const DiscretizedOperatorD T(KernelD::gaussian(0.5), q);

  SUBCASE("zero target: err = 0 <= bound") {
    const auto spec = okr::source_target(T, Eigen::VectorXd::Zero(256), 0.5);
    const auto [err, bound] = okr::approx_error_check(T, 0.1, spec, q);
    CHECK(err <= 1e-12);
    CHECK(err <= bound * (1 + 1e-6));
  }

  SUBCASE("rank-1 closed form: err = lambda s1/(s1+lambda) ||phi1||") {
    const Eigen::Index top = T.eigenvalues().size() - 1;
    const double s1 = T.eigenvalues()[top];
    const auto spec = okr::source_target(T, T.eigenfunction_nodes(top), 1.0);
    const double lambda = 0.2;
    const auto [err, bound] = okr::approx_error_check(T, lambda, spec, q);
    CHECK(err == doctest::Approx(lambda * s1 / (s1 + lambda)).epsilon(1e-6));
    CHECK(bound == doctest::Approx(lambda).epsilon(1e-9));
    CHECK(err <= bound);
  }

  SUBCASE("full sweep with the named targets") {
    for (const char* name : {"sin", "poly", "bump"}) {
      const auto g = tabulate(okr::target_function(name), q);
      for (double nu : {0.5, 1.0}) {
        const auto spec = okr::source_target(T, g, nu);
        for (double lambda : {1e-3, 1e-2, 1e-1, 1.0}) {
          const auto [err, bound] = okr::approx_error_check(T, lambda, spec, q);
          CHECK(err <= bound * (1 + 1e-6));
        }
      }
    }
  }
}

TEST_CASE("f_lambda node values are stable under refinement") {
  const auto q256 = QuadratureD::gauss_legendre(256);
  const auto q512 = QuadratureD::gauss_legendre(512);
  const DiscretizedOperatorD T256(KernelD::gaussian(0.5), q256);
  const DiscretizedOperatorD T512(KernelD::gaussian(0.5), q512);
  // smooth f_rho given in closed form so both grids tabulate the same target
  auto frho = [](double x) { return std::sin(2 * M_PI * x); };
  const auto sol256 = okr::ridge_solution(T256, 0.1, tabulate(frho, q256));
  const auto sol512 = okr::ridge_solution(T512, 0.1, tabulate(frho, q512));
  // compare via the kernel expansions on a probe grid
  double worst = 0;
  for (int p = 0; p <= 100; ++p) {
    const double x = p / 100.0;
    worst = std::max(worst, std::abs(sol256.expansion.evaluate(x) - sol512.expansion.evaluate(x)));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("named target registry") {
  CHECK(okr::target_function("sin")(0.25) == doctest::Approx(1.0));
  CHECK(okr::target_function("poly")(0.5) == doctest::Approx(0.25));
  CHECK(okr::target_function("bump")(0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(okr::target_function("nope"), std::invalid_argument);
}

}  // TEST_SUITE
