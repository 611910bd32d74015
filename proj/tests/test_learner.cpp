#include <cmath>

#include "doctest.h"
#include "naive_learner.hpp"
#include "okr/chain.hpp"
#include "okr/learner.hpp"
#include "okr/oracle.hpp"
#include "okr/rng.hpp"

using okr::KernelD;
using okr::LearnerConfigD;
using okr::LearnerStateD;
using okr::QuadratureD;
using okr::RkhsFunctionD;
using okr::SplitMix64;

namespace {

RkhsFunctionD random_expansion(const KernelD& k, int atoms, SplitMix64& rng) {
  RkhsFunctionD f(k);
  for (int i = 0; i < atoms; ++i) f.append(rng.next_uniform(), 2 * rng.next_uniform() - 1);
  return f;
}

// f + h d by concatenating expansions (scales folded)
RkhsFunctionD axpy(const RkhsFunctionD& f, double h, const RkhsFunctionD& d) {
  RkhsFunctionD out = f;
  out.fold_scale();
  for (Eigen::Index i = 0; i < d.atom_count(); ++i)
    out.append(d.support()[i], h * d.scale() * d.coeffs()[i]);
  return out;
}

struct OracleFixture {
  QuadratureD q = QuadratureD::gauss_legendre(128);
  okr::DiscretizedOperatorD T;
  okr::TargetSpecD spec;
  okr::RidgeSolution<double> ridge;

  OracleFixture(const KernelD& k, double lambda, double nu)
      : T(k, q),
        spec(okr::source_target(T, [&] {
               Eigen::VectorXd g(q.nodes.size());
               for (Eigen::Index i = 0; i < q.nodes.size(); ++i)
                 g[i] = okr::target_function("sin")(q.nodes[i]);
               return g;
             }(), nu)),
        ridge(okr::ridge_solution(T, lambda, spec.frho_nodes)) {}
};

}  // namespace

TEST_SUITE("learner") {

TEST_CASE("step_size") {
  const LearnerConfigD cfg(1.0, 1.0, KernelD::gaussian(0.5), 1.0);  // C_K^2 = 1
  CHECK(okr::step_size(1, cfg) == doctest::Approx(0.5));
  CHECK(okr::step_size(4, cfg) == doctest::Approx(1.0 / 8.0));

  const LearnerConfigD cfg2(0.1, 0.75, KernelD::gaussian(0.5), 1.0);
  CHECK(okr::step_size(16, cfg2) == doctest::Approx(1.0 / (1.1 * 8.0)).epsilon(1e-12));

  // schedule keeps the contraction factor inside (0,1)
  for (long t : {1L, 2L, 10L, 1000L})
    CHECK(okr::step_size(t, cfg2) * (cfg2.lambda + 1.0) <= 1.0);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(LearnerConfigD(0.0, 0.75, KernelD::gaussian(0.5), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(LearnerConfigD(0.1, 0.5, KernelD::gaussian(0.5), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(LearnerConfigD(0.1, 1.01, KernelD::gaussian(0.5), 1.0), std::invalid_argument);
  CHECK_NOTHROW(LearnerConfigD(0.1, 1.0, KernelD::gaussian(0.5), 1.0));
}

TEST_CASE("loss") {
  const auto k = KernelD::gaussian(0.5);
  CHECK(okr::loss(0.3, 2.0, RkhsFunctionD::zero(k), 0.7) == doctest::Approx(2.0));
  // interpolating atom: f = y K_x / K(x,x), lambda = 0
  const auto f = RkhsFunctionD::atom(k, 0.3, 2.0 / k(0.3, 0.3));
  CHECK(okr::loss(0.3, 2.0, f, 0.0) == doctest::Approx(0.0));
  CHECK(okr::loss(0.4, 1.0, RkhsFunctionD::zero(k), 5.0) == doctest::Approx(0.5));
}

TEST_CASE("gradient closed forms") {
  const auto k = KernelD::gaussian(0.5);
  SUBCASE("zero function: -y K_x") {
    const auto g = okr::gradient(0.6, 2.5, RkhsFunctionD::zero(k), 0.3);
    for (double p : {0.1, 0.6, 0.9})
      CHECK(g.evaluate(p) == doctest::Approx(-2.5 * k(0.6, p)).epsilon(1e-12));
  }
  SUBCASE("interpolation with lambda = 0: zero gradient") {
    const auto f = RkhsFunctionD::atom(k, 0.3, 1.7);
    const double y = f.evaluate(0.3);
    const auto g = okr::gradient(0.3, y, f, 0.0);
    for (double p : {0.1, 0.5, 0.9}) CHECK(std::abs(g.evaluate(p)) <= 1e-14);
  }
}

TEST_CASE("gradient matches finite differences of the loss") {
  const auto k = KernelD::gaussian(0.4);
  SplitMix64 rng(71);
  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = random_expansion(k, 1 + int(rng.next_u64() % 10), rng);
    const auto d = random_expansion(k, 1 + int(rng.next_u64() % 5), rng);
    const double x = rng.next_uniform();
    const double y = 2 * rng.next_uniform() - 1;
    const double lambda = rng.next_uniform();
    const double h = 1e-5;

    const double v_plus = okr::loss(x, y, axpy(f, h, d), lambda);
    const double v_minus = okr::loss(x, y, axpy(f, -h, d), lambda);
    const double fd = (v_plus - v_minus) / (2 * h);
    const double exact = okr::k_inner(okr::gradient(x, y, f, lambda), d);
    if (std::abs(exact) > 1e-8) {
      CHECK(std::abs(fd - exact) / std::abs(exact) <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked >= 90);
}

TEST_CASE("update") {
  const auto k = KernelD::gaussian(0.5);
  const LearnerConfigD cfg(0.5, 0.75, k, 2.0);

  SUBCASE("first step from zero: f_2 = gamma_1 y K_x") {
    auto st = LearnerStateD::zero(cfg);
    okr::update(st, 0.4, 1.5, cfg);
    CHECK(st.t == 2);
    const double gamma1 = okr::step_size(1, cfg);
    for (double p : {0.2, 0.4, 0.8})
      CHECK(st.f.evaluate(p) == doctest::Approx(gamma1 * 1.5 * k(0.4, p)).epsilon(1e-12));
  }

  SUBCASE("zero residual and lambda = 0 leave f unchanged") {
    // unregularized path exists for unit tests only
    auto f = RkhsFunctionD::atom(k, 0.3, 1.2);
    const double y = f.evaluate(0.7);
    const double gamma = 0.25;
    const double resid = f.evaluate(0.7) - y;
    f.scaled_update(1.0 - gamma * 0.0, 0.7, -gamma * resid);
    const auto probe = RkhsFunctionD::atom(k, 0.3, 1.2);
    for (double p : {0.1, 0.5, 0.9})
      CHECK(f.evaluate(p) == doctest::Approx(probe.evaluate(p)).epsilon(1e-14));
  }
}

TEST_CASE("100 updates match the naive dense recomputation") {
  const auto k = KernelD::gaussian(0.5);
  const LearnerConfigD cfg(0.3, 0.75, k, 2.0);
  SplitMix64 rng(123);
  Eigen::VectorXd xs(100), ys(100);
  for (int i = 0; i < 100; ++i) {
    xs[i] = rng.next_uniform();
    ys[i] = 2 * rng.next_uniform() - 1;
  }
  auto st = LearnerStateD::zero(cfg);
  for (int i = 0; i < 100; ++i) okr::update(st, xs[i], ys[i], cfg);
  const auto naive = okr_test::naive_run(k, xs, ys, cfg.lambda, cfg.theta, 100);
  for (int p = 0; p < 50; ++p) {
    const double x = p / 49.0;
    CHECK(std::abs(st.f.evaluate(x) - naive.evaluate(x)) <= 1e-10);
  }
}

TEST_CASE("repeated sample converges to the one-atom ridge solution") {
  const auto k = KernelD::gaussian(0.5);
  const LearnerConfigD cfg(0.4, 0.75, k, 2.0);
  const double x0 = 0.37, y0 = 1.1;
  auto st = LearnerStateD::zero(cfg);
  for (int i = 0; i < 10000; ++i) okr::update(st, x0, y0, cfg);
  const auto fixed = RkhsFunctionD::atom(k, x0, y0 / (k(x0, x0) + cfg.lambda));
  CHECK(okr::k_distance(st.f.compact(0.0), fixed) <= 1e-6);
}

TEST_CASE("run") {
  const auto k = KernelD::gaussian(0.5);
  const LearnerConfigD cfg(0.1, 0.75, k, 2.0);
  OracleFixture ofx(k, cfg.lambda, 0.5);
  const auto target = ofx.ridge.expansion;

  const auto chain = okr::sample_chain({okr::CopulaD::fgm(0.5), 600, 2024, 0});
  const auto stream = okr::label_stream(
      chain, [&](double x) { return ofx.spec.frho_extension.evaluate(x); }, 0.1, 2.0, 2024);

  SUBCASE("checkpoints = [1] records the initial function only") {
    const auto trace = okr::run<double>(stream.x, stream.y, cfg, {1}, target, ofx.spec.frho_nodes,
                                        ofx.q);
    REQUIRE(trace.checkpoints.size() == 1);
    CHECK(trace.checkpoints[0].t == 1);
    CHECK(trace.checkpoints[0].atoms == 0);
    CHECK(trace.checkpoints[0].k_dist_to_target == doctest::Approx(target.k_norm()).epsilon(1e-10));
    CHECK(trace.checkpoints[0].rho_dist_to_target ==
          doctest::Approx(okr::rho_norm(target, ofx.q)).epsilon(1e-9));
  }

  SUBCASE("incremental distances equal joint-Gram and node recomputation at 500 steps") {
    const std::vector<long> cps{1, 10, 100, 500};
    const auto trace = okr::run<double>(stream.x, stream.y, cfg, cps, target, ofx.spec.frho_nodes,
                                        ofx.q);
    // replay naively and compare at each checkpoint
    okr_test::NaiveExpansion naive(k);
    okr_test::NaiveExpansion naive_target(k);
    naive_target.support.assign(target.support().data(),
                                target.support().data() + target.atom_count());
    for (Eigen::Index i = 0; i < target.atom_count(); ++i)
      naive_target.coeffs.push_back(target.scale() * target.coeffs()[i]);

    std::size_t cp = 0;
    const double eta = cfg.lambda + 1.0;
    for (long t = 1; t <= 500; ++t) {
      if (cp < cps.size() && cps[cp] == t) {
        CHECK(std::abs(trace.checkpoints[cp].k_dist_to_target - naive.k_distance(naive_target)) <=
              1e-10);
        double acc = 0;
        for (Eigen::Index j = 0; j < ofx.q.nodes.size(); ++j) {
          const double d = naive.evaluate(ofx.q.nodes[j]) - ofx.spec.frho_nodes[j];
          acc += ofx.q.weights[j] * d * d;
        }
        CHECK(std::abs(trace.checkpoints[cp].rho_dist_to_frho - std::sqrt(acc)) <= 1e-10);
        ++cp;
      }
      const double gamma = 1.0 / (eta * std::pow(double(t), cfg.theta));
      const double resid = naive.evaluate(stream.x[t - 1]) - stream.y[t - 1];
      naive.scaled_update(1.0 - gamma * cfg.lambda, stream.x[t - 1], -gamma * resid);
    }
    CHECK(cp == 4);
  }

  SUBCASE("determinism: identical inputs give identical traces") {
    const std::vector<long> cps{1, 50, 300};
    const auto a = okr::run<double>(stream.x, stream.y, cfg, cps, target, ofx.spec.frho_nodes, ofx.q);
    const auto b = okr::run<double>(stream.x, stream.y, cfg, cps, target, ofx.spec.frho_nodes, ofx.q);
    for (std::size_t i = 0; i < cps.size(); ++i) {
      CHECK(a.checkpoints[i].k_dist_to_target == b.checkpoints[i].k_dist_to_target);
      CHECK(a.checkpoints[i].rho_dist_to_target == b.checkpoints[i].rho_dist_to_target);
      CHECK(a.checkpoints[i].rho_dist_to_frho == b.checkpoints[i].rho_dist_to_frho);
    }
  }

  SUBCASE("norm bound: ||f_t||_K <= M C_K / lambda along the run") {
    // explicit check of the debug-mode assertion's invariant
    auto st = LearnerStateD::zero(cfg);
    const double cap = cfg.M * k.sup_bound() / cfg.lambda;
    for (int i = 0; i < 300; ++i) {
      okr::update(st, stream.x[i], stream.y[i], cfg);
      if (i % 50 == 0) CHECK(st.f.k_norm() <= cap * (1 + 1e-9));
    }
  }

  SUBCASE("argument errors") {
    const Eigen::VectorXd empty;
    CHECK_THROWS_AS(okr::run<double>(empty, empty, cfg, {2}, target, ofx.spec.frho_nodes, ofx.q),
                    std::invalid_argument);
    CHECK_THROWS_AS(okr::run<double>(stream.x, stream.y, cfg, {5, 5}, target, ofx.spec.frho_nodes,
                                     ofx.q),
                    std::invalid_argument);
    CHECK_THROWS_AS(okr::run<double>(stream.x, stream.y, cfg, {0}, target, ofx.spec.frho_nodes,
                                     ofx.q),
                    std::invalid_argument);
  }
}

TEST_CASE("i.i.d. stream: mean K-distance decays across decades" * doctest::timeout(300)) {
  const auto k = KernelD::gaussian(0.5);
  const LearnerConfigD cfg(0.1, 0.75, k, 2.0);
  OracleFixture ofx(k, cfg.lambda, 0.5);
  const auto target = ofx.ridge.expansion;
  const std::vector<long> cps{100, 1000, 10000};

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const auto chain = okr::sample_chain({okr::CopulaD::independence(), 10000, 5000 + s, 0});
    const auto stream = okr::label_stream(
        chain, [&](double x) { return ofx.spec.frho_extension.evaluate(x); }, 0.1, 2.0, 5000 + s);
    const auto trace =
        okr::run<double>(stream.x, stream.y, cfg, cps, target, ofx.spec.frho_nodes, ofx.q);
    for (int c = 0; c < 3; ++c) mean[c] += trace.checkpoints[c].k_dist_to_target;
  }
  mean /= seeds;
  // nonincreasing across decades, allowing one inversion of at most 5%
  int inversions = 0;
  for (int c = 1; c < 3; ++c) {
    if (mean[c] > mean[c - 1]) {
      ++inversions;
      CHECK(mean[c] <= mean[c - 1] * 1.05);
    }
  }
  CHECK(inversions <= 1);
}

}  // TEST_SUITE
