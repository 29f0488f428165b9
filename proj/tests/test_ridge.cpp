#include <doctest.h>

#include <cmath>

#include "cbsim/ridge.hpp"
#include "cbsim/rng.hpp"

using namespace cbsim;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec random_ball(int d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec v(d);
  for (int k = 0; k < d; ++k) v[k] = gauss(rng);
  const double n = v.norm();
  return n == 0.0 ? v : Vec(v * (unif(rng) / n));
}

}  // namespace

TEST_CASE("ridge_update accumulates outer products and moments") {
  RidgeState s(2);
  ridge_update(s, v2(1, 0), 1.0);
  CHECK(s.gram(0, 0) == doctest::Approx(1.0));
  CHECK(s.gram(1, 1) == doctest::Approx(0.0));
  CHECK(s.moment[0] == doctest::Approx(1.0));
  CHECK(s.pulls == 1);

  ridge_update(s, v2(0, 1), 0.5);
  CHECK(s.gram.isApprox(Mat::Identity(2, 2)));
  CHECK(s.moment[0] == doctest::Approx(1.0));
  CHECK(s.moment[1] == doctest::Approx(0.5));

  Vec bad(3);
  bad.setZero();
  CHECK_THROWS(ridge_update(s, bad, 0.0));
}

TEST_CASE("ridge state matches recomputation from history") {
  Rng rng = make_rng(11);
  RidgeState s(4);
  for (int i = 0; i < 100; ++i) {
    ridge_update(s, random_ball(4, rng), std::normal_distribution<double>()(rng));
  }
  Mat gram = Mat::Zero(4, 4);
  for (const Vec& x : s.history) gram += x * x.transpose();
  CHECK((s.gram - gram).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((s.gram - s.gram.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.pulls == static_cast<long>(s.history.size()));
}

TEST_CASE("ridge_estimate solves the regularized system") {
  RidgeState empty(3);
  CHECK(ridge_estimate(empty, 1.0).norm() == 0.0);

  RidgeState s(2);
  ridge_update(s, v2(1, 0), 1.0);
  Vec theta = ridge_estimate(s, 1.0);
  CHECK(theta[0] == doctest::Approx(0.5));
  CHECK(theta[1] == doctest::Approx(0.0));

  ridge_update(s, v2(0, 1), 0.5);
  theta = ridge_estimate(s, 1.0);
  CHECK(theta[0] == doctest::Approx(0.5));
  CHECK(theta[1] == doctest::Approx(0.25));
}

TEST_CASE("f_threshold closed forms and monotone tail") {
  CHECK(f_threshold(0.0) == doctest::Approx(1.0));
  CHECK(f_threshold(std::exp(1.0) - 1.0) ==
        doctest::Approx(0.857763884960706796).epsilon(1e-12));
  CHECK(f_threshold(100.0) < f_threshold(10.0));
}

TEST_CASE("beta_radius closed forms") {
  ConfidenceParams p;
  p.lambda_reg = 1.0;
  p.d = 3;
  p.delta = 1.0;  // both log terms vanish at t_eff = 0
  CHECK(beta_radius(p, 0) == doctest::Approx(1.0));
  p.delta = std::exp(-0.5);
  CHECK(beta_radius(p, 0) == doctest::Approx(2.0));
  p.delta = 0.1;
  p.d = 2;
  CHECK(beta_radius(p, 1000) ==
        doctest::Approx(5.12775754958522497).epsilon(1e-12));
}

TEST_CASE("tilde_lambda_x limits, range and monotonicity") {
  CHECK(tilde_lambda_x(0.3, 1e-8, 5) == doctest::Approx(0.3).epsilon(1e-4));
  CHECK(tilde_lambda_x(1.0, 1e6, 1) < 1e-6);
  CHECK(tilde_lambda_x(1.0, 1.0, 1) ==
        doctest::Approx(0.144375608107851197).epsilon(1e-6));

  double prev = 1.0;
  for (int c : {1, 2, 5, 10, 20}) {
    const double v = tilde_lambda_x(0.5, 0.2, c);
    CHECK(v > 0.0);
    CHECK(v <= 0.5);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
  prev = 1.0;
  for (double sigma : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    const double v = tilde_lambda_x(0.5, sigma, 5);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
  CHECK_THROWS(tilde_lambda_x(-1.0, 1.0, 1));
}

TEST_CASE("zeta closed forms") {
  CHECK(zeta(0.0, 0.7) == 0.0);
  CHECK(zeta(1.0, 2.0) == doctest::Approx(2.0));
  CHECK(zeta(0.2, 0.5) == doctest::Approx(0.8));
  CHECK_THROWS(zeta(0.1, 0.0));
}

TEST_CASE("aggregate_cluster pools member statistics") {
  const ClusterStats prior = aggregate_cluster({}, 1.0, 2);
  CHECK(prior.gram_reg.isApprox(Mat::Identity(2, 2)));
  CHECK(prior.theta_hat.norm() == 0.0);

  RidgeState a(2), b(2);
  ridge_update(a, v2(1, 0), 1.0, 1);
  ridge_update(b, v2(0, 1), 1.0, 2);

  const ClusterStats single = aggregate_cluster({&a}, 1.0, 2);
  CHECK(single.theta_hat.isApprox(ridge_estimate(a, 1.0)));

  const ClusterStats both = aggregate_cluster({&a, &b}, 1.0, 2, true);
  CHECK(both.theta_hat[0] == doctest::Approx(0.5));
  CHECK(both.theta_hat[1] == doctest::Approx(0.5));
  CHECK(both.pulls == 2);
  REQUIRE(both.member_history.size() == 2);
  // interleaved by global round stamp
  CHECK(both.member_history[0].isApprox(v2(1, 0)));
  CHECK(both.member_history[1].isApprox(v2(0, 1)));
}

TEST_CASE("merge_member_histories interleaves by round stamp") {
  RidgeState a(2), b(2);
  ridge_update(a, v2(1, 0), 1.0, 1);
  ridge_update(a, v2(0.5, 0), 1.0, 4);
  ridge_update(b, v2(0, 1), 1.0, 2);
  ridge_update(b, v2(0, 0.5), 1.0, 3);
  const auto merged = merge_member_histories({&a, &b});
  REQUIRE(merged.size() == 4);
  CHECK(merged[0].isApprox(v2(1, 0)));
  CHECK(merged[1].isApprox(v2(0, 1)));
  CHECK(merged[2].isApprox(v2(0, 0.5)));
  CHECK(merged[3].isApprox(v2(0.5, 0)));
}

TEST_CASE("ucb_index closed forms, clamp and classic reduction") {
  const ClusterStats empty = aggregate_cluster({}, 1.0, 2);
  CHECK(ucb_index(v2(1, 0), empty, 0.0, 0.0, true) == doctest::Approx(0.0));

  // d = 1 worked example: M = 2, theta_hat = 0.5
  RidgeState s(1);
  Vec one(1);
  one << 1.0;
  ridge_update(s, one, 1.0, 1);
  const ClusterStats c = aggregate_cluster({&s}, 1.0, 1, true);
  CHECK(ucb_index(one, c, 0.2, 0.2, true) ==
        doctest::Approx(0.741421356237309518).epsilon(1e-12));

  // clamp at 1
  ClusterStats hot = c;
  hot.theta_hat[0] = 5.0;
  CHECK(ucb_index(one, hot, 0.0, 0.0, true) == 1.0);

  // eps=0 equals the classic LinUCB index (clamped)
  const double classic = std::min(
      1.0, one.dot(c.theta_hat) + 0.3 * std::sqrt(one.dot(c.gram_inv * one)));
  CHECK(ucb_index(one, c, 0.3, 0.0, true) == doctest::Approx(classic));
}

TEST_CASE("surrogate history sum dominates the exact sum") {
  Rng rng = make_rng(3);
  RidgeState s(5);
  for (int i = 0; i < 200; ++i) {
    ridge_update(s, random_ball(5, rng), 0.1, i + 1);
  }
  const ClusterStats c = aggregate_cluster({&s}, 1.0, 5, true);
  for (int q = 0; q < 50; ++q) {
    const Vec x = random_ball(5, rng);
    const double exact = ucb_index_unclamped(x, c, 0.0, 0.3, true);
    const double surrogate = ucb_index_unclamped(x, c, 0.0, 0.3, false);
    CHECK(exact <= surrogate + 1e-9);
    // robust minus plain bonus is exactly eps * S
    const double plain = ucb_index_unclamped(x, c, 0.0, 0.0, true);
    double sum = 0.0;
    const Vec y = c.gram_inv * x;
    for (const Vec& xs : c.member_history) sum += std::abs(y.dot(xs));
    CHECK(exact - plain == doctest::Approx(0.3 * sum).epsilon(1e-12));
  }
}

TEST_CASE("incremental inverse tracks the dense solve") {
  Rng rng = make_rng(17);
  const int d = 8;
  IncrementalRidge inc(d, 1.0);
  RidgeState ref(d);
  std::normal_distribution<double> reward(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec x = random_ball(d, rng);
    const double r = reward(rng);
    inc.update(x, r);
    ridge_update(ref, x, r);
  }
  CHECK((inc.theta() - ridge_estimate(ref, 1.0)).cwiseAbs().maxCoeff() < 1e-8);
  Mat reg = ref.gram;
  reg.diagonal().array() += 1.0;
  CHECK((inc.inverse() * reg - Mat::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-7);
}
