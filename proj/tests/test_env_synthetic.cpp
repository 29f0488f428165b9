#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "cbsim/env_synthetic.hpp"
#include "cbsim/ridge.hpp"

using namespace cbsim;

TEST_CASE("instance generation is deterministic and well-formed") {
  SyntheticConfig sc;
  sc.u = 4;
  sc.m = 2;
  sc.d = 5;
  sc.pool_size = 30;
  sc.seed = 1;
  const ProblemInstance a = generate_instance(sc);
  const ProblemInstance b = generate_instance(sc);
  CHECK(a.deviation == b.deviation);
  for (int j = 0; j < a.cluster_count(); ++j) {
    CHECK(a.cluster_thetas[j] == b.cluster_thetas[j]);
    CHECK(a.cluster_thetas[j].norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(a.user_cluster == b.user_cluster);

  // balanced round-robin assignment: 2 users per cluster
  std::vector<int> counts(2, 0);
  for (int c : a.user_cluster) ++counts[c];
  CHECK(counts[0] == 2);
  CHECK(counts[1] == 2);
  for (const Vec& x : a.arm_pool) {
    CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(a.deviation.cwiseAbs().maxCoeff() <= sc.eps_range);
}

TEST_CASE("eps_range zero gives a perfectly linear instance") {
  SyntheticConfig sc;
  sc.u = 3;
  sc.m = 1;
  sc.d = 3;
  sc.pool_size = 10;
  sc.per_round_arms = 4;
  sc.eps_range = 0.0;
  sc.noise_std = 0.0;
  const ProblemInstance inst = generate_instance(sc);
  CHECK(inst.deviation.cwiseAbs().maxCoeff() == 0.0);
  const SyntheticEnvironment env(inst, sc.per_round_arms, sc.noise_std);
  for (int a = 0; a < 10; ++a) {
    CHECK(env.expected_reward(0, a) ==
          doctest::Approx(inst.arm_pool[a].dot(inst.user_theta(0))));
    Rng rng = make_rng(0);
    CHECK(env.realize_reward(0, a, rng) == env.expected_reward(0, a));
  }
}

TEST_CASE("min_cluster_gap is planted or rejected with a diagnostic") {
  SyntheticConfig sc;
  sc.u = 6;
  sc.m = 3;
  sc.d = 8;
  sc.pool_size = 10;
  sc.per_round_arms = 5;
  sc.min_cluster_gap = 1.0;
  sc.seed = 2;
  const ProblemInstance inst = generate_instance(sc);
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      CHECK((inst.cluster_thetas[a] - inst.cluster_thetas[b]).norm() >= 1.0);
    }
  }
  sc.min_cluster_gap = 2.1;  // unit vectors are at most 2 apart
  CHECK_THROWS(generate_instance(sc));
}

TEST_CASE("arrival frequencies and candidate sets match the protocol") {
  SyntheticConfig sc;
  sc.u = 10;
  sc.m = 2;
  sc.d = 3;
  sc.pool_size = 25;
  sc.per_round_arms = 25;  // whole pool, permuted
  sc.seed = 4;
  const SyntheticEnvironment env(generate_instance(sc), sc.per_round_arms,
                                 sc.noise_std);
  Rng rng = make_rng(44);
  const int rounds = 100000;
  std::vector<int> arrivals(sc.u, 0);
  for (int t = 0; t < rounds; ++t) {
    const auto [user, cand] = env.sample_round(rng);
    ++arrivals[user];
    if (t < 100) {
      std::vector<int> sorted = cand;
      std::sort(sorted.begin(), sorted.end());
      for (int a = 0; a < sc.pool_size; ++a) CHECK(sorted[a] == a);
    }
  }
  // binomial: mean rounds/u, sd sqrt(rounds p (1-p))
  const double mean = double(rounds) / sc.u;
  const double sd = std::sqrt(rounds * (1.0 / sc.u) * (1.0 - 1.0 / sc.u));
  for (int i = 0; i < sc.u; ++i) {
    CHECK(std::abs(arrivals[i] - mean) < 4.0 * sd);
  }
}

TEST_CASE("reward realization concentrates on the expected reward") {
  SyntheticConfig sc;
  sc.u = 2;
  sc.m = 2;
  sc.d = 4;
  sc.pool_size = 10;
  sc.per_round_arms = 5;
  sc.noise_std = 0.3;
  sc.seed = 9;
  const SyntheticEnvironment env(generate_instance(sc), 5, sc.noise_std);
  Rng rng = make_rng(91);
  const int n = 100000;
  double sum = 0.0;
  for (int t = 0; t < n; ++t) sum += env.realize_reward(1, 3, rng);
  CHECK(std::abs(sum / n - env.expected_reward(1, 3)) <
        4.0 * sc.noise_std / std::sqrt(double(n)));
}

TEST_CASE("instantaneous regret matches a brute-force scan and is nonnegative") {
  SyntheticConfig sc;
  sc.u = 5;
  sc.m = 2;
  sc.d = 3;
  sc.pool_size = 20;
  sc.per_round_arms = 6;
  sc.seed = 6;
  const SyntheticEnvironment env(generate_instance(sc), sc.per_round_arms,
                                 sc.noise_std);
  Rng rng = make_rng(66);
  for (int t = 0; t < 200; ++t) {
    const auto [user, cand] = env.sample_round(rng);
    for (int chosen : cand) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a : cand) best = std::max(best, env.expected_reward(user, a));
      const double want = best - env.expected_reward(user, chosen);
      const double got = env.instantaneous_regret(user, cand, chosen);
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
      CHECK(got >= 0.0);
    }
  }
  CHECK_THROWS(env.instantaneous_regret(0, {1, 2}, 3));
}

TEST_CASE("diagnostics: min-empty convention, eps 0, and hard-to-cluster count") {
  const double inf = std::numeric_limits<double>::infinity();

  SyntheticConfig one;
  one.u = 3;
  one.m = 1;
  one.d = 4;
  one.pool_size = 10;
  one.per_round_arms = 5;
  const InstanceDiagnostics dm1 =
      instance_diagnostics(generate_instance(one), 0.1, 0.5);
  CHECK(dm1.gamma1 == inf);
  CHECK(dm1.u_tilde == 0);

  SyntheticConfig multi;
  multi.u = 9;
  multi.m = 3;
  multi.d = 6;
  multi.pool_size = 10;
  multi.per_round_arms = 5;
  multi.seed = 8;
  const ProblemInstance inst = generate_instance(multi);
  const InstanceDiagnostics d0 = instance_diagnostics(inst, 0.0, 0.5);
  CHECK(d0.zeta_value == 0.0);
  CHECK(d0.gamma1 == doctest::Approx(d0.gamma));
  CHECK(d0.u_tilde == 0);

  // plant a 3-cluster geometry with exactly one close pair
  ProblemInstance planted = inst;
  Vec e0 = Vec::Zero(6), e1 = Vec::Zero(6);
  e0[0] = 1.0;
  e1[1] = 1.0;
  planted.cluster_thetas[0] = e0;
  planted.cluster_thetas[1] = (Vec((e0 + 0.05 * e1)).normalized());
  planted.cluster_thetas[2] = e1;
  // zeta = 2 * 0.05 * sqrt(2/0.5) = 0.2 > gap(0,1) ~ 0.05
  const InstanceDiagnostics dp = instance_diagnostics(planted, 0.05, 0.5);
  CHECK(dp.zeta_value == doctest::Approx(0.2));
  long in01 = 0;
  for (int c : planted.user_cluster) {
    if (c == 0 || c == 1) ++in01;
  }
  CHECK(dp.u_tilde == in01);
  CHECK(dp.gamma < dp.gamma1);
}

TEST_CASE("export and import round-trip exactly") {
  SyntheticConfig sc;
  sc.u = 4;
  sc.m = 2;
  sc.d = 3;
  sc.pool_size = 7;
  sc.per_round_arms = 3;
  sc.seed = 10;
  const ProblemInstance inst = generate_instance(sc);
  std::stringstream first;
  export_instance(inst, first);
  std::stringstream second_in(first.str());
  const ProblemInstance back = import_instance(second_in);
  std::stringstream second;
  export_instance(back, second);
  CHECK(first.str() == second.str());
  CHECK(back.deviation == inst.deviation);
  CHECK(back.user_cluster == inst.user_cluster);

  std::stringstream bad("nonsense 7\n");
  CHECK_THROWS(import_instance(bad));
}
