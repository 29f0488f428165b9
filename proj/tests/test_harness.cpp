#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cbsim/env_synthetic.hpp"
#include "cbsim/harness.hpp"

using namespace cbsim;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing: keys, defaults and per-policy overrides") {
  const ExperimentConfig cfg = parse_config_text(
      "env = synthetic\n"
      "u = 12\n"
      "m = 3\n"
      "d = 4\n"
      "T = 2000   # horizon\n"
      "trials = 5\n"
      "seed = 99\n"
      "eps_star = 0.15\n"
      "policies = rclumb,club\n"
      "club.alpha1 = 2.5\n");
  CHECK(cfg.u == 12);
  CHECK(cfg.horizon == 2000);
  CHECK(cfg.trials == 5);
  CHECK(cfg.seed == 99);
  REQUIRE(cfg.policies.size() == 2);
  CHECK(cfg.policies[0].name == "rclumb");
  CHECK(cfg.policies[1].params.at("alpha1") == 2.5);

  // defaults: cadence max(1, T/1000), delta 1/T
  CHECK(cfg.effective_cadence() == 2);
  CHECK(cfg.effective_delta() == doctest::Approx(1.0 / 2000));
  CHECK(cfg.confidence(cfg.policies[1]).alpha1 == 2.5);
  CHECK(cfg.confidence(cfg.policies[0]).alpha1 == 1.0);
  CHECK(cfg.confidence(cfg.policies[0]).eps_star == 0.15);

  CHECK_THROWS(parse_config_text("T = 0\n"));
  CHECK_THROWS(parse_config_text("trials = -1\n"));
}

TEST_CASE("single-round trial with a single arm has zero regret") {
  ExperimentConfig cfg;
  cfg.u = 2;
  cfg.m = 1;
  cfg.d = 3;
  cfg.pool_size = 5;
  cfg.per_round_arms = 1;
  cfg.horizon = 1;
  cfg.trials = 1;
  cfg.seed = 7;
  cfg.delta = 0.1;  // the 1/T default is degenerate at T = 1
  cfg.policies.push_back({"linucb_one", {}});
  const auto env = build_environment(cfg);
  const auto policy = build_policy(cfg, cfg.policies[0], *env);
  const TrialResult r = run_trial(cfg, *env, *policy, 0);
  REQUIRE(r.rounds.size() == 1);
  CHECK(r.cum_regret[0] == 0.0);
}

TEST_CASE("trials are deterministic and regret is nondecreasing") {
  ExperimentConfig cfg;
  cfg.u = 6;
  cfg.m = 2;
  cfg.d = 3;
  cfg.pool_size = 30;
  cfg.per_round_arms = 5;
  cfg.horizon = 800;
  cfg.cadence = 50;
  cfg.seed = 15;
  cfg.eps_star = 0.2;
  cfg.policies.push_back({"rclumb", {}});
  const auto env = build_environment(cfg);
  const auto p1 = build_policy(cfg, cfg.policies[0], *env);
  const auto p2 = build_policy(cfg, cfg.policies[0], *env);
  const TrialResult a = run_trial(cfg, *env, *p1, 2);
  const TrialResult b = run_trial(cfg, *env, *p2, 2);
  CHECK(a.cum_regret == b.cum_regret);
  CHECK(a.cum_reward == b.cum_reward);
  CHECK(a.seed == b.seed);
  CHECK(std::is_sorted(a.cum_regret.begin(), a.cum_regret.end()));
}

TEST_CASE("aggregation: single trace, hand arithmetic, order independence") {
  TrialResult t1, t2;
  t1.rounds = t2.rounds = {10, 20};
  t1.cum_regret = {10.0, 10.0};
  t2.cum_regret = {20.0, 20.0};
  t1.cum_reward = {1.0, 2.0};
  t2.cum_reward = {3.0, 4.0};

  const auto solo = aggregate_trials({t1});
  CHECK(solo[0].mean_regret == 10.0);
  CHECK(solo[0].sem_regret == 0.0);

  const auto both = aggregate_trials({t1, t2});
  CHECK(both[0].mean_regret == doctest::Approx(15.0));
  // sample std of {10, 20} is 7.0711...; / sqrt(2) gives exactly 5
  CHECK(both[0].sem_regret == doctest::Approx(5.0));
  const auto swapped = aggregate_trials({t2, t1});
  CHECK(swapped[0].mean_regret == both[0].mean_regret);
  CHECK(swapped[0].sem_regret == both[0].sem_regret);

  TrialResult bad;
  bad.rounds = {10};
  bad.cum_regret = {1.0};
  bad.cum_reward = {1.0};
  CHECK_THROWS(aggregate_trials({t1, bad}));
}

TEST_CASE("oracle policy accrues exactly zero regret") {
  ExperimentConfig cfg;
  cfg.u = 5;
  cfg.m = 2;
  cfg.d = 4;
  cfg.pool_size = 40;
  cfg.per_round_arms = 8;
  cfg.horizon = 1500;
  cfg.seed = 23;
  cfg.eps_range = 0.2;
  cfg.policies.push_back({"oracle", {}});
  const auto env = build_environment(cfg);
  const auto policy = build_policy(cfg, cfg.policies[0], *env);
  const TrialResult r = run_trial(cfg, *env, *policy, 0);
  CHECK(r.cum_regret.back() == 0.0);
}

TEST_CASE("worker parallelism does not change the results") {
  ExperimentConfig cfg;
  cfg.u = 4;
  cfg.m = 2;
  cfg.d = 3;
  cfg.pool_size = 20;
  cfg.per_round_arms = 4;
  cfg.horizon = 300;
  cfg.trials = 4;
  cfg.seed = 5;
  cfg.policies.push_back({"rclumb", {}});
  cfg.policies.push_back({"linucb_ind", {}});
  const RunOutput serial = run_experiment(cfg, 1);
  const RunOutput parallel = run_experiment(cfg, 3);
  for (const auto& [name, rows] : serial.summaries) {
    const auto& other = parallel.summaries.at(name);
    REQUIRE(rows.size() == other.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      CHECK(rows[k].mean_regret == other[k].mean_regret);
      CHECK(rows[k].sem_regret == other[k].sem_regret);
    }
  }
}

TEST_CASE("outputs are byte-stable and carry a manifest") {
  ExperimentConfig cfg = parse_config_text(
      "u = 4\nm = 2\nd = 3\npool_size = 20\nper_round_arms = 4\n"
      "T = 200\ntrials = 2\nseed = 3\npolicies = linucb_one\n");
  const auto out_a = std::filesystem::temp_directory_path() / "cbsim-out-a";
  const auto out_b = std::filesystem::temp_directory_path() / "cbsim-out-b";
  cfg.out_dir = out_a.string();
  write_outputs(cfg, run_experiment(cfg), "cfg");
  cfg.out_dir = out_b.string();
  write_outputs(cfg, run_experiment(cfg), "cfg");
  CHECK(slurp(out_a / "results.csv") == slurp(out_b / "results.csv"));
  CHECK(slurp(out_a / "summary.csv") == slurp(out_b / "summary.csv"));
  CHECK(slurp(out_a / "manifest.json") == slurp(out_b / "manifest.json"));
  CHECK(slurp(out_a / "manifest.json").find("config_hash") != std::string::npos);
  CHECK(slurp(out_a / "results.csv").rfind("policy,trial,round,", 0) == 0);
}

TEST_CASE("sufficient-time diagnostic: formula, monotonicity, precondition") {
  // eps_star = 0: denominators reduce to (gamma1/4)^2 and (gamma1/6)^2
  const SufficientTime t = compute_T0(100, 10, 0.5, 0.5, 0.0, 0.01);
  const double term1_t0 =
      8.0 * 10 / (0.5 * 0.125 * 0.125) * std::log(100 / 0.01);
  const double term2 = 16.0 / 0.25 * std::log(8.0 * 10 / (0.25 * 0.01));
  const double base = 16.0 * 100 * std::log(100 / 0.01);
  CHECK(t.t0 == doctest::Approx(base + 400 * std::max(term1_t0, term2)));

  // pinned high-precision evaluation at eps_star = 0.01
  const SufficientTime ref = compute_T0(100, 10, 0.5, 0.5, 0.01, 0.01);
  CHECK(ref.t0 == doctest::Approx(44586516.0384685604).epsilon(1e-9));
  CHECK(ref.t1 == doctest::Approx(109625398.822658824).epsilon(1e-9));

  // doubling u more than doubles T0
  CHECK(compute_T0(200, 10, 0.5, 0.5, 0.01, 0.01).t0 > 2.0 * ref.t0);

  // gamma1/4 below the misspecification margin: not separable
  CHECK_THROWS(compute_T0(100, 10, 0.5, 0.01, 0.5, 0.01));
}

TEST_CASE("build_policy resolves every advertised name") {
  ExperimentConfig cfg;
  cfg.u = 2;
  cfg.m = 1;
  cfg.d = 2;
  cfg.pool_size = 5;
  cfg.per_round_arms = 2;
  const auto env = build_environment(cfg);
  for (const char* name : {"rclumb", "rsclumb", "club", "sclub", "linucb_one",
                           "linucb_ind", "rlinucb_one", "rlinucb_ind", "oracle"}) {
    const auto p = build_policy(cfg, {name, {}}, *env);
    CHECK(p->name() == name);
  }
  CHECK_THROWS(build_policy(cfg, {"nope", {}}, *env));
}
