#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cbsim/env.hpp"
#include "cbsim/policy.hpp"

namespace cbsim {

/// Per-policy hyperparameter overrides; falls back to the global value.
struct PolicySpec {
  std::string name;                      // rclumb, rsclumb, club, sclub,
                                         // linucb_one, linucb_ind,
                                         // rlinucb_one, rlinucb_ind, oracle
  std::map<std::string, double> params;  // alpha1, alpha2, eps_star, exact_ucb_sum
};

struct ExperimentConfig {
  std::string env_kind = "synthetic";  // synthetic | real
  // synthetic knobs
  int u = 100, m = 5, d = 10;
  int pool_size = 1000, per_round_arms = 20;
  double eps_range = 0.2, noise_std = 0.1;
  std::optional<double> min_cluster_gap;
  // real-data knobs
  std::string ratings_path;
  int env_case = 1;
  int top_users = 1000, top_items = 1000, feature_rows = 100;
  // shared
  long horizon = 10000;
  int trials = 10;
  std::uint64_t seed = 1;
  int cadence = 0;  // 0 -> max(1, T/1000)
  std::string out_dir = ".";
  // policy hyperparameters (global defaults)
  double lambda_reg = 1.0;
  double delta = 0.0;  // 0 -> 1/T
  double eps_star = 0.2;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  bool exact_ucb_sum = true;
  std::vector<PolicySpec> policies;

  long effective_cadence() const;
  double effective_delta() const;
  ConfidenceParams confidence(const PolicySpec& spec) const;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

std::unique_ptr<Environment> build_environment(const ExperimentConfig& config);
std::unique_ptr<Policy> build_policy(const ExperimentConfig& config,
                                     const PolicySpec& spec,
                                     const Environment& env);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<long> rounds;        // checkpoints at the cadence
  std::vector<double> cum_regret;  // sampled cumulative regret
  std::vector<double> cum_reward;  // sampled cumulative reward
  double wall_seconds = 0.0;
};

TrialResult run_trial(const ExperimentConfig& config, const Environment& env,
                      Policy& policy, int trial_index);

struct SummaryRow {
  long round;
  double mean_regret, sem_regret, mean_reward, sem_reward;
};

std::vector<SummaryRow> aggregate_trials(const std::vector<TrialResult>& results);

struct RunOutput {
  std::map<std::string, std::vector<TrialResult>> per_policy;
  std::map<std::string, std::vector<SummaryRow>> summaries;
};

/// Full benchmark: every policy, `trials` seeded trials each, optionally
/// parallel across trials. Deterministic in (config, seed) regardless of
/// worker count.
RunOutput run_experiment(const ExperimentConfig& config, int workers = 1);

/// Writes results.csv, summary.csv and manifest.json under out_dir.
void write_outputs(const ExperimentConfig& config, const RunOutput& output,
                   const std::string& config_text);

struct SufficientTime {
  double t0;  // graph-based variant (gamma1/4 margin)
  double t1;  // set-based variant (gamma1/6 margin)
};

/// Diagnostic sufficient-time horizons after which a good partition is
/// maintained with high probability. Requires gamma1/4 (resp. /6) to
/// exceed eps_star * sqrt(1/(2 tlx)).
SufficientTime compute_T0(long u, int d, double tlx, double gamma1,
                          double eps_star, double delta);

std::string format_double(double v);  // %.17g, shared by all emitters

}  // namespace cbsim
