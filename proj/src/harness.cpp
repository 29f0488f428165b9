#include "cbsim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cbsim/env_realdata.hpp"
#include "cbsim/env_synthetic.hpp"
#include "cbsim/policy_linucb.hpp"
#include "cbsim/policy_rclumb.hpp"
#include "cbsim/policy_rsclumb.hpp"

namespace cbsim {

namespace {

constexpr const char* kVersion = "cbsim 1.0.0";

/// Ground-truth argmax policy; zero-regret reference.
class OraclePolicy : public Policy {
 public:
  explicit OraclePolicy(const Environment& env) : env_(env) {}

  void init(int, int, const ConfidenceParams&) override {}
  int choose(int, const std::vector<Vec>&) override {
    throw std::logic_error("OraclePolicy requires arm indices");
  }
  int choose_indexed(int user, const std::vector<Vec>&,
                     const std::vector<int>& arm_ids) override {
    int best = 0;
    double best_val = env_.expected_reward(user, arm_ids[0]);
    for (std::size_t a = 1; a < arm_ids.size(); ++a) {
      const double v = env_.expected_reward(user, arm_ids[a]);
      if (v > best_val) {
        best_val = v;
        best = static_cast<int>(a);
      }
    }
    return best;
  }
  void feedback(int, const Vec&, double) override {}
  std::string name() const override { return "oracle"; }

 private:
  const Environment& env_;
};

}  // namespace

long ExperimentConfig::effective_cadence() const {
  if (cadence > 0) return cadence;
  return std::max(1L, horizon / 1000);
}

double ExperimentConfig::effective_delta() const {
  return delta > 0.0 ? delta : 1.0 / static_cast<double>(horizon);
}

ConfidenceParams ExperimentConfig::confidence(const PolicySpec& spec) const {
  ConfidenceParams p;
  p.lambda_reg = lambda_reg;
  p.delta = effective_delta();
  p.eps_star = eps_star;
  p.alpha1 = alpha1;
  p.alpha2 = alpha2;
  p.d = d;
  p.horizon = horizon;
  auto get = [&](const char* key, double& dst) {
    auto it = spec.params.find(key);
    if (it != spec.params.end()) dst = it->second;
  };
  get("lambda", p.lambda_reg);
  get("delta", p.delta);
  get("eps_star", p.eps_star);
  get("alpha1", p.alpha1);
  get("alpha2", p.alpha2);
  return p;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }

  auto geti = [&](const char* k, auto& dst) {
    if (auto it = kv.find(k); it != kv.end()) dst = static_cast<std::decay_t<decltype(dst)>>(std::stoll(it->second));
  };
  auto getd = [&](const char* k, double& dst) {
    if (auto it = kv.find(k); it != kv.end()) dst = std::stod(it->second);
  };
  auto gets = [&](const char* k, std::string& dst) {
    if (auto it = kv.find(k); it != kv.end()) dst = it->second;
  };

  gets("env", cfg.env_kind);
  geti("u", cfg.u);
  geti("m", cfg.m);
  geti("d", cfg.d);
  geti("pool_size", cfg.pool_size);
  geti("per_round_arms", cfg.per_round_arms);
  getd("eps_range", cfg.eps_range);
  getd("noise_std", cfg.noise_std);
  if (auto it = kv.find("min_cluster_gap"); it != kv.end()) {
    cfg.min_cluster_gap = std::stod(it->second);
  }
  gets("ratings", cfg.ratings_path);
  geti("case", cfg.env_case);
  geti("top_users", cfg.top_users);
  geti("top_items", cfg.top_items);
  geti("feature_rows", cfg.feature_rows);
  geti("T", cfg.horizon);
  geti("trials", cfg.trials);
  geti("seed", cfg.seed);
  geti("cadence", cfg.cadence);
  gets("out", cfg.out_dir);
  getd("lambda", cfg.lambda_reg);
  getd("delta", cfg.delta);
  getd("eps_star", cfg.eps_star);
  getd("alpha1", cfg.alpha1);
  getd("alpha2", cfg.alpha2);
  int exact = cfg.exact_ucb_sum ? 1 : 0;
  geti("exact_ucb_sum", exact);
  cfg.exact_ucb_sum = exact != 0;

  std::string policies = "rclumb";
  gets("policies", policies);
  std::istringstream ps(policies);
  std::string name;
  while (std::getline(ps, name, ',')) {
    if (name.empty()) continue;
    PolicySpec spec;
    spec.name = name;
    const std::string prefix = name + ".";
    for (const auto& [key, value] : kv) {
      if (key.rfind(prefix, 0) == 0) spec.params[key.substr(prefix.size())] = std::stod(value);
    }
    cfg.policies.push_back(std::move(spec));
  }

  if (cfg.horizon < 1) throw std::invalid_argument("config: T must be >= 1");
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::unique_ptr<Environment> build_environment(const ExperimentConfig& config) {
  if (config.env_kind == "synthetic") {
    SyntheticConfig sc;
    sc.u = config.u;
    sc.m = config.m;
    sc.d = config.d;
    sc.pool_size = config.pool_size;
    sc.per_round_arms = config.per_round_arms;
    sc.eps_range = config.eps_range;
    sc.noise_std = config.noise_std;
    sc.min_cluster_gap = config.min_cluster_gap;
    sc.seed = config.seed;
    return std::make_unique<SyntheticEnvironment>(generate_instance(sc),
                                                  sc.per_round_arms, sc.noise_std);
  }
  if (config.env_kind == "real") {
    RealEnvSpec spec;
    spec.env_case = config.env_case;
    spec.d = config.d;
    spec.top_users = config.top_users;
    spec.top_items = config.top_items;
    spec.eps_range = config.eps_range;
    spec.feature_rows = config.feature_rows;
    spec.per_round_arms = config.per_round_arms;
    spec.noise_std = config.noise_std;
    const RatingMatrix ratings = load_ratings(config.ratings_path);
    return build_env(spec, ratings, config.seed);
  }
  throw std::invalid_argument("unknown env kind: " + config.env_kind);
}

std::unique_ptr<Policy> build_policy(const ExperimentConfig& config,
                                     const PolicySpec& spec,
                                     const Environment& env) {
  bool exact = config.exact_ucb_sum;
  if (auto it = spec.params.find("exact_ucb_sum"); it != spec.params.end()) {
    exact = it->second != 0.0;
  }
  const std::string& n = spec.name;
  if (n == "rclumb") {
    RclumbOptions opt;
    opt.exact_ucb_sum = exact;
    return std::make_unique<RclumbPolicy>(opt, n);
  }
  if (n == "club") return std::make_unique<RclumbPolicy>(make_club_policy());
  if (n == "rsclumb") {
    RsclumbOptions opt;
    opt.exact_ucb_sum = exact;
    return std::make_unique<RsclumbPolicy>(opt, n);
  }
  if (n == "sclub") return std::make_unique<RsclumbPolicy>(make_sclub_policy());
  if (n == "linucb_one") return std::make_unique<LinUcbPolicy>(LinUcbScope::Global, false, n);
  if (n == "linucb_ind") return std::make_unique<LinUcbPolicy>(LinUcbScope::PerUser, false, n);
  if (n == "rlinucb_one") return std::make_unique<LinUcbPolicy>(LinUcbScope::Global, true, n, exact);
  if (n == "rlinucb_ind") return std::make_unique<LinUcbPolicy>(LinUcbScope::PerUser, true, n, exact);
  if (n == "oracle") return std::make_unique<OraclePolicy>(env);
  throw std::invalid_argument("unknown policy: " + n);
}

TrialResult run_trial(const ExperimentConfig& config, const Environment& env,
                      Policy& policy, int trial_index) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult result;
  result.trial = trial_index;
  result.seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial_index));
  Rng rng(result.seed);

  policy.init(env.user_count(), env.dim(), config.confidence(PolicySpec{policy.name(), {}}));
  const long cadence = config.effective_cadence();
  double cum_regret = 0.0, cum_reward = 0.0;

  for (long t = 1; t <= config.horizon; ++t) {
    const auto [user, candidates] = env.sample_round(rng);
    std::vector<Vec> arms;
    arms.reserve(candidates.size());
    for (int a : candidates) arms.push_back(env.arm_feature(a));
    int chosen_pos;
    try {
      chosen_pos = policy.choose_indexed(user, arms, candidates);
    } catch (const std::exception& e) {
      throw std::runtime_error("policy " + policy.name() + " failed at round " +
                               std::to_string(t) + " serving user " +
                               std::to_string(user) + ": " + e.what());
    }
    const int chosen = candidates[chosen_pos];
    const double reward = env.realize_reward(user, chosen, rng);
    policy.feedback(user, arms[chosen_pos], reward);
    cum_regret += env.instantaneous_regret(user, candidates, chosen);
    cum_reward += reward;
    if (t % cadence == 0 || t == config.horizon) {
      result.rounds.push_back(t);
      result.cum_regret.push_back(cum_regret);
      result.cum_reward.push_back(cum_reward);
    }
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<SummaryRow> aggregate_trials(const std::vector<TrialResult>& results) {
  if (results.empty()) throw std::invalid_argument("aggregate_trials: no results");
  const std::size_t len = results[0].rounds.size();
  for (const TrialResult& r : results) {
    if (r.rounds.size() != len || r.rounds != results[0].rounds) {
      throw std::invalid_argument("aggregate_trials: misaligned cadences");
    }
  }
  const double n = static_cast<double>(results.size());
  std::vector<SummaryRow> out(len);
  for (std::size_t k = 0; k < len; ++k) {
    double sum_rg = 0.0, sum_rw = 0.0;
    for (const TrialResult& r : results) {
      sum_rg += r.cum_regret[k];
      sum_rw += r.cum_reward[k];
    }
    const double mean_rg = sum_rg / n;
    const double mean_rw = sum_rw / n;
    double var_rg = 0.0, var_rw = 0.0;
    if (results.size() > 1) {
      for (const TrialResult& r : results) {
        var_rg += (r.cum_regret[k] - mean_rg) * (r.cum_regret[k] - mean_rg);
        var_rw += (r.cum_reward[k] - mean_rw) * (r.cum_reward[k] - mean_rw);
      }
      var_rg /= n - 1.0;
      var_rw /= n - 1.0;
    }
    out[k] = {results[0].rounds[k], mean_rg, std::sqrt(var_rg / n), mean_rw,
              std::sqrt(var_rw / n)};
  }
  return out;
}

RunOutput run_experiment(const ExperimentConfig& config, int workers) {
  const std::unique_ptr<Environment> env = build_environment(config);
  RunOutput output;
  for (const PolicySpec& spec : config.policies) {
    std::vector<TrialResult> results(config.trials);
    auto run_one = [&](int trial) {
      const std::unique_ptr<Policy> policy = build_policy(config, spec, *env);
      ExperimentConfig local = config;
      // per-policy hyperparameter overrides flow through confidence();
      // rebuild the params here so run_trial sees them
      local.lambda_reg = config.confidence(spec).lambda_reg;
      local.delta = config.confidence(spec).delta;
      local.eps_star = config.confidence(spec).eps_star;
      local.alpha1 = config.confidence(spec).alpha1;
      local.alpha2 = config.confidence(spec).alpha2;
      results[trial] = run_trial(local, *env, *policy, trial);
    };
    if (workers <= 1) {
      for (int trial = 0; trial < config.trials; ++trial) run_one(trial);
    } else {
      std::vector<std::future<void>> pending;
      for (int trial = 0; trial < config.trials; ++trial) {
        pending.push_back(std::async(std::launch::async, run_one, trial));
        if (static_cast<int>(pending.size()) == workers) {
          for (auto& f : pending) f.get();
          pending.clear();
        }
      }
      for (auto& f : pending) f.get();
    }
    output.summaries[spec.name] = aggregate_trials(results);
    output.per_policy[spec.name] = std::move(results);
  }
  return output;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

void write_outputs(const ExperimentConfig& config, const RunOutput& output,
                   const std::string& config_text) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);

  {
    std::ofstream out(fs::path(config.out_dir) / "results.csv");
    out << "policy,trial,round,cum_regret,cum_reward\n";
    for (const auto& [name, results] : output.per_policy) {
      for (const TrialResult& r : results) {
        for (std::size_t k = 0; k < r.rounds.size(); ++k) {
          out << name << ',' << r.trial << ',' << r.rounds[k] << ','
              << format_double(r.cum_regret[k]) << ','
              << format_double(r.cum_reward[k]) << '\n';
        }
      }
    }
  }
  {
    std::ofstream out(fs::path(config.out_dir) / "summary.csv");
    out << "policy,round,mean_regret,sem_regret,mean_reward,sem_reward\n";
    for (const auto& [name, rows] : output.summaries) {
      for (const SummaryRow& row : rows) {
        out << name << ',' << row.round << ',' << format_double(row.mean_regret)
            << ',' << format_double(row.sem_regret) << ','
            << format_double(row.mean_reward) << ','
            << format_double(row.sem_reward) << '\n';
      }
    }
  }
  {
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config_hash"] = fnv1a(config_text);
    manifest["base_seed"] = config.seed;
    manifest["trials"] = config.trials;
    manifest["horizon"] = config.horizon;
    std::vector<std::uint64_t> seeds;
    for (int trial = 0; trial < config.trials; ++trial) {
      seeds.push_back(derive_seed(config.seed, static_cast<std::uint64_t>(trial)));
    }
    manifest["trial_seeds"] = seeds;
    std::vector<std::string> names;
    for (const PolicySpec& spec : config.policies) names.push_back(spec.name);
    manifest["policies"] = names;
    std::ofstream out(fs::path(config.out_dir) / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
}

SufficientTime compute_T0(long u, int d, double tlx, double gamma1,
                          double eps_star, double delta) {
  const double margin = eps_star * std::sqrt(1.0 / (2.0 * tlx));
  auto horizon = [&](double fraction) {
    const double gap = gamma1 * fraction - margin;
    if (gap <= 0.0) {
      throw std::runtime_error("compute_T0: instance not separable at this eps_star");
    }
    const double du = static_cast<double>(u);
    const double term1 = 8.0 * d / (tlx * gap * gap) * std::log(du / delta);
    const double term2 = 16.0 / (tlx * tlx) * std::log(8.0 * d / (tlx * tlx * delta));
    return 16.0 * du * std::log(du / delta) + 4.0 * du * std::max(term1, term2);
  };
  return {horizon(0.25), horizon(1.0 / 6.0)};
}

}  // namespace cbsim
