#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "cbsim/harness.hpp"
#include "cbsim/verification.hpp"

using namespace cbsim;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json to_json(const LemmaReport& report) {
  return {{"suite", report.suite},
          {"cases", report.cases},
          {"max_violation", report.max_violation},
          {"status", report.status},
          {"worst_case", report.worst_case},
          {"detail", report.detail}};
}

int run_suite(const std::string& suite, std::uint64_t seed, nlohmann::json& out) {
  bool all_pass = true;
  auto emit = [&](const LemmaReport& report) {
    out.push_back(to_json(report));
    if (report.status == "fail") all_pass = false;
  };

  Rng rng = make_rng(seed);
  if (suite == "f1" || suite == "all") emit(check_lemma_f1(10000, 50, 10, 1.0, rng));
  if (suite == "chain" || suite == "all") {
    emit(check_misclustering_chain(10000, 30, 10, 0.5, 1.0, rng));
  }
  if (suite == "tlx" || suite == "all") {
    TlxProbe probe;
    probe.samples = suite == "tlx" ? 10000000 : 1000000;
    emit(check_tilde_lambda_mc(probe, rng));
  }
  if (suite == "reduction" || suite == "all") {
    emit(check_reductions(ReductionConfig{}, seed));
  }
  if (suite == "partition" || suite == "all") {
    SyntheticConfig sc;
    sc.u = 50;
    sc.m = 3;
    sc.d = 5;
    sc.eps_range = 0.05;
    sc.min_cluster_gap = 1.0;
    sc.seed = seed;
    const ProblemInstance instance = generate_instance(sc);
    const SyntheticEnvironment env(instance, sc.per_round_arms, sc.noise_std);

    ExperimentConfig cfg;
    cfg.u = sc.u;
    cfg.m = sc.m;
    cfg.d = sc.d;
    cfg.pool_size = sc.pool_size;
    cfg.per_round_arms = sc.per_round_arms;
    cfg.horizon = suite == "partition" ? 100000 : 20000;
    cfg.seed = seed;
    cfg.eps_star = sc.eps_range;
    cfg.alpha2 = 12.0;  // floor the deletion rule well above estimate noise

    RclumbOptions opt;
    opt.record_clusters = true;
    RclumbPolicy policy(opt);
    run_trial(cfg, env, policy, 0);

    const double tlx = tilde_lambda_x(1.0 / sc.d, 0.05, sc.per_round_arms);
    emit(check_good_partition(instance, policy, zeta(cfg.eps_star, tlx)));
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clustering-of-bandits simulation and verification harness"};
  app.require_subcommand(1);

  std::string config_path, out_path = ".", suite = "all";
  int trials = -1, workers = 1;
  std::int64_t seed = -1;

  auto* run = app.add_subcommand("run", "run a benchmark experiment");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--trials", trials, "override trial count");
  run->add_option("--seed", seed, "override base seed");
  run->add_option("--workers", workers, "parallel trial workers");
  run->add_option("--out", out_path, "output directory");

  auto* diag = app.add_subcommand("diag-t0", "sufficient-time diagnostic");
  diag->add_option("--config", config_path, "config file")->required();

  auto* verify = app.add_subcommand("verify", "numeric verification suites");
  verify->add_option("--suite", suite, "f1|chain|tlx|reduction|partition|all");
  verify->add_option("--seed", seed, "suite seed");

  auto* exp = app.add_subcommand("export-instance", "export a synthetic instance");
  exp->add_option("--config", config_path, "config file")->required();
  std::string export_path;
  exp->add_option("--out", export_path, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::string text = slurp(config_path);
      ExperimentConfig cfg = parse_config_text(text);
      if (trials > 0) cfg.trials = trials;
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (run->count("--out")) cfg.out_dir = out_path;
      const RunOutput output = run_experiment(cfg, workers);
      write_outputs(cfg, output, text);
      for (const auto& [name, rows] : output.summaries) {
        std::cout << name << ": final mean regret "
                  << format_double(rows.back().mean_regret) << " (sem "
                  << format_double(rows.back().sem_regret) << ")\n";
      }
      return 0;
    }
    if (diag->parsed()) {
      const ExperimentConfig cfg = parse_config_file(config_path);
      if (cfg.env_kind != "synthetic") {
        throw std::runtime_error("diag-t0 requires a synthetic environment");
      }
      const auto env = build_environment(cfg);
      const auto& instance =
          dynamic_cast<const SyntheticEnvironment&>(*env).instance();
      const double tlx =
          tilde_lambda_x(1.0 / cfg.d, 0.05, cfg.per_round_arms);
      const InstanceDiagnostics diags =
          instance_diagnostics(instance, cfg.eps_star, tlx);
      nlohmann::json out = {{"gamma", diags.gamma},
                            {"gamma1", diags.gamma1},
                            {"zeta", diags.zeta_value},
                            {"u_tilde", diags.u_tilde},
                            {"tilde_lambda_x", tlx}};
      const SufficientTime t = compute_T0(cfg.u, cfg.d, tlx, diags.gamma1,
                                          cfg.eps_star, cfg.effective_delta());
      out["t0"] = t.t0;
      out["t1"] = t.t1;
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (verify->parsed()) {
      nlohmann::json reports = nlohmann::json::array();
      const int rc = run_suite(suite, seed >= 0 ? seed : 7, reports);
      std::cout << reports.dump(2) << '\n';
      return rc;
    }
    if (exp->parsed()) {
      const ExperimentConfig cfg = parse_config_file(config_path);
      if (cfg.env_kind != "synthetic") {
        throw std::runtime_error("export-instance requires a synthetic environment");
      }
      const auto env = build_environment(cfg);
      std::ofstream out(export_path);
      if (!out) throw std::runtime_error("cannot open " + export_path);
      export_instance(dynamic_cast<const SyntheticEnvironment&>(*env).instance(), out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
