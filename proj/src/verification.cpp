#include "cbsim/verification.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "cbsim/policy_rsclumb.hpp"
#include "cbsim/ridge.hpp"

namespace cbsim {

namespace {

constexpr double kDetTol = 1e-9;  // slack allowed on deterministic inequalities

Vec random_ball(int d, double radius, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(d);
  for (int k = 0; k < d; ++k) v[k] = gauss(rng);
  const double norm = v.norm();
  if (norm == 0.0) return Vec::Zero(d);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return v * (radius * unif(rng) / norm);
}

Vec random_unit(int d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(d);
  double norm = 0.0;
  do {
    for (int k = 0; k < d; ++k) v[k] = gauss(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

double spectral_norm(const Mat& sym) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

std::string describe(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

}  // namespace

LemmaReport check_lemma_f1(int cases, int k_max, int d_max, double c_norm,
                           Rng& rng) {
  LemmaReport report;
  report.suite = "f1";

  // aligned two-vector instance: both sides come out exactly sqrt(2)
  {
    Mat lhs_sum = Mat::Zero(2, 2);
    Vec x1(2), x2(2);
    x1 << 0, 1;
    x2 << 1, 0;
    const Vec acc = x1 * x1.dot(x1) + x2 * x2.dot(x2);
    lhs_sum = x1 * x1.transpose() + x2 * x2.transpose();
    const double lhs = acc.norm();
    const double rhs = 1.0 * std::sqrt(2.0) * spectral_norm(lhs_sum);
    report.detail = lhs;  // sqrt(2); equality audited by the caller
    if (std::abs(lhs - rhs) > 1e-12) {
      report.status = "fail";
      report.worst_case = describe("aligned instance lhs=%.17g rhs=%.17g", lhs, rhs);
      return report;
    }
  }

  std::uniform_int_distribution<int> k_dist(1, k_max), d_dist(1, d_max);
  for (int c = 0; c < cases; ++c) {
    const int k = k_dist(rng);
    const int d = d_dist(rng);
    Vec acc = Vec::Zero(d);
    Mat gram = Mat::Zero(d, d);
    for (int i = 0; i < k; ++i) {
      const Vec x = random_ball(d, 1.0, rng);
      const Vec theta = random_ball(d, c_norm, rng);
      acc += x * x.dot(theta);
      gram += x * x.transpose();
    }
    const double lhs = acc.norm();
    const double rhs = c_norm * std::sqrt(double(d)) * spectral_norm(gram);
    const double violation = lhs - rhs;
    ++report.cases;
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_case = describe("k=%d d=%d lhs=%.17g rhs=%.17g", k, d, lhs, rhs);
    }
  }
  if (report.max_violation > kDetTol) report.status = "fail";
  return report;
}

LemmaReport check_misclustering_chain(int cases, int t_len_max, int d_max,
                                      double zeta_cap, double lambda_reg,
                                      Rng& rng) {
  LemmaReport report;
  report.suite = "chain";
  std::uniform_int_distribution<int> t_dist(1, t_len_max), d_dist(1, d_max);
  std::uniform_real_distribution<double> z_dist(0.0, zeta_cap);

  for (int c = 0; c < cases; ++c) {
    const int t_len = t_dist(rng);
    const int d = d_dist(rng);
    const double z = z_dist(rng);
    Mat s = Mat::Zero(d, d);
    Vec drift = Vec::Zero(d);
    for (int i = 0; i < t_len; ++i) {
      const Vec x = random_ball(d, 1.0, rng);
      const Vec delta = random_ball(d, z, rng);
      s += x * x.transpose();
      drift += x * x.dot(delta);
    }
    const Mat m = lambda_reg * Mat::Identity(d, d) + s;
    const Vec xa = random_ball(d, 1.0, rng);
    const double lhs = std::abs(xa.dot(m.llt().solve(drift)));

    Eigen::SelfAdjointEigenSolver<Mat> eig_s(s, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Mat> eig_m(m, Eigen::EigenvaluesOnly);
    const double rhs = z * std::sqrt(2.0 * d) * eig_s.eigenvalues().maxCoeff() /
                       eig_m.eigenvalues().minCoeff();

    const double violation = lhs - rhs;
    ++report.cases;
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_case = describe("t=%d d=%d zeta=%.6g lhs=%.17g rhs=%.17g",
                                   t_len, d, z, lhs, rhs);
    }
  }
  if (report.max_violation > kDetTol) report.status = "fail";
  return report;
}

LemmaReport check_tilde_lambda_mc(const TlxProbe& probe, Rng& rng) {
  LemmaReport report;
  report.suite = "tlx";

  const Vec theta = random_unit(probe.d, rng);
  const Vec anchor = random_unit(probe.d, rng);  // point-mass direction
  const double lambda_x =
      probe.point_mass ? theta.dot(anchor) * theta.dot(anchor) : 1.0 / probe.d;

  std::normal_distribution<double> gauss(0.0, 1.0);
  const double anchor_sq = theta.dot(anchor) * theta.dot(anchor);
  double sum = 0.0, sum_sq = 0.0;
  for (long n = 0; n < probe.samples; ++n) {
    double best = 0.0;
    for (int a = 0; a < probe.arm_count; ++a) {
      double v;
      if (probe.point_mass) {
        v = anchor_sq;
      } else {
        // theta' (g / ||g||) without materializing the arm vector
        double dot = 0.0, norm_sq = 0.0;
        for (int k = 0; k < probe.d; ++k) {
          const double g = gauss(rng);
          dot += theta[k] * g;
          norm_sq += g * g;
        }
        v = norm_sq == 0.0 ? 0.0 : dot * dot / norm_sq;
      }
      if (a == 0 || v < best) best = v;
    }
    sum += best;
    sum_sq += best * best;
  }
  const double n = static_cast<double>(probe.samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  const double se = std::sqrt(var / n);
  const double bound = tilde_lambda_x(lambda_x, probe.sigma, probe.arm_count);

  report.cases = probe.samples;
  report.detail = mean;
  report.max_violation = bound - (mean + 3.0 * se);
  report.worst_case = describe("mean=%.10g se=%.4g bound=%.10g lambda_x=%.10g",
                               mean, se, bound, lambda_x);
  if (mean >= bound) {
    report.status = "pass";
  } else if (mean + 3.0 * se >= bound) {
    report.status = (3.0 * se > 0.5 * bound) ? "inconclusive" : "pass";
  } else {
    report.status = "fail";
  }
  return report;
}

namespace {

std::vector<int> run_trace(const Environment& env, Policy& policy,
                           const ConfidenceParams& params, long horizon,
                           std::uint64_t seed) {
  policy.init(env.user_count(), env.dim(), params);
  Rng rng(seed);
  std::vector<int> actions;
  actions.reserve(horizon);
  for (long t = 0; t < horizon; ++t) {
    const auto [user, candidates] = env.sample_round(rng);
    std::vector<Vec> arms;
    arms.reserve(candidates.size());
    for (int a : candidates) arms.push_back(env.arm_feature(a));
    const int pos = policy.choose_indexed(user, arms, candidates);
    const double reward = env.realize_reward(user, candidates[pos], rng);
    policy.feedback(user, arms[pos], reward);
    actions.push_back(candidates[pos]);
  }
  return actions;
}

}  // namespace

LemmaReport check_reductions(const ReductionConfig& config, std::uint64_t seed) {
  LemmaReport report;
  report.suite = "reduction";
  report.max_violation = 0.0;

  for (int s = 0; s < config.seeds; ++s) {
    const std::uint64_t instance_seed = derive_seed(seed, 2 * s);
    const std::uint64_t trial_seed = derive_seed(seed, 2 * s + 1);

    SyntheticConfig sc;
    sc.u = config.u;
    sc.m = config.m;
    sc.d = config.d;
    sc.eps_range = config.eps_range;
    sc.noise_std = config.noise_std;
    sc.seed = instance_seed;
    const SyntheticEnvironment env(generate_instance(sc), sc.per_round_arms,
                                   sc.noise_std);

    ConfidenceParams base;
    base.lambda_reg = 1.0;
    base.delta = 1.0 / static_cast<double>(config.horizon);
    base.alpha1 = config.alpha1;
    base.d = config.d;
    base.horizon = config.horizon;

    ConfidenceParams graph_zero = base;
    graph_zero.eps_star = 0.0;
    graph_zero.alpha2 = 0.0;

    auto compare = [&](Policy& a, Policy& b, const ConfidenceParams& pa,
                       const ConfidenceParams& pb, const char* pair) {
      const std::vector<int> ta = run_trace(env, a, pa, config.horizon, trial_seed);
      const std::vector<int> tb = run_trace(env, b, pb, config.horizon, trial_seed);
      for (long t = 0; t < config.horizon; ++t) {
        ++report.cases;
        if (ta[t] != tb[t]) {
          report.status = "fail";
          report.max_violation = 1.0;
          if (report.worst_case.empty()) {
            report.worst_case = describe("%s seed#%d diverged at round %ld: %d vs %d",
                                         pair, s, t + 1, ta[t], tb[t]);
          }
          return;
        }
      }
    };

    {
      RclumbOptions opt;
      opt.component_mode = true;
      RclumbPolicy graph_policy(opt, "graph-eps0");
      RclumbPolicy club = make_club_policy();
      compare(graph_policy, club, graph_zero, base, "graph/club");
    }
    {
      RsclumbPolicy set_policy(RsclumbOptions{}, "set-eps0");
      RsclumbPolicy sclub = make_sclub_policy();
      ConfidenceParams set_zero = base;
      set_zero.eps_star = 0.0;
      compare(set_policy, sclub, set_zero, base, "set/sclub");
    }
  }
  return report;
}

LemmaReport check_good_partition(const ProblemInstance& instance,
                                 const RclumbPolicy& policy, double zeta_value,
                                 double burn_in_fraction, double min_frequency) {
  LemmaReport report;
  report.suite = "partition";
  const auto& trace = policy.cluster_trace();
  const std::size_t start =
      static_cast<std::size_t>(trace.size() * burn_in_fraction);

  long good = 0, evaluated = 0;
  for (std::size_t t = start; t < trace.size(); ++t) {
    const auto& round = trace[t];
    const int own = instance.user_cluster[round.user];
    bool ok = true;
    // every ground-truth peer must be inside the serving cluster
    for (int l = 0; l < instance.user_count() && ok; ++l) {
      if (instance.user_cluster[l] == own &&
          !std::binary_search(round.members.begin(), round.members.end(), l)) {
        ok = false;
      }
    }
    // and every member must be zeta-close to the served user
    const Vec& theta_i = instance.user_theta(round.user);
    for (std::size_t k = 0; ok && k < round.members.size(); ++k) {
      if ((theta_i - instance.user_theta(round.members[k])).norm() >
          zeta_value + 1e-12) {
        ok = false;
      }
    }
    ++evaluated;
    if (ok) ++good;
    else if (report.worst_case.empty()) {
      report.worst_case = describe("first bad round index %zu (user %d, |V|=%zu)",
                                   t, round.user, round.members.size());
    }
  }
  report.cases = evaluated;
  const double freq = evaluated == 0 ? 0.0 : static_cast<double>(good) / evaluated;
  report.detail = freq;
  report.max_violation = min_frequency - freq;
  if (freq < min_frequency) report.status = "fail";
  return report;
}

}  // namespace cbsim
