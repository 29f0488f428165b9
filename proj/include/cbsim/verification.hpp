#pragma once

#include <cstdint>
#include <string>

#include "cbsim/env_synthetic.hpp"
#include "cbsim/policy_rclumb.hpp"
#include "cbsim/rng.hpp"

namespace cbsim {

/// Outcome of one numeric suite. Violation is signed slack (lhs - rhs);
/// anything above the suite tolerance fails.
struct LemmaReport {
  std::string suite;
  long cases = 0;
  double max_violation = -1e300;
  std::string status = "pass";  // pass | fail | inconclusive
  std::string worst_case;       // inputs of the worst case, echoed
  double detail = 0.0;          // suite-specific headline number

  bool pass() const { return status == "pass"; }
};

/// ||sum_i x_i x_i' theta_i||_2 <= C sqrt(d) ||sum_i x_i x_i'||_2 over
/// `cases` random draws (k <= k_max, d <= d_max, ||theta|| <= c_norm),
/// plus the aligned two-vector instance where both sides equal sqrt(2).
LemmaReport check_lemma_f1(int cases, int k_max, int d_max, double c_norm,
                           Rng& rng);

/// Deterministic misclustering sub-chain: for histories x_s (||x_s||<=1)
/// and shifts ||Delta_s|| <= zeta,
/// |x' Minv sum_s x_s x_s' Delta_s| <= zeta sqrt(2d) lmax(sum) / lmin(M),
/// with M = lambda I + sum_s x_s x_s'.
LemmaReport check_misclustering_chain(int cases, int t_len_max, int d_max,
                                      double zeta_cap, double lambda_reg,
                                      Rng& rng);

struct TlxProbe {
  int d = 5;
  int arm_count = 20;     // C, arms offered per round
  long samples = 1000000; // Monte Carlo rounds
  double sigma = 0.5;     // sub-Gaussian proxy fed to the quadrature
  bool point_mass = false;  // degenerate single-arm-direction distribution
};

/// Monte Carlo check that E[min_{i<=C} (theta' x_i)^2] >= tilde_lambda_x
/// within 3 standard errors; inconclusive when the error bar is too wide
/// to resolve the bound.
LemmaReport check_tilde_lambda_mc(const TlxProbe& probe, Rng& rng);

struct ReductionConfig {
  int u = 10;
  int m = 2;
  int d = 5;
  long horizon = 2000;
  int seeds = 3;
  double eps_range = 0.1;
  double noise_std = 0.1;
  double alpha1 = 1.0;
};

/// Paired shared-seed traces: the robust graph policy at eps_star=0,
/// alpha2=0 in component mode must match the CLUB baseline action for
/// action; likewise the robust set policy at eps_star=0 vs SCLUB.
LemmaReport check_reductions(const ReductionConfig& config, std::uint64_t seed);

/// Good-partition audit of a completed graph-policy trial: for each
/// logged round past the burn-in, the serving cluster must contain the
/// user's whole ground-truth cluster and only zeta-close members.
/// detail carries the observed frequency.
LemmaReport check_good_partition(const ProblemInstance& instance,
                                 const RclumbPolicy& policy, double zeta_value,
                                 double burn_in_fraction = 0.5,
                                 double min_frequency = 0.95);

}  // namespace cbsim
