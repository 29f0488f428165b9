#include "cbsim/env_synthetic.hpp"

#include "cbsim/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cbsim {

double Environment::instantaneous_regret(int user, const std::vector<int>& candidates,
                                         int chosen) const {
  double best = -std::numeric_limits<double>::infinity();
  bool chosen_in = false;
  for (int a : candidates) {
    best = std::max(best, expected_reward(user, a));
    chosen_in = chosen_in || a == chosen;
  }
  if (!chosen_in) throw std::invalid_argument("instantaneous_regret: chosen arm not a candidate");
  return best - expected_reward(user, chosen);
}

void SyntheticConfig::validate() const {
  if (u < 1 || m < 1 || d < 1) throw std::invalid_argument("SyntheticConfig: u, m, d must be >= 1");
  if (m > u) throw std::invalid_argument("SyntheticConfig: m must not exceed u");
  if (per_round_arms < 1 || per_round_arms > pool_size) {
    throw std::invalid_argument("SyntheticConfig: per_round_arms must lie in [1, pool_size]");
  }
  if (eps_range < 0.0) throw std::invalid_argument("SyntheticConfig: eps_range must be nonnegative");
  if (noise_std < 0.0) throw std::invalid_argument("SyntheticConfig: noise_std must be nonnegative");
}

namespace {

Vec random_unit(int d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int k = 0; k < d; ++k) v[k] = gauss(rng);
    norm = v.norm();
  }
  return v / norm;
}

double min_pairwise_gap(const std::vector<Vec>& thetas) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < thetas.size(); ++a) {
    for (std::size_t b = a + 1; b < thetas.size(); ++b) {
      gap = std::min(gap, (thetas[a] - thetas[b]).norm());
    }
  }
  return gap;
}

}  // namespace

ProblemInstance generate_instance(const SyntheticConfig& config) {
  config.validate();
  Rng rng = make_rng(config.seed);

  ProblemInstance inst;
  inst.eps_range = config.eps_range;

  const int kGapAttempts = 10000;
  int attempt = 0;
  while (true) {
    inst.cluster_thetas.clear();
    for (int j = 0; j < config.m; ++j) inst.cluster_thetas.push_back(random_unit(config.d, rng));
    if (!config.min_cluster_gap || config.m == 1 ||
        min_pairwise_gap(inst.cluster_thetas) >= *config.min_cluster_gap) {
      break;
    }
    if (++attempt >= kGapAttempts) {
      throw std::runtime_error(
          "generate_instance: could not plant min cluster gap " +
          std::to_string(*config.min_cluster_gap) + " within 10000 attempts");
    }
  }

  inst.user_cluster.resize(config.u);
  for (int i = 0; i < config.u; ++i) inst.user_cluster[i] = i % config.m;
  std::shuffle(inst.user_cluster.begin(), inst.user_cluster.end(), rng);

  inst.arm_pool.reserve(config.pool_size);
  for (int a = 0; a < config.pool_size; ++a) inst.arm_pool.push_back(random_unit(config.d, rng));

  inst.deviation.resize(config.u, config.pool_size);
  std::uniform_real_distribution<double> unif(-config.eps_range, config.eps_range);
  for (int i = 0; i < config.u; ++i) {
    for (int a = 0; a < config.pool_size; ++a) {
      inst.deviation(i, a) = config.eps_range > 0.0 ? unif(rng) : 0.0;
    }
  }
  return inst;
}

InstanceDiagnostics instance_diagnostics(const ProblemInstance& instance,
                                         double eps_star, double tlx) {
  InstanceDiagnostics diag;
  diag.zeta_value = zeta(eps_star, tlx);
  const int m = instance.cluster_count();
  diag.gamma = m > 1 ? 0.0 : std::numeric_limits<double>::infinity();
  diag.gamma1 = std::numeric_limits<double>::infinity();
  double gamma = std::numeric_limits<double>::infinity();
  std::vector<char> close(m, 0);
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const double gap = (instance.cluster_thetas[a] - instance.cluster_thetas[b]).norm();
      gamma = std::min(gamma, gap);
      if (gap > diag.zeta_value) {
        diag.gamma1 = std::min(diag.gamma1, gap);
      } else {
        close[a] = close[b] = 1;
      }
    }
  }
  diag.gamma = gamma;
  std::vector<long> sizes(m, 0);
  for (int c : instance.user_cluster) ++sizes[c];
  for (int j = 0; j < m; ++j) {
    if (close[j]) diag.u_tilde += sizes[j];
  }
  return diag;
}

SyntheticEnvironment::SyntheticEnvironment(ProblemInstance instance,
                                           int per_round_arms, double noise_std)
    : instance_(std::move(instance)),
      per_round_arms_(per_round_arms),
      noise_std_(noise_std) {
  if (per_round_arms_ < 1 || per_round_arms_ > pool_size()) {
    throw std::invalid_argument("SyntheticEnvironment: invalid per_round_arms");
  }
}

std::vector<int> sample_distinct(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

std::pair<int, std::vector<int>> SyntheticEnvironment::sample_round(Rng& rng) const {
  std::uniform_int_distribution<int> user(0, user_count() - 1);
  const int i = user(rng);
  return {i, sample_distinct(pool_size(), per_round_arms_, rng)};
}

double SyntheticEnvironment::expected_reward(int user, int arm) const {
  return instance_.arm_pool[arm].dot(instance_.user_theta(user)) +
         instance_.deviation(user, arm);
}

double SyntheticEnvironment::realize_reward(int user, int arm, Rng& rng) const {
  double r = expected_reward(user, arm);
  if (noise_std_ > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std_);
    r += noise(rng);
  }
  return r;
}

namespace {

void write_vec(std::ostream& out, const Vec& v) {
  char buf[32];
  for (int k = 0; k < v.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[k]);
    out << (k ? " " : "") << buf;
  }
  out << '\n';
}

Vec read_vec(std::istream& in, int d) {
  Vec v(d);
  for (int k = 0; k < d; ++k) {
    if (!(in >> v[k])) throw std::runtime_error("import_instance: truncated vector data");
  }
  return v;
}

}  // namespace

void export_instance(const ProblemInstance& instance, std::ostream& out) {
  char buf[32];
  out << "cbsim-instance 1\n";
  out << instance.cluster_count() << ' ' << instance.user_count() << ' '
      << instance.arm_pool.size() << ' ' << instance.dim() << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", instance.eps_range);
  out << buf << '\n';
  out << "thetas\n";
  for (const Vec& t : instance.cluster_thetas) write_vec(out, t);
  out << "assignments\n";
  for (std::size_t i = 0; i < instance.user_cluster.size(); ++i) {
    out << (i ? " " : "") << instance.user_cluster[i];
  }
  out << '\n';
  out << "pool\n";
  for (const Vec& x : instance.arm_pool) write_vec(out, x);
  out << "deviation\n";
  for (int i = 0; i < instance.user_count(); ++i) {
    for (int a = 0; a < static_cast<int>(instance.arm_pool.size()); ++a) {
      std::snprintf(buf, sizeof(buf), "%.17g", instance.deviation(i, a));
      out << (a ? " " : "") << buf;
    }
    out << '\n';
  }
}

ProblemInstance import_instance(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "cbsim-instance" || version != 1) {
    throw std::runtime_error("import_instance: bad header");
  }
  int m = 0, u = 0, pool = 0, d = 0;
  if (!(in >> m >> u >> pool >> d)) throw std::runtime_error("import_instance: bad sizes");
  ProblemInstance inst;
  if (!(in >> inst.eps_range)) throw std::runtime_error("import_instance: bad eps_range");
  std::string section;
  in >> section;
  if (section != "thetas") throw std::runtime_error("import_instance: expected thetas");
  for (int j = 0; j < m; ++j) inst.cluster_thetas.push_back(read_vec(in, d));
  in >> section;
  if (section != "assignments") throw std::runtime_error("import_instance: expected assignments");
  inst.user_cluster.resize(u);
  for (int i = 0; i < u; ++i) {
    if (!(in >> inst.user_cluster[i])) throw std::runtime_error("import_instance: truncated assignments");
  }
  in >> section;
  if (section != "pool") throw std::runtime_error("import_instance: expected pool");
  for (int a = 0; a < pool; ++a) inst.arm_pool.push_back(read_vec(in, d));
  in >> section;
  if (section != "deviation") throw std::runtime_error("import_instance: expected deviation");
  inst.deviation.resize(u, pool);
  for (int i = 0; i < u; ++i) {
    for (int a = 0; a < pool; ++a) {
      if (!(in >> inst.deviation(i, a))) throw std::runtime_error("import_instance: truncated deviation");
    }
  }
  return inst;
}

}  // namespace cbsim
