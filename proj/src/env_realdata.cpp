#include "cbsim/env_realdata.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cbsim/env_synthetic.hpp"

namespace cbsim {

RatingMatrix load_ratings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_ratings: cannot open " + path);
  RatingMatrix out;
  std::map<std::pair<int, int>, double> last;  // dedupe, keep last
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string ufield, ifield, rfield;
    if (!std::getline(ls, ufield, ',') || !std::getline(ls, ifield, ',') ||
        !std::getline(ls, rfield)) {
      throw std::runtime_error("load_ratings: malformed line " + std::to_string(line_no));
    }
    int user, item;
    double rating;
    try {
      user = std::stoi(ufield);
      item = std::stoi(ifield);
      rating = std::stod(rfield);
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // optional header
      throw std::runtime_error("load_ratings: malformed line " + std::to_string(line_no));
    }
    if (user < 0 || item < 0) {
      throw std::runtime_error("load_ratings: negative index at line " + std::to_string(line_no));
    }
    last[{user, item}] = rating;
    out.rows = std::max(out.rows, user + 1);
    out.cols = std::max(out.cols, item + 1);
  }
  for (const auto& [key, rating] : last) {
    out.entries.push_back({key.first, key.second, rating});
  }
  if (out.entries.empty()) throw std::runtime_error("load_ratings: no ratings in " + path);
  return out;
}

namespace {

/// Indices of the top-k counts, ties to the lower original id.
std::vector<int> top_by_count(const std::vector<long>& counts, int k) {
  std::vector<int> idx(counts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return counts[a] > counts[b]; });
  idx.resize(k);
  return idx;
}

}  // namespace

Mat binarize(const RatingMatrix& ratings, int top_users, int top_items,
             double threshold) {
  if (ratings.rows < top_users || ratings.cols < top_items) {
    throw std::invalid_argument("binarize: fewer users or items than requested");
  }
  std::vector<long> user_counts(ratings.rows, 0), item_counts(ratings.cols, 0);
  for (const auto& e : ratings.entries) {
    ++user_counts[e.user];
    ++item_counts[e.item];
  }
  const std::vector<int> users = top_by_count(user_counts, top_users);
  const std::vector<int> items = top_by_count(item_counts, top_items);
  std::vector<int> user_pos(ratings.rows, -1), item_pos(ratings.cols, -1);
  for (int r = 0; r < top_users; ++r) user_pos[users[r]] = r;
  for (int c = 0; c < top_items; ++c) item_pos[items[c]] = c;

  Mat h = Mat::Zero(top_users, top_items);
  for (const auto& e : ratings.entries) {
    const int r = user_pos[e.user];
    const int c = item_pos[e.item];
    if (r >= 0 && c >= 0 && e.rating > threshold) h(r, c) = 1.0;
  }
  return h;
}

SvdFeatures svd_features(const Mat& h, int d) {
  if (d > std::min(h.rows(), h.cols())) {
    throw std::invalid_argument("svd_features: d exceeds matrix dimensions");
  }
  Eigen::BDCSVD<Mat> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Mat u = svd.matrixU().leftCols(d);
  Mat v = svd.matrixV().leftCols(d);
  Vec s = svd.singularValues().head(d);

  SvdFeatures out;
  const double tol = 1e-12 * std::max(1.0, svd.singularValues()[0]);
  out.effective_rank = d;
  for (int k = 0; k < d; ++k) {
    if (s[k] <= tol) {
      out.effective_rank = k;
      s.tail(d - k).setZero();
      u.rightCols(d - k).setZero();
      v.rightCols(d - k).setZero();
      break;
    }
    // sign convention: largest-magnitude entry of the left singular vector positive
    int imax = 0;
    u.col(k).cwiseAbs().maxCoeff(&imax);
    if (u(imax, k) < 0.0) {
      u.col(k) = -u.col(k);
      v.col(k) = -v.col(k);
    }
  }
  out.singular_values = s;
  const Vec scale = s.cwiseSqrt();
  auto emit = [&](const Mat& basis, std::vector<Vec>& dst) {
    dst.reserve(basis.rows());
    for (int r = 0; r < basis.rows(); ++r) {
      Vec f = basis.row(r).transpose().cwiseProduct(scale);
      const double norm = f.norm();
      if (norm > 0.0) f /= norm;
      dst.push_back(std::move(f));
    }
  };
  emit(u, out.row_vectors);
  emit(v, out.col_vectors);
  return out;
}

RealFeatureEnvironment::RealFeatureEnvironment(std::vector<Vec> user_vectors,
                                               std::vector<Vec> item_vectors,
                                               Mat deviation, double noise_std,
                                               int per_round_arms)
    : user_vectors_(std::move(user_vectors)),
      item_vectors_(std::move(item_vectors)),
      deviation_(std::move(deviation)),
      noise_std_(noise_std),
      per_round_arms_(per_round_arms) {
  if (deviation_.rows() != static_cast<long>(user_vectors_.size()) ||
      deviation_.cols() != static_cast<long>(item_vectors_.size())) {
    throw std::invalid_argument("RealFeatureEnvironment: deviation shape mismatch");
  }
}

std::pair<int, std::vector<int>> RealFeatureEnvironment::sample_round(Rng& rng) const {
  std::uniform_int_distribution<int> user(0, user_count() - 1);
  const int i = user(rng);
  return {i, sample_distinct(pool_size(), per_round_arms_, rng)};
}

double RealFeatureEnvironment::expected_reward(int user, int arm) const {
  return user_vectors_[user].dot(item_vectors_[arm]) + deviation_(user, arm);
}

double RealFeatureEnvironment::realize_reward(int user, int arm, Rng& rng) const {
  double r = expected_reward(user, arm);
  if (noise_std_ > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std_);
    r += noise(rng);
  }
  return r;
}

MatrixFeedbackEnvironment::MatrixFeedbackEnvironment(std::vector<Vec> item_vectors,
                                                     Mat feedback, int per_round_arms)
    : item_vectors_(std::move(item_vectors)),
      feedback_(std::move(feedback)),
      per_round_arms_(per_round_arms) {
  if (feedback_.cols() != static_cast<long>(item_vectors_.size())) {
    throw std::invalid_argument("MatrixFeedbackEnvironment: feedback shape mismatch");
  }
}

std::pair<int, std::vector<int>> MatrixFeedbackEnvironment::sample_round(Rng& rng) const {
  std::uniform_int_distribution<int> user(0, user_count() - 1);
  const int i = user(rng);
  return {i, sample_distinct(pool_size(), per_round_arms_, rng)};
}

double MatrixFeedbackEnvironment::expected_reward(int user, int arm) const {
  return feedback_(user, arm);
}

double MatrixFeedbackEnvironment::realize_reward(int user, int arm, Rng&) const {
  return feedback_(user, arm);
}

std::unique_ptr<Environment> build_env(const RealEnvSpec& spec,
                                       const RatingMatrix& ratings,
                                       std::uint64_t seed) {
  if (spec.env_case == 1) {
    const Mat h = binarize(ratings, spec.top_users, spec.top_items);
    const SvdFeatures feats = svd_features(h, spec.d);
    Mat deviation(spec.top_users, spec.top_items);
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(-spec.eps_range, spec.eps_range);
    for (int i = 0; i < spec.top_users; ++i) {
      for (int a = 0; a < spec.top_items; ++a) {
        deviation(i, a) = spec.eps_range > 0.0 ? unif(rng) : 0.0;
      }
    }
    return std::make_unique<RealFeatureEnvironment>(
        feats.row_vectors, feats.col_vectors, std::move(deviation),
        spec.noise_std, spec.per_round_arms);
  }
  if (spec.env_case == 2) {
    const Mat h = binarize(ratings, spec.top_users + spec.feature_rows, spec.top_items);
    const Mat top = h.topRows(spec.feature_rows);
    const SvdFeatures feats = svd_features(top, spec.d);
    Mat feedback = h.bottomRows(spec.top_users);
    return std::make_unique<MatrixFeedbackEnvironment>(
        feats.col_vectors, std::move(feedback), spec.per_round_arms);
  }
  throw std::invalid_argument("build_env: case must be 1 or 2");
}

}  // namespace cbsim
