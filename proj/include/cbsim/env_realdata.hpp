#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cbsim/env.hpp"

namespace cbsim {

/// Sparse rating triples on the source scale; one rating per (user, item),
/// duplicates keep the last occurrence.
struct RatingMatrix {
  int rows = 0;  // users (max index + 1)
  int cols = 0;  // items
  struct Triple {
    int user;
    int item;
    double rating;
  };
  std::vector<Triple> entries;
};

RatingMatrix load_ratings(const std::string& path);

/// Dense 0/1 matrix over the top_users most active users (rows) and
/// top_items most rated items (cols); 1 iff rating strictly greater than
/// threshold, missing cells 0. Activity ties break to the lower id.
Mat binarize(const RatingMatrix& ratings, int top_users, int top_items,
             double threshold = 3.0);

struct SvdFeatures {
  std::vector<Vec> row_vectors;  // one per row of H, unit-normalized
  std::vector<Vec> col_vectors;  // one per column of H
  Vec singular_values;
  int effective_rank = 0;  // components beyond this were zero-padded
};

/// Rank-d truncated SVD features: rows of U_d S_d^{1/2} and V_d S_d^{1/2},
/// unit-normalized. Deterministic sign convention: the largest-magnitude
/// entry of each left singular vector is made positive.
SvdFeatures svd_features(const Mat& h, int d);

struct RealEnvSpec {
  int env_case = 1;       // 1: synthetic feedback on real features, 2: matrix feedback
  int d = 50;
  int top_users = 1000;
  int top_items = 1000;
  double eps_range = 0.2; // case 1 only
  int feature_rows = 100; // case 2 only
  int per_round_arms = 20;
  double noise_std = 0.1; // case 1 only
};

std::unique_ptr<Environment> build_env(const RealEnvSpec& spec,
                                       const RatingMatrix& ratings,
                                       std::uint64_t seed);

/// Case 1: linear rewards on SVD user/item vectors plus a fresh uniform
/// deviation matrix and Gaussian noise.
class RealFeatureEnvironment : public Environment {
 public:
  RealFeatureEnvironment(std::vector<Vec> user_vectors, std::vector<Vec> item_vectors,
                         Mat deviation, double noise_std, int per_round_arms);

  int user_count() const override { return static_cast<int>(user_vectors_.size()); }
  int dim() const override { return static_cast<int>(user_vectors_[0].size()); }
  int pool_size() const override { return static_cast<int>(item_vectors_.size()); }
  const Vec& arm_feature(int arm) const override { return item_vectors_[arm]; }

  std::pair<int, std::vector<int>> sample_round(Rng& rng) const override;
  double realize_reward(int user, int arm, Rng& rng) const override;
  double expected_reward(int user, int arm) const override;

 private:
  std::vector<Vec> user_vectors_;
  std::vector<Vec> item_vectors_;
  Mat deviation_;
  double noise_std_;
  int per_round_arms_;
};

/// Case 2: item features from an SVD of held-out rows; the feedback is
/// looked up in the remaining binary matrix, no added noise.
class MatrixFeedbackEnvironment : public Environment {
 public:
  MatrixFeedbackEnvironment(std::vector<Vec> item_vectors, Mat feedback,
                            int per_round_arms);

  int user_count() const override { return static_cast<int>(feedback_.rows()); }
  int dim() const override { return static_cast<int>(item_vectors_[0].size()); }
  int pool_size() const override { return static_cast<int>(item_vectors_.size()); }
  const Vec& arm_feature(int arm) const override { return item_vectors_[arm]; }

  std::pair<int, std::vector<int>> sample_round(Rng& rng) const override;
  double realize_reward(int user, int arm, Rng& rng) const override;
  double expected_reward(int user, int arm) const override;

 private:
  std::vector<Vec> item_vectors_;
  Mat feedback_;
  int per_round_arms_;
};

}  // namespace cbsim
