#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace cbsim {

/// Dynamic user graph starting complete; stored as the complement set of
/// deleted edges, so memory is O(deletions) not O(u^2). Deletions are
/// permanent.
class UserGraph {
 public:
  explicit UserGraph(int user_count) : u_(user_count) {}

  int user_count() const { return u_; }
  std::size_t deleted_count() const { return deleted_.size(); }

  bool has_edge(int a, int b) const {
    if (a == b) return false;
    return deleted_.find(key(a, b)) == deleted_.end();
  }

  void delete_edge(int a, int b) {
    if (a == b) throw std::invalid_argument("UserGraph: no self edges");
    deleted_.insert(key(a, b));
  }

  /// {i} plus direct neighbors of i, ascending.
  std::vector<int> one_hop(int i) const {
    std::vector<int> out;
    out.reserve(u_);
    for (int l = 0; l < u_; ++l) {
      if (l == i || has_edge(i, l)) out.push_back(l);
    }
    return out;
  }

  /// Connected component containing i, ascending.
  std::vector<int> component(int i) const {
    std::vector<char> seen(u_, 0);
    std::vector<int> stack{i};
    seen[i] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int l = 0; l < u_; ++l) {
        if (!seen[l] && has_edge(v, l)) {
          seen[l] = 1;
          stack.push_back(l);
        }
      }
    }
    std::vector<int> out;
    for (int l = 0; l < u_; ++l) {
      if (seen[l]) out.push_back(l);
    }
    return out;
  }

 private:
  std::uint64_t key(int a, int b) const {
    const std::uint64_t lo = static_cast<std::uint64_t>(a < b ? a : b);
    const std::uint64_t hi = static_cast<std::uint64_t>(a < b ? b : a);
    return lo * static_cast<std::uint64_t>(u_) + hi;
  }

  int u_;
  std::unordered_set<std::uint64_t> deleted_;
};

}  // namespace cbsim
