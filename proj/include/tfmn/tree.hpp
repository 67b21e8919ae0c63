/*
 * Copyright 2026 The TFMN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TFMN_TREE_HPP_
#define TFMN_TREE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string_view>
#include <vector>

#include "tfmn/error.hpp"
#include "tfmn/matrix.hpp"
#include "tfmn/rng.hpp"

namespace tfmn {

// Split quality for regression trees. Both rank candidate splits by the
// reduction of weighted squared error:
//   squared_error: SSE(parent) - SSE(left) - SSE(right)
//                = sL^2/wL + sR^2/wR - S^2/W
//   friedman_mse:  wL wR / (wL + wR) * (mean_L - mean_R)^2
// The two are algebraically equal for a single split; they are evaluated
// through their own formulas and differ only by rounding.
enum class Criterion { kSquaredError, kFriedmanMse };

enum class MaxFeatures { kAll, kSqrt, kLog2 };

inline std::string_view to_string(Criterion c) {
  return c == Criterion::kSquaredError ? "squared_error" : "friedman_mse";
}

inline std::string_view to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::kAll: return "none";
    case MaxFeatures::kSqrt: return "sqrt";
    case MaxFeatures::kLog2: return "log2";
  }
  return "none";
}

inline std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features) {
  std::size_t k = n_features;
  if (m == MaxFeatures::kSqrt) k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features)));
  if (m == MaxFeatures::kLog2) k = static_cast<std::size_t>(std::log2(static_cast<double>(n_features)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_features, 1));
}

struct TreeParams {
  int max_depth = -1;       // -1: unlimited
  MaxFeatures max_features = MaxFeatures::kAll;
  int max_leaf_nodes = -1;  // -1: unlimited; otherwise grown best-first
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  Criterion criterion = Criterion::kSquaredError;
};

struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0;    // rows with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  double value = 0;        // weighted mean of the training targets here
  double cover = 0;        // training weight reaching this node
  int depth = 0;

  bool is_leaf() const { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class RegressionTree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int leaf_index(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return i;
  }

  double predict(std::span<const double> x) const {
    return nodes[static_cast<std::size_t>(leaf_index(x))].value;
  }

  int depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
  }

  std::size_t num_leaves() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  // Cover-weighted mean of leaf values: the tree's output with no feature known.
  double expected_value() const {
    double total = 0;
    for (const auto& n : nodes) {
      if (n.is_leaf()) total += n.value * n.cover;
    }
    return total / nodes.front().cover;
  }

  bool uses_feature(int f) const {
    return std::any_of(nodes.begin(), nodes.end(), [f](const TreeNode& n) { return n.feature == f; });
  }

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

// Row indices of a design matrix sorted by each column (ties by row index).
// Shared by every tree grown on the same matrix.
struct SortedColumns {
  std::vector<std::vector<std::uint32_t>> order;
  std::vector<std::vector<double>> columns;  // column-major copy of x

  explicit SortedColumns(const Matrix& x) : order(x.cols()), columns(x.cols()) {
    for (std::size_t f = 0; f < x.cols(); ++f) {
      columns[f] = x.column(f);
      auto& o = order[f];
      o.resize(x.rows());
      std::iota(o.begin(), o.end(), 0u);
      std::stable_sort(o.begin(), o.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
  }
};

namespace detail {

struct Split {
  int feature = -1;
  double threshold = 0;
  double gain = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, std::span<const double> w,
              const TreeParams& params, std::uint64_t seed, const SortedColumns& sorted)
      : cols_(sorted.columns), y_(y), w_(w), params_(params), rng_(seed), wy_(x.rows()),
        goes_left_(x.rows(), 0) {
    const std::size_t nf = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) wy_[r] = w[r] * y[r];
    max_features_ = resolve_max_features(params.max_features, nf);
    buf_.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      buf_[f].reserve(x.rows());
      for (std::uint32_t r : sorted.order[f]) {
        if (w[r] > 0) buf_[f].push_back(r);
      }
    }
    active_ = buf_[0].size();
    scratch_.resize(x.rows());
    feature_order_.resize(nf);
    std::iota(feature_order_.begin(), feature_order_.end(), 0u);
  }

  RegressionTree build() {
    if (active_ == 0) throw Error(ErrorKind::kInvalidArgument, "no rows with positive weight");
    struct Open {
      int node;
      std::size_t begin;
      std::size_t end;
      Split split;
    };
    RegressionTree tree;
    tree.nodes.push_back(make_node(0, active_, 0));
    std::vector<Open> stack;
    const auto comp = [](const Open& a, const Open& b) {
      if (a.split.gain != b.split.gain) return a.split.gain < b.split.gain;
      return a.node > b.node;
    };
    std::priority_queue<Open, std::vector<Open>, decltype(comp)> best_first(comp);
    const bool leaf_limited = params_.max_leaf_nodes > 0;

    const auto push = [&](int node, std::size_t b, std::size_t e) {
      if (auto s = find_split(b, e, tree.nodes[static_cast<std::size_t>(node)].depth)) {
        if (leaf_limited) {
          best_first.push({node, b, e, *s});
        } else {
          stack.push_back({node, b, e, *s});
        }
      }
    };
    push(0, 0, active_);
    std::size_t leaves = 1;
    while (leaf_limited ? !best_first.empty() : !stack.empty()) {
      if (leaf_limited && leaves >= static_cast<std::size_t>(params_.max_leaf_nodes)) break;
      Open open;
      if (leaf_limited) {
        open = best_first.top();
        best_first.pop();
      } else {
        open = stack.back();
        stack.pop_back();
      }
      const std::size_t mid = partition(open.begin, open.end, open.split);
      const int depth = tree.nodes[static_cast<std::size_t>(open.node)].depth + 1;
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(make_node(open.begin, mid, depth));
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(make_node(mid, open.end, depth));
      auto& parent = tree.nodes[static_cast<std::size_t>(open.node)];
      parent.feature = open.split.feature;
      parent.threshold = open.split.threshold;
      parent.left = left;
      parent.right = right;
      ++leaves;
      // Right first so the depth-first stack expands the left child next.
      if (leaf_limited) {
        push(left, open.begin, mid);
        push(right, mid, open.end);
      } else {
        push(right, mid, open.end);
        push(left, open.begin, mid);
      }
    }
    return tree;
  }

 private:
  TreeNode make_node(std::size_t b, std::size_t e, int depth) {
    TreeNode n;
    n.depth = depth;
    double wsum = 0;
    double ysum = 0;
    for (std::size_t i = b; i < e; ++i) {
      const std::uint32_t r = buf_[0][i];
      wsum += w_[r];
      ysum += w_[r] * y_[r];
    }
    n.cover = wsum;
    n.value = ysum / wsum;
    return n;
  }

  std::optional<Split> find_split(std::size_t b, std::size_t e, int depth) {
    const std::size_t count = e - b;
    if (params_.max_depth >= 0 && depth >= params_.max_depth) return std::nullopt;
    if (count < static_cast<std::size_t>(std::max(params_.min_samples_split, 2))) return std::nullopt;
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(params_.min_samples_leaf, 1));
    if (count < 2 * min_leaf) return std::nullopt;

    double wsum = 0;
    double ysum = 0;
    double y2sum = 0;
    for (std::size_t i = b; i < e; ++i) {
      const std::uint32_t r = buf_[0][i];
      wsum += w_[r];
      ysum += w_[r] * y_[r];
      y2sum += w_[r] * y_[r] * y_[r];
    }
    const double sse = y2sum - ysum * ysum / wsum;
    if (!(sse > 1e-12 * y2sum) || sse <= 0) return std::nullopt;
    const double min_gain = 1e-12 * sse;
    const double parent_term = ysum * ysum / wsum;

    const std::size_t nf = buf_.size();
    if (max_features_ < nf) {
      // Fresh random visiting order; stop after max_features non-constant
      // columns have been examined.
      for (std::size_t i = nf; i > 1; --i) std::swap(feature_order_[i - 1], feature_order_[rng_.uniform_index(i)]);
    }
    std::optional<Split> best;
    std::size_t visited = 0;
    for (std::size_t k = 0; k < nf && visited < max_features_; ++k) {
      const std::size_t f = max_features_ < nf ? feature_order_[k] : k;
      const auto& arr = buf_[f];
      const double* col = cols_[f].data();
      if (col[arr[b]] == col[arr[e - 1]]) continue;  // constant in this node
      ++visited;
      double wl = 0;
      double sl = 0;
      for (std::size_t i = b; i + 1 < e; ++i) {
        const std::uint32_t r = arr[i];
        wl += w_[r];
        sl += wy_[r];
        const double x0 = col[r];
        const double x1 = col[arr[i + 1]];
        if (x0 == x1) continue;
        const std::size_t nl = i + 1 - b;
        if (nl < min_leaf || count - nl < min_leaf) continue;
        const double wr = wsum - wl;
        const double sr = ysum - sl;
        double gain;
        if (params_.criterion == Criterion::kSquaredError) {
          gain = sl * sl / wl + sr * sr / wr - parent_term;
        } else {
          const double diff = sl / wl - sr / wr;
          gain = wl * wr / wsum * diff * diff;
        }
        if (!(gain > min_gain)) continue;
        double threshold = 0.5 * (x0 + x1);
        if (!(threshold < x1)) threshold = x0;
        if (!best || better(gain, static_cast<int>(f), threshold, *best)) {
          best = Split{static_cast<int>(f), threshold, gain};
        }
      }
    }
    return best;
  }

  // Higher gain wins; within rounding, the lower feature index and then the
  // lower threshold win.
  static bool better(double gain, int feature, double threshold, const Split& cur) {
    const double tol = 1e-12 * std::max(std::abs(cur.gain), 1e-300);
    if (gain > cur.gain + tol) return true;
    if (gain < cur.gain - tol) return false;
    if (feature != cur.feature) return feature < cur.feature;
    return threshold < cur.threshold;
  }

  std::size_t partition(std::size_t b, std::size_t e, const Split& s) {
    const auto f = static_cast<std::size_t>(s.feature);
    std::size_t n_left = 0;
    for (std::size_t i = b; i < e; ++i) {
      const std::uint32_t r = buf_[f][i];
      goes_left_[r] = cols_[f][r] <= s.threshold ? 1 : 0;
      n_left += goes_left_[r];
    }
    for (auto& arr : buf_) {
      std::size_t li = b;
      std::size_t ri = 0;
      for (std::size_t i = b; i < e; ++i) {
        const std::uint32_t r = arr[i];
        if (goes_left_[r]) {
          arr[li++] = r;
        } else {
          scratch_[ri++] = r;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(ri),
                arr.begin() + static_cast<std::ptrdiff_t>(li));
    }
    return b + n_left;
  }

  const std::vector<std::vector<double>>& cols_;
  std::span<const double> y_;
  std::span<const double> w_;
  TreeParams params_;
  Rng rng_;
  std::vector<double> wy_;
  std::size_t max_features_ = 0;
  std::size_t active_ = 0;
  std::vector<std::vector<std::uint32_t>> buf_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::uint32_t> feature_order_;
  std::vector<char> goes_left_;
};

}  // namespace detail

// Greedy CART regression tree on weighted rows (weight 0 = row absent,
// integer weights = bootstrap multiplicities). Constant targets give a
// single leaf. Deterministic for a given seed.
inline RegressionTree fit_tree(const Matrix& x, std::span<const double> y,
                               std::span<const double> weights, const TreeParams& params,
                               std::uint64_t seed, const SortedColumns* presorted = nullptr) {
  if (x.rows() != y.size() || y.size() != weights.size()) {
    throw Error(ErrorKind::kInvalidArgument, "X, y and weights disagree on row count");
  }
  if (x.rows() < 1 || x.cols() < 1) {
    throw Error(ErrorKind::kInvalidArgument, "need at least one row and one column");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || weights[i] < 0) {
      throw Error(ErrorKind::kInvalidArgument, "targets must be finite and weights >= 0");
    }
  }
  if (presorted) {
    return detail::TreeBuilder(x, y, weights, params, seed, *presorted).build();
  }
  const SortedColumns sorted(x);
  return detail::TreeBuilder(x, y, weights, params, seed, sorted).build();
}

inline RegressionTree fit_tree(const Matrix& x, std::span<const double> y, const TreeParams& params,
                               std::uint64_t seed = 0) {
  const std::vector<double> w(y.size(), 1.0);
  return fit_tree(x, y, w, params, seed);
}

}  // namespace tfmn

#endif  // TFMN_TREE_HPP_
