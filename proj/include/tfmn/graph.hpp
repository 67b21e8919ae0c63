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

#ifndef TFMN_GRAPH_HPP_
#define TFMN_GRAPH_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tfmn/error.hpp"

namespace tfmn {

// Undirected simple graph over nodes 0..n-1 with sorted adjacency lists.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : adj_(n) {}

  std::size_t num_nodes() const { return adj_.size(); }
  std::size_t num_edges() const { return num_edges_; }

  // Returns false (and changes nothing) for self-loops and duplicates.
  bool add_edge(int u, int v) {
    if (u == v) return false;
    check(u);
    check(v);
    auto& nu = adj_[static_cast<std::size_t>(u)];
    auto pos = std::lower_bound(nu.begin(), nu.end(), v);
    if (pos != nu.end() && *pos == v) return false;
    nu.insert(pos, v);
    auto& nv = adj_[static_cast<std::size_t>(v)];
    nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
    ++num_edges_;
    return true;
  }

  bool adjacent(int u, int v) const {
    const auto& nu = adj_[static_cast<std::size_t>(u)];
    return std::binary_search(nu.begin(), nu.end(), v);
  }

  const std::vector<int>& neighbors(int u) const { return adj_[static_cast<std::size_t>(u)]; }
  int degree(int u) const { return static_cast<int>(adj_[static_cast<std::size_t>(u)].size()); }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(num_edges_);
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      for (int v : adj_[u]) {
        if (static_cast<int>(u) < v) out.emplace_back(static_cast<int>(u), v);
      }
    }
    return out;
  }

 private:
  void check(int u) const {
    if (u < 0 || static_cast<std::size_t>(u) >= adj_.size()) {
      throw Error(ErrorKind::kInvalidArgument, "node index out of range");
    }
  }

  std::vector<std::vector<int>> adj_;
  std::size_t num_edges_ = 0;
};

// Subgraph induced on `nodes`; node i of the result is nodes[i].
inline Graph induced_subgraph(const Graph& g, std::span<const int> nodes) {
  Graph out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (g.adjacent(nodes[i], nodes[j])) out.add_edge(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return out;
}

// Node u of `g` becomes node perm[u] of the result.
inline Graph relabel(const Graph& g, std::span<const std::size_t> perm) {
  Graph out(g.num_nodes());
  for (auto [u, v] : g.edges()) {
    out.add_edge(static_cast<int>(perm[static_cast<std::size_t>(u)]),
                 static_cast<int>(perm[static_cast<std::size_t>(v)]));
  }
  return out;
}

}  // namespace tfmn

#endif  // TFMN_GRAPH_HPP_
