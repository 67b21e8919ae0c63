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

#ifndef TFMN_METRICS_HPP_
#define TFMN_METRICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <numeric>
#include <queue>
#include <string_view>
#include <tuple>
#include <vector>

#include "tfmn/csv.hpp"
#include "tfmn/error.hpp"
#include "tfmn/graph.hpp"
#include "tfmn/rng.hpp"
#include "tfmn/text.hpp"

namespace tfmn::metrics {

namespace detail {

inline void require_nodes(const Graph& g) {
  if (g.num_nodes() == 0) throw Error(ErrorKind::kEmptyGraph, "graph has no nodes");
}

}  // namespace detail

// BFS hop counts from `source`; -1 marks unreachable nodes.
inline std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(g.num_nodes(), -1);
  std::queue<int> frontier;
  dist[static_cast<std::size_t>(source)] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : g.neighbors(u)) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

// Components in order of their smallest node; nodes sorted within each.
inline std::vector<std::vector<int>> connected_components(const Graph& g) {
  std::vector<std::vector<int>> out;
  std::vector<bool> seen(g.num_nodes(), false);
  for (std::size_t s = 0; s < g.num_nodes(); ++s) {
    if (seen[s]) continue;
    std::vector<int> comp;
    std::vector<int> stack{static_cast<int>(s)};
    seen[s] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (int v : g.neighbors(u)) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = true;
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

struct BasicCounts {
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  std::size_t n_components = 0;
  std::size_t largest_component_size = 0;
  double largest_component_ratio = 0;
  int max_degree = 0;
  double mean_degree = 0;
  double density = 0;  // 2m / (n (n - 1)), zero for n < 2
};

inline BasicCounts basic_counts(const Graph& g) {
  detail::require_nodes(g);
  BasicCounts c;
  c.n_nodes = g.num_nodes();
  c.n_edges = g.num_edges();
  const auto comps = connected_components(g);
  c.n_components = comps.size();
  for (const auto& comp : comps) c.largest_component_size = std::max(c.largest_component_size, comp.size());
  c.largest_component_ratio =
      static_cast<double>(c.largest_component_size) / static_cast<double>(c.n_nodes);
  for (std::size_t u = 0; u < c.n_nodes; ++u) c.max_degree = std::max(c.max_degree, g.degree(static_cast<int>(u)));
  const double n = static_cast<double>(c.n_nodes);
  const double m = static_cast<double>(c.n_edges);
  c.mean_degree = 2.0 * m / n;
  c.density = c.n_nodes < 2 ? 0.0 : 2.0 * m / (n * (n - 1.0));
  return c;
}

// c_i = 2|e_i| / (k_i (k_i - 1)); zero when k_i < 2.
inline std::vector<double> local_clustering(const Graph& g) {
  std::vector<double> out(g.num_nodes(), 0.0);
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    const auto& nb = g.neighbors(static_cast<int>(u));
    const std::size_t k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        if (g.adjacent(nb[a], nb[b])) ++links;
      }
    }
    out[u] = 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  return out;
}

// Average over all nodes, isolates and leaves included as zeros.
inline double mean_clustering(const Graph& g) {
  detail::require_nodes(g);
  const auto c = local_clustering(g);
  return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

struct PathStats {
  double mean_shortest_path = 0;
  int diameter = 0;
};

// Both statistics are taken over unordered pairs of the largest connected
// component. Equal-sized components are ranked by edge count, then by total
// pairwise distance and diameter (smaller first), so the choice does not
// depend on node labels.
inline PathStats shortest_path_stats(const Graph& g) {
  detail::require_nodes(g);
  const auto comps = connected_components(g);
  std::size_t best_size = 0;
  for (const auto& c : comps) best_size = std::max(best_size, c.size());
  if (best_size < 2) {
    throw Error(ErrorKind::kDegenerateGraph, "largest component has fewer than 2 nodes");
  }
  bool have = false;
  std::tuple<std::size_t, std::int64_t, int> best_key{};
  PathStats best;
  for (const auto& comp : comps) {
    if (comp.size() != best_size) continue;
    std::size_t edges = 0;
    std::int64_t dist_sum = 0;
    int diameter = 0;
    for (int u : comp) {
      edges += g.neighbors(u).size();
      const auto dist = bfs_distances(g, u);
      for (int v : comp) {
        if (v <= u) continue;
        dist_sum += dist[static_cast<std::size_t>(v)];
        diameter = std::max(diameter, dist[static_cast<std::size_t>(v)]);
      }
    }
    // Larger edge count wins, then smaller distance sum, then smaller diameter.
    const std::tuple<std::size_t, std::int64_t, int> key{edges, -dist_sum, -diameter};
    if (!have || key > best_key) {
      have = true;
      best_key = key;
      const double pairs = static_cast<double>(comp.size()) * static_cast<double>(comp.size() - 1) / 2.0;
      best.mean_shortest_path = static_cast<double>(dist_sum) / pairs;
      best.diameter = diameter;
    }
  }
  return best;
}

struct CentralityStats {
  double mean = 0;
  double max = 0;
};

inline CentralityStats summarize(const std::vector<double>& values) {
  CentralityStats s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.max = *std::max_element(values.begin(), values.end());
  return s;
}

// C(i) = M / sum_j d_ij over the M nodes reachable from i, scaled by
// M / (n - 1) so that nodes in small components are not inflated.
inline std::vector<double> closeness_values(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t u = 0; u < n; ++u) {
    const auto dist = bfs_distances(g, static_cast<int>(u));
    double reach = 0;
    double total = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u || dist[v] < 0) continue;
      reach += 1;
      total += dist[v];
    }
    if (total > 0) out[u] = (reach / total) * (reach / static_cast<double>(n - 1));
  }
  return out;
}

inline CentralityStats closeness_stats(const Graph& g) {
  detail::require_nodes(g);
  return summarize(closeness_values(g));
}

// Raw betweenness b_i = sum over unordered pairs {j, k} (j, k != i) of the
// fraction of shortest j-k paths through i, accumulated with Brandes' single
// source dependency recursion. `normalized` divides by (n-1)(n-2)/2.
inline std::vector<double> betweenness_values(const Graph& g, bool normalized = false) {
  const std::size_t n = g.num_nodes();
  std::vector<double> bc(n, 0.0);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<int> dist(n);
  std::vector<std::vector<int>> preds(n);
  std::vector<int> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& p : preds) p.clear();
    order.clear();
    sigma[s] = 1;
    dist[s] = 0;
    std::queue<int> frontier;
    frontier.push(static_cast<int>(s));
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      order.push_back(v);
      for (int w : g.neighbors(v)) {
        const auto wi = static_cast<std::size_t>(w);
        const auto vi = static_cast<std::size_t>(v);
        if (dist[wi] < 0) {
          dist[wi] = dist[vi] + 1;
          frontier.push(w);
        }
        if (dist[wi] == dist[vi] + 1) {
          sigma[wi] += sigma[vi];
          preds[wi].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = static_cast<std::size_t>(*it);
      for (int v : preds[w]) {
        const auto vi = static_cast<std::size_t>(v);
        delta[vi] += sigma[vi] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) bc[w] += delta[w];
    }
  }
  // Each unordered pair was counted from both endpoints.
  for (auto& b : bc) b /= 2.0;
  if (normalized && n > 2) {
    const double pairs = static_cast<double>(n - 1) * static_cast<double>(n - 2) / 2.0;
    for (auto& b : bc) b /= pairs;
  }
  return bc;
}

inline CentralityStats betweenness_stats(const Graph& g) {
  detail::require_nodes(g);
  return summarize(betweenness_values(g));
}

// Community label per node. Labels need not be contiguous.
using Partition = std::vector<int>;

// Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(s_i, s_j), evaluated per
// community as sum_c [L_c / m - (D_c / 2m)^2] with L_c intra-community edges
// and D_c the community degree total.
inline double modularity(const Graph& g, const Partition& partition) {
  detail::require_nodes(g);
  if (g.num_edges() == 0) throw Error(ErrorKind::kEmptyGraph, "modularity needs at least one edge");
  if (partition.size() != g.num_nodes()) {
    throw Error(ErrorKind::kInvalidPartition, "partition size does not match node count");
  }
  for (int label : partition) {
    if (label < 0) throw Error(ErrorKind::kInvalidPartition, "negative community label");
  }
  std::map<int, double> internal;
  std::map<int, double> degree_sum;
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    degree_sum[partition[u]] += g.degree(static_cast<int>(u));
    for (int v : g.neighbors(static_cast<int>(u))) {
      if (static_cast<int>(u) < v && partition[u] == partition[static_cast<std::size_t>(v)]) {
        internal[partition[u]] += 1.0;
      }
    }
  }
  const double m = static_cast<double>(g.num_edges());
  double q = 0;
  for (const auto& [label, d] : degree_sum) {
    const double l = internal.count(label) ? internal.at(label) : 0.0;
    q += l / m - (d / (2.0 * m)) * (d / (2.0 * m));
  }
  return q;
}

enum class CommunityMethod { kGreedy, kLouvain };

namespace detail {

// Relabels communities 0..c-1 in order of first appearance.
inline Partition canonical(const Partition& p) {
  std::map<int, int> remap;
  Partition out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(p[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

// Agglomerative modularity maximisation (Clauset-Newman-Moore): starting from
// singletons, repeatedly merge the adjacent pair of communities with the
// largest gain dQ = 2 (e_ij - a_i a_j) while the gain is positive. Ties go to
// the lexicographically smallest (i, j).
inline Partition greedy_communities(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const double two_m = 2.0 * static_cast<double>(g.num_edges());
  std::vector<std::map<int, double>> e(n);
  std::vector<double> a(n);
  std::vector<bool> alive(n, true);
  std::vector<int> owner(n);
  for (std::size_t u = 0; u < n; ++u) {
    owner[u] = static_cast<int>(u);
    a[u] = g.degree(static_cast<int>(u)) / two_m;
    for (int v : g.neighbors(static_cast<int>(u))) e[u][v] += 1.0 / two_m;
  }
  while (true) {
    double best_gain = 0;
    int bi = -1;
    int bj = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (const auto& [j, eij] : e[i]) {
        if (j <= static_cast<int>(i)) continue;
        const double gain = 2.0 * (eij - a[i] * a[static_cast<std::size_t>(j)]);
        if (gain > best_gain + 1e-14) {
          best_gain = gain;
          bi = static_cast<int>(i);
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    const auto i = static_cast<std::size_t>(bi);
    const auto j = static_cast<std::size_t>(bj);
    for (const auto& [l, ejl] : e[j]) {
      const auto li = static_cast<std::size_t>(l);
      e[li].erase(bj);
      if (l == bi) continue;
      e[i][l] += ejl;
      e[li][bi] += ejl;
    }
    e[i].erase(bj);
    e[j].clear();
    a[i] += a[j];
    alive[j] = false;
    for (auto& o : owner) {
      if (o == bj) o = bi;
    }
  }
  return canonical(owner);
}

// Louvain: seeded node order for local moving, then aggregation, repeated
// until a pass moves nothing.
inline Partition louvain_communities(const Graph& g, std::uint64_t seed) {
  const std::size_t n0 = g.num_nodes();
  // Weighted adjacency A_ij of the current level, self loops in A_ii with
  // internal edges counted from both ends.
  std::vector<std::map<int, double>> adj(n0);
  for (std::size_t u = 0; u < n0; ++u) {
    for (int v : g.neighbors(static_cast<int>(u))) adj[u][v] = 1.0;
  }
  std::vector<int> membership(n0);
  std::iota(membership.begin(), membership.end(), 0);
  const double two_m = 2.0 * static_cast<double>(g.num_edges());
  Rng rng(seed);

  for (int level = 0;; ++level) {
    const std::size_t n = adj.size();
    std::vector<double> k(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      for (const auto& [v, w] : adj[u]) k[u] += w;
    }
    std::vector<int> comm(n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> tot = k;
    std::vector<std::size_t> order = identity_permutation(n);
    rng.shuffle(order);
    bool any_move = false;
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t u : order) {
        const int own = comm[u];
        tot[static_cast<std::size_t>(own)] -= k[u];
        std::map<int, double> links;
        for (const auto& [v, w] : adj[u]) {
          if (static_cast<std::size_t>(v) != u) links[comm[static_cast<std::size_t>(v)]] += w;
        }
        const auto gain_of = [&](int c) {
          const double kin = links.count(c) ? links.at(c) : 0.0;
          return kin - tot[static_cast<std::size_t>(c)] * k[u] / two_m;
        };
        int best = own;
        double best_gain = gain_of(own);
        for (const auto& [c, kin] : links) {
          const double gain = gain_of(c);
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best = c;
          }
        }
        tot[static_cast<std::size_t>(best)] += k[u];
        if (best != own) {
          comm[u] = best;
          improved = true;
          any_move = true;
        }
      }
    }
    if (!any_move) break;
    const Partition renum = canonical(comm);
    const std::size_t nc =
        static_cast<std::size_t>(*std::max_element(renum.begin(), renum.end()) + 1);
    for (auto& m : membership) m = renum[static_cast<std::size_t>(m)];
    std::vector<std::map<int, double>> next(nc);
    for (std::size_t u = 0; u < n; ++u) {
      for (const auto& [v, w] : adj[u]) {
        next[static_cast<std::size_t>(renum[u])][renum[static_cast<std::size_t>(v)]] += w;
      }
    }
    adj = std::move(next);
    if (nc == n) break;
  }
  return canonical(membership);
}

}  // namespace detail

// Partition found by the chosen heuristic; falls back to the single
// community (Q = 0) when the search ends below it.
inline Partition detect_communities(const Graph& g,
                                    CommunityMethod method = CommunityMethod::kGreedy,
                                    std::uint64_t seed = 0) {
  detail::require_nodes(g);
  if (g.num_edges() == 0) throw Error(ErrorKind::kEmptyGraph, "community detection needs edges");
  Partition p = method == CommunityMethod::kGreedy ? detail::greedy_communities(g)
                                                   : detail::louvain_communities(g, seed);
  if (modularity(g, p) < 0.0) return Partition(g.num_nodes(), 0);
  return p;
}

// Mean of 1/d_ij over ordered pairs of distinct nodes, 1/inf = 0.
inline double global_efficiency(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n < 2) return 0.0;
  double total = 0;
  for (std::size_t u = 0; u < n; ++u) {
    const auto dist = bfs_distances(g, static_cast<int>(u));
    for (std::size_t v = 0; v < n; ++v) {
      if (v != u && dist[v] > 0) total += 1.0 / dist[v];
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

struct Efficiencies {
  double global = 0;
  double local = 0;  // mean over all nodes of E_glob(neighbour subgraph)
};

inline Efficiencies efficiencies(const Graph& g) {
  detail::require_nodes(g);
  Efficiencies e;
  e.global = global_efficiency(g);
  double local = 0;
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    const auto& nb = g.neighbors(static_cast<int>(u));
    if (nb.size() < 2) continue;
    local += global_efficiency(induced_subgraph(g, nb));
  }
  e.local = local / static_cast<double>(g.num_nodes());
  return e;
}

// Core number of every node by min-degree peeling (Batagelj-Zaversnik).
inline std::vector<int> core_numbers(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<int> deg(n);
  int max_deg = 0;
  for (std::size_t u = 0; u < n; ++u) {
    deg[u] = g.degree(static_cast<int>(u));
    max_deg = std::max(max_deg, deg[u]);
  }
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(max_deg) + 1);
  for (std::size_t u = 0; u < n; ++u) buckets[static_cast<std::size_t>(deg[u])].push_back(static_cast<int>(u));
  std::vector<bool> removed(n, false);
  std::vector<int> core(n, 0);
  int current = 0;
  for (std::size_t processed = 0; processed < n;) {
    std::size_t d = 0;
    while (d < buckets.size() && buckets[d].empty()) ++d;
    const int u = buckets[d].back();
    buckets[d].pop_back();
    const auto ui = static_cast<std::size_t>(u);
    if (removed[ui] || deg[ui] != static_cast<int>(d)) continue;  // stale entry
    removed[ui] = true;
    ++processed;
    current = std::max(current, static_cast<int>(d));
    core[ui] = current;
    for (int v : g.neighbors(u)) {
      const auto vi = static_cast<std::size_t>(v);
      if (removed[vi] || deg[vi] == 0) continue;
      --deg[vi];
      buckets[static_cast<std::size_t>(deg[vi])].push_back(v);
    }
  }
  return core;
}

struct CoreStats {
  int core_number = 0;        // degeneracy: largest k with a non-empty k-core
  std::size_t core_size = 0;  // nodes in that k-core
};

inline CoreStats core_decomposition(const Graph& g) {
  detail::require_nodes(g);
  const auto core = core_numbers(g);
  CoreStats s;
  s.core_number = *std::max_element(core.begin(), core.end());
  s.core_size = static_cast<std::size_t>(std::count(core.begin(), core.end(), s.core_number));
  return s;
}

struct Assortativity {
  double value = 0;
  bool degenerate = false;  // undefined (zero degree variance); value = 0
};

// Pearson correlation of the degrees at either end of every edge, each edge
// entering in both orientations.
inline Assortativity assortativity(const Graph& g) {
  detail::require_nodes(g);
  const auto edges = g.edges();
  Assortativity a;
  if (edges.empty()) {
    a.degenerate = true;
    return a;
  }
  double mean = 0;
  for (auto [u, v] : edges) mean += g.degree(u) + g.degree(v);
  mean /= 2.0 * static_cast<double>(edges.size());
  double cov = 0;
  double var = 0;
  for (auto [u, v] : edges) {
    const double du = g.degree(u) - mean;
    const double dv = g.degree(v) - mean;
    cov += 2.0 * du * dv;
    var += du * du + dv * dv;
  }
  if (var <= 1e-12 * static_cast<double>(edges.size())) {
    a.degenerate = true;
    return a;
  }
  a.value = cov / var;
  return a;
}

namespace detail {

// Bron-Kerbosch with Tomita pivoting.
inline void bron_kerbosch(const Graph& g, std::vector<int>& r, std::vector<int> p,
                          std::vector<int> x, std::size_t& best) {
  if (p.empty() && x.empty()) {
    best = std::max(best, r.size());
    return;
  }
  if (r.size() + p.size() <= best) return;
  int pivot = -1;
  std::size_t pivot_links = 0;
  for (const auto* set : {&p, &x}) {
    for (int u : *set) {
      std::size_t links = 0;
      for (int v : p) links += g.adjacent(u, v) ? 1 : 0;
      if (pivot < 0 || links > pivot_links) {
        pivot = u;
        pivot_links = links;
      }
    }
  }
  std::vector<int> candidates;
  for (int v : p) {
    if (!g.adjacent(pivot, v)) candidates.push_back(v);
  }
  for (int v : candidates) {
    std::vector<int> np;
    std::vector<int> nx;
    for (int w : p) {
      if (g.adjacent(v, w)) np.push_back(w);
    }
    for (int w : x) {
      if (g.adjacent(v, w)) nx.push_back(w);
    }
    r.push_back(v);
    bron_kerbosch(g, r, std::move(np), std::move(nx), best);
    r.pop_back();
    p.erase(std::find(p.begin(), p.end(), v));
    x.push_back(v);
  }
}

}  // namespace detail

inline std::size_t max_clique(const Graph& g) {
  detail::require_nodes(g);
  std::vector<int> r;
  std::vector<int> p(g.num_nodes());
  std::iota(p.begin(), p.end(), 0);
  std::size_t best = 1;
  detail::bron_kerbosch(g, r, std::move(p), {}, best);
  return best;
}

inline constexpr std::size_t kNumMetrics = 22;

// Column names of exported metric tables, paired with the display labels
// used in correlation tables.
inline constexpr std::array<std::string_view, kNumMetrics> kMetricColumns = {
    "n_nodes",          "n_edges",          "n_components",         "largest_component_size",
    "largest_component_ratio", "max_degree", "mean_degree",          "density",
    "mean_clustering",  "mean_shortest_path", "diameter",           "mean_closeness",
    "max_closeness",    "mean_betweenness", "max_betweenness",      "degree_assortativity",
    "modularity",       "global_efficiency", "local_efficiency",    "core_number",
    "core_size",        "max_clique_size"};

inline constexpr std::array<std::string_view, kNumMetrics> kMetricLabels = {
    "| Nodes |",        "| Edges |",        "| Components |",       "| Largest Component |",
    "Largest Comp. Ratio", "Max Degree",    "Mean Degree",          "Density",
    "Mean Clustering",  "Mean Shortest Path", "Diameter",           "Mean Closeness",
    "Max Closeness",    "Mean Betweenness", "Max Betweenness",      "Mean Deg. Assort.",
    "Modularity",       "Global Efficiency", "Local Efficiency",    "Core",
    "| Core |",         "Max Clique"};

struct MetricVector {
  double n_nodes = 0;
  double n_edges = 0;
  double n_components = 0;
  double largest_component_size = 0;
  double largest_component_ratio = 0;
  double max_degree = 0;
  double mean_degree = 0;
  double density = 0;
  double mean_clustering = 0;
  double mean_shortest_path = 0;
  double diameter = 0;
  double mean_closeness = 0;
  double max_closeness = 0;
  double mean_betweenness = 0;
  double max_betweenness = 0;
  double degree_assortativity = 0;
  double modularity = 0;
  double global_efficiency = 0;
  double local_efficiency = 0;
  double core_number = 0;
  double core_size = 0;
  double max_clique_size = 0;

  bool assortativity_degenerate = false;
  bool path_stats_degenerate = false;

  // Values in kMetricColumns order.
  std::array<double, kNumMetrics> values() const {
    return {n_nodes,          n_edges,          n_components,     largest_component_size,
            largest_component_ratio, max_degree, mean_degree,     density,
            mean_clustering,  mean_shortest_path, diameter,       mean_closeness,
            max_closeness,    mean_betweenness, max_betweenness,  degree_assortativity,
            modularity,       global_efficiency, local_efficiency, core_number,
            core_size,        max_clique_size};
  }

  static MetricVector from_values(const std::array<double, kNumMetrics>& v) {
    MetricVector m;
    m.n_nodes = v[0];
    m.n_edges = v[1];
    m.n_components = v[2];
    m.largest_component_size = v[3];
    m.largest_component_ratio = v[4];
    m.max_degree = v[5];
    m.mean_degree = v[6];
    m.density = v[7];
    m.mean_clustering = v[8];
    m.mean_shortest_path = v[9];
    m.diameter = v[10];
    m.mean_closeness = v[11];
    m.max_closeness = v[12];
    m.mean_betweenness = v[13];
    m.max_betweenness = v[14];
    m.degree_assortativity = v[15];
    m.modularity = v[16];
    m.global_efficiency = v[17];
    m.local_efficiency = v[18];
    m.core_number = v[19];
    m.core_size = v[20];
    m.max_clique_size = v[21];
    return m;
  }
};

struct MetricOptions {
  CommunityMethod community = CommunityMethod::kGreedy;
  std::uint64_t community_seed = 0;
};

// Every structural feature of one network. Quantities that are undefined on
// the given graph (no edges, single-node largest component, regular degree
// sequence) are reported as 0 with the matching flag set.
inline MetricVector compute_metrics(const Graph& g, const MetricOptions& options = {}) {
  detail::require_nodes(g);
  MetricVector m;
  const auto counts = basic_counts(g);
  m.n_nodes = static_cast<double>(counts.n_nodes);
  m.n_edges = static_cast<double>(counts.n_edges);
  m.n_components = static_cast<double>(counts.n_components);
  m.largest_component_size = static_cast<double>(counts.largest_component_size);
  m.largest_component_ratio = counts.largest_component_ratio;
  m.max_degree = counts.max_degree;
  m.mean_degree = counts.mean_degree;
  m.density = counts.density;
  m.mean_clustering = mean_clustering(g);
  if (counts.largest_component_size >= 2) {
    const auto paths = shortest_path_stats(g);
    m.mean_shortest_path = paths.mean_shortest_path;
    m.diameter = paths.diameter;
  } else {
    m.path_stats_degenerate = true;
  }
  const auto closeness = closeness_stats(g);
  m.mean_closeness = closeness.mean;
  m.max_closeness = closeness.max;
  const auto betweenness = betweenness_stats(g);
  m.mean_betweenness = betweenness.mean;
  m.max_betweenness = betweenness.max;
  const auto assort = assortativity(g);
  m.degree_assortativity = assort.value;
  m.assortativity_degenerate = assort.degenerate;
  if (g.num_edges() > 0) {
    m.modularity = modularity(g, detect_communities(g, options.community, options.community_seed));
  }
  const auto eff = efficiencies(g);
  m.global_efficiency = eff.global;
  m.local_efficiency = eff.local;
  const auto core = core_decomposition(g);
  m.core_number = core.core_number;
  m.core_size = static_cast<double>(core.core_size);
  m.max_clique_size = static_cast<double>(max_clique(g));
  return m;
}

// transcript_id, the metric columns, then the two degeneracy flags (0/1).
inline std::string format_metrics_csv(const std::map<std::string, MetricVector>& rows) {
  csv::Table out;
  out.header.push_back("transcript_id");
  for (auto c : kMetricColumns) out.header.emplace_back(c);
  out.header.push_back("assortativity_degenerate");
  out.header.push_back("path_stats_degenerate");
  for (const auto& [id, m] : rows) {
    std::vector<std::string> row{id};
    for (double v : m.values()) row.push_back(text::format_double(v));
    row.push_back(m.assortativity_degenerate ? "1" : "0");
    row.push_back(m.path_stats_degenerate ? "1" : "0");
    out.rows.push_back(std::move(row));
  }
  return csv::format(out);
}

inline std::map<std::string, MetricVector> parse_metrics_csv(std::string_view content,
                                                             const std::string& source = "<metrics>") {
  const auto table = csv::parse(content, source);
  const auto id = table.column_index("transcript_id");
  if (!id) throw Error(ErrorKind::kSchemaMismatch, source + ": missing transcript_id column");
  std::array<std::size_t, kNumMetrics> cols{};
  for (std::size_t i = 0; i < kNumMetrics; ++i) {
    const auto c = table.column_index(kMetricColumns[i]);
    if (!c) {
      throw Error(ErrorKind::kSchemaMismatch,
                  source + ": missing column " + std::string(kMetricColumns[i]));
    }
    cols[i] = *c;
  }
  const auto assort = table.column_index("assortativity_degenerate");
  const auto paths = table.column_index("path_stats_degenerate");
  std::map<std::string, MetricVector> out;
  for (const auto& row : table.rows) {
    std::array<double, kNumMetrics> v{};
    for (std::size_t i = 0; i < kNumMetrics; ++i) {
      const auto x = text::parse_double(row[cols[i]]);
      if (!x) {
        throw Error(ErrorKind::kSchemaMismatch, source + ": bad value in column " +
                                                    std::string(kMetricColumns[i]) + " for " +
                                                    row[*id]);
      }
      v[i] = *x;
    }
    MetricVector m = MetricVector::from_values(v);
    if (assort) m.assortativity_degenerate = row[*assort] == "1";
    if (paths) m.path_stats_degenerate = row[*paths] == "1";
    out[row[*id]] = m;
  }
  return out;
}

}  // namespace tfmn::metrics

#endif  // TFMN_METRICS_HPP_
