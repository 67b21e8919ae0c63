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

#ifndef TFMN_NETWORK_HPP_
#define TFMN_NETWORK_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tfmn/conllu.hpp"
#include "tfmn/error.hpp"
#include "tfmn/graph.hpp"
#include "tfmn/lexicon.hpp"
#include "tfmn/text.hpp"

namespace tfmn {

inline constexpr int kDefaultSyntacticDistance = 4;

enum class EdgeKind { kSyntactic, kSynonym };

struct EdgeKinds {
  bool syntactic = false;
  bool synonym = false;

  std::string to_string() const {
    if (syntactic && synonym) return "syntactic,synonym";
    return syntactic ? "syntactic" : "synonym";
  }

  friend bool operator==(const EdgeKinds&, const EdgeKinds&) = default;
};

struct NodeTag {
  Valence valence = Valence::kNeutral;
  EmotionSet emotions;

  friend bool operator==(const NodeTag&, const NodeTag&) = default;
};

using LemmaPair = std::pair<std::string, std::string>;

inline LemmaPair ordered_pair(const std::string& a, const std::string& b) {
  return a < b ? LemmaPair{a, b} : LemmaPair{b, a};
}

// Textual forma mentis network: lemma nodes joined by syntactic and/or
// synonym edges. One edge per unordered pair; a pair related both ways keeps
// both kinds on the same edge.
struct Tfmn {
  int k = kDefaultSyntacticDistance;
  std::set<std::string> nodes;
  std::map<LemmaPair, EdgeKinds> edges;
  std::map<std::string, NodeTag> tags;

  // Returns true when the pair was not yet an edge of any kind.
  bool add_edge(const std::string& a, const std::string& b, EdgeKind kind) {
    if (a == b) return false;
    nodes.insert(a);
    nodes.insert(b);
    auto [it, inserted] = edges.try_emplace(ordered_pair(a, b));
    (kind == EdgeKind::kSyntactic ? it->second.syntactic : it->second.synonym) = true;
    return inserted;
  }

  const EdgeKinds* edge(const std::string& a, const std::string& b) const {
    auto it = edges.find(ordered_pair(a, b));
    return it == edges.end() ? nullptr : &it->second;
  }

  std::size_t num_edges() const { return edges.size(); }

  std::vector<std::string> node_list() const { return {nodes.begin(), nodes.end()}; }

  // Node i of the graph is the i-th lemma in sorted order.
  Graph to_graph(bool include_synonym_edges = true) const {
    const auto names = node_list();
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
    Graph g(names.size());
    for (const auto& [pair, kinds] : edges) {
      if (!kinds.syntactic && !include_synonym_edges) continue;
      g.add_edge(index.at(pair.first), index.at(pair.second));
    }
    return g;
  }

  friend bool operator==(const Tfmn&, const Tfmn&) = default;
};

// Tokens that can become network nodes. Punctuation and stopwords stay in the
// tree so distances are measured over the full parse.
inline bool is_network_token(const Token& t) {
  return !t.is_stopword && t.is_alpha && t.upos != "PUNCT";
}

// Links every pair of eligible tokens whose dependency-tree distance is at
// most k. Throws kEmptyNetwork when no pair qualifies.
inline Tfmn build_syntactic(const Transcript& t, int k = kDefaultSyntacticDistance) {
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "k must be >= 1");
  Tfmn g;
  g.k = k;
  for (const auto& s : t.sentences) {
    std::vector<int> eligible;
    for (const auto& tok : s.tokens) {
      if (is_network_token(tok)) eligible.push_back(tok.id);
    }
    for (std::size_t a = 0; a < eligible.size(); ++a) {
      const auto dist = tree_distances_from(s, eligible[a]);
      const auto& la = s.tokens[static_cast<std::size_t>(eligible[a] - 1)].lemma;
      for (std::size_t b = a + 1; b < eligible.size(); ++b) {
        if (dist[static_cast<std::size_t>(eligible[b])] > k) continue;
        const auto& lb = s.tokens[static_cast<std::size_t>(eligible[b] - 1)].lemma;
        g.add_edge(la, lb, EdgeKind::kSyntactic);
      }
    }
  }
  if (g.edges.empty()) {
    throw Error(ErrorKind::kEmptyNetwork,
                "transcript " + t.transcript_id + " has no eligible token pairs");
  }
  return g;
}

struct DistanceCdf {
  std::map<int, std::size_t> counts;  // distance -> number of token pairs
  std::size_t total_pairs = 0;

  // Fraction of eligible same-sentence token pairs at distance <= k.
  double at(int k) const {
    if (total_pairs == 0) return 0.0;
    std::size_t acc = 0;
    for (const auto& [d, c] : counts) {
      if (d > k) break;
      acc += c;
    }
    return static_cast<double>(acc) / static_cast<double>(total_pairs);
  }

  int max_distance() const { return counts.empty() ? 0 : counts.rbegin()->first; }

  // k -> cdf for k = 1..max_distance.
  std::map<int, double> table() const {
    std::map<int, double> out;
    for (int k = 1; k <= max_distance(); ++k) out[k] = at(k);
    return out;
  }
};

// Distribution of tree distances between eligible token pairs that share a
// sentence. Used to choose k for a corpus.
inline DistanceCdf distance_cdf(const std::vector<Transcript>& corpus) {
  if (corpus.empty()) throw Error(ErrorKind::kInvalidArgument, "corpus is empty");
  DistanceCdf cdf;
  for (const auto& t : corpus) {
    for (const auto& s : t.sentences) {
      std::vector<int> eligible;
      for (const auto& tok : s.tokens) {
        if (is_network_token(tok)) eligible.push_back(tok.id);
      }
      for (std::size_t a = 0; a < eligible.size(); ++a) {
        const auto dist = tree_distances_from(s, eligible[a]);
        for (std::size_t b = a + 1; b < eligible.size(); ++b) {
          ++cdf.counts[dist[static_cast<std::size_t>(eligible[b])]];
          ++cdf.total_pairs;
        }
      }
    }
  }
  return cdf;
}

enum class SynonymScope {
  kPresent,   // any two nodes of the network
  kAdjacent,  // only pairs that already share a syntactic edge
};

inline Tfmn enrich_synonyms(Tfmn g, const SynonymLexicon& syn,
                            SynonymScope scope = SynonymScope::kPresent) {
  if (scope == SynonymScope::kAdjacent) {
    for (auto& [pair, kinds] : g.edges) {
      if (syn.are_synonyms(pair.first, pair.second)) kinds.synonym = true;
    }
    return g;
  }
  std::map<std::string, std::vector<std::string>> members;
  for (const auto& node : g.nodes) {
    for (const auto& id : syn.synsets(node)) members[id].push_back(node);
  }
  for (const auto& [id, words] : members) {
    for (std::size_t a = 0; a < words.size(); ++a) {
      for (std::size_t b = a + 1; b < words.size(); ++b) {
        g.add_edge(words[a], words[b], EdgeKind::kSynonym);
      }
    }
  }
  return g;
}

inline Tfmn tag_nodes(Tfmn g, const EmotionLexicon& emo, const ValenceLexicon& val) {
  g.tags.clear();
  for (const auto& node : g.nodes) g.tags[node] = NodeTag{val.lookup(node), emo.lookup(node)};
  return g;
}

// Three-column edge list: u, v, comma-joined kinds.
inline std::string format_edge_list(const Tfmn& g) {
  std::string out;
  for (const auto& [pair, kinds] : g.edges) {
    out += pair.first + '\t' + pair.second + '\t' + kinds.to_string() + '\n';
  }
  return out;
}

// Node tag sidecar: lemma, valence, comma-joined emotions (or `_`).
inline std::string format_node_tags(const Tfmn& g) {
  std::string out;
  for (const auto& node : g.nodes) {
    auto it = g.tags.find(node);
    const NodeTag tag = it == g.tags.end() ? NodeTag{} : it->second;
    const std::string emotions = emotion_list(tag.emotions);
    out += node + '\t' + std::string(to_string(tag.valence)) + '\t' +
           (emotions.empty() ? "_" : emotions) + '\n';
  }
  return out;
}

inline nlohmann::json to_json(const Tfmn& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : g.nodes) {
    auto it = g.tags.find(node);
    const NodeTag tag = it == g.tags.end() ? NodeTag{} : it->second;
    nlohmann::json emotions = nlohmann::json::array();
    for (std::size_t i = 0; i < kNumEmotions; ++i) {
      if (tag.emotions.test(i)) emotions.push_back(kEmotionNames[i]);
    }
    nodes.push_back({{"id", node}, {"valence", to_string(tag.valence)}, {"emotions", emotions}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [pair, kinds] : g.edges) {
    nlohmann::json k = nlohmann::json::array();
    if (kinds.syntactic) k.push_back("syntactic");
    if (kinds.synonym) k.push_back("synonym");
    edges.push_back({{"source", pair.first}, {"target", pair.second}, {"kinds", k}});
  }
  return {{"k", g.k}, {"nodes", nodes}, {"edges", edges}};
}

inline Tfmn tfmn_from_json(const nlohmann::json& doc) {
  Tfmn g;
  g.k = doc.at("k").get<int>();
  for (const auto& n : doc.at("nodes")) {
    const auto id = n.at("id").get<std::string>();
    g.nodes.insert(id);
    NodeTag tag;
    const auto valence = n.at("valence").get<std::string>();
    tag.valence = valence == "positive"   ? Valence::kPositive
                  : valence == "negative" ? Valence::kNegative
                                          : Valence::kNeutral;
    for (const auto& e : n.at("emotions")) {
      if (auto emotion = parse_emotion(e.get<std::string>())) {
        tag.emotions.set(static_cast<std::size_t>(*emotion));
      }
    }
    g.tags[id] = tag;
  }
  for (const auto& e : doc.at("edges")) {
    const auto a = e.at("source").get<std::string>();
    const auto b = e.at("target").get<std::string>();
    if (!g.nodes.count(a) || !g.nodes.count(b)) {
      throw Error(ErrorKind::kInvalidArgument, "edge endpoint missing from node list");
    }
    for (const auto& kind : e.at("kinds")) {
      g.add_edge(a, b, kind.get<std::string>() == "synonym" ? EdgeKind::kSynonym
                                                            : EdgeKind::kSyntactic);
    }
  }
  return g;
}

}  // namespace tfmn

#endif  // TFMN_NETWORK_HPP_
