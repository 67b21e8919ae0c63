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

#ifndef TFMN_EMOTIONS_HPP_
#define TFMN_EMOTIONS_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfmn/csv.hpp"
#include "tfmn/error.hpp"
#include "tfmn/lexicon.hpp"
#include "tfmn/network.hpp"
#include "tfmn/rng.hpp"
#include "tfmn/text.hpp"

namespace tfmn {

inline constexpr int kDefaultNullSamples = 1000;
inline constexpr double kSignificanceThreshold = 1.96;  // two-sided, alpha = 0.05

struct EmotionCounts {
  std::array<int, kNumEmotions> counts{};  // n_e
  int m = 0;  // tokens carrying at least one emotion

  friend bool operator==(const EmotionCounts&, const EmotionCounts&) = default;
};

// Counts tokens with multiplicity. A token with several emotions adds one
// to each of them but only once to M.
inline EmotionCounts count_emotions(std::span<const std::string> words,
                                    const EmotionLexicon& lex) {
  EmotionCounts out;
  for (const auto& w : words) {
    const EmotionSet set = lex.lookup(w);
    if (set.none()) continue;
    ++out.m;
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      if (set.test(e)) ++out.counts[e];
    }
  }
  return out;
}

// Emotion counts over the direct neighbours of `word` in a network.
inline EmotionCounts neighbourhood_emotions(const Tfmn& g, const std::string& word,
                                            const EmotionLexicon& lex) {
  std::vector<std::string> neighbours;
  for (const auto& [pair, kinds] : g.edges) {
    if (pair.first == word) neighbours.push_back(pair.second);
    if (pair.second == word) neighbours.push_back(pair.first);
  }
  return count_emotions(neighbours, lex);
}

enum class Sampling { kWithoutReplacement, kWithReplacement };

struct NullModel {
  int m = 0;
  int n_samples = 0;
  std::uint64_t seed = 0;
  Sampling sampling = Sampling::kWithoutReplacement;
  std::array<double, kNumEmotions> mean{};  // <r_e>
  std::array<double, kNumEmotions> sd{};    // sigma_{r_e}, over the N draws
};

// Draws M words uniformly from the emotion-bearing lexicon entries, N times,
// and records the mean and standard deviation of each emotion's count.
inline NullModel null_model(int m, const EmotionLexicon& lex, int n_samples,
                            std::uint64_t seed,
                            Sampling sampling = Sampling::kWithoutReplacement) {
  if (m < 1) throw Error(ErrorKind::kInvalidArgument, "M must be >= 1");
  if (n_samples < 100) throw Error(ErrorKind::kInvalidArgument, "N must be >= 100");
  const auto& population = lex.emotional_words();
  if (population.empty()) throw Error(ErrorKind::kMTooLarge, "lexicon has no emotion-bearing words");
  if (sampling == Sampling::kWithoutReplacement &&
      static_cast<std::size_t>(m) > population.size()) {
    throw Error(ErrorKind::kMTooLarge, "M = " + std::to_string(m) + " exceeds " +
                                           std::to_string(population.size()) +
                                           " emotion-bearing lexicon words");
  }
  std::vector<EmotionSet> sets;
  sets.reserve(population.size());
  for (const auto& w : population) sets.push_back(lex.lookup(w));

  NullModel model;
  model.m = m;
  model.n_samples = n_samples;
  model.seed = seed;
  model.sampling = sampling;
  Rng rng(seed);
  std::vector<std::size_t> pool = identity_permutation(sets.size());
  std::array<double, kNumEmotions> sum{};
  std::array<double, kNumEmotions> sum_sq{};
  const auto um = static_cast<std::size_t>(m);
  for (int it = 0; it < n_samples; ++it) {
    std::array<int, kNumEmotions> counts{};
    for (std::size_t i = 0; i < um; ++i) {
      std::size_t pick;
      if (sampling == Sampling::kWithoutReplacement) {
        // Partial Fisher-Yates over the running pool.
        std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
        pick = pool[i];
      } else {
        pick = rng.uniform_index(sets.size());
      }
      for (std::size_t e = 0; e < kNumEmotions; ++e) {
        if (sets[pick].test(e)) ++counts[e];
      }
    }
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      sum[e] += counts[e];
      sum_sq[e] += static_cast<double>(counts[e]) * counts[e];
    }
  }
  const double n = n_samples;
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    model.mean[e] = sum[e] / n;
    const double var = sum_sq[e] / n - model.mean[e] * model.mean[e];
    model.sd[e] = var > 0 ? std::sqrt(var) : 0.0;
  }
  return model;
}

enum class Deviation { kNone, kOver, kUnder };

struct EmotionProfile {
  EmotionCounts counts;
  std::array<double, kNumEmotions> z{};
  std::array<Deviation, kNumEmotions> significance{};
  std::array<bool, kNumEmotions> degenerate{};  // sigma = 0, z reported as 0
  int n_samples = 0;
  std::uint64_t seed = 0;

  int m() const { return counts.m; }
  bool significant(Emotion e) const {
    return significance[static_cast<std::size_t>(e)] != Deviation::kNone;
  }
};

// Z_e = (n_e - <r_e>) / sigma_e, flagged when |Z_e| > 1.96.
inline EmotionProfile z_scores(const EmotionCounts& counts, const NullModel& null) {
  if (counts.m != null.m) {
    throw Error(ErrorKind::kMMismatch, "null model built for M = " + std::to_string(null.m) +
                                           ", counts have M = " + std::to_string(counts.m));
  }
  EmotionProfile p;
  p.counts = counts;
  p.n_samples = null.n_samples;
  p.seed = null.seed;
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    if (null.sd[e] <= 0) {
      p.z[e] = 0;
      p.degenerate[e] = true;
    } else {
      p.z[e] = (counts.counts[e] - null.mean[e]) / null.sd[e];
    }
    if (p.z[e] > kSignificanceThreshold) {
      p.significance[e] = Deviation::kOver;
    } else if (p.z[e] < -kSignificanceThreshold) {
      p.significance[e] = Deviation::kUnder;
    }
  }
  return p;
}

// Whole-transcript profile. A transcript without emotional words (M = 0) has
// no null model; its z-scores are 0 and flagged degenerate.
inline EmotionProfile profile_words(std::span<const std::string> words, const EmotionLexicon& lex,
                                    int n_samples, std::uint64_t seed,
                                    Sampling sampling = Sampling::kWithoutReplacement) {
  const EmotionCounts counts = count_emotions(words, lex);
  if (counts.m == 0) {
    EmotionProfile p;
    p.counts = counts;
    p.n_samples = n_samples;
    p.seed = seed;
    p.degenerate.fill(true);
    return p;
  }
  return z_scores(counts, null_model(counts.m, lex, n_samples, seed, sampling));
}

// Lemmas of a transcript's network-eligible tokens, in reading order.
inline std::vector<std::string> transcript_words(const Transcript& t) {
  std::vector<std::string> out;
  for (const auto& s : t.sentences) {
    for (const auto& tok : s.tokens) {
      if (is_network_token(tok)) out.push_back(tok.lemma);
    }
  }
  return out;
}

// Each transcript draws from its own stream, seeded by (global seed, id).
inline std::uint64_t transcript_seed(std::uint64_t global_seed, const std::string& transcript_id) {
  return derive_seed(global_seed, "emotions:" + transcript_id);
}

inline std::string_view deviation_code(Deviation d) {
  return d == Deviation::kOver ? "+" : d == Deviation::kUnder ? "-" : "";
}

// transcript_id, M, one z column per emotion, the counts n_<emotion>,
// significance flags sig_<emotion> (+, - or empty) and degenerate_<emotion>.
inline std::string format_profiles_csv(const std::map<std::string, EmotionProfile>& profiles) {
  csv::Table out;
  out.header = {"transcript_id", "m"};
  for (auto e : kEmotionNames) out.header.emplace_back(e);
  for (auto e : kEmotionNames) out.header.push_back("n_" + std::string(e));
  for (auto e : kEmotionNames) out.header.push_back("sig_" + std::string(e));
  for (auto e : kEmotionNames) out.header.push_back("degenerate_" + std::string(e));
  out.header.push_back("n_samples");
  out.header.push_back("seed");
  for (const auto& [id, p] : profiles) {
    std::vector<std::string> row{id, std::to_string(p.m())};
    for (double z : p.z) row.push_back(text::format_double(z));
    for (int n : p.counts.counts) row.push_back(std::to_string(n));
    for (auto d : p.significance) row.emplace_back(deviation_code(d));
    for (bool d : p.degenerate) row.push_back(d ? "1" : "0");
    row.push_back(std::to_string(p.n_samples));
    row.push_back(std::to_string(p.seed));
    out.rows.push_back(std::move(row));
  }
  return csv::format(out);
}

inline std::map<std::string, EmotionProfile> parse_profiles_csv(
    std::string_view content, const std::string& source = "<profiles>") {
  const auto table = csv::parse(content, source);
  const auto col = [&](const std::string& name) {
    const auto c = table.column_index(name);
    if (!c) throw Error(ErrorKind::kSchemaMismatch, source + ": missing column " + name);
    return *c;
  };
  const auto number = [&](const std::vector<std::string>& row, std::size_t c) {
    const auto v = text::parse_double(row[c]);
    if (!v) {
      throw Error(ErrorKind::kSchemaMismatch,
                  source + ": bad value in column " + table.header[c] + " for " + row[0]);
    }
    return *v;
  };
  const std::size_t id = col("transcript_id");
  const std::size_t m = col("m");
  std::map<std::string, EmotionProfile> out;
  for (const auto& row : table.rows) {
    EmotionProfile p;
    p.counts.m = static_cast<int>(number(row, m));
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      const std::string name(kEmotionNames[e]);
      p.z[e] = number(row, col(name));
      p.counts.counts[e] = static_cast<int>(number(row, col("n_" + name)));
      const auto& sig = row[col("sig_" + name)];
      p.significance[e] = sig == "+" ? Deviation::kOver : sig == "-" ? Deviation::kUnder : Deviation::kNone;
      p.degenerate[e] = row[col("degenerate_" + name)] == "1";
    }
    p.n_samples = static_cast<int>(number(row, col("n_samples")));
    p.seed = std::stoull(row[col("seed")]);
    out[row[id]] = p;
  }
  return out;
}

}  // namespace tfmn

#endif  // TFMN_EMOTIONS_HPP_
