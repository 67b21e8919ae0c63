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

#ifndef TFMN_LEXICON_HPP_
#define TFMN_LEXICON_HPP_

#include <array>
#include <bitset>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tfmn/error.hpp"
#include "tfmn/text.hpp"

namespace tfmn {

// The eight basic emotions, in the order used for every exported column.
enum class Emotion : std::size_t {
  kAnger,
  kDisgust,
  kFear,
  kTrust,
  kJoy,
  kSadness,
  kSurprise,
  kAnticipation,
};

inline constexpr std::size_t kNumEmotions = 8;

inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "anger", "disgust", "fear", "trust", "joy", "sadness", "surprise", "anticipation"};

inline std::optional<Emotion> parse_emotion(std::string_view name) {
  for (std::size_t i = 0; i < kNumEmotions; ++i) {
    if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
  }
  return std::nullopt;
}

using EmotionSet = std::bitset<kNumEmotions>;

enum class Valence { kNeutral, kPositive, kNegative };

inline std::string_view to_string(Valence v) {
  switch (v) {
    case Valence::kPositive: return "positive";
    case Valence::kNegative: return "negative";
    case Valence::kNeutral: return "neutral";
  }
  return "neutral";
}

inline std::string emotion_list(const EmotionSet& set) {
  std::string out;
  for (std::size_t i = 0; i < kNumEmotions; ++i) {
    if (!set.test(i)) continue;
    if (!out.empty()) out += ',';
    out += kEmotionNames[i];
  }
  return out;
}

// Word -> valence. A word marked both positive and negative resolves to
// neutral.
class ValenceLexicon {
 public:
  void add(const std::string& word, Valence v) {
    auto [it, inserted] = entries_.emplace(word, v);
    if (!inserted && it->second != v) it->second = Valence::kNeutral;
  }

  Valence lookup(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? Valence::kNeutral : it->second;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Valence> entries_;
};

// EmoLex-style word/emotion associations. Lines are `word<TAB>category<TAB>0|1`
// where category is one of the eight emotions or positive/negative.
class EmotionLexicon {
 public:
  void add(const std::string& word, Emotion e) {
    entries_[word].set(static_cast<std::size_t>(e));
    emotional_cache_.reset();
  }

  EmotionSet lookup(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? EmotionSet{} : it->second;
  }

  // Distinct words carrying at least one emotion, sorted. This is the
  // population the null model samples from.
  const std::vector<std::string>& emotional_words() const {
    if (!emotional_cache_) {
      std::vector<std::string> words;
      for (const auto& [w, set] : entries_) {
        if (set.any()) words.push_back(w);
      }
      emotional_cache_ = std::move(words);
    }
    return *emotional_cache_;
  }

  const ValenceLexicon& valence() const { return valence_; }
  ValenceLexicon& valence() { return valence_; }

 private:
  std::map<std::string, EmotionSet> entries_;
  ValenceLexicon valence_;
  mutable std::optional<std::vector<std::string>> emotional_cache_;
};

inline EmotionLexicon parse_emotion_lexicon(std::string_view content,
                                            const std::string& source = "<lexicon>") {
  EmotionLexicon lex;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 3) {
      throw Error(ErrorKind::kMalformedLine,
                  source + ":" + std::to_string(line_no) + ": expected word<TAB>category<TAB>0|1");
    }
    const std::string word = text::to_lower(text::trim(fields[0]));
    const std::string category(text::trim(fields[1]));
    const std::string_view flag = text::trim(fields[2]);
    if (flag != "0" && flag != "1") {
      throw Error(ErrorKind::kMalformedLine,
                  source + ":" + std::to_string(line_no) + ": association must be 0 or 1");
    }
    if (flag == "0") continue;
    if (auto e = parse_emotion(category)) {
      lex.add(word, *e);
    } else if (category == "positive") {
      lex.valence().add(word, Valence::kPositive);
    } else if (category == "negative") {
      lex.valence().add(word, Valence::kNegative);
    } else {
      throw Error(ErrorKind::kMalformedLine,
                  source + ":" + std::to_string(line_no) + ": unknown category '" + category + "'");
    }
  }
  return lex;
}

inline EmotionLexicon load_emotion_lexicon(const std::string& path) {
  return parse_emotion_lexicon(text::read_file(path), path);
}

// Accepts `word<TAB>positive|negative` lines, or EmoLex triples from which
// only the positive/negative rows are kept.
inline ValenceLexicon parse_valence_lexicon(std::string_view content,
                                            const std::string& source = "<valence>") {
  ValenceLexicon lex;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    const std::string word = text::to_lower(text::trim(fields[0]));
    if (fields.size() == 2) {
      const auto label = text::trim(fields[1]);
      if (label == "positive") {
        lex.add(word, Valence::kPositive);
      } else if (label == "negative") {
        lex.add(word, Valence::kNegative);
      } else {
        throw Error(ErrorKind::kMalformedLine,
                    source + ":" + std::to_string(line_no) + ": valence must be positive|negative");
      }
    } else if (fields.size() == 3) {
      if (text::trim(fields[2]) != "1") continue;
      const auto label = text::trim(fields[1]);
      if (label == "positive") lex.add(word, Valence::kPositive);
      if (label == "negative") lex.add(word, Valence::kNegative);
    } else {
      throw Error(ErrorKind::kMalformedLine,
                  source + ":" + std::to_string(line_no) + ": expected 2 or 3 fields");
    }
  }
  return lex;
}

inline ValenceLexicon load_valence_lexicon(const std::string& path) {
  return parse_valence_lexicon(text::read_file(path), path);
}

// Synonymy through shared synset ids (`word<TAB>synset_id`).
class SynonymLexicon {
 public:
  void add(const std::string& word, const std::string& synset) {
    synsets_of_[word].insert(synset);
  }

  const std::set<std::string>& synsets(const std::string& word) const {
    static const std::set<std::string> kNone;
    auto it = synsets_of_.find(word);
    return it == synsets_of_.end() ? kNone : it->second;
  }

  bool are_synonyms(const std::string& a, const std::string& b) const {
    if (a == b) return false;
    const auto& sa = synsets(a);
    for (const auto& id : synsets(b)) {
      if (sa.count(id)) return true;
    }
    return false;
  }

  std::size_t size() const { return synsets_of_.size(); }

 private:
  std::map<std::string, std::set<std::string>> synsets_of_;
};

inline SynonymLexicon parse_synonym_lexicon(std::string_view content,
                                            const std::string& source = "<synonyms>") {
  SynonymLexicon lex;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 2) {
      throw Error(ErrorKind::kMalformedLine,
                  source + ":" + std::to_string(line_no) + ": expected word<TAB>synset_id");
    }
    lex.add(text::to_lower(text::trim(fields[0])), std::string(text::trim(fields[1])));
  }
  return lex;
}

inline SynonymLexicon load_synonym_lexicon(const std::string& path) {
  return parse_synonym_lexicon(text::read_file(path), path);
}

}  // namespace tfmn

#endif  // TFMN_LEXICON_HPP_
