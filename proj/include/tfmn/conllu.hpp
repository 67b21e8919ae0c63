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

#ifndef TFMN_CONLLU_HPP_
#define TFMN_CONLLU_HPP_

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tfmn/error.hpp"
#include "tfmn/text.hpp"

namespace tfmn {

using StopwordSet = std::unordered_set<std::string>;

// One word line of a CoNLL-U sentence. Columns that the network builder never
// reads (XPOS, FEATS, DEPS, MISC) are kept verbatim so that a parsed corpus
// can be written back out unchanged.
struct Token {
  int id = 0;
  std::string surface;
  std::string lemma;
  std::string upos;
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;
  std::string deprel;
  std::string deps = "_";
  std::string misc = "_";
  bool is_stopword = false;
  bool is_alpha = false;

  friend bool operator==(const Token&, const Token&) = default;
};

struct SentenceTree {
  std::string sentence_id;
  std::vector<Token> tokens;  // tokens[i].id == i + 1

  std::size_t size() const { return tokens.size(); }

  friend bool operator==(const SentenceTree&, const SentenceTree&) = default;
};

struct Demographics {
  std::optional<double> age;  // years
  std::optional<int> sex;     // 0 = female, 1 = male

  friend bool operator==(const Demographics&, const Demographics&) = default;
};

struct Transcript {
  std::string transcript_id;
  std::vector<SentenceTree> sentences;
  Demographics demographics;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct ParseWarning {
  std::string transcript_id;
  std::string sentence_id;
  std::size_t line = 0;  // line of the sentence's first token
  std::string reason;    // MultipleRoots | NoRoot | BadHead | Cycle | ...
};

struct ParseResult {
  std::vector<Transcript> transcripts;
  std::vector<ParseWarning> warnings;

  std::size_t dropped_sentences() const { return warnings.size(); }
};

// A lemma is alphabetic when it holds at least one letter and no digit.
// Bytes >= 0x80 (UTF-8 multi-byte sequences) are treated as letters.
inline bool is_alpha_lemma(std::string_view lemma) {
  bool letter = false;
  for (unsigned char c : lemma) {
    if (c >= '0' && c <= '9') return false;
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80) letter = true;
  }
  return letter;
}

inline std::optional<int> parse_sex_code(std::string_view raw) {
  const std::string v = text::to_lower(text::trim(raw));
  if (v == "0" || v == "f" || v == "female") return 0;
  if (v == "1" || v == "m" || v == "male") return 1;
  return std::nullopt;
}

inline StopwordSet parse_stopwords(std::string_view content) {
  StopwordSet out;
  for (const auto& line : text::split(content, '\n')) {
    const auto word = text::trim(line);
    if (word.empty() || word.front() == '#') continue;
    out.insert(text::to_lower(word));
  }
  return out;
}

inline StopwordSet load_stopwords(const std::string& path) {
  return parse_stopwords(text::read_file(path));
}

namespace detail {

// Returns the reason a sentence is not a single-rooted tree, or nullopt.
inline std::optional<std::string> validate_tree(const SentenceTree& s) {
  const int n = static_cast<int>(s.tokens.size());
  if (n == 0) return "EmptySentence";
  int roots = 0;
  for (const auto& t : s.tokens) {
    if (t.head == 0) ++roots;
    if (t.head < 0 || t.head > n) return "BadHead";
    if (t.head == t.id) return "SelfLoop";
  }
  if (roots == 0) return "NoRoot";
  if (roots > 1) return "MultipleRoots";
  for (const auto& t : s.tokens) {
    int cur = t.id;
    int steps = 0;
    while (cur != 0) {
      cur = s.tokens[static_cast<std::size_t>(cur - 1)].head;
      if (++steps > n) return "Cycle";
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Parses a CoNLL-U stream into transcripts. `# newdoc id = X` opens a new
// transcript; sentences before any newdoc comment belong to
// `default_transcript_id`. `# age = N` and `# sex = F|M|0|1` comments set the
// current transcript's demographics. Malformed lines reject the whole input;
// structurally invalid sentences are dropped and reported as warnings.
inline ParseResult parse_conllu(std::istream& in, const StopwordSet& stopwords,
                                const std::string& default_transcript_id = "doc") {
  if (stopwords.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "stopword set must be non-empty");
  }
  ParseResult result;
  std::map<std::string, std::size_t> doc_index;

  const auto current_doc = [&]() -> Transcript& {
    if (result.transcripts.empty()) {
      result.transcripts.push_back({default_transcript_id, {}, {}});
      doc_index[default_transcript_id] = 0;
    }
    return result.transcripts.back();
  };

  SentenceTree pending;
  std::optional<std::string> pending_id;
  std::size_t pending_line = 0;
  std::size_t line_no = 0;
  std::size_t auto_sentence = 0;

  const auto flush = [&]() {
    if (pending.tokens.empty()) {
      pending_id.reset();
      return;
    }
    Transcript& doc = current_doc();
    ++auto_sentence;
    pending.sentence_id = pending_id.value_or(doc.transcript_id + "-s" +
                                              std::to_string(auto_sentence));
    // Token ids must be 1..n in order for head references to resolve.
    bool contiguous = true;
    for (std::size_t i = 0; i < pending.tokens.size(); ++i) {
      if (pending.tokens[i].id != static_cast<int>(i + 1)) contiguous = false;
    }
    std::optional<std::string> problem =
        contiguous ? detail::validate_tree(pending) : std::optional<std::string>("BadIds");
    if (problem) {
      result.warnings.push_back(
          {doc.transcript_id, pending.sentence_id, pending_line, *problem});
    } else {
      doc.sentences.push_back(std::move(pending));
    }
    pending = SentenceTree{};
    pending_id.reset();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      std::string_view body = text::trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      const std::string key(text::trim(body.substr(0, eq)));
      const std::string value(eq == std::string_view::npos
                                  ? std::string_view{}
                                  : text::trim(body.substr(eq + 1)));
      if (key == "newdoc id" || key == "newdoc") {
        flush();
        std::string id = value.empty()
                             ? default_transcript_id + "-" +
                                   std::to_string(result.transcripts.size() + 1)
                             : value;
        if (doc_index.count(id)) {
          throw Error(ErrorKind::kInvalidArgument,
                      "line " + std::to_string(line_no) + ": duplicate transcript id '" +
                          id + "'");
        }
        doc_index[id] = result.transcripts.size();
        result.transcripts.push_back({id, {}, {}});
        auto_sentence = 0;
      } else if (key == "sent_id") {
        pending_id = value;
      } else if (key == "age") {
        if (auto age = text::parse_double(value)) current_doc().demographics.age = *age;
      } else if (key == "sex") {
        if (auto sex = parse_sex_code(value)) current_doc().demographics.sex = *sex;
      }
      continue;
    }

    auto fields = text::split(line, '\t');
    if (fields.size() != 10) {
      throw Error(ErrorKind::kMalformedLine,
                  "line " + std::to_string(line_no) + ": expected 10 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    // Multiword ranges (3-4) and empty nodes (5.1) are not tree nodes.
    if (fields[0].find_first_of("-.") != std::string::npos) continue;
    const auto id = text::parse_int<int>(fields[0]);
    const auto head = text::parse_int<int>(fields[6]);
    if (!id || *id < 1 || !head || *head < 0) {
      throw Error(ErrorKind::kMalformedLine,
                  "line " + std::to_string(line_no) + ": non-numeric ID or HEAD");
    }
    if (pending.tokens.empty()) pending_line = line_no;

    Token tok;
    tok.id = *id;
    tok.surface = fields[1];
    std::string lemma = fields[2] == "_" || fields[2].empty() ? fields[1] : fields[2];
    tok.lemma = text::to_lower(lemma);
    tok.upos = fields[3];
    tok.xpos = fields[4];
    tok.feats = fields[5];
    tok.head = *head;
    tok.deprel = fields[7];
    tok.deps = fields[8];
    tok.misc = fields[9];
    tok.is_stopword = stopwords.count(tok.lemma) > 0;
    tok.is_alpha = is_alpha_lemma(tok.lemma);
    pending.tokens.push_back(std::move(tok));
  }
  flush();
  return result;
}

inline ParseResult parse_conllu(std::string_view content, const StopwordSet& stopwords,
                                const std::string& default_transcript_id = "doc") {
  std::istringstream in{std::string(content)};
  return parse_conllu(in, stopwords, default_transcript_id);
}

inline std::string write_conllu(const std::vector<Transcript>& transcripts) {
  std::string out;
  for (const auto& doc : transcripts) {
    out += "# newdoc id = " + doc.transcript_id + "\n";
    if (doc.demographics.age) out += "# age = " + text::format_double(*doc.demographics.age) + "\n";
    if (doc.demographics.sex) out += "# sex = " + std::to_string(*doc.demographics.sex) + "\n";
    for (const auto& s : doc.sentences) {
      out += "# sent_id = " + s.sentence_id + "\n";
      for (const auto& t : s.tokens) {
        out += std::to_string(t.id) + '\t' + t.surface + '\t' + t.lemma + '\t' + t.upos +
               '\t' + t.xpos + '\t' + t.feats + '\t' + std::to_string(t.head) + '\t' +
               t.deprel + '\t' + t.deps + '\t' + t.misc + '\n';
      }
      out += '\n';
    }
  }
  return out;
}

// Undirected adjacency of a dependency tree, indexed by token id (0 unused).
inline std::vector<std::vector<int>> tree_adjacency(const SentenceTree& s) {
  std::vector<std::vector<int>> adj(s.tokens.size() + 1);
  for (const auto& t : s.tokens) {
    if (t.head != 0) {
      adj[static_cast<std::size_t>(t.id)].push_back(t.head);
      adj[static_cast<std::size_t>(t.head)].push_back(t.id);
    }
  }
  return adj;
}

// Edge counts from `source` to every token (index = token id, slot 0 unused).
inline std::vector<int> tree_distances_from(const SentenceTree& s, int source) {
  const int n = static_cast<int>(s.tokens.size());
  if (source < 1 || source > n) {
    throw Error(ErrorKind::kUnknownToken, "token id " + std::to_string(source) +
                                              " not in sentence " + s.sentence_id);
  }
  const auto adj = tree_adjacency(s);
  std::vector<int> dist(static_cast<std::size_t>(n) + 1, -1);
  std::queue<int> frontier;
  dist[static_cast<std::size_t>(source)] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

inline int tree_distance(const SentenceTree& s, int i, int j) {
  const int n = static_cast<int>(s.tokens.size());
  if (j < 1 || j > n) {
    throw Error(ErrorKind::kUnknownToken,
                "token id " + std::to_string(j) + " not in sentence " + s.sentence_id);
  }
  return tree_distances_from(s, i)[static_cast<std::size_t>(j)];
}

}  // namespace tfmn

#endif  // TFMN_CONLLU_HPP_
