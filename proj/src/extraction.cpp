#include "srobench/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

#include "srobench/stemmer.hpp"

namespace srobench {
namespace {

std::string normalize_word(const std::string& form) {
  std::string out;
  out.reserve(form.size());
  for (unsigned char c : form) out.push_back(static_cast<char>(std::tolower(c)));
  return stem(out);
}

bool is_noun(const Token& t) { return t.pos.rfind("NN", 0) == 0; }

// Children of each token grouped by label, in token order.
using ChildIndex = std::vector<std::multimap<std::string, int>>;

std::vector<int> children(const ChildIndex& idx, int head, const std::string& label) {
  std::vector<int> out;
  auto [lo, hi] = idx[static_cast<std::size_t>(head)].equal_range(label);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::string, std::size_t>> ranked_terms(const std::map<std::string, std::size_t>& counts) {
  std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return v;
}

}  // namespace

void validate_parse(const CaptionParse& parse) {
  const int n = static_cast<int>(parse.tokens.size());
  if (n == 0) throw Error("caption " + parse.caption_id + ": no tokens");
  if (parse.root < 0 || parse.root >= n) throw Error("caption " + parse.caption_id + ": root out of range");
  std::vector<int> head(static_cast<std::size_t>(n), -1);
  for (const auto& e : parse.edges) {
    if (e.head < 0 || e.head >= n || e.dependent < 0 || e.dependent >= n) {
      throw Error("caption " + parse.caption_id + ": edge index out of range");
    }
    if (e.dependent == parse.root) throw Error("caption " + parse.caption_id + ": root has a head");
    if (head[static_cast<std::size_t>(e.dependent)] != -1) {
      throw Error("caption " + parse.caption_id + ": token " + std::to_string(e.dependent) + " has two heads");
    }
    head[static_cast<std::size_t>(e.dependent)] = e.head;
  }
  for (int i = 0; i < n; ++i) {
    if (i != parse.root && head[static_cast<std::size_t>(i)] == -1) {
      throw Error("caption " + parse.caption_id + ": token " + std::to_string(i) + " has no head");
    }
    // Walking up from i must reach the root within n steps.
    int cur = i;
    int steps = 0;
    while (cur != parse.root) {
      cur = head[static_cast<std::size_t>(cur)];
      if (++steps > n) throw Error("caption " + parse.caption_id + ": cyclic dependency structure");
    }
  }
}

std::vector<RawTriplet> extract_sro(const CaptionParse& parse) {
  validate_parse(parse);
  ChildIndex idx(parse.tokens.size());
  for (const auto& e : parse.edges) idx[static_cast<std::size_t>(e.head)].emplace(e.label, e.dependent);

  std::vector<std::string> words;
  words.reserve(parse.tokens.size());
  for (const auto& t : parse.tokens) words.push_back(normalize_word(t.form));

  // (head, pattern, subject token, object token) orders the matches.
  std::vector<std::tuple<int, int, int, int, RawTriplet>> found;
  const int n = static_cast<int>(parse.tokens.size());
  for (int h = 0; h < n; ++h) {
    const auto& hw = words[static_cast<std::size_t>(h)];
    const auto preps = children(idx, h, "prep");
    const auto subjects = children(idx, h, "nsubj");
    for (int s : subjects) {
      for (int o : children(idx, h, "dobj")) {
        found.emplace_back(h, 1, s, o, RawTriplet{words[static_cast<std::size_t>(s)], hw, words[static_cast<std::size_t>(o)]});
      }
      for (int p : preps) {
        for (int o : children(idx, p, "pobj")) {
          found.emplace_back(h, 2, s, o,
                             RawTriplet{words[static_cast<std::size_t>(s)], hw + " " + words[static_cast<std::size_t>(p)],
                                        words[static_cast<std::size_t>(o)]});
        }
      }
    }
    if (is_noun(parse.tokens[static_cast<std::size_t>(h)])) {
      for (int p : preps) {
        for (int o : children(idx, p, "pobj")) {
          found.emplace_back(h, 3, h, o,
                             RawTriplet{hw, words[static_cast<std::size_t>(p)], words[static_cast<std::size_t>(o)]});
        }
      }
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<RawTriplet> out;
  out.reserve(found.size());
  for (auto& f : found) out.push_back(std::move(std::get<4>(f)));
  return out;
}

Vocabulary build_vocab(const std::vector<RawTriplet>& raw, std::size_t noun_pool, std::size_t entity_cap,
                       std::size_t relation_cap, const std::optional<std::set<std::string>>& localizable) {
  if (noun_pool == 0 || entity_cap == 0 || relation_cap == 0) throw Error("vocabulary caps must be >= 1");
  std::map<std::string, std::size_t> noun_counts;
  std::map<std::string, std::size_t> relation_counts;
  for (const auto& t : raw) {
    ++noun_counts[t.subject];
    ++noun_counts[t.object];
    ++relation_counts[t.relation];
  }
  // std::map iterates lexicographically, so a stable sort on count keeps the tie-break.
  auto nouns = ranked_terms(noun_counts);
  if (nouns.size() > noun_pool) nouns.resize(noun_pool);
  std::vector<std::string> entities;
  for (const auto& [term, count] : nouns) {
    if (entities.size() == entity_cap) break;
    if (localizable && !localizable->count(term)) continue;
    entities.push_back(term);
  }
  auto rels = ranked_terms(relation_counts);
  std::vector<std::string> relations;
  for (const auto& [term, count] : rels) {
    if (relations.size() == relation_cap) break;
    relations.push_back(term);
  }
  return Vocabulary(std::move(entities), std::move(relations));
}

std::vector<SROTriplet> filter_triplets(const std::vector<RawTriplet>& raw, const Vocabulary& vocab) {
  std::vector<SROTriplet> out;
  for (const auto& t : raw) {
    if (auto idx = vocab.index(t)) out.push_back(*idx);
  }
  return out;
}

}  // namespace srobench
