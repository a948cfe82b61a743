#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "srobench/types.hpp"

namespace srobench {

struct Token {
  std::string form;
  std::string lemma;  // may be empty
  std::string pos;
};

struct DependencyEdge {
  int head = 0;
  int dependent = 0;
  std::string label;
};

// A dependency-parsed caption. Labels follow the Stanford basic inventory
// (nsubj, dobj, prep, pobj, ...).
struct CaptionParse {
  std::string image_id;
  std::string caption_id;
  std::vector<Token> tokens;
  std::vector<DependencyEdge> edges;
  int root = 0;
};

// Checks that edges form a tree over the tokens rooted at `root`.
// Throws Error on out-of-range indices, multiple heads, or cycles.
void validate_parse(const CaptionParse& parse);

// Applies the extraction patterns to every head in token order:
//   P1  nsubj(v,s) + dobj(v,o)            -> (s, v, o)
//   P2  nsubj(v,s) + prep(v,p) + pobj(p,o) -> (s, "v p", o)
//   P3  noun n + prep(n,p) + pobj(p,o)     -> (n, p, o)
// Every word is lowercased and stemmed.
std::vector<RawTriplet> extract_sro(const CaptionParse& parse);

// Ranks subject/object terms by frequency, keeps the `noun_pool` most
// frequent, intersects with `localizable` (all terms when unset), then keeps
// the top `entity_cap`. Relations keep the top `relation_cap`. Ties are
// broken lexicographically.
Vocabulary build_vocab(const std::vector<RawTriplet>& raw, std::size_t noun_pool,
                       std::size_t entity_cap, std::size_t relation_cap,
                       const std::optional<std::set<std::string>>& localizable = std::nullopt);

// Keeps triplets whose three terms are all in the vocabulary.
std::vector<SROTriplet> filter_triplets(const std::vector<RawTriplet>& raw, const Vocabulary& vocab);

}  // namespace srobench
