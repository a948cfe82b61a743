#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "srobench/types.hpp"

namespace srobench {

// Example ids are indices into the example list the fold was built from.
struct SplitFold {
  std::string name;
  int fold_id = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::map<std::size_t, std::string> removed;  // id -> reason
  std::map<std::size_t, std::string> moved;    // train ids that started on the test side -> reason
};

// Compositional k-fold split over unique SRO triplets.
//  1. Unique triplets are shuffled with `seed` and dealt round-robin into
//     `folds` groups; fold k tests the examples whose gold lies in group k.
//  Then, to a fixed point (all moves at triplet granularity):
//  - an example with gold triplets on both sides moves its test triplets to train;
//  - an image with examples on both sides moves its test triplets to train;
//  - train examples with an entity seen < min_entity_count times in train are removed;
//  - test triplets with such an entity move to train.
// Throws when there are fewer unique triplets than folds.
std::vector<SplitFold> compositional_split(const std::vector<ImageExample>& examples, int folds = 5,
                                           int min_entity_count = 5, std::uint64_t seed = 7);

// train = examples whose image id is in `official_train_ids`, test = the rest.
SplitFold benchmark_split(const std::vector<ImageExample>& examples, const std::set<std::string>& official_train_ids);

struct SplitViolation {
  std::string kind;  // partition | shared_sro | shared_image | unseen_entity
  std::string detail;
};

// Empty result means a valid compositional fold: no shared triplets, no shared
// images, every test entity seen >= min_entity_count times in train.
std::vector<SplitViolation> validate_split(const SplitFold& fold, const std::vector<ImageExample>& examples,
                                           int min_entity_count = 1);

// Occurrences of each entity in the subject or object slot of the given examples' gold triplets.
std::map<int, int> entity_occurrences(const std::vector<ImageExample>& examples, const std::vector<std::size_t>& ids);

}  // namespace srobench
