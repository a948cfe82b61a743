#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "srobench/types.hpp"

namespace srobench {

// Band predicate on a (subject, object) placement. dx, dy are subject centre
// minus object centre (y grows downwards); overlap is I / area(subject).
// Bands are closed intervals.
struct RelationRule {
  std::string name;
  double dx_min = 0.0, dx_max = 0.0;
  double dy_min = 0.0, dy_max = 0.0;
  double overlap_min = 0.0, overlap_max = 0.0;
};

// above, left of, on, in, below, right of.
std::vector<RelationRule> default_rules();

bool rule_holds(const RelationRule& rule, const BoundingBox& subject, const BoundingBox& object);

struct WorldSpec {
  int n_entities = 12;
  int n_relations = 4;
  int n_images = 2000;
  std::vector<RelationRule> rules;  // empty: the first n_relations default rules
  double cooccurrence_bias = 0.5;   // P(relation = subject's preferred relation)
  double noise_std = 0.1;
  std::uint64_t seed = 7;
};

// The generating tables, kept for inspection and tests.
struct WorldTruth {
  std::vector<std::string> labels;       // detector label of each entity
  std::vector<double> entity_prior;      // subject/object marginal
  std::vector<int> preferred_relation;   // per subject entity
  std::vector<RelationRule> rules;       // indexed like the relation vocabulary
};

struct World {
  Vocabulary vocab;
  std::vector<ImageExample> examples;  // one box pair per image, in image order
  AlignmentMap alignment;              // PMI over boxes whose label fires (score >= 0.5)
  WorldTruth truth;
  std::set<std::string> benchmark_train_ids;  // seeded 80% of images
};

// Per image: draw s from the prior, o != s from the prior, r from the
// subject's preferred relation with probability `cooccurrence_bias` and
// uniformly otherwise; place boxes satisfying exactly rule r; detector maps
// are clip(1 + N(0, sd)) on the true label and clip(N(0, sd)) elsewhere,
// zero entries dropped. Throws on an invalid spec or an unsatisfiable rule.
World generate_world(const WorldSpec& spec);

}  // namespace srobench
