#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "srobench/types.hpp"

namespace srobench {

// Co-occurrence counts between caption entities and localizer labels over a
// set of observation units (images, or boxes).
struct CooccurrenceCounts {
  std::map<std::pair<std::string, std::string>, double> joint;  // (entity, label)
  std::map<std::string, double> entity_totals;
  std::map<std::string, double> label_totals;
  double grand_total = 0.0;
};

// One observation unit: the entity terms and labels present in it.
struct Observation {
  std::set<std::string> entities;
  std::set<std::string> labels;
};

CooccurrenceCounts count_cooccurrence(const std::vector<Observation>& units);

using PmiTable = std::map<std::pair<std::string, std::string>, double>;

// PMI(e,l) = ln(c(e,l) N / (c(e) c(l))) for every cell with c(e,l) > 0.
// Throws when a cell exceeds either marginal, a marginal exceeds N, or a
// referenced marginal is missing or non-positive.
PmiTable compute_pmi(const CooccurrenceCounts& counts);

struct PruneRule {
  enum class Mode { kAllow, kDeny };
  Mode mode = Mode::kDeny;
  std::string entity;
  std::string label;
};

// Per entity: the `top_m` labels by PMI (ties by label), then deny-listed
// pairs removed; if any allow rule is present only allow-listed pairs survive.
// weight = PMI - (smallest retained PMI of that entity) + 1.
AlignmentMap build_alignment(const PmiTable& pmi, std::size_t top_m, const std::vector<PruneRule>& prune = {});

// Sparse entity x label transformation. Each non-empty row sums to 1.
class EntityPotentialMatrix {
 public:
  EntityPotentialMatrix() = default;
  explicit EntityPotentialMatrix(std::vector<std::vector<std::pair<std::string, double>>> rows)
      : rows_(std::move(rows)) {}

  int num_entities() const { return static_cast<int>(rows_.size()); }
  const std::vector<std::pair<std::string, double>>& row(int entity) const {
    return rows_.at(static_cast<std::size_t>(entity));
  }
  const auto& rows() const { return rows_; }
  double at(int entity, const std::string& label) const;

 private:
  std::vector<std::vector<std::pair<std::string, double>>> rows_;  // label-sorted
};

// M(e,l) proportional to the number of training examples where e is a gold
// subject (resp. object) and l appears in the subject (resp. object) box's
// score map with score > presence_threshold, restricted to aligned pairs.
EntityPotentialMatrix build_entity_potential_matrix(const std::vector<ImageExample>& train,
                                                    const AlignmentMap& alignment, const Vocabulary& vocab,
                                                    double presence_threshold = 0.0);

// f(e) = sum_l M(e,l) * score(l).
std::vector<double> entity_scores(const EntityPotentialMatrix& m, const ScoreMap& detector_scores);

}  // namespace srobench
