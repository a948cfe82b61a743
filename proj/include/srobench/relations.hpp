#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srobench/features.hpp"
#include "srobench/types.hpp"

namespace srobench {

// Inputs of the relation-node classifier (the six ablation variants).
enum class RelationFeatureVariant {
  kSubjectObject,  // one-hot(s) ++ one-hot(o)
  kObject,         // one-hot(o)
  kSubject,        // one-hot(s)
  kSpatial,        // normalized spatial features
  kSpatialObject,  // spatial ++ one-hot(o)
  kNone,           // no inputs; log relation frequencies
};

inline constexpr RelationFeatureVariant kAllVariants[] = {
    RelationFeatureVariant::kSubjectObject, RelationFeatureVariant::kObject,
    RelationFeatureVariant::kSubject,       RelationFeatureVariant::kSpatial,
    RelationFeatureVariant::kSpatialObject, RelationFeatureVariant::kNone,
};

// "RSubjectObject", "RObject", "RSubject", "RSpatial", "RSpatialObject", "RNone".
std::string_view variant_name(RelationFeatureVariant v);
std::optional<RelationFeatureVariant> parse_variant(std::string_view name);

// Feature dimensionality for a one-hot width (the entity cap, 300 by default).
std::size_t variant_dims(RelationFeatureVariant v, std::size_t one_hot_width);

std::vector<double> relation_features(const ImageExample& example, int subject, int object,
                                      RelationFeatureVariant variant, const Normalizer& normalizer,
                                      std::size_t one_hot_width);

struct RelationModel {
  RelationFeatureVariant variant = RelationFeatureVariant::kNone;
  std::size_t input_dims = 0;
  std::size_t one_hot_width = 0;
  int num_relations = 0;
  std::vector<std::vector<double>> weights;  // num_relations x input_dims
  std::vector<double> bias;                  // num_relations
  std::vector<double> log_frequency;         // kNone only
};

struct RelationSample {
  std::vector<double> features;
  int relation = 0;
};

struct RelationTrainOptions {
  double lambda = 1e-4;
  int epochs = 50;
  std::uint64_t seed = 7;
  // Objective at the running average of all iterates, one entry per epoch.
  std::vector<double>* averaged_objective_trace = nullptr;
};

// Crammer-Singer multiclass SVM (margin 1) trained by Pegasos steps
// eta_t = 1/(lambda t). The bias is an extra weight on a constant input and is
// regularized with the rest. For kNone the model stores ln(count/total); a
// relation with no training examples gets ln(0.5/total).
RelationModel train_relation_svm(const std::vector<RelationSample>& train, int num_relations,
                                 RelationFeatureVariant variant, std::size_t one_hot_width,
                                 const RelationTrainOptions& options = {});

// W x + b per relation; the stored log-frequency vector for kNone.
std::vector<double> score_relations(const RelationModel& model, const std::vector<double>& features);

// (lambda/2)(|W|^2 + |b|^2) + mean multiclass hinge.
double relation_objective(const RelationModel& model, const std::vector<RelationSample>& train, double lambda);

}  // namespace srobench
