#include "srobench/relations.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace srobench {

std::string_view variant_name(RelationFeatureVariant v) {
  switch (v) {
    case RelationFeatureVariant::kSubjectObject: return "RSubjectObject";
    case RelationFeatureVariant::kObject: return "RObject";
    case RelationFeatureVariant::kSubject: return "RSubject";
    case RelationFeatureVariant::kSpatial: return "RSpatial";
    case RelationFeatureVariant::kSpatialObject: return "RSpatialObject";
    case RelationFeatureVariant::kNone: return "RNone";
  }
  return "?";
}

std::optional<RelationFeatureVariant> parse_variant(std::string_view name) {
  for (auto v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

std::size_t variant_dims(RelationFeatureVariant v, std::size_t width) {
  switch (v) {
    case RelationFeatureVariant::kSubjectObject: return 2 * width;
    case RelationFeatureVariant::kObject:
    case RelationFeatureVariant::kSubject: return width;
    case RelationFeatureVariant::kSpatial: return kSpatialDims;
    case RelationFeatureVariant::kSpatialObject: return kSpatialDims + width;
    case RelationFeatureVariant::kNone: return 0;
  }
  return 0;
}

std::vector<double> relation_features(const ImageExample& example, int subject, int object,
                                      RelationFeatureVariant variant, const Normalizer& normalizer,
                                      std::size_t width) {
  auto one_hot = [width](std::vector<double>& out, int index) {
    if (index < 0 || static_cast<std::size_t>(index) >= width) {
      throw Error("relation_features: entity index " + std::to_string(index) + " outside one-hot width");
    }
    const std::size_t base = out.size();
    out.resize(base + width, 0.0);
    out[base + static_cast<std::size_t>(index)] = 1.0;
  };
  auto spatial = [&](std::vector<double>& out) {
    const auto z = normalize(normalizer, spatial_features(example.subject_box, example.object_box));
    out.insert(out.end(), z.begin(), z.end());
  };

  std::vector<double> x;
  x.reserve(variant_dims(variant, width));
  switch (variant) {
    case RelationFeatureVariant::kSubjectObject:
      one_hot(x, subject);
      one_hot(x, object);
      break;
    case RelationFeatureVariant::kObject:
      one_hot(x, object);
      break;
    case RelationFeatureVariant::kSubject:
      one_hot(x, subject);
      break;
    case RelationFeatureVariant::kSpatial:
      spatial(x);
      break;
    case RelationFeatureVariant::kSpatialObject:
      spatial(x);
      one_hot(x, object);
      break;
    case RelationFeatureVariant::kNone:
      break;
  }
  return x;
}

namespace {

double dot(const std::vector<double>& w, const std::vector<double>& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) acc += w[i] * x[i];
  }
  return acc;
}

// Most violating rival under the multiclass hinge, and the loss value.
std::pair<int, double> worst_rival(const RelationModel& m, const RelationSample& s) {
  const auto scores = score_relations(m, s.features);
  int rival = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < m.num_relations; ++r) {
    if (r == s.relation) continue;
    if (scores[static_cast<std::size_t>(r)] > best) {
      best = scores[static_cast<std::size_t>(r)];
      rival = r;
    }
  }
  if (rival < 0) return {-1, 0.0};
  return {rival, std::max(0.0, 1.0 + best - scores[static_cast<std::size_t>(s.relation)])};
}

RelationModel frequency_model(const std::vector<RelationSample>& train, int num_relations, std::size_t width) {
  RelationModel m;
  m.variant = RelationFeatureVariant::kNone;
  m.one_hot_width = width;
  m.num_relations = num_relations;
  std::vector<double> counts(static_cast<std::size_t>(num_relations), 0.0);
  for (const auto& s : train) counts[static_cast<std::size_t>(s.relation)] += 1.0;
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  m.log_frequency.resize(counts.size());
  for (std::size_t r = 0; r < counts.size(); ++r) {
    m.log_frequency[r] = std::log((counts[r] > 0.0 ? counts[r] : 0.5) / total);
  }
  return m;
}

}  // namespace

RelationModel train_relation_svm(const std::vector<RelationSample>& train, int num_relations,
                                 RelationFeatureVariant variant, std::size_t width,
                                 const RelationTrainOptions& options) {
  if (train.empty()) throw Error("train_relation_svm: empty training set");
  if (num_relations < 1) throw Error("train_relation_svm: no relations");
  const std::size_t dims = variant_dims(variant, width);
  for (const auto& s : train) {
    if (s.features.size() != dims) throw Error("train_relation_svm: feature dimension mismatch");
    if (s.relation < 0 || s.relation >= num_relations) throw Error("train_relation_svm: relation out of range");
  }
  if (variant == RelationFeatureVariant::kNone) return frequency_model(train, num_relations, width);
  if (!(options.lambda > 0.0)) throw Error("train_relation_svm: lambda must be positive");

  RelationModel m;
  m.variant = variant;
  m.input_dims = dims;
  m.one_hot_width = width;
  m.num_relations = num_relations;
  m.weights.assign(static_cast<std::size_t>(num_relations), std::vector<double>(dims, 0.0));
  m.bias.assign(static_cast<std::size_t>(num_relations), 0.0);

  RelationModel avg = m;
  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      ++t;
      const auto& sample = train[idx];
      const double eta = 1.0 / (options.lambda * static_cast<double>(t));
      const auto [rival, loss] = worst_rival(m, sample);
      const double shrink = 1.0 - eta * options.lambda;
      for (auto& row : m.weights) {
        for (auto& w : row) w *= shrink;
      }
      for (auto& b : m.bias) b *= shrink;
      if (loss > 0.0) {
        auto& wy = m.weights[static_cast<std::size_t>(sample.relation)];
        auto& wr = m.weights[static_cast<std::size_t>(rival)];
        for (std::size_t i = 0; i < dims; ++i) {
          const double xi = sample.features[i];
          if (xi == 0.0) continue;
          wy[i] += eta * xi;
          wr[i] -= eta * xi;
        }
        m.bias[static_cast<std::size_t>(sample.relation)] += eta;
        m.bias[static_cast<std::size_t>(rival)] -= eta;
      }
      if (options.averaged_objective_trace != nullptr) {
        const double a = 1.0 / static_cast<double>(t);
        for (std::size_t r = 0; r < m.weights.size(); ++r) {
          for (std::size_t i = 0; i < dims; ++i) avg.weights[r][i] += a * (m.weights[r][i] - avg.weights[r][i]);
          avg.bias[r] += a * (m.bias[r] - avg.bias[r]);
        }
      }
    }
    if (options.averaged_objective_trace != nullptr) {
      options.averaged_objective_trace->push_back(relation_objective(avg, train, options.lambda));
    }
  }
  return m;
}

std::vector<double> score_relations(const RelationModel& m, const std::vector<double>& features) {
  if (m.variant == RelationFeatureVariant::kNone) {
    if (!features.empty()) throw Error("score_relations: RNone takes no features");
    return m.log_frequency;
  }
  if (features.size() != m.input_dims) {
    throw Error("score_relations: expected " + std::to_string(m.input_dims) + " features, got " +
                std::to_string(features.size()));
  }
  std::vector<double> out(static_cast<std::size_t>(m.num_relations));
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = dot(m.weights[r], features) + m.bias[r];
  return out;
}

double relation_objective(const RelationModel& m, const std::vector<RelationSample>& train, double lambda) {
  if (m.variant == RelationFeatureVariant::kNone || train.empty()) return 0.0;
  double norm = 0.0;
  for (std::size_t r = 0; r < m.weights.size(); ++r) {
    for (double w : m.weights[r]) norm += w * w;
    norm += m.bias[r] * m.bias[r];
  }
  double hinge = 0.0;
  for (const auto& s : train) hinge += worst_rival(m, s).second;
  return 0.5 * lambda * norm + hinge / static_cast<double>(train.size());
}

}  // namespace srobench
