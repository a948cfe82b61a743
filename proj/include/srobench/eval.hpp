#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "srobench/alignment.hpp"
#include "srobench/baselines.hpp"
#include "srobench/features.hpp"
#include "srobench/relations.hpp"
#include "srobench/splits.hpp"
#include "srobench/structured.hpp"
#include "srobench/types.hpp"

namespace srobench {

struct ImagePrediction {
  std::string image_id;
  std::vector<ScoredTriplet> ranked;  // unique triplets, scores non-increasing
};

// Ranks triplets for one ordered (subject box, object box) pair. The pair is
// passed as an ImageExample whose gold set may be empty.
using PairScorer = std::function<std::vector<ScoredTriplet>(const ImageExample& pair, std::size_t k)>;

struct BoxCandidate {
  BoundingBox box;
  ScoreMap scores;
};

// Every distinct box of an image.
struct ImageBoxes {
  std::string image_id;
  std::vector<BoxCandidate> boxes;
};

// Merges per-pair rankings: keep the max score per triplet, re-rank by
// (score desc, triplet asc), truncate to k.
std::vector<ScoredTriplet> pool_rankings(const std::vector<std::vector<ScoredTriplet>>& rankings, std::size_t k);

// Scores every ordered pair of distinct boxes and pools the results.
// Fewer than two boxes gives an empty prediction.
ImagePrediction predict_image(const PairScorer& scorer, const ImageBoxes& image, std::size_t k);

// Scores only the example's own (subject, object) pair.
ImagePrediction predict_pair(const PairScorer& scorer, const ImageExample& example, std::size_t k);

// |top-k(pred) intersect gold| / k; the denominator stays k when fewer are predicted.
double precision_at_k(const ImagePrediction& pred, const std::set<SROTriplet>& gold, std::size_t k);

enum class PoolMode {
  kAllPairs,   // every ordered pair of the image's boxes
  kGoldPairs,  // only the annotated (subject, object) pairs
};

// Test-side (or train-side) images of a fold: boxes, annotated pairs, gold union.
struct EvalImage {
  std::string image_id;
  ImageBoxes boxes;
  std::vector<std::size_t> pairs;  // example ids
  std::set<SROTriplet> gold;
};

std::vector<EvalImage> group_images(const std::vector<ImageExample>& examples, const std::vector<std::size_t>& ids);

ImagePrediction predict(const PairScorer& scorer, const EvalImage& image, const std::vector<ImageExample>& examples,
                        std::size_t k, PoolMode mode);

struct FoldEval {
  std::string fold;
  std::vector<std::size_t> ks;
  std::vector<double> test;   // mean p@k over test images, per k
  std::vector<double> train;  // same over train images
  std::size_t n_test_images = 0;
  std::size_t n_train_images = 0;
};

// Mean precision@k over the fold's test images (and train images).
// Throws when the test side is empty.
FoldEval evaluate(const PairScorer& scorer, const SplitFold& fold, const std::vector<ImageExample>& examples,
                  const std::vector<std::size_t>& ks, PoolMode mode = PoolMode::kAllPairs);

// SC precision: per image, draw max(ks) triplets (deduplicated in draw
// order) and average precision over `repetitions` seeded draws.
FoldEval evaluate_sc_sampled(const BaselineModel& sc, const SplitFold& fold, const std::vector<ImageExample>& examples,
                             const std::vector<std::size_t>& ks, int repetitions, std::uint64_t seed);

// Closed-form expectation of the sampled SC precision.
FoldEval evaluate_sc_expected(const BaselineModel& sc, const SplitFold& fold, const std::vector<ImageExample>& examples,
                              const std::vector<std::size_t>& ks);

struct EvalSummary {
  std::vector<double> mean;
  std::vector<double> sem;
  std::vector<std::vector<double>> per_fold;  // [k][fold]
};

struct EvalReport {
  std::vector<std::size_t> ks;
  EvalSummary test;
  EvalSummary train;
  std::size_t n_test_images = 0;
};

// Mean of fold means and SEM = sample std / sqrt(#folds) (0 for one fold).
EvalReport aggregate(const std::vector<FoldEval>& folds);

// Detector-driven triplet scorer: entity potentials through M, the relation
// classifier, bigram tables and the five mixing weights.
struct TripletModel {
  EntityPotentialMatrix entity_matrix;
  RelationModel relation;
  Normalizer normalizer;
  std::shared_ptr<const BigramTables> tables;
  ModelWeights weights;

  TripletPotentials potentials(const ImageExample& pair) const;
};

// Potentials for training: f_R uses the argmax entities, as at inference.
TripletPotentials build_potentials(const TripletModel& model, const ImageExample& pair);

PairScorer ssvm_scorer(std::shared_ptr<const TripletModel> model);
PairScorer mf_scorer(const BaselineModel& mf);
PairScorer memorizer_scorer(std::shared_ptr<const MemorizerModel> model, std::shared_ptr<const EntityPotentialMatrix> m);

// Samples n predictions uniformly without replacement and renders a review
// sheet: image_id, subject, relation, object, exists_in_image, reasonable_description.
std::string export_manual_eval(const std::vector<ImagePrediction>& predictions, std::size_t n, std::uint64_t seed,
                               const Vocabulary& vocab);

// Worker count from SROBENCH_THREADS (default: hardware concurrency).
unsigned worker_threads();

// Runs fn(i) for i in [0, n) across worker_threads(); fn writes to slot i only.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace srobench
