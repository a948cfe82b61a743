#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "srobench/types.hpp"

namespace srobench {

// Joint bigram probabilities estimated from training triplets.
class BigramTables {
 public:
  BigramTables() = default;
  BigramTables(int num_entities, int num_relations);

  int num_entities() const { return num_entities_; }
  int num_relations() const { return num_relations_; }
  double sr(int s, int r) const { return sr_[static_cast<std::size_t>(s * num_relations_ + r)]; }
  double ro(int r, int o) const { return ro_[static_cast<std::size_t>(r * num_entities_ + o)]; }
  double& sr(int s, int r) { return sr_[static_cast<std::size_t>(s * num_relations_ + r)]; }
  double& ro(int r, int o) { return ro_[static_cast<std::size_t>(r * num_entities_ + o)]; }

 private:
  int num_entities_ = 0;
  int num_relations_ = 0;
  std::vector<double> sr_;  // entities x relations
  std::vector<double> ro_;  // relations x entities
};

// f_SR(s,r) = count(s,r)/N and f_RO(r,o) = count(r,o)/N, no smoothing.
BigramTables bigram_tables(std::span<const SROTriplet> train, int num_entities, int num_relations);

struct ModelWeights {
  double s = 1.0;
  double o = 1.0;
  double r = 1.0;
  double sr = 1.0;
  double ro = 1.0;

  std::array<double, 5> as_array() const { return {s, o, r, sr, ro}; }
  static ModelWeights from_array(const std::array<double, 5>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }
  bool operator==(const ModelWeights&) const = default;
};

// Per-instance unary potentials plus the shared bigram tables.
struct TripletPotentials {
  std::vector<double> f_s;
  std::vector<double> f_o;
  std::vector<double> f_r;
  std::shared_ptr<const BigramTables> tables;

  int num_entities() const { return static_cast<int>(f_s.size()); }
  int num_relations() const { return static_cast<int>(f_r.size()); }
};

// Feature vector phi(s,r,o) = (f_S(s), f_O(o), f_R(r), f_SR(s,r), f_RO(r,o)).
std::array<double, 5> joint_features(const TripletPotentials& p, const SROTriplet& t);

// w_S f_S(s) + w_O f_O(o) + w_R f_R(r) + w_SR f_SR(s,r) + w_RO f_RO(r,o),
// evaluated as (w_R f_R + (w_S f_S + w_SR f_SR)) + (w_O f_O + w_RO f_RO) so that
// the chain decomposition used by the decoders rounds identically.
double score_triplet(const TripletPotentials& p, const ModelWeights& w, int s, int r, int o);

// The k best triplets by score, ties broken by (s, r, o). Exact: identical to
// sorting all |S||R||O| triplets. For each relation the subject and object
// terms are independent, so per-relation sorted lists are merged lazily.
std::vector<ScoredTriplet> infer_topk(const TripletPotentials& p, const ModelWeights& w, std::size_t k);

// argmax of score + loss_scale * Hamming(y, gold), ties by (s, r, o).
// loss_scale = 0 gives plain MAP inference.
ScoredTriplet loss_augmented_infer(const TripletPotentials& p, const ModelWeights& w, const SROTriplet& gold,
                                   double loss_scale = 1.0);

int hamming(const SROTriplet& a, const SROTriplet& b);

struct SsvmSample {
  TripletPotentials potentials;
  SROTriplet gold;
};

struct SsvmTrainOptions {
  double lambda = 1e-4;
  int epochs = 100;
  std::uint64_t seed = 7;
  ModelWeights initial{};
  // Return the running average of the iterates instead of the final one.
  bool average = false;
};

struct SsvmTrainResult {
  ModelWeights weights;
  double objective = 0.0;                // at the returned weights
  double initial_objective = 0.0;        // at options.initial
  std::vector<double> epoch_objectives;  // at the iterate after each epoch
};

// Stochastic subgradient descent on
//   (lambda/2)|w|^2 + (1/N) sum_i [max_y (Delta(y,y_i) + w.phi_i(y)) - w.phi_i(y_i)]
// with step 1/(lambda t) and a seeded per-epoch shuffle.
SsvmTrainResult train_ssvm(std::span<const SsvmSample> train, const SsvmTrainOptions& options = {});

// Regularized structured hinge objective, computed with loss_augmented_infer.
double ssvm_objective(std::span<const SsvmSample> train, const ModelWeights& w, double lambda);

}  // namespace srobench
