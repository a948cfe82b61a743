#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "srobench/types.hpp"

namespace srobench {

// Frequency baselines. MF predicts the slot-wise modal triplet; SC draws
// r ~ p(R), then s ~ p(S|r) and o ~ p(O|r).
struct BaselineModel {
  enum class Kind { kMostFrequent, kStochasticConditional };
  Kind kind = Kind::kMostFrequent;
  int num_entities = 0;
  int num_relations = 0;

  SROTriplet mode{};  // MF

  std::vector<double> p_relation;                // SC: |R|
  std::vector<std::vector<double>> p_subject;    // SC: |R| x |E|, zero rows for unseen r
  std::vector<std::vector<double>> p_object;     // SC: |R| x |E|
};

// Slot-wise modes; ties go to the smallest index.
BaselineModel fit_mf(std::span<const SROTriplet> train, int num_entities, int num_relations);

// Maximum-likelihood p(R), p(S|R), p(O|R).
BaselineModel fit_sc(std::span<const SROTriplet> train, int num_entities, int num_relations);

// Inverse-CDF draw from a discrete distribution using 53 random bits.
int sample_discrete(std::span<const double> probs, std::mt19937_64& rng);

SROTriplet sample_sc_one(const BaselineModel& model, std::mt19937_64& rng);

// n independent draws, deterministic given the seed.
std::vector<SROTriplet> sample_sc(const BaselineModel& model, std::uint64_t seed, std::size_t n);

// Probability the SC model assigns to a full triplet.
double sc_probability(const BaselineModel& model, const SROTriplet& t);

// Full-triplet lookup over the training set. Only triplets seen in training
// can be predicted; they are ranked by detector evidence for the subject and
// object with the training frequency as a small prior.
struct MemorizerModel {
  std::map<SROTriplet, double> counts;
};

MemorizerModel fit_memorizer(std::span<const SROTriplet> train);

// Scores every memorized triplet for one box pair given entity score vectors.
std::vector<ScoredTriplet> memorizer_scores(const MemorizerModel& model, const std::vector<double>& f_s,
                                            const std::vector<double>& f_o);

}  // namespace srobench
