#pragma once

#include <algorithm>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "srobench/structured.hpp"
#include "srobench/types.hpp"

namespace fixtures {

using namespace srobench;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random unary potentials and random (normalized) bigram tables.
// With `coarse`, values are drawn from a small grid so ties are common.
inline TripletPotentials random_potentials(std::mt19937_64& rng, int ns, int nr, bool coarse = false) {
  auto value = [&] {
    return coarse ? static_cast<double>(std::uniform_int_distribution<int>(0, 3)(rng)) * 0.25 : uniform(rng, -1.0, 1.0);
  };
  TripletPotentials p;
  for (int i = 0; i < ns; ++i) p.f_s.push_back(value());
  for (int i = 0; i < ns; ++i) p.f_o.push_back(value());
  for (int i = 0; i < nr; ++i) p.f_r.push_back(value());
  auto tables = std::make_shared<BigramTables>(ns, nr);
  double sr_total = 0.0, ro_total = 0.0;
  for (int s = 0; s < ns; ++s) {
    for (int r = 0; r < nr; ++r) sr_total += (tables->sr(s, r) = coarse ? value() + 1.0 : uniform(rng, 0.0, 1.0));
  }
  for (int r = 0; r < nr; ++r) {
    for (int o = 0; o < ns; ++o) ro_total += (tables->ro(r, o) = coarse ? value() + 1.0 : uniform(rng, 0.0, 1.0));
  }
  for (int s = 0; s < ns; ++s) {
    for (int r = 0; r < nr; ++r) tables->sr(s, r) /= sr_total;
  }
  for (int r = 0; r < nr; ++r) {
    for (int o = 0; o < ns; ++o) tables->ro(r, o) /= ro_total;
  }
  p.tables = tables;
  return p;
}

inline ModelWeights random_weights(std::mt19937_64& rng, bool coarse = false) {
  if (coarse) {
    auto v = [&] { return static_cast<double>(std::uniform_int_distribution<int>(0, 2)(rng)); };
    return {v(), v(), v(), v(), v()};
  }
  return {uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2)};
}

// Exhaustive enumeration sorted by (score desc, triplet asc).
inline std::vector<ScoredTriplet> brute_force_ranking(const TripletPotentials& p, const ModelWeights& w) {
  std::vector<ScoredTriplet> all;
  for (int s = 0; s < p.num_entities(); ++s) {
    for (int r = 0; r < p.num_relations(); ++r) {
      for (int o = 0; o < p.num_entities(); ++o) all.push_back({{s, r, o}, score_triplet(p, w, s, r, o)});
    }
  }
  std::sort(all.begin(), all.end(), [](const ScoredTriplet& a, const ScoredTriplet& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.triplet < b.triplet;
  });
  return all;
}

inline int slot_hamming(const SROTriplet& a, const SROTriplet& b) {
  return (a.s != b.s) + (a.r != b.r) + (a.o != b.o);
}

// argmax of score + Hamming, first in (s, r, o) order among ties.
inline ScoredTriplet brute_force_augmented(const TripletPotentials& p, const ModelWeights& w, const SROTriplet& gold) {
  ScoredTriplet best{{-1, -1, -1}, 0.0};
  for (int s = 0; s < p.num_entities(); ++s) {
    for (int r = 0; r < p.num_relations(); ++r) {
      for (int o = 0; o < p.num_entities(); ++o) {
        const SROTriplet t{s, r, o};
        const double v = score_triplet(p, w, s, r, o) + static_cast<double>(slot_hamming(t, gold));
        if (best.triplet.s < 0 || v > best.score) best = {t, v};
      }
    }
  }
  return best;
}

// Independent evaluation of the regularized structured hinge objective.
inline double brute_force_objective(std::span<const SsvmSample> train, const ModelWeights& w, double lambda) {
  const auto a = w.as_array();
  double reg = 0.0;
  for (double x : a) reg += x * x;
  double hinge = 0.0;
  for (const auto& ex : train) {
    const double gold = score_triplet(ex.potentials, w, ex.gold.s, ex.gold.r, ex.gold.o);
    hinge += brute_force_augmented(ex.potentials, w, ex.gold).score - gold;
  }
  return 0.5 * lambda * reg + hinge / static_cast<double>(train.size());
}

// 50 examples where each gold triplet is the pointwise maximizer of f_S,
// f_O and f_R; bigram tables come from the gold triplets.
inline std::vector<SsvmSample> dominant_gold_fixture(std::uint64_t seed, int n = 50, int ns = 8, int nr = 5) {
  std::mt19937_64 rng(seed);
  std::vector<SROTriplet> golds;
  for (int i = 0; i < n; ++i) {
    golds.push_back({std::uniform_int_distribution<int>(0, ns - 1)(rng), std::uniform_int_distribution<int>(0, nr - 1)(rng),
                     std::uniform_int_distribution<int>(0, ns - 1)(rng)});
  }
  auto tables = std::make_shared<const BigramTables>(bigram_tables(golds, ns, nr));
  std::vector<SsvmSample> out;
  for (const auto& g : golds) {
    TripletPotentials p;
    for (int i = 0; i < ns; ++i) p.f_s.push_back(i == g.s ? uniform(rng, 0.6, 1.0) : uniform(rng, 0.0, 0.5));
    for (int i = 0; i < ns; ++i) p.f_o.push_back(i == g.o ? uniform(rng, 0.6, 1.0) : uniform(rng, 0.0, 0.5));
    for (int i = 0; i < nr; ++i) p.f_r.push_back(i == g.r ? uniform(rng, 0.6, 1.0) : uniform(rng, -0.5, 0.5));
    p.tables = tables;
    out.push_back({std::move(p), g});
  }
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("srobench_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
