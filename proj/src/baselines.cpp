#include "srobench/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace srobench {
namespace {

void check_triplets(std::span<const SROTriplet> train, int ne, int nr, const char* who) {
  if (train.empty()) throw Error(std::string(who) + ": empty training set");
  for (const auto& t : train) {
    if (t.s < 0 || t.s >= ne || t.o < 0 || t.o >= ne || t.r < 0 || t.r >= nr) {
      throw Error(std::string(who) + ": triplet outside vocabulary");
    }
  }
}

int argmax_first(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

void normalize_row(std::vector<double>& row) {
  double total = 0.0;
  for (double x : row) total += x;
  if (total <= 0.0) return;
  for (double& x : row) x /= total;
}

}  // namespace

BaselineModel fit_mf(std::span<const SROTriplet> train, int ne, int nr) {
  check_triplets(train, ne, nr, "fit_mf");
  std::vector<double> s(static_cast<std::size_t>(ne), 0.0);
  std::vector<double> o(static_cast<std::size_t>(ne), 0.0);
  std::vector<double> r(static_cast<std::size_t>(nr), 0.0);
  for (const auto& t : train) {
    s[static_cast<std::size_t>(t.s)] += 1.0;
    r[static_cast<std::size_t>(t.r)] += 1.0;
    o[static_cast<std::size_t>(t.o)] += 1.0;
  }
  BaselineModel m;
  m.kind = BaselineModel::Kind::kMostFrequent;
  m.num_entities = ne;
  m.num_relations = nr;
  m.mode = {argmax_first(s), argmax_first(r), argmax_first(o)};
  return m;
}

BaselineModel fit_sc(std::span<const SROTriplet> train, int ne, int nr) {
  check_triplets(train, ne, nr, "fit_sc");
  BaselineModel m;
  m.kind = BaselineModel::Kind::kStochasticConditional;
  m.num_entities = ne;
  m.num_relations = nr;
  m.p_relation.assign(static_cast<std::size_t>(nr), 0.0);
  m.p_subject.assign(static_cast<std::size_t>(nr), std::vector<double>(static_cast<std::size_t>(ne), 0.0));
  m.p_object = m.p_subject;
  for (const auto& t : train) {
    m.p_relation[static_cast<std::size_t>(t.r)] += 1.0;
    m.p_subject[static_cast<std::size_t>(t.r)][static_cast<std::size_t>(t.s)] += 1.0;
    m.p_object[static_cast<std::size_t>(t.r)][static_cast<std::size_t>(t.o)] += 1.0;
  }
  normalize_row(m.p_relation);
  for (auto& row : m.p_subject) normalize_row(row);
  for (auto& row : m.p_object) normalize_row(row);
  return m;
}

int sample_discrete(std::span<const double> probs, std::mt19937_64& rng) {
  if (probs.empty()) throw Error("sample_discrete: empty distribution");
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  if (last_positive < 0) throw Error("sample_discrete: distribution has no mass");
  return last_positive;  // rounding left cum slightly below 1
}

SROTriplet sample_sc_one(const BaselineModel& m, std::mt19937_64& rng) {
  if (m.kind != BaselineModel::Kind::kStochasticConditional) throw Error("sample_sc: not an SC model");
  const int r = sample_discrete(m.p_relation, rng);
  const int s = sample_discrete(m.p_subject[static_cast<std::size_t>(r)], rng);
  const int o = sample_discrete(m.p_object[static_cast<std::size_t>(r)], rng);
  return {s, r, o};
}

std::vector<SROTriplet> sample_sc(const BaselineModel& m, std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<SROTriplet> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_sc_one(m, rng));
  return out;
}

double sc_probability(const BaselineModel& m, const SROTriplet& t) {
  if (m.kind != BaselineModel::Kind::kStochasticConditional) throw Error("sc_probability: not an SC model");
  if (t.r < 0 || t.r >= m.num_relations || t.s < 0 || t.s >= m.num_entities || t.o < 0 || t.o >= m.num_entities) {
    return 0.0;
  }
  const auto r = static_cast<std::size_t>(t.r);
  return m.p_relation[r] * m.p_subject[r][static_cast<std::size_t>(t.s)] * m.p_object[r][static_cast<std::size_t>(t.o)];
}

MemorizerModel fit_memorizer(std::span<const SROTriplet> train) {
  if (train.empty()) throw Error("fit_memorizer: empty training set");
  MemorizerModel m;
  for (const auto& t : train) m.counts[t] += 1.0;
  return m;
}

std::vector<ScoredTriplet> memorizer_scores(const MemorizerModel& m, const std::vector<double>& f_s,
                                            const std::vector<double>& f_o) {
  constexpr double kPriorWeight = 1e-3;
  std::vector<ScoredTriplet> out;
  out.reserve(m.counts.size());
  for (const auto& [t, count] : m.counts) {
    const double evidence = f_s.at(static_cast<std::size_t>(t.s)) + f_o.at(static_cast<std::size_t>(t.o));
    out.push_back({t, evidence + kPriorWeight * std::log(count)});
  }
  return out;
}

}  // namespace srobench
