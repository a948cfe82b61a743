#include "srobench/alignment.hpp"

#include <algorithm>
#include <cmath>

namespace srobench {

CooccurrenceCounts count_cooccurrence(const std::vector<Observation>& units) {
  CooccurrenceCounts c;
  for (const auto& u : units) {
    c.grand_total += 1.0;
    for (const auto& e : u.entities) c.entity_totals[e] += 1.0;
    for (const auto& l : u.labels) c.label_totals[l] += 1.0;
    for (const auto& e : u.entities) {
      for (const auto& l : u.labels) c.joint[{e, l}] += 1.0;
    }
  }
  return c;
}

PmiTable compute_pmi(const CooccurrenceCounts& counts) {
  const double n = counts.grand_total;
  if (!(n > 0.0)) throw Error("compute_pmi: grand total must be positive");
  PmiTable out;
  for (const auto& [key, joint] : counts.joint) {
    if (joint < 0.0) throw Error("compute_pmi: negative count for (" + key.first + ", " + key.second + ")");
    if (joint == 0.0) continue;
    auto e = counts.entity_totals.find(key.first);
    auto l = counts.label_totals.find(key.second);
    if (e == counts.entity_totals.end() || l == counts.label_totals.end() || e->second <= 0.0 || l->second <= 0.0) {
      throw Error("compute_pmi: missing marginal for (" + key.first + ", " + key.second + ")");
    }
    if (joint > e->second || joint > l->second || e->second > n || l->second > n) {
      throw Error("compute_pmi: inconsistent marginals for (" + key.first + ", " + key.second + ")");
    }
    out[key] = std::log((joint * n) / (e->second * l->second));
  }
  return out;
}

AlignmentMap build_alignment(const PmiTable& pmi, std::size_t top_m, const std::vector<PruneRule>& prune) {
  if (top_m == 0) throw Error("build_alignment: top_m must be >= 1");
  std::set<std::pair<std::string, std::string>> deny;
  std::set<std::pair<std::string, std::string>> allow;
  for (const auto& rule : prune) {
    (rule.mode == PruneRule::Mode::kDeny ? deny : allow).insert({rule.entity, rule.label});
  }

  std::map<std::string, std::vector<std::pair<std::string, double>>> candidates;
  for (const auto& [key, value] : pmi) candidates[key.first].emplace_back(key.second, value);

  AlignmentMap out;
  for (auto& [entity, labels] : candidates) {
    std::sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (labels.size() > top_m) labels.resize(top_m);
    std::vector<std::pair<std::string, double>> kept;
    for (const auto& lp : labels) {
      std::pair<std::string, std::string> key{entity, lp.first};
      if (deny.count(key)) continue;
      if (!allow.empty() && !allow.count(key)) continue;
      kept.push_back(lp);
    }
    if (kept.empty()) continue;
    const double floor = kept.back().second;
    for (auto& lp : kept) lp.second = lp.second - floor + 1.0;
    out.by_entity.emplace(entity, std::move(kept));
  }
  return out;
}

double EntityPotentialMatrix::at(int entity, const std::string& label) const {
  for (const auto& [l, w] : row(entity)) {
    if (l == label) return w;
  }
  return 0.0;
}

EntityPotentialMatrix build_entity_potential_matrix(const std::vector<ImageExample>& train,
                                                    const AlignmentMap& alignment, const Vocabulary& vocab,
                                                    double presence_threshold) {
  if (train.empty()) throw Error("build_entity_potential_matrix: no training examples");
  std::vector<std::map<std::string, double>> counts(static_cast<std::size_t>(vocab.num_entities()));

  auto tally = [&](int entity, const ScoreMap& scores) {
    const auto& term = vocab.entity(entity);
    for (const auto& [label, score] : scores) {
      if (score > presence_threshold && alignment.contains(term, label)) {
        counts[static_cast<std::size_t>(entity)][label] += 1.0;
      }
    }
  };
  for (const auto& ex : train) {
    std::set<int> subjects;
    std::set<int> objects;
    for (const auto& t : ex.gold) {
      subjects.insert(t.s);
      objects.insert(t.o);
    }
    for (int s : subjects) tally(s, ex.subject_scores);
    for (int o : objects) tally(o, ex.object_scores);
  }

  std::vector<std::vector<std::pair<std::string, double>>> rows(counts.size());
  for (std::size_t e = 0; e < counts.size(); ++e) {
    double total = 0.0;
    for (const auto& [label, c] : counts[e]) total += c;
    if (total <= 0.0) continue;
    for (const auto& [label, c] : counts[e]) rows[e].emplace_back(label, c / total);
  }
  return EntityPotentialMatrix(std::move(rows));
}

std::vector<double> entity_scores(const EntityPotentialMatrix& m, const ScoreMap& detector_scores) {
  std::vector<double> f(static_cast<std::size_t>(m.num_entities()), 0.0);
  if (detector_scores.empty()) return f;
  for (int e = 0; e < m.num_entities(); ++e) {
    double acc = 0.0;
    for (const auto& [label, weight] : m.row(e)) {
      auto it = detector_scores.find(label);
      if (it != detector_scores.end()) acc += weight * it->second;
    }
    f[static_cast<std::size_t>(e)] = acc;
  }
  return f;
}

}  // namespace srobench
