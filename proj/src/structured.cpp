#include <cmath>
#include "srobench/structured.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <tuple>

namespace srobench {

BigramTables::BigramTables(int num_entities, int num_relations)
    : num_entities_(num_entities),
      num_relations_(num_relations),
      sr_(static_cast<std::size_t>(num_entities * num_relations), 0.0),
      ro_(static_cast<std::size_t>(num_relations * num_entities), 0.0) {}

BigramTables bigram_tables(std::span<const SROTriplet> train, int num_entities, int num_relations) {
  if (train.empty()) throw Error("bigram_tables: empty training set");
  BigramTables t(num_entities, num_relations);
  for (const auto& x : train) {
    if (x.s < 0 || x.s >= num_entities || x.o < 0 || x.o >= num_entities || x.r < 0 || x.r >= num_relations) {
      throw Error("bigram_tables: triplet outside vocabulary");
    }
    t.sr(x.s, x.r) += 1.0;
    t.ro(x.r, x.o) += 1.0;
  }
  const double n = static_cast<double>(train.size());
  for (int s = 0; s < num_entities; ++s) {
    for (int r = 0; r < num_relations; ++r) t.sr(s, r) /= n;
  }
  for (int r = 0; r < num_relations; ++r) {
    for (int o = 0; o < num_entities; ++o) t.ro(r, o) /= n;
  }
  return t;
}

std::array<double, 5> joint_features(const TripletPotentials& p, const SROTriplet& t) {
  return {p.f_s[static_cast<std::size_t>(t.s)], p.f_o[static_cast<std::size_t>(t.o)],
          p.f_r[static_cast<std::size_t>(t.r)], p.tables->sr(t.s, t.r), p.tables->ro(t.r, t.o)};
}

namespace {

// Chain decomposition for one relation: score = (c + a[s]) + b[o].
struct RelationTerms {
  double c = 0.0;
  std::vector<double> a;
  std::vector<double> b;
};

RelationTerms relation_terms(const TripletPotentials& p, const ModelWeights& w, int r) {
  RelationTerms t;
  t.c = w.r * p.f_r[static_cast<std::size_t>(r)];
  t.a.resize(p.f_s.size());
  t.b.resize(p.f_o.size());
  for (std::size_t s = 0; s < t.a.size(); ++s) t.a[s] = w.s * p.f_s[s] + w.sr * p.tables->sr(static_cast<int>(s), r);
  for (std::size_t o = 0; o < t.b.size(); ++o) t.b[o] = w.o * p.f_o[o] + w.ro * p.tables->ro(r, static_cast<int>(o));
  return t;
}

std::vector<int> descending_order(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int x, int y) { return v[static_cast<std::size_t>(x)] > v[static_cast<std::size_t>(y)]; });
  return idx;
}

bool ranks_before(const ScoredTriplet& x, const ScoredTriplet& y) {
  if (x.score != y.score) return x.score > y.score;
  return x.triplet < y.triplet;
}

void check_potentials(const TripletPotentials& p) {
  if (!p.tables) throw Error("triplet potentials have no bigram tables");
  if (p.tables->num_entities() != p.num_entities() || static_cast<int>(p.f_o.size()) != p.num_entities() ||
      p.tables->num_relations() != p.num_relations()) {
    throw Error("triplet potentials do not match bigram table dimensions");
  }
}

}  // namespace

double score_triplet(const TripletPotentials& p, const ModelWeights& w, int s, int r, int o) {
  const double subject = w.s * p.f_s[static_cast<std::size_t>(s)] + w.sr * p.tables->sr(s, r);
  const double object = w.o * p.f_o[static_cast<std::size_t>(o)] + w.ro * p.tables->ro(r, o);
  return (w.r * p.f_r[static_cast<std::size_t>(r)] + subject) + object;
}

std::vector<ScoredTriplet> infer_topk(const TripletPotentials& p, const ModelWeights& w, std::size_t k) {
  if (k == 0) throw Error("infer_topk: k must be >= 1");
  check_potentials(p);
  const int ns = p.num_entities();
  const int nr = p.num_relations();
  const std::size_t total = static_cast<std::size_t>(ns) * static_cast<std::size_t>(nr) * static_cast<std::size_t>(ns);
  if (total == 0) return {};
  k = std::min(k, total);

  struct Lists {
    RelationTerms terms;
    std::vector<int> subjects;  // by a descending, index ascending
    std::vector<int> objects;
  };
  std::vector<Lists> lists(static_cast<std::size_t>(nr));
  for (int r = 0; r < nr; ++r) {
    auto& l = lists[static_cast<std::size_t>(r)];
    l.terms = relation_terms(p, w, r);
    l.subjects = descending_order(l.terms.a);
    l.objects = descending_order(l.terms.b);
  }

  struct Node {
    double score;
    int r;
    int i;
    int j;
    bool operator<(const Node& other) const { return score < other.score; }
  };
  auto make_node = [&](int r, int i, int j) {
    const auto& l = lists[static_cast<std::size_t>(r)];
    const double score = (l.terms.c + l.terms.a[static_cast<std::size_t>(l.subjects[static_cast<std::size_t>(i)])]) +
                         l.terms.b[static_cast<std::size_t>(l.objects[static_cast<std::size_t>(j)])];
    return Node{score, r, i, j};
  };

  std::priority_queue<Node> frontier;
  for (int r = 0; r < nr; ++r) frontier.push(make_node(r, 0, 0));

  // Scores are non-increasing along both sorted lists, so popping in score
  // order enumerates triplets best-first. Once k are collected, keep popping
  // anything tied with the k-th score so the (s, r, o) tie-break can be applied.
  std::vector<ScoredTriplet> collected;
  double threshold = 0.0;
  while (!frontier.empty()) {
    if (collected.size() >= k && frontier.top().score < threshold) break;
    const Node n = frontier.top();
    frontier.pop();
    const auto& l = lists[static_cast<std::size_t>(n.r)];
    collected.push_back({{l.subjects[static_cast<std::size_t>(n.i)], n.r, l.objects[static_cast<std::size_t>(n.j)]}, n.score});
    if (collected.size() == k) threshold = n.score;
    if (n.j + 1 < ns) frontier.push(make_node(n.r, n.i, n.j + 1));
    if (n.j == 0 && n.i + 1 < ns) frontier.push(make_node(n.r, n.i + 1, 0));
  }
  std::sort(collected.begin(), collected.end(), ranks_before);
  collected.resize(k);
  return collected;
}

int hamming(const SROTriplet& a, const SROTriplet& b) {
  return static_cast<int>(a.s != b.s) + static_cast<int>(a.r != b.r) + static_cast<int>(a.o != b.o);
}

ScoredTriplet loss_augmented_infer(const TripletPotentials& p, const ModelWeights& w, const SROTriplet& gold,
                                   double loss_scale) {
  check_potentials(p);
  const int ns = p.num_entities();
  const int nr = p.num_relations();
  if (ns == 0 || nr == 0) throw Error("loss_augmented_infer: empty vocabulary");
  if (gold.s < 0 || gold.s >= ns || gold.o < 0 || gold.o >= ns || gold.r < 0 || gold.r >= nr) {
    throw Error("loss_augmented_infer: gold triplet outside vocabulary");
  }

  bool have = false;
  ScoredTriplet best{};
  auto offer = [&](const ScoredTriplet& cand) {
    if (!have || ranks_before(cand, best)) {
      best = cand;
      have = true;
    }
  };

  for (int r = 0; r < nr; ++r) {
    const RelationTerms t = relation_terms(p, w, r);
    const int dr = r != gold.r ? 1 : 0;
    // Split each slot into {gold} and {everything else}; within a class the
    // loss is constant and the value is monotone in a[s] and b[o].
    for (int s_wrong = 0; s_wrong < 2; ++s_wrong) {
      for (int o_wrong = 0; o_wrong < 2; ++o_wrong) {
        auto in_s = [&](int s) { return (s != gold.s) == static_cast<bool>(s_wrong); };
        auto in_o = [&](int o) { return (o != gold.o) == static_cast<bool>(o_wrong); };
        int s_arg = -1;
        for (int s = 0; s < ns; ++s) {
          if (in_s(s) && (s_arg < 0 || t.a[static_cast<std::size_t>(s)] > t.a[static_cast<std::size_t>(s_arg)])) s_arg = s;
        }
        int o_arg = -1;
        for (int o = 0; o < ns; ++o) {
          if (in_o(o) && (o_arg < 0 || t.b[static_cast<std::size_t>(o)] > t.b[static_cast<std::size_t>(o_arg)])) o_arg = o;
        }
        if (s_arg < 0 || o_arg < 0) continue;
        const double delta = loss_scale * static_cast<double>(s_wrong + dr + o_wrong);
        auto value = [&](int s, int o) {
          return ((t.c + t.a[static_cast<std::size_t>(s)]) + t.b[static_cast<std::size_t>(o)]) + delta;
        };
        const double v = value(s_arg, o_arg);
        // Lexicographically first maximizer: smallest s that can still reach v
        // with the best object, then the smallest o for that s.
        int s_star = s_arg;
        for (int s = 0; s < ns; ++s) {
          if (in_s(s) && value(s, o_arg) == v) {
            s_star = s;
            break;
          }
        }
        int o_star = o_arg;
        for (int o = 0; o < ns; ++o) {
          if (in_o(o) && value(s_star, o) == v) {
            o_star = o;
            break;
          }
        }
        offer({{s_star, r, o_star}, v});
      }
    }
  }
  return best;
}

double ssvm_objective(std::span<const SsvmSample> train, const ModelWeights& w, double lambda) {
  if (train.empty()) throw Error("ssvm_objective: empty training set");
  double hinge = 0.0;
  for (const auto& ex : train) {
    const auto aug = loss_augmented_infer(ex.potentials, w, ex.gold);
    hinge += aug.score - score_triplet(ex.potentials, w, ex.gold.s, ex.gold.r, ex.gold.o);
  }
  double norm = 0.0;
  for (double x : w.as_array()) norm += x * x;
  return 0.5 * lambda * norm + hinge / static_cast<double>(train.size());
}

SsvmTrainResult train_ssvm(std::span<const SsvmSample> train, const SsvmTrainOptions& options) {
  if (train.empty()) throw Error("train_ssvm: empty training set");
  if (!(options.lambda > 0.0)) throw Error("train_ssvm: lambda must be positive");

  SsvmTrainResult result;
  result.initial_objective = ssvm_objective(train, options.initial, options.lambda);

  auto w = options.initial.as_array();
  auto avg = w;
  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      ++t;
      const auto& ex = train[idx];
      const double eta = 1.0 / (options.lambda * static_cast<double>(t));
      const auto current = ModelWeights::from_array(w);
      const auto y_hat = loss_augmented_infer(ex.potentials, current, ex.gold).triplet;
      const auto phi_gold = joint_features(ex.potentials, ex.gold);
      const auto phi_hat = joint_features(ex.potentials, y_hat);
      const double shrink = 1.0 - eta * options.lambda;
      for (std::size_t d = 0; d < w.size(); ++d) w[d] = shrink * w[d] + eta * (phi_gold[d] - phi_hat[d]);
      // Pegasos projection onto the ball of radius 1/sqrt(lambda), which contains the optimum.
      double norm2 = 0.0;
      for (double x : w) norm2 += x * x;
      const double radius2 = 1.0 / options.lambda;
      if (norm2 > radius2) {
        const double scale = std::sqrt(radius2 / norm2);
        for (double& x : w) x *= scale;
      }
      const double a = 1.0 / static_cast<double>(t);
      for (std::size_t d = 0; d < w.size(); ++d) avg[d] += a * (w[d] - avg[d]);
    }
    result.epoch_objectives.push_back(
        ssvm_objective(train, ModelWeights::from_array(options.average ? avg : w), options.lambda));
  }
  result.weights = ModelWeights::from_array(options.average && t > 0 ? avg : w);
  result.objective = ssvm_objective(train, result.weights, options.lambda);
  return result;
}

}  // namespace srobench
