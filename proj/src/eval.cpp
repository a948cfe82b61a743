#include "srobench/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace srobench {
namespace {

bool ranks_before(const ScoredTriplet& x, const ScoredTriplet& y) {
  if (x.score != y.score) return x.score > y.score;
  return x.triplet < y.triplet;
}

std::size_t max_k(const std::vector<std::size_t>& ks) {
  if (ks.empty()) throw Error("evaluation needs at least one k");
  const auto k = *std::max_element(ks.begin(), ks.end());
  if (k == 0) throw Error("k must be >= 1");
  return k;
}

int argmax_first(const std::vector<double>& v) {
  if (v.empty()) return 0;
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::vector<ScoredTriplet> pool_rankings(const std::vector<std::vector<ScoredTriplet>>& rankings, std::size_t k) {
  std::map<SROTriplet, double> best;
  for (const auto& ranking : rankings) {
    for (const auto& st : ranking) {
      auto [it, inserted] = best.emplace(st.triplet, st.score);
      if (!inserted && st.score > it->second) it->second = st.score;
    }
  }
  std::vector<ScoredTriplet> out;
  out.reserve(best.size());
  for (const auto& [t, s] : best) out.push_back({t, s});
  std::sort(out.begin(), out.end(), ranks_before);
  if (out.size() > k) out.resize(k);
  return out;
}

ImagePrediction predict_image(const PairScorer& scorer, const ImageBoxes& image, std::size_t k) {
  ImagePrediction pred{image.image_id, {}};
  if (image.boxes.size() < 2) return pred;
  std::vector<std::vector<ScoredTriplet>> rankings;
  for (std::size_t i = 0; i < image.boxes.size(); ++i) {
    for (std::size_t j = 0; j < image.boxes.size(); ++j) {
      if (i == j) continue;
      ImageExample pair{image.image_id, image.boxes[i].box, image.boxes[j].box, image.boxes[i].scores,
                        image.boxes[j].scores, {}};
      rankings.push_back(scorer(pair, k));
    }
  }
  pred.ranked = pool_rankings(rankings, k);
  return pred;
}

ImagePrediction predict_pair(const PairScorer& scorer, const ImageExample& example, std::size_t k) {
  return {example.image_id, pool_rankings({scorer(example, k)}, k)};
}

double precision_at_k(const ImagePrediction& pred, const std::set<SROTriplet>& gold, std::size_t k) {
  if (k == 0) throw Error("precision_at_k: k must be >= 1");
  const std::size_t n = std::min(k, pred.ranked.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += gold.count(pred.ranked[i].triplet);
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::vector<EvalImage> group_images(const std::vector<ImageExample>& examples, const std::vector<std::size_t>& ids) {
  std::map<std::string, EvalImage> by_image;
  for (std::size_t id : ids) {
    const auto& ex = examples.at(id);
    auto& img = by_image[ex.image_id];
    img.image_id = ex.image_id;
    img.boxes.image_id = ex.image_id;
    img.pairs.push_back(id);
    img.gold.insert(ex.gold.begin(), ex.gold.end());
    for (const auto* cand : {&ex.subject_box, &ex.object_box}) {
      const auto& scores = cand == &ex.subject_box ? ex.subject_scores : ex.object_scores;
      auto same = [&](const BoxCandidate& b) { return b.box == *cand; };
      if (std::none_of(img.boxes.boxes.begin(), img.boxes.boxes.end(), same)) {
        img.boxes.boxes.push_back({*cand, scores});
      }
    }
  }
  std::vector<EvalImage> out;
  out.reserve(by_image.size());
  for (auto& [id, img] : by_image) {
    std::sort(img.boxes.boxes.begin(), img.boxes.boxes.end(),
              [](const BoxCandidate& a, const BoxCandidate& b) { return a.box < b.box; });
    out.push_back(std::move(img));
  }
  return out;
}

ImagePrediction predict(const PairScorer& scorer, const EvalImage& image, const std::vector<ImageExample>& examples,
                        std::size_t k, PoolMode mode) {
  if (mode == PoolMode::kAllPairs) return predict_image(scorer, image.boxes, k);
  std::vector<std::vector<ScoredTriplet>> rankings;
  for (std::size_t id : image.pairs) rankings.push_back(scorer(examples.at(id), k));
  return {image.image_id, pool_rankings(rankings, k)};
}

namespace {

std::vector<double> mean_precision(const PairScorer& scorer, const std::vector<EvalImage>& images,
                                   const std::vector<ImageExample>& examples, const std::vector<std::size_t>& ks,
                                   PoolMode mode) {
  const std::size_t kmax = max_k(ks);
  std::vector<std::vector<double>> per_image(images.size());
  parallel_for(images.size(), [&](std::size_t i) {
    const auto pred = predict(scorer, images[i], examples, kmax, mode);
    auto& row = per_image[i];
    for (std::size_t k : ks) row.push_back(precision_at_k(pred, images[i].gold, k));
  });
  std::vector<double> mean(ks.size(), 0.0);
  if (images.empty()) return mean;
  for (const auto& row : per_image) {
    for (std::size_t j = 0; j < ks.size(); ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(images.size());
  return mean;
}

template <typename PerImage>
std::vector<double> mean_over(const std::vector<EvalImage>& images, std::size_t nk, PerImage&& fn) {
  std::vector<double> mean(nk, 0.0);
  if (images.empty()) return mean;
  for (const auto& img : images) {
    const auto row = fn(img);
    for (std::size_t j = 0; j < nk; ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(images.size());
  return mean;
}

FoldEval fold_header(const SplitFold& fold, const std::vector<std::size_t>& ks, const std::vector<EvalImage>& test,
                     const std::vector<EvalImage>& train) {
  if (test.empty()) throw Error("evaluate: fold " + fold.name + " has an empty test set");
  FoldEval out;
  out.fold = fold.name;
  out.ks = ks;
  out.n_test_images = test.size();
  out.n_train_images = train.size();
  return out;
}

}  // namespace

FoldEval evaluate(const PairScorer& scorer, const SplitFold& fold, const std::vector<ImageExample>& examples,
                  const std::vector<std::size_t>& ks, PoolMode mode) {
  const auto test = group_images(examples, fold.test);
  const auto train = group_images(examples, fold.train);
  FoldEval out = fold_header(fold, ks, test, train);
  out.test = mean_precision(scorer, test, examples, ks, mode);
  out.train = mean_precision(scorer, train, examples, ks, mode);
  return out;
}

FoldEval evaluate_sc_sampled(const BaselineModel& sc, const SplitFold& fold, const std::vector<ImageExample>& examples,
                             const std::vector<std::size_t>& ks, int repetitions, std::uint64_t seed) {
  if (repetitions < 1) throw Error("evaluate_sc_sampled: repetitions must be >= 1");
  const std::size_t kmax = max_k(ks);
  const auto test = group_images(examples, fold.test);
  const auto train = group_images(examples, fold.train);
  FoldEval out = fold_header(fold, ks, test, train);
  auto run = [&](const std::vector<EvalImage>& images, std::uint64_t stream) {
    std::mt19937_64 rng(seed ^ (stream * 0x9e3779b97f4a7c15ULL));
    return mean_over(images, ks.size(), [&](const EvalImage& img) {
      std::vector<double> acc(ks.size(), 0.0);
      for (int rep = 0; rep < repetitions; ++rep) {
        ImagePrediction pred{img.image_id, {}};
        for (std::size_t d = 0; d < kmax; ++d) {
          const auto t = sample_sc_one(sc, rng);
          auto same = [&](const ScoredTriplet& x) { return x.triplet == t; };
          if (std::none_of(pred.ranked.begin(), pred.ranked.end(), same)) pred.ranked.push_back({t, 0.0});
        }
        for (std::size_t j = 0; j < ks.size(); ++j) acc[j] += precision_at_k(pred, img.gold, ks[j]);
      }
      for (double& a : acc) a /= static_cast<double>(repetitions);
      return acc;
    });
  };
  out.test = run(test, 1);
  out.train = run(train, 2);
  return out;
}

FoldEval evaluate_sc_expected(const BaselineModel& sc, const SplitFold& fold, const std::vector<ImageExample>& examples,
                              const std::vector<std::size_t>& ks) {
  max_k(ks);
  const auto test = group_images(examples, fold.test);
  const auto train = group_images(examples, fold.train);
  FoldEval out = fold_header(fold, ks, test, train);
  auto expected = [&](const EvalImage& img) {
    std::vector<double> row;
    for (std::size_t k : ks) {
      double hits = 0.0;
      for (const auto& t : img.gold) hits += 1.0 - std::pow(1.0 - sc_probability(sc, t), static_cast<double>(k));
      row.push_back(hits / static_cast<double>(k));
    }
    return row;
  };
  out.test = mean_over(test, ks.size(), expected);
  out.train = mean_over(train, ks.size(), expected);
  return out;
}

EvalReport aggregate(const std::vector<FoldEval>& folds) {
  if (folds.empty()) throw Error("aggregate: no folds");
  EvalReport report;
  report.ks = folds.front().ks;
  const std::size_t nk = report.ks.size();
  auto summarize = [&](auto member) {
    EvalSummary s;
    s.mean.assign(nk, 0.0);
    s.sem.assign(nk, 0.0);
    s.per_fold.assign(nk, {});
    for (std::size_t j = 0; j < nk; ++j) {
      for (const auto& f : folds) {
        if (f.ks != report.ks) throw Error("aggregate: folds evaluated at different k");
        s.per_fold[j].push_back((f.*member)[j]);
      }
      const auto& v = s.per_fold[j];
      const double n = static_cast<double>(v.size());
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
      s.mean[j] = mean;
      if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        s.sem[j] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
    }
    return s;
  };
  report.test = summarize(&FoldEval::test);
  report.train = summarize(&FoldEval::train);
  for (const auto& f : folds) report.n_test_images += f.n_test_images;
  return report;
}

TripletPotentials build_potentials(const TripletModel& model, const ImageExample& pair) {
  TripletPotentials p;
  p.f_s = entity_scores(model.entity_matrix, pair.subject_scores);
  p.f_o = entity_scores(model.entity_matrix, pair.object_scores);
  const auto x = relation_features(pair, argmax_first(p.f_s), argmax_first(p.f_o), model.relation.variant,
                                   model.normalizer, model.relation.one_hot_width);
  p.f_r = score_relations(model.relation, x);
  p.tables = model.tables;
  return p;
}

TripletPotentials TripletModel::potentials(const ImageExample& pair) const { return build_potentials(*this, pair); }

PairScorer ssvm_scorer(std::shared_ptr<const TripletModel> model) {
  return [model](const ImageExample& pair, std::size_t k) {
    return infer_topk(model->potentials(pair), model->weights, k);
  };
}

PairScorer mf_scorer(const BaselineModel& mf) {
  if (mf.kind != BaselineModel::Kind::kMostFrequent) throw Error("mf_scorer: not an MF model");
  const SROTriplet mode = mf.mode;
  return [mode](const ImageExample&, std::size_t) { return std::vector<ScoredTriplet>{{mode, 0.0}}; };
}

PairScorer memorizer_scorer(std::shared_ptr<const MemorizerModel> model, std::shared_ptr<const EntityPotentialMatrix> m) {
  return [model, m](const ImageExample& pair, std::size_t k) {
    auto ranked = memorizer_scores(*model, entity_scores(*m, pair.subject_scores), entity_scores(*m, pair.object_scores));
    std::sort(ranked.begin(), ranked.end(), ranks_before);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
  };
}

std::string export_manual_eval(const std::vector<ImagePrediction>& predictions, std::size_t n, std::uint64_t seed,
                               const Vocabulary& vocab) {
  if (n > predictions.size()) {
    throw Error("export_manual_eval: asked for " + std::to_string(n) + " of " + std::to_string(predictions.size()) +
                " predictions");
  }
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::ostringstream out;
  out << "image_id\tsubject\trelation\tobject\texists_in_image\treasonable_description\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = predictions[order[i]];
    out << p.image_id;
    if (p.ranked.empty()) {
      out << "\t-\t-\t-";
    } else {
      const auto terms = vocab.terms(p.ranked.front().triplet);
      out << '\t' << terms.subject << '\t' << terms.relation << '\t' << terms.object;
    }
    out << "\t\t\n";
  }
  return out.str();
}

unsigned worker_threads() {
  if (const char* env = std::getenv("SROBENCH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_threads(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace srobench
