#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <map>
#include <random>

#include "fixtures.hpp"
#include "srobench/eval.hpp"

using namespace srobench;

namespace {

ImageExample pair_example(const std::string& image, double sx, double ox, std::vector<SROTriplet> gold) {
  ImageExample ex;
  ex.image_id = image;
  ex.subject_box = {sx, 0.1, 0.1, 0.1};
  ex.object_box = {ox, 0.5, 0.1, 0.1};
  ex.subject_scores = {{"l", sx}};
  ex.object_scores = {{"l", ox}};
  ex.gold = std::move(gold);
  return ex;
}

ImagePrediction ranked(std::vector<SROTriplet> ts) {
  ImagePrediction p{"img", {}};
  double s = 1.0;
  for (const auto& t : ts) p.ranked.push_back({t, s -= 0.1});
  return p;
}

}  // namespace

TEST_CASE("pooling keeps the best score per triplet") {
  const std::vector<std::vector<ScoredTriplet>> r{{{{0, 0, 1}, 0.4}, {{1, 0, 0}, 0.3}}, {{{0, 0, 1}, 0.6}}};
  const auto pooled = pool_rankings(r, 5);
  REQUIRE(pooled.size() == 2);
  CHECK(pooled[0] == ScoredTriplet{{0, 0, 1}, 0.6});
  CHECK(pooled[1] == ScoredTriplet{{1, 0, 0}, 0.3});
  CHECK(pool_rankings(r, 1).size() == 1);
}

TEST_CASE("pooled top-k over all box pairs equals brute force") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int ns = 2 + static_cast<int>(rng() % 5), nr = 1 + static_cast<int>(rng() % 4);
    ImageBoxes img{"img", {}};
    for (int b = 0; b < 3; ++b) img.boxes.push_back({{0.1 + 0.2 * b, 0.1, 0.1, 0.1}, {}});
    std::map<std::pair<double, double>, TripletPotentials> pots;
    for (const auto& a : img.boxes)
      for (const auto& b : img.boxes) {
        pots[{a.box.x, b.box.x}] = fixtures::random_potentials(rng, ns, nr, trial % 2 == 0);
      }
    const auto w = fixtures::random_weights(rng);
    const PairScorer scorer = [&](const ImageExample& pair, std::size_t k) {
      return infer_topk(pots.at({pair.subject_box.x, pair.object_box.x}), w, k);
    };
    std::map<SROTriplet, double> best;
    for (const auto& a : img.boxes)
      for (const auto& b : img.boxes) {
        if (a.box == b.box) continue;
        for (const auto& st : fixtures::brute_force_ranking(pots.at({a.box.x, b.box.x}), w)) {
          auto [it, ins] = best.emplace(st.triplet, st.score);
          if (!ins && st.score > it->second) it->second = st.score;
        }
      }
    std::vector<ScoredTriplet> want;
    for (const auto& [t, s] : best) want.push_back({t, s});
    std::sort(want.begin(), want.end(), [](const auto& x, const auto& y) {
      return x.score != y.score ? x.score > y.score : x.triplet < y.triplet;
    });
    for (std::size_t k : {1u, 5u, 10u}) {
      const auto got = predict_image(scorer, img, k);
      const auto n = static_cast<long>(std::min(k, want.size()));
      CHECK(got.ranked == std::vector<ScoredTriplet>(want.begin(), want.begin() + n));
    }
  }
}

TEST_CASE("single pair prediction and small images") {
  std::mt19937_64 rng(2);
  const auto p = fixtures::random_potentials(rng, 4, 3);
  const PairScorer scorer = [&](const ImageExample&, std::size_t k) { return infer_topk(p, {}, k); };
  const auto ex = pair_example("i", 0.1, 0.5, {{0, 0, 0}});
  CHECK(predict_pair(scorer, ex, 5).ranked == infer_topk(p, {}, 5));
  CHECK(predict_image(scorer, ImageBoxes{"i", {{ex.subject_box, {}}}}, 5).ranked.empty());
}

TEST_CASE("precision at k") {
  CHECK(precision_at_k(ranked({{0, 0, 0}}), {{0, 0, 0}}, 1) == 1.0);
  const auto p = ranked({{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 0, 3}, {0, 0, 4}});
  CHECK(precision_at_k(p, {{0, 0, 1}, {0, 0, 4}, {9, 9, 9}}, 5) == doctest::Approx(0.4));
  CHECK(precision_at_k(ranked({}), {{0, 0, 0}}, 1) == 0.0);
  CHECK(precision_at_k(ranked({{0, 0, 0}}), {{0, 0, 0}}, 5) == doctest::Approx(0.2));
  CHECK_THROWS_AS(precision_at_k(p, {}, 0), Error);

  std::mt19937_64 rng(3);
  std::set<SROTriplet> gold;
  for (int i = 0; i < 20; ++i) {
    const double before = precision_at_k(p, gold, 5);
    gold.insert({0, 0, static_cast<int>(rng() % 8)});
    CHECK(precision_at_k(p, gold, 5) >= before);
  }
}

TEST_CASE("evaluation of perfect and constant predictors") {
  std::vector<ImageExample> ex;
  for (int i = 0; i < 6; ++i) ex.push_back(pair_example("img" + std::to_string(i), 0.1 + 0.01 * i, 0.6, {{i, 0, 9}}));
  SplitFold fold;
  fold.name = "f";
  fold.train = {0, 1, 2};
  fold.test = {3, 4, 5};
  // Reads the gold subject back from the subject box position.
  const PairScorer perfect = [](const ImageExample& pair, std::size_t) {
    if (pair.subject_box.x > 0.5) return std::vector<ScoredTriplet>{};
    const int s = static_cast<int>(std::lround((pair.subject_box.x - 0.1) / 0.01));
    return std::vector<ScoredTriplet>{{{s, 0, 9}, 1.0}};
  };
  const auto e = evaluate(perfect, fold, ex, {1, 5});
  CHECK(e.test[0] == 1.0);
  CHECK(e.test[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(e.train[0] == 1.0);
  CHECK(e.train[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(e.n_test_images == 3);
  const auto report = aggregate({e, e});
  CHECK(report.test.mean[0] == 1.0);
  CHECK(report.test.sem[0] == 0.0);

  const auto mf = fit_mf(std::vector<SROTriplet>{{0, 0, 9}, {0, 0, 9}, {1, 0, 9}}, 10, 1);
  const auto m = evaluate(mf_scorer(mf), fold, ex, {1});
  CHECK(m.test[0] == 0.0);
  CHECK(m.train[0] == doctest::Approx(1.0 / 3.0));

  SplitFold empty;
  empty.train = {0};
  CHECK_THROWS_AS(evaluate(perfect, empty, ex, {1}), Error);
  CHECK_THROWS_AS(evaluate(perfect, fold, ex, {}), Error);
}

TEST_CASE("gold-pair pooling scores only annotated pairs") {
  // Two annotated pairs in one image share box A; all-pairs also scores (B, C).
  std::vector<ImageExample> ex{pair_example("img", 0.1, 0.3, {{0, 0, 1}}), pair_example("img", 0.1, 0.5, {{0, 0, 2}})};
  ex[1].subject_box = ex[0].subject_box;
  ex[0].object_box.y = ex[1].object_box.y = 0.5;
  std::atomic<int> calls{0};
  const PairScorer count = [&](const ImageExample&, std::size_t) {
    ++calls;
    return std::vector<ScoredTriplet>{};
  };
  const auto images = group_images(ex, {0, 1});
  REQUIRE(images.size() == 1);
  CHECK(images[0].boxes.boxes.size() == 3);
  CHECK(images[0].gold == std::set<SROTriplet>{{0, 0, 1}, {0, 0, 2}});
  predict(count, images[0], ex, 1, PoolMode::kGoldPairs);
  CHECK(calls == 2);
  calls = 0;
  predict(count, images[0], ex, 1, PoolMode::kAllPairs);
  CHECK(calls == 6);
}

TEST_CASE("aggregate reports the standard error over folds") {
  FoldEval a{"a", {1}, {0.2}, {0.5}, 10, 20}, b{"b", {1}, {0.4}, {0.7}, 12, 18};
  const auto r = aggregate({a, b});
  CHECK(r.test.mean[0] == doctest::Approx(0.3));
  CHECK(r.test.sem[0] == doctest::Approx(0.1));
  CHECK(r.train.mean[0] == doctest::Approx(0.6));
  CHECK(r.n_test_images == 22);
  CHECK(r.test.per_fold[0] == std::vector<double>{0.2, 0.4});
  const auto swapped = aggregate({b, a});
  CHECK(swapped.test.mean[0] == doctest::Approx(r.test.mean[0]));
  CHECK(swapped.test.sem[0] == doctest::Approx(r.test.sem[0]));
  FoldEval c{"c", {5}, {0.1}, {0.1}, 1, 1};
  CHECK_THROWS_AS(aggregate({a, c}), Error);
  CHECK_THROWS_AS(aggregate({}), Error);
}

TEST_CASE("sampled SC precision converges to its expectation") {
  std::vector<ImageExample> ex;
  std::vector<SROTriplet> train;
  for (int i = 0; i < 40; ++i) {
    const SROTriplet t{i % 3, i % 2, (i + 1) % 3};
    ex.push_back(pair_example("img" + std::to_string(i), 0.1, 0.5, {t}));
    train.push_back(t);
  }
  const auto sc = fit_sc(train, 3, 2);
  SplitFold fold;
  fold.name = "f";
  for (std::size_t i = 0; i < ex.size(); ++i) (i % 4 == 0 ? fold.test : fold.train).push_back(i);
  const auto sampled = evaluate_sc_sampled(sc, fold, ex, {1, 5}, 4000, 9);
  const auto expected = evaluate_sc_expected(sc, fold, ex, {1, 5});
  CHECK(sampled.test[0] == doctest::Approx(expected.test[0]).epsilon(0.05));
  CHECK(sampled.test[1] == doctest::Approx(expected.test[1]).epsilon(0.05));
  CHECK(sampled.train[0] == doctest::Approx(expected.train[0]).epsilon(0.05));
  CHECK(evaluate_sc_sampled(sc, fold, ex, {1, 5}, 50, 9).test == evaluate_sc_sampled(sc, fold, ex, {1, 5}, 50, 9).test);
  CHECK_THROWS_AS(evaluate_sc_sampled(sc, fold, ex, {1}, 0, 9), Error);
}

TEST_CASE("manual review export") {
  const Vocabulary vocab({"man", "hors"}, {"ride"});
  std::vector<ImagePrediction> preds;
  for (int i = 0; i < 120; ++i) {
    ImagePrediction p{"img" + std::to_string(i), {}};
    if (i % 10 != 0) p.ranked.push_back({{0, 0, 1}, 1.0});
    preds.push_back(std::move(p));
  }
  auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  const auto sheet = export_manual_eval(preds, 100, 5, vocab);
  CHECK(lines(sheet) == 101);
  CHECK(sheet.rfind("image_id\tsubject\trelation\tobject\texists_in_image\treasonable_description\n", 0) == 0);
  CHECK(sheet == export_manual_eval(preds, 100, 5, vocab));
  CHECK(sheet != export_manual_eval(preds, 100, 6, vocab));
  CHECK(sheet.find("\tman\tride\thors\t\t\n") != std::string::npos);

  const auto all = export_manual_eval(preds, preds.size(), 5, vocab);
  CHECK(lines(all) == 121);
  for (const auto& p : preds) CHECK(all.find(p.image_id + "\t") != std::string::npos);
  CHECK_THROWS_AS(export_manual_eval(preds, 121, 5, vocab), Error);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  setenv("SROBENCH_THREADS", "4", 1);
  CHECK(worker_threads() == 4);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw Error("boom");
                  }),
                  Error);
  unsetenv("SROBENCH_THREADS");
  CHECK(worker_threads() >= 1);
}
