#include <doctest.h>

#include <cmath>
#include <random>

#include "srobench/relations.hpp"

using namespace srobench;

namespace {

// Three clusters on directions 120 degrees apart at radius 3, padded to the
// spatial width. The class directions separate them with margin > 1.
std::vector<RelationSample> separable_toy() {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::vector<RelationSample> out;
  for (int i = 0; i < 20; ++i) {
    const int c = i % 3;
    const double angle = 2.0 * M_PI * c / 3.0;
    RelationSample s;
    s.features.assign(kSpatialDims, 0.0);
    s.features[0] = 3.0 * std::cos(angle) + jitter(rng);
    s.features[1] = 3.0 * std::sin(angle) + jitter(rng);
    s.relation = c;
    out.push_back(std::move(s));
  }
  return out;
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

ImageExample pair_example() {
  ImageExample ex;
  ex.image_id = "img";
  ex.subject_box = {0.1, 0.1, 0.2, 0.2};
  ex.object_box = {0.5, 0.5, 0.3, 0.3};
  ex.gold = {{1, 0, 2}};
  return ex;
}

}  // namespace

TEST_CASE("variant names and dimensions") {
  const std::size_t expected[] = {600, 300, 300, 35, 335, 0};
  std::size_t i = 0;
  for (auto v : kAllVariants) {
    CHECK(variant_dims(v, 300) == expected[i++]);
    CHECK(parse_variant(variant_name(v)) == v);
  }
  CHECK_FALSE(parse_variant("RBoth").has_value());

  Normalizer n;
  n.stddev.fill(1.0);
  for (auto v : kAllVariants) {
    const auto x = relation_features(pair_example(), 1, 2, v, n, 4);
    CHECK(x.size() == variant_dims(v, 4));
  }
  const auto so = relation_features(pair_example(), 1, 2, RelationFeatureVariant::kSubjectObject, n, 4);
  CHECK(so == std::vector<double>{0, 1, 0, 0, 0, 0, 1, 0});
  CHECK_THROWS_AS(relation_features(pair_example(), 4, 2, RelationFeatureVariant::kSubject, n, 4), Error);
}

TEST_CASE("separable toy set is fit exactly") {
  const auto train = separable_toy();
  const auto m = train_relation_svm(train, 3, RelationFeatureVariant::kSpatial, 300, {1e-4, 50, 7});
  for (const auto& s : train) {
    const auto scores = score_relations(m, s.features);
    CHECK(argmax(scores) == s.relation);
    for (int r = 0; r < 3; ++r) {
      if (r != s.relation) CHECK(scores[static_cast<std::size_t>(s.relation)] > scores[static_cast<std::size_t>(r)]);
    }
  }
}

TEST_CASE("averaged-iterate objective does not increase across epochs") {
  const auto train = separable_toy();
  std::vector<double> trace;
  RelationTrainOptions opt{1e-4, 50, 7};
  opt.averaged_objective_trace = &trace;
  train_relation_svm(train, 3, RelationFeatureVariant::kSpatial, 300, opt);
  REQUIRE(trace.size() == 50);
  for (std::size_t e = 1; e < trace.size(); ++e) {
    CAPTURE(e);
    CHECK(trace[e] <= trace[e - 1] + 1e-6);
  }
}

TEST_CASE("RNone stores log relation frequencies") {
  std::vector<RelationSample> train;
  for (int i = 0; i < 6; ++i) train.push_back({{}, 0});
  for (int i = 0; i < 3; ++i) train.push_back({{}, 1});
  train.push_back({{}, 2});
  const auto m = train_relation_svm(train, 4, RelationFeatureVariant::kNone, 300);
  const auto s = score_relations(m, {});
  CHECK(s[0] == doctest::Approx(std::log(0.6)));
  CHECK(s[1] == doctest::Approx(std::log(0.3)));
  CHECK(s[2] == doctest::Approx(std::log(0.1)));
  CHECK(s[3] == doctest::Approx(std::log(0.05)));
  CHECK(argmax(s) == 0);
  CHECK_THROWS_AS(score_relations(m, {1.0}), Error);
}

TEST_CASE("zero epochs leave a zero model") {
  const auto train = separable_toy();
  const auto m = train_relation_svm(train, 3, RelationFeatureVariant::kSpatial, 300, {1e-4, 0, 7});
  for (const auto& s : train) CHECK(score_relations(m, s.features) == std::vector<double>(3, 0.0));
}

TEST_CASE("scores are linear in the features") {
  const auto m = train_relation_svm(separable_toy(), 3, RelationFeatureVariant::kSpatial, 300, {1e-4, 5, 7});
  std::vector<double> ej(kSpatialDims, 0.0);
  ej[1] = 1.0;
  const auto col = score_relations(m, ej);
  for (int r = 0; r < 3; ++r) CHECK(col[static_cast<std::size_t>(r)] == doctest::Approx(m.weights[r][1] + m.bias[r]));

  std::mt19937_64 rng(4);
  std::vector<double> x(kSpatialDims), y(kSpatialDims), z(kSpatialDims);
  for (std::size_t i = 0; i < kSpatialDims; ++i) {
    x[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
    y[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
    z[i] = x[i] + y[i];
  }
  const std::vector<double> zero(kSpatialDims, 0.0);
  const auto sx = score_relations(m, x), sy = score_relations(m, y), sz = score_relations(m, z),
             s0 = score_relations(m, zero);
  for (std::size_t r = 0; r < 3; ++r) CHECK(sz[r] == doctest::Approx(sx[r] + sy[r] - s0[r]));
}

TEST_CASE("training input validation") {
  CHECK_THROWS_AS(train_relation_svm({}, 3, RelationFeatureVariant::kSpatial, 300), Error);
  auto bad = separable_toy();
  bad[3].features.pop_back();
  CHECK_THROWS_AS(train_relation_svm(bad, 3, RelationFeatureVariant::kSpatial, 300), Error);
  auto out_of_range = separable_toy();
  out_of_range[0].relation = 3;
  CHECK_THROWS_AS(train_relation_svm(out_of_range, 3, RelationFeatureVariant::kSpatial, 300), Error);
  const auto m = train_relation_svm(separable_toy(), 3, RelationFeatureVariant::kSpatial, 300, {1e-4, 1, 7});
  CHECK_THROWS_AS(score_relations(m, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("training is deterministic given the seed") {
  const auto a = train_relation_svm(separable_toy(), 3, RelationFeatureVariant::kSpatial, 300, {1e-4, 10, 3});
  const auto b = train_relation_svm(separable_toy(), 3, RelationFeatureVariant::kSpatial, 300, {1e-4, 10, 3});
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}
