#include <doctest.h>

#include <cmath>
#include <random>

#include "srobench/alignment.hpp"

using namespace srobench;

namespace {

Observation obs(std::set<std::string> e, std::set<std::string> l) { return {std::move(e), std::move(l)}; }

}  // namespace

TEST_CASE("PMI of a perfectly associated pair over four units is ln 2") {
  const auto c = count_cooccurrence({obs({"cow"}, {"lbl_cow"}), obs({"cow"}, {"lbl_cow"}), obs({"dog"}, {"lbl_dog"}),
                                     obs({"dog"}, {"lbl_dog"})});
  const auto pmi = compute_pmi(c);
  CHECK(pmi.at({"cow", "lbl_cow"}) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(pmi.count({"cow", "lbl_dog"}) == 0);
}

TEST_CASE("PMI from explicit counts") {
  CooccurrenceCounts c;
  c.grand_total = 100;
  c.joint[{"e", "l"}] = 10;
  c.joint[{"e", "m"}] = 0;
  c.entity_totals["e"] = 20;
  c.label_totals["l"] = 25;
  const auto pmi = compute_pmi(c);
  CHECK(pmi.at({"e", "l"}) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(pmi.count({"e", "m"}) == 0);
}

TEST_CASE("PMI of independent terms is zero") {
  // e present in units 0,1 ; l present in units 0,2 ; N = 4
  const auto c = count_cooccurrence({obs({"e"}, {"l"}), obs({"e"}, {}), obs({}, {"l"}), obs({}, {})});
  CHECK(std::abs(compute_pmi(c).at({"e", "l"})) < 1e-12);
}

TEST_CASE("PMI is symmetric under swapping the two vocabularies") {
  std::mt19937_64 rng(11);
  std::vector<Observation> units, swapped;
  for (int i = 0; i < 60; ++i) {
    Observation u;
    for (int e = 0; e < 5; ++e)
      if (rng() % 3 == 0) u.entities.insert("e" + std::to_string(e));
    for (int l = 0; l < 4; ++l)
      if (rng() % 2 == 0) u.labels.insert("l" + std::to_string(l));
    swapped.push_back({u.labels, u.entities});
    units.push_back(std::move(u));
  }
  const auto a = compute_pmi(count_cooccurrence(units));
  const auto b = compute_pmi(count_cooccurrence(swapped));
  REQUIRE(a.size() == b.size());
  for (const auto& [key, v] : a) CHECK(b.at({key.second, key.first}) == v);
}

TEST_CASE("PMI rejects inconsistent counts") {
  CooccurrenceCounts c;
  c.grand_total = 4;
  c.joint[{"e", "l"}] = 3;
  c.entity_totals["e"] = 2;
  c.label_totals["l"] = 3;
  CHECK_THROWS_AS(compute_pmi(c), Error);
  c.entity_totals.erase("e");
  CHECK_THROWS_AS(compute_pmi(c), Error);
  CHECK_THROWS_AS(compute_pmi(CooccurrenceCounts{}), Error);
}

TEST_CASE("alignment keeps the top labels and honours the prune list") {
  PmiTable pmi;
  for (int i = 0; i < 8; ++i) pmi[{"bed", "l" + std::to_string(i)}] = 0.1 * i;
  pmi[{"bed", "lbl_cat"}] = 5.0;
  pmi[{"cat", "lbl_cat"}] = 2.0;

  const auto full = build_alignment(pmi, 5);
  const auto& bed = full.by_entity.at("bed");
  REQUIRE(bed.size() == 5);
  CHECK(bed[0].first == "lbl_cat");
  CHECK(bed.back().second == doctest::Approx(1.0));
  CHECK(bed[0].second == doctest::Approx(5.0 - 0.4 + 1.0));

  const auto denied = build_alignment(pmi, 5, {{PruneRule::Mode::kDeny, "bed", "lbl_cat"}});
  CHECK_FALSE(denied.contains("bed", "lbl_cat"));
  CHECK(denied.contains("cat", "lbl_cat"));
  CHECK(denied.by_entity.at("bed").size() == 4);

  const auto allowed = build_alignment(pmi, 5, {{PruneRule::Mode::kAllow, "cat", "lbl_cat"}});
  CHECK(allowed.by_entity.size() == 1);
  CHECK(allowed.contains("cat", "lbl_cat"));

  for (const auto& [e, labels] : build_alignment(pmi, 3).by_entity) CHECK(labels.size() <= 3);
  CHECK_THROWS_AS(build_alignment(pmi, 0), Error);
}

TEST_CASE("entity potential matrix counts label presence on gold slots") {
  const Vocabulary vocab({"cow", "grass"}, {"on"});
  AlignmentMap a;
  a.by_entity["cow"] = {{"lbl_bull", 1.0}, {"lbl_ox", 1.0}};
  a.by_entity["grass"] = {{"lbl_lawn", 1.0}};
  std::vector<ImageExample> train;
  auto add = [&](ScoreMap s) {
    ImageExample ex;
    ex.image_id = "i" + std::to_string(train.size());
    ex.subject_box = {0.1, 0.1, 0.2, 0.2};
    ex.object_box = {0.5, 0.5, 0.2, 0.2};
    ex.subject_scores = std::move(s);
    ex.object_scores = {{"lbl_lawn", 0.9}};
    ex.gold = {{0, 0, 1}};
    train.push_back(std::move(ex));
  };
  add({{"lbl_bull", 0.9}, {"lbl_dog", 0.9}});
  add({{"lbl_bull", 0.5}});
  add({{"lbl_bull", 0.7}});
  add({{"lbl_ox", 0.8}});

  const auto m = build_entity_potential_matrix(train, a, vocab);
  CHECK(m.at(0, "lbl_bull") == doctest::Approx(0.75));
  CHECK(m.at(0, "lbl_ox") == doctest::Approx(0.25));
  CHECK(m.at(0, "lbl_dog") == 0.0);
  CHECK(m.at(1, "lbl_lawn") == doctest::Approx(1.0));

  const auto f = entity_scores(m, {{"lbl_bull", 0.8}, {"lbl_ox", 0.4}});
  CHECK(f[0] == doctest::Approx(0.7));
  CHECK(f[1] == 0.0);

  // Presence threshold drops the 0.5 detection: bull 2/3, ox 1/3.
  const auto strict = build_entity_potential_matrix(train, a, vocab, 0.5);
  CHECK(strict.at(0, "lbl_bull") == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(build_entity_potential_matrix({}, a, vocab), Error);
}

TEST_CASE("entity scores are linear in the detector scores") {
  const EntityPotentialMatrix m({{{"a", 0.3}, {"b", 0.7}}, {{"b", 1.0}}, {}});
  const ScoreMap x{{"a", 0.2}, {"b", 0.5}}, y{{"a", 0.9}, {"c", 0.4}};
  ScoreMap sum;
  for (const auto& [k, v] : x) sum[k] += 2.0 * v;
  for (const auto& [k, v] : y) sum[k] += 3.0 * v;
  const auto fx = entity_scores(m, x), fy = entity_scores(m, y), fs = entity_scores(m, sum);
  for (std::size_t e = 0; e < fs.size(); ++e) CHECK(fs[e] == doctest::Approx(2.0 * fx[e] + 3.0 * fy[e]));
  CHECK(entity_scores(m, {}) == std::vector<double>(3, 0.0));
}
