#include <doctest.h>

#include "srobench/corpus.hpp"

using namespace srobench;

namespace {

const BoundingBox kCowBox{0.1, 0.1, 0.3, 0.3};
const BoundingBox kFieldBox{0.0, 0.5, 1.0, 0.5};

// Entities: cow(0), field(1); relation: in(0).
Vocabulary farm_vocab() { return Vocabulary({"cow", "field"}, {"in", "on"}); }

AlignmentMap farm_alignment() {
  AlignmentMap a;
  a.by_entity["cow"] = {{"lbl_cow", 1.0}, {"lbl_bull", 1.0}};
  a.by_entity["field"] = {{"lbl_meadow", 1.0}};
  return a;
}

std::vector<DetectionRecord> farm_detections() {
  return {
      {"img1", "lbl_cow", 0.7, kCowBox},
      {"img1", "lbl_bull", 0.9, kCowBox},
      {"img1", "lbl_cow", 0.2, {0.6, 0.1, 0.2, 0.2}},
      {"img1", "lbl_meadow", 0.8, kFieldBox},
      {"img2", "lbl_cow", 0.6, kCowBox},
  };
}

}  // namespace

TEST_CASE("select_boxes keeps the best record per image and label") {
  const auto sel = select_boxes(farm_detections());
  REQUIRE(sel.size() == 4);
  CHECK(sel.at({"img1", "lbl_cow"}).score == 0.7);
  CHECK(sel.at({"img1", "lbl_cow"}).box == kCowBox);

  const BoundingBox a{0.2, 0.2, 0.1, 0.1}, b{0.1, 0.3, 0.1, 0.1};
  const auto tie = select_boxes({{"i", "l", 0.5, a}, {"i", "l", 0.5, b}});
  CHECK(tie.at({"i", "l"}).box == b);
}

TEST_CASE("assemble grounds triplets through the alignment") {
  const auto vocab = farm_vocab();
  const auto sel = select_boxes(farm_detections());
  const std::vector<ImageTriplet> triplets = {
      {"img1", {0, 0, 1}},  // cow in field
      {"img1", {0, 1, 1}},  // cow on field: same boxes, same example
      {"img1", {0, 0, 1}},  // duplicate
      {"img2", {0, 0, 1}},  // no field box in img2
      {"img3", {0, 0, 1}},  // no detections at all
  };
  const auto out = assemble_dataset(triplets, sel, farm_alignment(), vocab);
  REQUIRE(out.size() == 1);
  const auto& ex = out[0];
  CHECK(ex.image_id == "img1");
  CHECK(ex.subject_box == kCowBox);  // bull (0.9) beats cow (0.7) and both share the box
  CHECK(ex.object_box == kFieldBox);
  CHECK(ex.subject_scores == ScoreMap{{"lbl_bull", 0.9}, {"lbl_cow", 0.7}});
  CHECK(ex.object_scores == ScoreMap{{"lbl_meadow", 0.8}});
  CHECK(ex.gold == std::vector<SROTriplet>{{0, 0, 1}, {0, 1, 1}});
}

TEST_CASE("identical subject and object boxes are dropped") {
  const auto vocab = farm_vocab();
  const auto sel = select_boxes(farm_detections());
  // cow in cow
  CHECK(assemble_dataset({{"img1", {0, 0, 0}}}, sel, farm_alignment(), vocab).empty());
}

TEST_CASE("assemble rejects an empty alignment and out-of-vocabulary triplets") {
  const auto vocab = farm_vocab();
  const auto sel = select_boxes(farm_detections());
  CHECK_THROWS_AS(assemble_dataset({{"img1", {0, 0, 1}}}, sel, AlignmentMap{}, vocab), Error);
  CHECK_THROWS_AS(assemble_dataset({{"img1", {0, 5, 1}}}, sel, farm_alignment(), vocab), Error);
}

TEST_CASE("assembly is idempotent over its own image triplets") {
  const auto vocab = farm_vocab();
  const auto sel = select_boxes(farm_detections());
  const auto first = assemble_dataset({{"img1", {0, 0, 1}}, {"img1", {0, 1, 1}}}, sel, farm_alignment(), vocab);
  const auto again = assemble_dataset(image_triplets(first), sel, farm_alignment(), vocab);
  REQUIRE(first.size() == again.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].image_id == again[i].image_id);
    CHECK(first[i].subject_box == again[i].subject_box);
    CHECK(first[i].object_box == again[i].object_box);
    CHECK(first[i].subject_scores == again[i].subject_scores);
    CHECK(first[i].gold == again[i].gold);
  }
}

TEST_CASE("every assembled example satisfies the output contract") {
  const auto vocab = farm_vocab();
  auto dets = farm_detections();
  dets.push_back({"img2", "lbl_meadow", 0.4, kFieldBox});
  dets.push_back({"img2", "lbl_bull", 0.3, {0.5, 0.5, 0.2, 0.2}});
  const auto out = assemble_dataset({{"img1", {0, 0, 1}}, {"img2", {0, 1, 1}}, {"img2", {1, 0, 0}}},
                                    select_boxes(dets), farm_alignment(), vocab);
  REQUIRE(out.size() == 3);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK_FALSE(out[i].gold.empty());
    CHECK(out[i].subject_box != out[i].object_box);
    CHECK(std::is_sorted(out[i].gold.begin(), out[i].gold.end()));
    if (i > 0) CHECK(out[i - 1].image_id <= out[i].image_id);
  }
}
