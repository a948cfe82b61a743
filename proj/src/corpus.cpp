#include "srobench/corpus.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <tuple>

namespace srobench {

SelectedBoxes select_boxes(const std::vector<DetectionRecord>& detections) {
  SelectedBoxes best;
  for (const auto& d : detections) {
    BoxKey key{d.image_id, d.label};
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(std::move(key), d);
      continue;
    }
    const auto& cur = it->second;
    if (d.score > cur.score || (d.score == cur.score && d.box < cur.box)) it->second = d;
  }
  return best;
}

namespace {

struct ImageBoxes {
  // label -> selected detection, for one image
  std::map<std::string, const DetectionRecord*> by_label;
};

// Highest-scoring aligned label that has a box in this image.
const DetectionRecord* pick_box(const std::string& term, const AlignmentMap& alignment, const ImageBoxes& img) {
  auto it = alignment.by_entity.find(term);
  if (it == alignment.by_entity.end()) return nullptr;
  const DetectionRecord* best = nullptr;
  for (const auto& [label, weight] : it->second) {
    auto b = img.by_label.find(label);
    if (b == img.by_label.end()) continue;
    const DetectionRecord* cand = b->second;
    if (best == nullptr || cand->score > best->score ||
        (cand->score == best->score && std::tie(cand->box, cand->label) < std::tie(best->box, best->label))) {
      best = cand;
    }
  }
  return best;
}

ScoreMap scores_for_box(const BoundingBox& box, const ImageBoxes& img) {
  ScoreMap out;
  for (const auto& [label, rec] : img.by_label) {
    if (rec->box == box) out[label] = rec->score;
  }
  return out;
}

}  // namespace

std::vector<ImageExample> assemble_dataset(const std::vector<ImageTriplet>& triplets, const SelectedBoxes& boxes,
                                           const AlignmentMap& alignment, const Vocabulary& vocab) {
  if (alignment.empty()) throw Error("assemble_dataset: empty alignment map");

  std::map<std::string, ImageBoxes> images;
  for (const auto& [key, rec] : boxes) images[key.first].by_label[key.second] = &rec;

  std::set<ImageTriplet> unique(triplets.begin(), triplets.end());

  using GroupKey = std::tuple<std::string, BoundingBox, BoundingBox>;
  std::map<GroupKey, ImageExample> groups;
  for (const auto& it : unique) {
    if (!vocab.valid(it.triplet)) throw Error("assemble_dataset: triplet index outside vocabulary");
    auto img = images.find(it.image_id);
    if (img == images.end()) continue;
    const auto* sbox = pick_box(vocab.entity(it.triplet.s), alignment, img->second);
    const auto* obox = pick_box(vocab.entity(it.triplet.o), alignment, img->second);
    if (sbox == nullptr || obox == nullptr) continue;
    if (sbox->box == obox->box) continue;
    GroupKey key{it.image_id, sbox->box, obox->box};
    auto [pos, inserted] = groups.try_emplace(key);
    ImageExample& ex = pos->second;
    if (inserted) {
      ex.image_id = it.image_id;
      ex.subject_box = sbox->box;
      ex.object_box = obox->box;
      ex.subject_scores = scores_for_box(sbox->box, img->second);
      ex.object_scores = scores_for_box(obox->box, img->second);
    }
    ex.gold.push_back(it.triplet);
  }

  std::vector<ImageExample> out;
  out.reserve(groups.size());
  for (auto& [key, ex] : groups) {
    std::sort(ex.gold.begin(), ex.gold.end());
    ex.gold.erase(std::unique(ex.gold.begin(), ex.gold.end()), ex.gold.end());
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<ImageTriplet> image_triplets(const std::vector<ImageExample>& examples) {
  std::set<ImageTriplet> out;
  for (const auto& ex : examples) {
    for (const auto& t : ex.gold) out.insert({ex.image_id, t});
  }
  return {out.begin(), out.end()};
}

}  // namespace srobench
