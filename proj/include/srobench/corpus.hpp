#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "srobench/types.hpp"

namespace srobench {

using BoxKey = std::pair<std::string, std::string>;  // (image_id, label)
using SelectedBoxes = std::map<BoxKey, DetectionRecord>;

// Keeps, per (image, label), the highest-scoring record. Equal scores go to
// the lexicographically smallest (x, y, w, h).
SelectedBoxes select_boxes(const std::vector<DetectionRecord>& detections);

// A caption-derived triplet attached to its image.
struct ImageTriplet {
  std::string image_id;
  SROTriplet triplet;

  auto operator<=>(const ImageTriplet&) const = default;
};

// Grounds caption triplets in detector boxes:
//  - subject/object terms are mapped through the alignment to localizer labels;
//    the highest-scoring aligned label with a box in the image supplies the box;
//  - triplets without a box for either slot, or with identical subject and
//    object boxes, are dropped;
//  - duplicate (image, triplet) pairs collapse;
//  - triplets sharing (image, subject box, object box) form one example's gold set.
// Each box carries the scores of every selected detection sharing that exact box.
// Output is sorted by (image_id, subject box, object box).
std::vector<ImageExample> assemble_dataset(const std::vector<ImageTriplet>& triplets,
                                           const SelectedBoxes& boxes, const AlignmentMap& alignment,
                                           const Vocabulary& vocab);

// All (image, gold triplet) pairs of a set of examples, sorted and unique.
std::vector<ImageTriplet> image_triplets(const std::vector<ImageExample>& examples);

}  // namespace srobench
