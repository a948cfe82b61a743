#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace srobench {

// Raised for malformed input, violated preconditions and missing artifacts.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Axis-aligned box in image-fraction coordinates; (x, y) is the top-left corner.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }

  auto operator<=>(const BoundingBox&) const = default;
};

// Throws Error when the box is outside the unit square or degenerate.
void validate_box(const BoundingBox& box);

// Sparse localizer-label -> score map. Ordered so serialization is stable.
using ScoreMap = std::map<std::string, double>;

struct DetectionRecord {
  std::string image_id;
  std::string label;
  double score = 0.0;
  BoundingBox box;
};

// Indices into a Vocabulary: subject entity, relation, object entity.
struct SROTriplet {
  int s = 0;
  int r = 0;
  int o = 0;

  auto operator<=>(const SROTriplet&) const = default;
};

struct ScoredTriplet {
  SROTriplet triplet;
  double score = 0.0;

  bool operator==(const ScoredTriplet&) const = default;
};

// Stemmed surface terms of a triplet before vocabulary filtering.
struct RawTriplet {
  std::string subject;
  std::string relation;
  std::string object;

  auto operator<=>(const RawTriplet&) const = default;
};

// Entity and relation term inventories with reverse lookup.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> entities, std::vector<std::string> relations);

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& relations() const { return relations_; }
  int num_entities() const { return static_cast<int>(entities_.size()); }
  int num_relations() const { return static_cast<int>(relations_.size()); }

  std::optional<int> entity_index(std::string_view term) const;
  std::optional<int> relation_index(std::string_view term) const;
  const std::string& entity(int index) const { return entities_.at(static_cast<std::size_t>(index)); }
  const std::string& relation(int index) const { return relations_.at(static_cast<std::size_t>(index)); }

  bool valid(const SROTriplet& t) const;
  RawTriplet terms(const SROTriplet& t) const;
  std::optional<SROTriplet> index(const RawTriplet& raw) const;

  // FNV-1a over both term lists; embedded in model files to catch mismatches.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, int> entity_lookup_;
  std::unordered_map<std::string, int> relation_lookup_;
};

// One grounded (image, subject box, object box) instance with its gold triplets.
struct ImageExample {
  std::string image_id;
  BoundingBox subject_box;
  BoundingBox object_box;
  ScoreMap subject_scores;
  ScoreMap object_scores;
  std::vector<SROTriplet> gold;  // sorted, unique, non-empty
};

// Caption entity term -> ordered (localizer label, weight) list.
struct AlignmentMap {
  std::map<std::string, std::vector<std::pair<std::string, double>>> by_entity;

  bool empty() const { return by_entity.empty(); }
  bool contains(const std::string& entity, const std::string& label) const;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace srobench
