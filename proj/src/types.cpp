#include "srobench/types.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace srobench {

void validate_box(const BoundingBox& b) {
  constexpr double kSlack = 1e-6;
  const bool finite = std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) &&
                      std::isfinite(b.h);
  if (!finite || b.x < 0.0 || b.y < 0.0 || b.x > 1.0 || b.y > 1.0 || b.w <= 0.0 ||
      b.h <= 0.0 || b.x + b.w > 1.0 + kSlack || b.y + b.h > 1.0 + kSlack) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "invalid bounding box (%g, %g, %g, %g)", b.x, b.y, b.w, b.h);
    throw Error(buf);
  }
}

Vocabulary::Vocabulary(std::vector<std::string> entities, std::vector<std::string> relations)
    : entities_(std::move(entities)), relations_(std::move(relations)) {
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (!entity_lookup_.emplace(entities_[i], static_cast<int>(i)).second) {
      throw Error("duplicate entity term '" + entities_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    if (!relation_lookup_.emplace(relations_[i], static_cast<int>(i)).second) {
      throw Error("duplicate relation term '" + relations_[i] + "'");
    }
  }
}

std::optional<int> Vocabulary::entity_index(std::string_view term) const {
  auto it = entity_lookup_.find(std::string(term));
  if (it == entity_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Vocabulary::relation_index(std::string_view term) const {
  auto it = relation_lookup_.find(std::string(term));
  if (it == relation_lookup_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::valid(const SROTriplet& t) const {
  return t.s >= 0 && t.s < num_entities() && t.o >= 0 && t.o < num_entities() && t.r >= 0 &&
         t.r < num_relations();
}

RawTriplet Vocabulary::terms(const SROTriplet& t) const {
  return {entity(t.s), relation(t.r), entity(t.o)};
}

std::optional<SROTriplet> Vocabulary::index(const RawTriplet& raw) const {
  auto s = entity_index(raw.subject);
  auto r = relation_index(raw.relation);
  auto o = entity_index(raw.object);
  if (!s || !r || !o) return std::nullopt;
  return SROTriplet{*s, *r, *o};
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = fnv1a64("vocab");
  for (const auto& e : entities_) h = fnv1a64(e + '\x1f', h);
  h = fnv1a64("\x1e", h);
  for (const auto& r : relations_) h = fnv1a64(r + '\x1f', h);
  return h;
}

bool AlignmentMap::contains(const std::string& entity, const std::string& label) const {
  auto it = by_entity.find(entity);
  if (it == by_entity.end()) return false;
  for (const auto& [l, w] : it->second) {
    if (l == label) return true;
  }
  return false;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace srobench
