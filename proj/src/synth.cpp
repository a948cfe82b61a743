#include "srobench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "srobench/alignment.hpp"
#include "srobench/features.hpp"

namespace srobench {
namespace {

constexpr const char* kNouns[] = {
    "man",   "woman",    "dog",    "horse",    "cat",      "bench", "table",  "bus",   "car",    "kite",
    "boat",  "bird",     "train",  "tree",     "sheep",    "cow",   "elephant", "giraffe", "zebra", "bicycle",
    "umbrella", "chair", "clock",  "plate",    "pizza",    "cake",  "sign",   "bear",  "truck",  "plane",
    "bed",   "sofa",     "laptop", "phone",    "book",     "vase",  "bottle", "cup",   "bowl",   "banana",
};
constexpr int kMaxEntities = static_cast<int>(std::size(kNouns));
constexpr int kPlacementTries = 20000;
constexpr double kFireThreshold = 0.5;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

bool in_band(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::vector<int> satisfied(const std::vector<RelationRule>& rules, const BoundingBox& s, const BoundingBox& o) {
  std::vector<int> out;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    if (rule_holds(rules[r], s, o)) out.push_back(static_cast<int>(r));
  }
  return out;
}

// Draws a placement that satisfies rule `r` and no other rule.
std::optional<std::pair<BoundingBox, BoundingBox>> place(const std::vector<RelationRule>& rules, int r,
                                                         std::mt19937_64& rng) {
  const auto& rule = rules[static_cast<std::size_t>(r)];
  for (int attempt = 0; attempt < kPlacementTries; ++attempt) {
    const double ws = uniform(rng, 0.08, 0.3), hs = uniform(rng, 0.08, 0.3);
    const double wo = uniform(rng, 0.08, 0.4), ho = uniform(rng, 0.08, 0.4);
    const double dx = uniform(rng, rule.dx_min, rule.dx_max);
    const double dy = uniform(rng, rule.dy_min, rule.dy_max);
    // Subject centre range keeping both boxes inside the unit square.
    const double cx_lo = std::max(ws / 2, dx + wo / 2), cx_hi = std::min(1 - ws / 2, dx + 1 - wo / 2);
    const double cy_lo = std::max(hs / 2, dy + ho / 2), cy_hi = std::min(1 - hs / 2, dy + 1 - ho / 2);
    if (cx_lo > cx_hi || cy_lo > cy_hi) continue;
    const double cx = uniform(rng, cx_lo, cx_hi), cy = uniform(rng, cy_lo, cy_hi);
    const BoundingBox s{cx - ws / 2, cy - hs / 2, ws, hs};
    const BoundingBox o{cx - dx - wo / 2, cy - dy - ho / 2, wo, ho};
    if (s.x < 0 || s.y < 0 || o.x < 0 || o.y < 0 || s.x + s.w > 1 || s.y + s.h > 1 || o.x + o.w > 1 ||
        o.y + o.h > 1) {
      continue;
    }
    const auto hits = satisfied(rules, s, o);
    if (hits.size() == 1 && hits.front() == r) return std::make_pair(s, o);
  }
  return std::nullopt;
}

ScoreMap detector_scores(int entity, const std::vector<std::string>& labels, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  ScoreMap out;
  for (std::size_t l = 0; l < labels.size(); ++l) {
    const double base = static_cast<int>(l) == entity ? 1.0 : 0.0;
    const double v = std::clamp(base + sd * noise(rng), 0.0, 1.0);
    if (v > 0.0) out[labels[l]] = v;
  }
  return out;
}

int draw(const std::vector<double>& cdf, std::mt19937_64& rng) {
  const double u = uniform(rng, 0.0, cdf.back());
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

void check_spec(const WorldSpec& spec, const std::vector<RelationRule>& rules) {
  if (spec.n_entities < 2 || spec.n_relations < 2 || spec.n_images < 2) {
    throw Error("generate_world: entity, relation and image counts must be >= 2");
  }
  if (spec.n_entities > kMaxEntities) {
    throw Error("generate_world: at most " + std::to_string(kMaxEntities) + " entities");
  }
  if (!(spec.noise_std >= 0.0)) throw Error("generate_world: noise std must be >= 0");
  if (!(spec.cooccurrence_bias >= 0.0 && spec.cooccurrence_bias <= 1.0)) {
    throw Error("generate_world: cooccurrence bias must lie in [0, 1]");
  }
  if (static_cast<int>(rules.size()) != spec.n_relations) {
    throw Error("generate_world: " + std::to_string(rules.size()) + " relation rules for " +
                std::to_string(spec.n_relations) + " relations");
  }
  std::set<std::string> names;
  for (const auto& r : rules) {
    if (r.name.empty() || !names.insert(r.name).second) throw Error("generate_world: relation names must be unique");
    if (r.dx_min > r.dx_max || r.dy_min > r.dy_max || r.overlap_min > r.overlap_max || r.overlap_min < 0 ||
        r.overlap_max > 1) {
      throw Error("generate_world: empty band in rule '" + r.name + "'");
    }
  }
}

}  // namespace

std::vector<RelationRule> default_rules() {
  return {
      {"above", -0.12, 0.12, -0.6, -0.2, 0.0, 0.0},
      {"left of", -0.6, -0.2, -0.12, 0.12, 0.0, 0.0},
      {"on", -0.12, 0.12, -0.2, -0.05, 0.05, 0.6},
      {"in", -0.08, 0.08, -0.08, 0.08, 0.95, 1.0},
      {"below", -0.12, 0.12, 0.2, 0.6, 0.0, 0.0},
      {"right of", 0.2, 0.6, -0.12, 0.12, 0.0, 0.0},
  };
}

bool rule_holds(const RelationRule& rule, const BoundingBox& s, const BoundingBox& o) {
  const double dx = s.center_x() - o.center_x();
  const double dy = s.center_y() - o.center_y();
  const double overlap = intersection_area(s, o) / s.area();
  return in_band(dx, rule.dx_min, rule.dx_max) && in_band(dy, rule.dy_min, rule.dy_max) &&
         in_band(overlap, rule.overlap_min, rule.overlap_max);
}

World generate_world(const WorldSpec& spec) {
  std::vector<RelationRule> rules = spec.rules;
  if (rules.empty()) {
    const auto defaults = default_rules();
    if (spec.n_relations > static_cast<int>(defaults.size())) {
      throw Error("generate_world: only " + std::to_string(defaults.size()) + " default relation rules");
    }
    if (spec.n_relations >= 0) rules.assign(defaults.begin(), defaults.begin() + spec.n_relations);
  }
  check_spec(spec, rules);

  const auto ne = static_cast<std::size_t>(spec.n_entities);
  World world;
  std::vector<std::string> entities, relations;
  for (std::size_t e = 0; e < ne; ++e) {
    entities.emplace_back(kNouns[e]);
    world.truth.labels.push_back(std::string("lbl_") + kNouns[e]);
  }
  for (const auto& r : rules) relations.push_back(r.name);
  world.vocab = Vocabulary(entities, relations);
  world.truth.rules = rules;

  std::mt19937_64 master(splitmix64(spec.seed));
  double total = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    world.truth.entity_prior.push_back(1.0 / std::sqrt(static_cast<double>(e + 1)));
    total += world.truth.entity_prior.back();
  }
  for (double& p : world.truth.entity_prior) p /= total;
  for (std::size_t e = 0; e < ne; ++e) {
    world.truth.preferred_relation.push_back(static_cast<int>(master() % static_cast<std::uint64_t>(rules.size())));
  }
  std::vector<double> cdf(ne);
  std::partial_sum(world.truth.entity_prior.begin(), world.truth.entity_prior.end(), cdf.begin());

  // Every rule must be placeable before any image is drawn.
  for (int r = 0; r < spec.n_relations; ++r) {
    std::mt19937_64 probe(splitmix64(spec.seed ^ 0x5eedULL) + static_cast<std::uint64_t>(r));
    if (!place(rules, r, probe)) {
      throw Error("generate_world: rule '" + rules[static_cast<std::size_t>(r)].name +
                  "' cannot be satisfied exclusively");
    }
  }

  std::vector<std::string> image_ids;
  for (int i = 0; i < spec.n_images; ++i) {
    std::mt19937_64 rng(splitmix64(spec.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1)));
    const int s = draw(cdf, rng);
    int o = draw(cdf, rng);
    while (o == s) o = draw(cdf, rng);
    int r = world.truth.preferred_relation[static_cast<std::size_t>(s)];
    if (uniform(rng, 0.0, 1.0) >= spec.cooccurrence_bias) {
      r = static_cast<int>(rng() % static_cast<std::uint64_t>(rules.size()));
    }
    const auto boxes = place(rules, r, rng);
    if (!boxes) throw Error("generate_world: placement failed for rule '" + rules[static_cast<std::size_t>(r)].name + "'");
    char id[32];
    std::snprintf(id, sizeof id, "syn%05d", i);
    ImageExample ex;
    ex.image_id = id;
    ex.subject_box = boxes->first;
    ex.object_box = boxes->second;
    ex.subject_scores = detector_scores(s, world.truth.labels, spec.noise_std, rng);
    ex.object_scores = detector_scores(o, world.truth.labels, spec.noise_std, rng);
    ex.gold = {SROTriplet{s, r, o}};
    world.examples.push_back(std::move(ex));
    image_ids.emplace_back(id);
  }

  std::vector<Observation> units;
  for (const auto& ex : world.examples) {
    const auto& t = ex.gold.front();
    for (const auto& [entity, scores] : {std::pair{t.s, &ex.subject_scores}, std::pair{t.o, &ex.object_scores}}) {
      Observation unit;
      unit.entities.insert(world.vocab.entity(entity));
      for (const auto& [label, score] : *scores) {
        if (score >= kFireThreshold) unit.labels.insert(label);
      }
      units.push_back(std::move(unit));
    }
  }
  world.alignment = build_alignment(compute_pmi(count_cooccurrence(units)), 5);

  std::mt19937_64 split_rng(splitmix64(spec.seed ^ 0xbe7cULL));
  std::shuffle(image_ids.begin(), image_ids.end(), split_rng);
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(image_ids.size())));
  world.benchmark_train_ids.insert(image_ids.begin(), image_ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  return world;
}

}  // namespace srobench
