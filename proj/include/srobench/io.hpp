#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "srobench/alignment.hpp"
#include "srobench/baselines.hpp"
#include "srobench/extraction.hpp"
#include "srobench/features.hpp"
#include "srobench/relations.hpp"
#include "srobench/splits.hpp"
#include "srobench/structured.hpp"
#include "srobench/synth.hpp"
#include "srobench/types.hpp"

namespace srobench::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path);
// Writes through a temporary sibling and renames, creating parent directories.
void write_file(const fs::path& path, const std::string& bytes);
// FNV-1a 64 of the file bytes, as 16 hex digits.
std::string file_digest(const fs::path& path);

// Shortest decimal that round-trips.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& where);

// JSON lines with image_id, label, score, box {x,y,w,h} in pixels and
// image_size {width,height}. Boxes come back as image fractions.
std::vector<DetectionRecord> load_detections(const fs::path& path);
std::vector<DetectionRecord> parse_detections(const std::string& text);

// JSON lines: image_id, caption_id, tokens [{form, lemma?, pos}],
// edges [{head, dependent, label}], root.
std::vector<CaptionParse> load_captions(const fs::path& path);

struct CaptionTriplet {
  std::string image_id;
  std::string caption_id;
  RawTriplet terms;
};
std::string triplets_to_tsv(const std::vector<CaptionTriplet>& rows);
void write_triplets(const fs::path& path, const std::vector<CaptionTriplet>& rows);
std::vector<CaptionTriplet> read_triplets(const fs::path& path);

json vocab_to_json(const Vocabulary& vocab);
Vocabulary vocab_from_json(const json& j);

std::string alignment_to_tsv(const AlignmentMap& alignment);
void write_alignment(const fs::path& path, const AlignmentMap& alignment);
AlignmentMap read_alignment(const fs::path& path);
std::vector<PruneRule> read_prune(const fs::path& path);

// One JSON object per line: image_id, sbox, obox, s_scores, o_scores, gold [[s,r,o] terms].
std::string examples_to_jsonl(const std::vector<ImageExample>& examples, const Vocabulary& vocab);
std::vector<ImageExample> examples_from_jsonl(const std::string& text, const Vocabulary& vocab);

// Lines "example_id<TAB>role" with role train, test or removed:<reason>.
std::string fold_to_tsv(const SplitFold& fold, std::size_t n_examples);
SplitFold fold_from_tsv(const std::string& text, const std::string& name, int fold_id);

// "SROF" magic, version byte, u32 dims, u64 rows, then little-endian float32.
std::string features_to_bin(const std::vector<SpatialFeatures>& rows);
std::vector<SpatialFeatures> features_from_bin(const std::string& bytes);

json normalizer_to_json(const Normalizer& n);
Normalizer normalizer_from_json(const json& j);
json relation_model_to_json(const RelationModel& m);
RelationModel relation_model_from_json(const json& j);
json weights_to_json(const ModelWeights& w);
ModelWeights weights_from_json(const json& j);
json tables_to_json(const BigramTables& t);
BigramTables tables_from_json(const json& j);
json entity_matrix_to_json(const EntityPotentialMatrix& m, const Vocabulary& vocab);
EntityPotentialMatrix entity_matrix_from_json(const json& j, const Vocabulary& vocab);
json baseline_to_json(const BaselineModel& m);
BaselineModel baseline_from_json(const json& j);
json memorizer_to_json(const MemorizerModel& m);
MemorizerModel memorizer_from_json(const json& j);
json world_truth_to_json(const WorldTruth& truth);

// Pretty-printed with a trailing newline.
std::string dump(const json& j);

}  // namespace srobench::io
