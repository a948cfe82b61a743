#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace srobench {

// Every knob of a run. Field names double as config-file keys; CLI flags are
// the kebab-case spelling.
struct RunConfig {
  std::string workdir = "work";

  // External inputs; empty when unused.
  std::string captions;
  std::string detections;
  std::string prune;
  std::string benchmark_ids;

  std::size_t noun_pool = 750;
  std::size_t entity_cap = 300;
  std::size_t relation_cap = 50;
  std::size_t top_m = 5;
  double presence_threshold = 0.0;

  int folds = 5;
  int min_entity_count = 5;
  std::uint64_t seed = 7;

  double relation_lambda = 1e-4;
  int relation_epochs = 50;
  std::uint64_t relation_seed = 7;
  double ssvm_lambda = 1e-4;
  int ssvm_epochs = 100;
  std::uint64_t ssvm_seed = 7;

  std::string variant = "all";  // a variant name or "all"
  std::vector<std::size_t> ks = {1, 5};
  int sc_repetitions = 1000;
  std::string pool = "all-pairs";  // or "gold-pairs"
  std::size_t manual_n = 100;
  std::string manual_variant = "RSubjectObject";

  int synth_entities = 12;
  int synth_relations = 4;
  int synth_images = 2000;
  double synth_noise = 0.1;
  double synth_bias = 0.5;
  std::uint64_t synth_seed = 7;

  bool force = false;  // accept artifacts produced under a different config hash
};

nlohmann::json config_to_json(const RunConfig& cfg);
// Unknown keys are rejected so typos surface.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
// Throws on non-positive caps/folds, empty ks, unknown variant or pool.
void validate_config(const RunConfig& cfg);

// FNV-1a over the canonical JSON of every field that shapes results
// (workdir, input paths and --force are excluded; inputs are tracked by digest).
std::string config_hash(const RunConfig& cfg);

// Subcommand names in pipeline order.
const std::vector<std::string>& subcommands();

// Runs one subcommand; throws Error on failure.
void run_command(const std::string& name, const RunConfig& cfg);

// extract/align/assemble when captions are configured, synth otherwise, then
// split, featurize, train-relations, train-ssvm, baseline, eval, manual-export.
void run_pipeline(const RunConfig& cfg);

}  // namespace srobench
