#include "srobench/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>

#include "srobench/alignment.hpp"
#include "srobench/baselines.hpp"
#include "srobench/corpus.hpp"
#include "srobench/eval.hpp"
#include "srobench/extraction.hpp"
#include "srobench/features.hpp"
#include "srobench/io.hpp"
#include "srobench/relations.hpp"
#include "srobench/splits.hpp"
#include "srobench/structured.hpp"
#include "srobench/synth.hpp"

namespace srobench {

namespace fs = std::filesystem;
using nlohmann::json;

// Config

nlohmann::json config_to_json(const RunConfig& c) {
  return {
      {"workdir", c.workdir},
      {"captions", c.captions},
      {"detections", c.detections},
      {"prune", c.prune},
      {"benchmark_ids", c.benchmark_ids},
      {"noun_pool", c.noun_pool},
      {"entity_cap", c.entity_cap},
      {"relation_cap", c.relation_cap},
      {"top_m", c.top_m},
      {"presence_threshold", c.presence_threshold},
      {"folds", c.folds},
      {"min_entity_count", c.min_entity_count},
      {"seed", c.seed},
      {"relation_lambda", c.relation_lambda},
      {"relation_epochs", c.relation_epochs},
      {"relation_seed", c.relation_seed},
      {"ssvm_lambda", c.ssvm_lambda},
      {"ssvm_epochs", c.ssvm_epochs},
      {"ssvm_seed", c.ssvm_seed},
      {"variant", c.variant},
      {"ks", c.ks},
      {"sc_repetitions", c.sc_repetitions},
      {"pool", c.pool},
      {"manual_n", c.manual_n},
      {"manual_variant", c.manual_variant},
      {"synth_entities", c.synth_entities},
      {"synth_relations", c.synth_relations},
      {"synth_images", c.synth_images},
      {"synth_noise", c.synth_noise},
      {"synth_bias", c.synth_bias},
      {"synth_seed", c.synth_seed},
      {"force", c.force},
  };
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  RunConfig c;
  const json known = config_to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error("unknown config key '" + key + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const json::exception& e) {
      throw Error(std::string("config key '") + key + "': " + e.what());
    }
  };
  get("workdir", c.workdir);
  get("captions", c.captions);
  get("detections", c.detections);
  get("prune", c.prune);
  get("benchmark_ids", c.benchmark_ids);
  get("noun_pool", c.noun_pool);
  get("entity_cap", c.entity_cap);
  get("relation_cap", c.relation_cap);
  get("top_m", c.top_m);
  get("presence_threshold", c.presence_threshold);
  get("folds", c.folds);
  get("min_entity_count", c.min_entity_count);
  get("seed", c.seed);
  get("relation_lambda", c.relation_lambda);
  get("relation_epochs", c.relation_epochs);
  get("relation_seed", c.relation_seed);
  get("ssvm_lambda", c.ssvm_lambda);
  get("ssvm_epochs", c.ssvm_epochs);
  get("ssvm_seed", c.ssvm_seed);
  get("variant", c.variant);
  get("ks", c.ks);
  get("sc_repetitions", c.sc_repetitions);
  get("pool", c.pool);
  get("manual_n", c.manual_n);
  get("manual_variant", c.manual_variant);
  get("synth_entities", c.synth_entities);
  get("synth_relations", c.synth_relations);
  get("synth_images", c.synth_images);
  get("synth_noise", c.synth_noise);
  get("synth_bias", c.synth_bias);
  get("synth_seed", c.synth_seed);
  get("force", c.force);
  return c;
}

RunConfig load_config(const fs::path& path) {
  try {
    return config_from_json(json::parse(io::read_file(path)));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void validate_config(const RunConfig& c) {
  if (c.noun_pool == 0 || c.entity_cap == 0 || c.relation_cap == 0 || c.top_m == 0) {
    throw Error("vocabulary caps and top_m must be positive");
  }
  if (c.folds < 2) throw Error("folds must be >= 2");
  if (c.min_entity_count < 1) throw Error("min_entity_count must be >= 1");
  if (c.ks.empty()) throw Error("at least one k is required");
  for (auto k : c.ks) {
    if (k == 0) throw Error("k must be >= 1");
  }
  if (!(c.relation_lambda > 0) || !(c.ssvm_lambda > 0)) throw Error("lambda must be positive");
  if (c.relation_epochs < 1 || c.ssvm_epochs < 1) throw Error("epochs must be >= 1");
  if (c.sc_repetitions < 1) throw Error("sc_repetitions must be >= 1");
  if (c.variant != "all" && !parse_variant(c.variant)) throw Error("unknown relation variant '" + c.variant + "'");
  if (!parse_variant(c.manual_variant)) throw Error("unknown manual variant '" + c.manual_variant + "'");
  if (c.pool != "all-pairs" && c.pool != "gold-pairs") throw Error("pool must be all-pairs or gold-pairs");
}

std::string config_hash(const RunConfig& cfg) {
  json j = config_to_json(cfg);
  for (const char* key : {"workdir", "captions", "detections", "prune", "benchmark_ids", "force"}) j.erase(key);
  return hex64(fnv1a64(j.dump()));
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "extract",   "align",      "assemble", "split", "featurize",    "train-relations", "train-ssvm",
      "baseline",  "eval",       "synth",    "manual-export",
  };
  return names;
}

namespace {

// Workspace: artifact paths, hash checks and manifests

class Workspace {
 public:
  explicit Workspace(const RunConfig& cfg) : cfg_(cfg), root_(cfg.workdir), hash_(config_hash(cfg)) {
    validate_config(cfg);
  }

  const RunConfig& cfg() const { return cfg_; }
  const std::string& hash() const { return hash_; }
  fs::path path(const std::string& rel) const { return root_ / rel; }

  void require(const std::string& rel, const std::string& producer) const {
    if (!fs::exists(path(rel))) {
      throw Error("missing " + fs::path(rel).filename().string() + "; run " + producer + " (expected " +
                  path(rel).string() + ")");
    }
  }

  json load_json(const std::string& rel, const std::string& producer) const {
    require(rel, producer);
    json j;
    try {
      j = json::parse(io::read_file(path(rel)));
    } catch (const json::exception& e) {
      throw Error(rel + ": " + e.what());
    }
    const auto produced = j.value("config_hash", std::string());
    if (produced != hash_ && !cfg_.force) {
      throw Error(rel + " was produced under config " + produced + " but the current config is " + hash_ +
                  "; rerun " + producer + " or pass --force");
    }
    return j;
  }

  std::string read(const std::string& rel, const std::string& producer) const {
    require(rel, producer);
    return io::read_file(path(rel));
  }

  void write(const std::string& rel, const std::string& bytes) const {
    io::write_file(path(rel), bytes);
    std::lock_guard lock(mu_);
    outputs_[rel] = hex64(fnv1a64(bytes));
  }

  void write_json(const std::string& rel, json j) const {
    j["config_hash"] = hash_;
    write(rel, io::dump(j));
  }

  void note_input(const std::string& rel) const {
    std::lock_guard lock(mu_);
    inputs_[rel] = io::file_digest(path(rel));
  }

  void note_external(const std::string& p) const {
    std::lock_guard lock(mu_);
    inputs_[p] = io::file_digest(p);
  }

  void write_manifest(const std::string& command, json seeds) const {
    json j = {{"command", command}, {"seeds", std::move(seeds)}, {"inputs", inputs_}, {"outputs", outputs_}};
    write_json("manifests/" + command + ".json", j);
    inputs_.clear();
    outputs_.clear();
  }

 private:
  const RunConfig& cfg_;
  fs::path root_;
  std::string hash_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::string> inputs_;
  mutable std::map<std::string, std::string> outputs_;
};

void log(const std::string& command, const std::string& msg) { std::cerr << "[" << command << "] " << msg << "\n"; }

std::vector<RelationFeatureVariant> variants(const RunConfig& cfg) {
  if (cfg.variant == "all") return {std::begin(kAllVariants), std::end(kAllVariants)};
  return {*parse_variant(cfg.variant)};
}

std::string variant_str(RelationFeatureVariant v) { return std::string(variant_name(v)); }

Vocabulary load_vocab(const Workspace& ws) {
  const auto j = ws.load_json("vocab.json", "align (or synth)");
  ws.note_input("vocab.json");
  return io::vocab_from_json(j);
}

std::vector<ImageExample> load_examples(const Workspace& ws, const Vocabulary& vocab) {
  auto text = ws.read("examples.jsonl", "assemble (or synth)");
  ws.note_input("examples.jsonl");
  return io::examples_from_jsonl(text, vocab);
}

AlignmentMap load_alignment(const Workspace& ws) {
  ws.require("alignment.tsv", "align (or synth)");
  ws.note_input("alignment.tsv");
  return io::read_alignment(ws.path("alignment.tsv"));
}

std::vector<SplitFold> load_splits(const Workspace& ws) {
  const auto manifest = ws.load_json("splits/manifest.json", "split");
  std::vector<SplitFold> out;
  for (const auto& s : manifest.at("splits")) {
    const auto name = s.at("name").get<std::string>();
    const std::string rel = "splits/" + name + ".tsv";
    out.push_back(io::fold_from_tsv(ws.read(rel, "split"), name, s.at("fold_id").get<int>()));
    ws.note_input(rel);
  }
  return out;
}

std::vector<SROTriplet> triplets_of(const std::vector<ImageExample>& examples, const std::vector<std::size_t>& ids) {
  std::vector<SROTriplet> out;
  for (auto id : ids) out.insert(out.end(), examples[id].gold.begin(), examples[id].gold.end());
  return out;
}

std::string model_dir(const std::string& split) { return "models/" + split + "/"; }
std::string variant_dir(const std::string& split, RelationFeatureVariant v) {
  return model_dir(split) + variant_str(v) + "/";
}

std::set<std::string> read_id_list(const fs::path& path) {
  std::set<std::string> ids;
  std::string text = io::read_file(path);
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.insert(line);
    start = end + 1;
  }
  return ids;
}

// Subcommands

void cmd_extract(const Workspace& ws) {
  const auto& cfg = ws.cfg();
  if (cfg.captions.empty()) throw Error("extract needs --captions");
  ws.note_external(cfg.captions);
  const auto parses = io::load_captions(cfg.captions);
  std::vector<io::CaptionTriplet> rows;
  for (const auto& p : parses) {
    for (auto& t : extract_sro(p)) rows.push_back({p.image_id, p.caption_id, std::move(t)});
  }
  ws.write("triplets.tsv", io::triplets_to_tsv(rows));
  log("extract", std::to_string(parses.size()) + " captions -> " + std::to_string(rows.size()) + " triplets");
  ws.write_manifest("extract", json::object());
}

std::map<std::string, std::set<std::string>> labels_by_image(const SelectedBoxes& boxes) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& [key, rec] : boxes) out[key.first].insert(key.second);
  return out;
}

void cmd_align(const Workspace& ws) {
  const auto& cfg = ws.cfg();
  if (cfg.detections.empty()) throw Error("align needs --detections");
  ws.require("triplets.tsv", "extract");
  ws.note_input("triplets.tsv");
  ws.note_external(cfg.detections);
  const auto rows = io::read_triplets(ws.path("triplets.tsv"));
  std::vector<RawTriplet> raw;
  for (const auto& r : rows) raw.push_back(r.terms);
  const Vocabulary pool = build_vocab(raw, cfg.noun_pool, cfg.noun_pool, cfg.relation_cap);

  const auto image_labels = labels_by_image(select_boxes(io::load_detections(cfg.detections)));
  std::map<std::string, Observation> units;
  for (const auto& r : rows) {
    auto& unit = units[r.image_id];
    for (const auto* term : {&r.terms.subject, &r.terms.object}) {
      if (pool.entity_index(*term)) unit.entities.insert(*term);
    }
  }
  std::vector<Observation> observations;
  for (auto& [image, unit] : units) {
    auto it = image_labels.find(image);
    if (it == image_labels.end()) continue;
    unit.labels = it->second;
    observations.push_back(std::move(unit));
  }
  std::vector<PruneRule> prune;
  if (!cfg.prune.empty()) {
    ws.note_external(cfg.prune);
    prune = io::read_prune(cfg.prune);
  }
  AlignmentMap alignment = build_alignment(compute_pmi(count_cooccurrence(observations)), cfg.top_m, prune);
  std::set<std::string> localizable;
  for (const auto& [entity, labels] : alignment.by_entity) localizable.insert(entity);
  const Vocabulary vocab = build_vocab(raw, cfg.noun_pool, cfg.entity_cap, cfg.relation_cap, localizable);
  std::erase_if(alignment.by_entity, [&](const auto& kv) { return !vocab.entity_index(kv.first); });

  ws.write("alignment.tsv", io::alignment_to_tsv(alignment));
  ws.write_json("vocab.json", io::vocab_to_json(vocab));
  log("align", std::to_string(vocab.num_entities()) + " entities, " + std::to_string(vocab.num_relations()) +
                   " relations, " + std::to_string(alignment.by_entity.size()) + " aligned");
  ws.write_manifest("align", json::object());
}

void cmd_assemble(const Workspace& ws) {
  const auto& cfg = ws.cfg();
  if (cfg.detections.empty()) throw Error("assemble needs --detections");
  const Vocabulary vocab = load_vocab(ws);
  const AlignmentMap alignment = load_alignment(ws);
  ws.require("triplets.tsv", "extract");
  ws.note_input("triplets.tsv");
  ws.note_external(cfg.detections);
  std::vector<ImageTriplet> grounded;
  for (const auto& r : io::read_triplets(ws.path("triplets.tsv"))) {
    if (auto t = vocab.index(r.terms)) grounded.push_back({r.image_id, *t});
  }
  const auto examples = assemble_dataset(grounded, select_boxes(io::load_detections(cfg.detections)), alignment, vocab);
  ws.write("examples.jsonl", io::examples_to_jsonl(examples, vocab));
  log("assemble", std::to_string(examples.size()) + " examples");
  ws.write_manifest("assemble", json::object());
}

void cmd_synth(const Workspace& ws) {
  const auto& cfg = ws.cfg();
  WorldSpec spec;
  spec.n_entities = cfg.synth_entities;
  spec.n_relations = cfg.synth_relations;
  spec.n_images = cfg.synth_images;
  spec.noise_std = cfg.synth_noise;
  spec.cooccurrence_bias = cfg.synth_bias;
  spec.seed = cfg.synth_seed;
  const World world = generate_world(spec);
  ws.write("examples.jsonl", io::examples_to_jsonl(world.examples, world.vocab));
  ws.write_json("vocab.json", io::vocab_to_json(world.vocab));
  ws.write("alignment.tsv", io::alignment_to_tsv(world.alignment));
  ws.write_json("world_truth.json", io::world_truth_to_json(world.truth));
  std::string ids;
  for (const auto& id : world.benchmark_train_ids) ids += id + '\n';
  ws.write("benchmark_train_ids.txt", ids);
  log("synth", std::to_string(world.examples.size()) + " examples");
  ws.write_manifest("synth", {{"synth_seed", cfg.synth_seed}});
}

void cmd_split(const Workspace& ws) {
  const auto& cfg = ws.cfg();
  const Vocabulary vocab = load_vocab(ws);
  const auto examples = load_examples(ws, vocab);
  auto folds = compositional_split(examples, cfg.folds, cfg.min_entity_count, cfg.seed);
  for (const auto& f : folds) {
    const auto violations = validate_split(f, examples, cfg.min_entity_count);
    if (!violations.empty()) {
      throw Error("split " + f.name + " invalid: " + violations.front().kind + " " + violations.front().detail);
    }
  }
  fs::path ids_path = cfg.benchmark_ids;
  if (!ids_path.empty()) {
    ws.note_external(ids_path.string());
  } else if (fs::exists(ws.path("benchmark_train_ids.txt"))) {
    ids_path = ws.path("benchmark_train_ids.txt");
    ws.note_input("benchmark_train_ids.txt");
  }
  if (!ids_path.empty()) {
    folds.push_back(benchmark_split(examples, read_id_list(ids_path)));
    folds.back().fold_id = -1;
  }
  json listing = json::array();
  for (const auto& f : folds) {
    ws.write("splits/" + f.name + ".tsv", io::fold_to_tsv(f, examples.size()));
    listing.push_back({{"name", f.name},
                       {"fold_id", f.fold_id},
                       {"train", f.train.size()},
                       {"test", f.test.size()},
                       {"removed", f.removed.size()},
                       {"moved", f.moved.size()}});
    log("split", f.name + ": train " + std::to_string(f.train.size()) + ", test " + std::to_string(f.test.size()) +
                     ", removed " + std::to_string(f.removed.size()));
  }
  const json seeds = {{"seed", cfg.seed}, {"folds", cfg.folds}, {"min_entity_count", cfg.min_entity_count}};
  ws.write_json("splits/manifest.json", {{"seeds", seeds}, {"splits", listing}});
  ws.write_manifest("split", seeds);
}

void cmd_featurize(const Workspace& ws) {
  const Vocabulary vocab = load_vocab(ws);
  const auto examples = load_examples(ws, vocab);
  std::vector<SpatialFeatures> rows;
  rows.reserve(examples.size());
  for (const auto& ex : examples) rows.push_back(spatial_features(ex.subject_box, ex.object_box));
  ws.write("features.bin", io::features_to_bin(rows));
  log("featurize", std::to_string(rows.size()) + " records");
  ws.write_manifest("featurize", json::object());
}

Normalizer fit_split_normalizer(const std::vector<ImageExample>& examples, const std::vector<std::size_t>& ids) {
  std::vector<SpatialFeatures> rows;
  rows.reserve(ids.size());
  for (auto id : ids) rows.push_back(spatial_features(examples[id].subject_box, examples[id].object_box));
  return fit_normalizer(rows);
}

std::vector<RelationSample> relation_samples(const std::vector<ImageExample>& examples,
                                             const std::vector<std::size_t>& ids, RelationFeatureVariant v,
                                             const Normalizer& norm, std::size_t width) {
  std::vector<RelationSample> out;
  for (auto id : ids) {
    for (const auto& t : examples[id].gold) {
      out.push_back({relation_features(examples[id], t.s, t.o, v, norm, width), t.r});
    }
  }
  return out;
}

void cmd_train_relations(const Workspace& ws) {
  const auto& cfg = ws.cfg();
  const Vocabulary vocab = load_vocab(ws);
  const auto examples = load_examples(ws, vocab);
  const auto splits = load_splits(ws);
  const auto vs = variants(cfg);
  std::vector<Normalizer> norms;
  for (const auto& s : splits) norms.push_back(fit_split_normalizer(examples, s.train));
  std::vector<std::string> logs(splits.size() * vs.size());
  parallel_for(logs.size(), [&](std::size_t job) {
    const auto& split = splits[job / vs.size()];
    const auto& norm = norms[job / vs.size()];
    const auto v = vs[job % vs.size()];
    const auto samples = relation_samples(examples, split.train, v, norm, cfg.entity_cap);
    RelationTrainOptions opt;
    opt.lambda = cfg.relation_lambda;
    opt.epochs = cfg.relation_epochs;
    opt.seed = cfg.relation_seed;
    const auto model = train_relation_svm(samples, vocab.num_relations(), v, cfg.entity_cap, opt);
    json j = io::relation_model_to_json(model);
    j["vocab_hash"] = hex64(vocab.hash());
    j["split"] = split.name;
    j["normalizer"] = io::normalizer_to_json(norm);
    j["train_objective"] = relation_objective(model, samples, cfg.relation_lambda);
    ws.write_json(variant_dir(split.name, v) + "relation_model.json", j);
    logs[job] = split.name + "/" + variant_str(v) + ": " + std::to_string(samples.size()) + " samples";
  });
  for (const auto& l : logs) log("train-relations", l);
  ws.write_manifest("train-relations", {{"relation_seed", cfg.relation_seed}});
}

struct RelationArtifact {
  RelationModel model;
  Normalizer normalizer;
};

RelationArtifact load_relation_model(const Workspace& ws, const std::string& split, RelationFeatureVariant v,
                                     const Vocabulary& vocab) {
  const std::string rel = variant_dir(split, v) + "relation_model.json";
  const auto j = ws.load_json(rel, "train-relations");
  if (j.at("vocab_hash").get<std::string>() != hex64(vocab.hash())) throw Error(rel + ": vocabulary mismatch");
  ws.note_input(rel);
  return {io::relation_model_from_json(j), io::normalizer_from_json(j.at("normalizer"))};
}

void cmd_train_ssvm(const Workspace& ws) {
  const auto& cfg = ws.cfg();
  const Vocabulary vocab = load_vocab(ws);
  const auto examples = load_examples(ws, vocab);
  const AlignmentMap alignment = load_alignment(ws);
  const auto splits = load_splits(ws);
  const auto vs = variants(cfg);

  std::vector<EntityPotentialMatrix> matrices;
  std::vector<std::shared_ptr<const BigramTables>> tables;
  std::vector<RelationArtifact> relations;
  for (const auto& s : splits) {
    matrices.push_back(build_entity_potential_matrix(
        [&] {
          std::vector<ImageExample> train;
          for (auto id : s.train) train.push_back(examples[id]);
          return train;
        }(),
        alignment, vocab, cfg.presence_threshold));
    const auto train_triplets = triplets_of(examples, s.train);
    tables.push_back(std::make_shared<const BigramTables>(
        bigram_tables(train_triplets, vocab.num_entities(), vocab.num_relations())));
    ws.write_json(model_dir(s.name) + "entity_matrix.json", io::entity_matrix_to_json(matrices.back(), vocab));
    ws.write_json(model_dir(s.name) + "bigrams.json", io::tables_to_json(*tables.back()));
    for (auto v : vs) relations.push_back(load_relation_model(ws, s.name, v, vocab));
  }

  std::vector<std::string> logs(splits.size() * vs.size());
  parallel_for(logs.size(), [&](std::size_t job) {
    const std::size_t si = job / vs.size();
    const auto& split = splits[si];
    const auto v = vs[job % vs.size()];
    TripletModel model{matrices[si], relations[job].model, relations[job].normalizer, tables[si], {}};
    std::vector<SsvmSample> samples;
    for (auto id : split.train) {
      const auto p = build_potentials(model, examples[id]);
      for (const auto& t : examples[id].gold) samples.push_back({p, t});
    }
    SsvmTrainOptions opt;
    opt.lambda = cfg.ssvm_lambda;
    opt.epochs = cfg.ssvm_epochs;
    opt.seed = cfg.ssvm_seed;
    const auto result = train_ssvm(samples, opt);
    json j = {{"variant", variant_str(v)},
              {"split", split.name},
              {"vocab_hash", hex64(vocab.hash())},
              {"weights", io::weights_to_json(result.weights)},
              {"objective", result.objective},
              {"initial_objective", result.initial_objective},
              {"epoch_objectives", result.epoch_objectives},
              {"lambda", opt.lambda},
              {"epochs", opt.epochs},
              {"seed", opt.seed},
              {"relation_model", "relation_model.json"},
              {"entity_matrix", "../entity_matrix.json"},
              {"bigrams", "../bigrams.json"}};
    ws.write_json(variant_dir(split.name, v) + "ssvm_model.json", j);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s/%s: objective %.6f -> %.6f", split.name.c_str(), variant_str(v).c_str(),
                  result.initial_objective, result.objective);
    logs[job] = buf;
  });
  for (const auto& l : logs) log("train-ssvm", l);
  ws.write_manifest("train-ssvm", {{"ssvm_seed", cfg.ssvm_seed}});
}

std::shared_ptr<const TripletModel> load_triplet_model(const Workspace& ws, const std::string& split,
                                                       RelationFeatureVariant v, const Vocabulary& vocab) {
  const std::string rel = variant_dir(split, v) + "ssvm_model.json";
  const auto j = ws.load_json(rel, "train-ssvm");
  if (j.at("vocab_hash").get<std::string>() != hex64(vocab.hash())) throw Error(rel + ": vocabulary mismatch");
  ws.note_input(rel);
  auto relation = load_relation_model(ws, split, v, vocab);
  const auto m = ws.load_json(model_dir(split) + "entity_matrix.json", "train-ssvm");
  const auto t = ws.load_json(model_dir(split) + "bigrams.json", "train-ssvm");
  ws.note_input(model_dir(split) + "entity_matrix.json");
  ws.note_input(model_dir(split) + "bigrams.json");
  return std::make_shared<const TripletModel>(TripletModel{
      io::entity_matrix_from_json(m, vocab), std::move(relation.model), relation.normalizer,
      std::make_shared<const BigramTables>(io::tables_from_json(t)), io::weights_from_json(j.at("weights"))});
}

void cmd_baseline(const Workspace& ws) {
  const auto& cfg = ws.cfg();
  const Vocabulary vocab = load_vocab(ws);
  const auto examples = load_examples(ws, vocab);
  const AlignmentMap alignment = load_alignment(ws);
  for (const auto& s : load_splits(ws)) {
    const auto train = triplets_of(examples, s.train);
    std::vector<ImageExample> train_examples;
    for (auto id : s.train) train_examples.push_back(examples[id]);
    const auto m = build_entity_potential_matrix(train_examples, alignment, vocab, cfg.presence_threshold);
    json memorizer = io::memorizer_to_json(fit_memorizer(train));
    memorizer["entity_matrix"] = io::entity_matrix_to_json(m, vocab);
    ws.write_json(model_dir(s.name) + "baseline_model.json",
                  {{"split", s.name},
                   {"vocab_hash", hex64(vocab.hash())},
                   {"mf", io::baseline_to_json(fit_mf(train, vocab.num_entities(), vocab.num_relations()))},
                   {"sc", io::baseline_to_json(fit_sc(train, vocab.num_entities(), vocab.num_relations()))},
                   {"memorizer", memorizer}});
    log("baseline", s.name + ": " + std::to_string(train.size()) + " training triplets");
  }
  ws.write_manifest("baseline", json::object());
}

json summary_json(const EvalSummary& s) { return {{"mean", s.mean}, {"sem", s.sem}, {"per_fold", s.per_fold}}; }

struct MethodResult {
  std::string method;
  std::string variant;
  EvalReport report;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string text_table(const std::string& title, const std::vector<std::size_t>& ks,
                       const std::vector<MethodResult>& rows) {
  std::string out = title + "\n";
  std::string header = "  method                 ";
  for (auto k : ks) header += " test p@" + std::to_string(k) + " (sem)      ";
  for (auto k : ks) header += " train p@" + std::to_string(k);
  out += header + "\n";
  for (const auto& r : rows) {
    std::string name = r.method + (r.variant.empty() ? "" : " " + r.variant);
    name.resize(std::max<std::size_t>(name.size(), 23), ' ');
    std::string line = "  " + name;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      line += "  " + fmt(r.report.test.mean[j]) + " (" + fmt(r.report.test.sem[j]) + ")";
    }
    for (std::size_t j = 0; j < ks.size(); ++j) line += "   " + fmt(r.report.train.mean[j]);
    out += line + "\n";
  }
  return out;
}

void cmd_eval(const Workspace& ws) {
  const auto& cfg = ws.cfg();
  const Vocabulary vocab = load_vocab(ws);
  const auto examples = load_examples(ws, vocab);
  const auto splits = load_splits(ws);
  const auto vs = variants(cfg);
  const PoolMode mode = cfg.pool == "gold-pairs" ? PoolMode::kGoldPairs : PoolMode::kAllPairs;

  // Check every dependency before spending time on evaluation.
  for (const auto& s : splits) {
    for (auto v : vs) ws.require(variant_dir(s.name, v) + "ssvm_model.json", "train-ssvm");
    ws.require(model_dir(s.name) + "baseline_model.json", "baseline");
  }

  std::map<std::string, std::vector<const SplitFold*>> groups;
  for (const auto& s : splits) groups[s.fold_id >= 0 ? "compositional" : s.name].push_back(&s);

  json report_splits = json::array();
  json ablation = json::array();
  std::string text;
  for (const auto& [group, folds] : groups) {
    std::vector<MethodResult> rows;
    std::map<std::string, std::vector<FoldEval>> per_method;
    std::vector<std::string> order;
    auto add = [&](const std::string& key, FoldEval fe) {
      if (!per_method.count(key)) order.push_back(key);
      per_method[key].push_back(std::move(fe));
    };
    for (const auto* fold : folds) {
      for (auto v : vs) {
        add("SSVM\t" + variant_str(v),
            evaluate(ssvm_scorer(load_triplet_model(ws, fold->name, v, vocab)), *fold, examples, cfg.ks, mode));
      }
      const std::string brel = model_dir(fold->name) + "baseline_model.json";
      const auto b = ws.load_json(brel, "baseline");
      ws.note_input(brel);
      const auto sc = io::baseline_from_json(b.at("sc"));
      add("SC\t", evaluate_sc_sampled(sc, *fold, examples, cfg.ks, cfg.sc_repetitions,
                                      cfg.seed ^ static_cast<std::uint64_t>(fold->fold_id + 1)));
      add("SC (expected)\t", evaluate_sc_expected(sc, *fold, examples, cfg.ks));
      add("MF\t", evaluate(mf_scorer(io::baseline_from_json(b.at("mf"))), *fold, examples, cfg.ks, mode));
      auto memo = std::make_shared<const MemorizerModel>(io::memorizer_from_json(b.at("memorizer")));
      auto m = std::make_shared<const EntityPotentialMatrix>(
          io::entity_matrix_from_json(b.at("memorizer").at("entity_matrix"), vocab));
      add("Memorizer\t", evaluate(memorizer_scorer(memo, m), *fold, examples, cfg.ks, mode));
    }
    json methods = json::array();
    for (const auto& key : order) {
      const auto tab = key.find('\t');
      MethodResult r{key.substr(0, tab), key.substr(tab + 1), aggregate(per_method[key])};
      methods.push_back({{"method", r.method},
                         {"variant", r.variant},
                         {"test", summary_json(r.report.test)},
                         {"train", summary_json(r.report.train)},
                         {"n_test_images", r.report.n_test_images}});
      if (group == "compositional" && r.method == "SSVM") {
        const auto v = *parse_variant(r.variant);
        ablation.push_back({{"variant", r.variant},
                            {"d", variant_dims(v, cfg.entity_cap)},
                            {"test_mean", r.report.test.mean},
                            {"test_sem", r.report.test.sem},
                            {"train_mean", r.report.train.mean}});
      }
      rows.push_back(std::move(r));
    }
    report_splits.push_back({{"name", group}, {"folds", folds.size()}, {"methods", methods}});
    text += text_table(group + " (" + std::to_string(folds.size()) + " fold" + (folds.size() == 1 ? "" : "s") + ")",
                       cfg.ks, rows) +
            "\n";
  }
  ws.write_json("report.json", {{"ks", cfg.ks}, {"pool", cfg.pool}, {"splits", report_splits}, {"ablation", ablation}});
  ws.write("report.txt", text);
  std::cout << text;
  ws.write_manifest("eval", {{"seed", cfg.seed}, {"sc_repetitions", cfg.sc_repetitions}});
}

std::size_t manual_population(const Workspace& ws, const std::vector<ImageExample>& examples,
                              const std::vector<SplitFold>& splits) {
  for (const auto& s : splits) {
    if (s.fold_id == 0) return group_images(examples, s.test).size();
  }
  (void)ws;
  throw Error("manual-export needs compositional fold fold_0; run split");
}

void export_manual(const Workspace& ws, std::size_t n) {
  const auto& cfg = ws.cfg();
  const Vocabulary vocab = load_vocab(ws);
  const auto examples = load_examples(ws, vocab);
  const auto splits = load_splits(ws);
  const SplitFold* fold = nullptr;
  for (const auto& s : splits) {
    if (s.fold_id == 0) fold = &s;
  }
  if (!fold) throw Error("manual-export needs compositional fold fold_0; run split");
  const auto scorer = ssvm_scorer(load_triplet_model(ws, fold->name, *parse_variant(cfg.manual_variant), vocab));
  const PoolMode mode = cfg.pool == "gold-pairs" ? PoolMode::kGoldPairs : PoolMode::kAllPairs;
  const auto images = group_images(examples, fold->test);
  std::vector<ImagePrediction> preds(images.size());
  parallel_for(images.size(), [&](std::size_t i) { preds[i] = predict(scorer, images[i], examples, 1, mode); });
  ws.write("manual_eval.tsv", export_manual_eval(preds, n, cfg.seed, vocab));
  log("manual-export", std::to_string(n) + " of " + std::to_string(preds.size()) + " predictions");
  ws.write_manifest("manual-export", {{"seed", cfg.seed}, {"n", n}});
}

}  // namespace

void run_command(const std::string& name, const RunConfig& cfg) {
  const Workspace ws(cfg);
  if (name == "extract") return cmd_extract(ws);
  if (name == "align") return cmd_align(ws);
  if (name == "assemble") return cmd_assemble(ws);
  if (name == "synth") return cmd_synth(ws);
  if (name == "split") return cmd_split(ws);
  if (name == "featurize") return cmd_featurize(ws);
  if (name == "train-relations") return cmd_train_relations(ws);
  if (name == "train-ssvm") return cmd_train_ssvm(ws);
  if (name == "baseline") return cmd_baseline(ws);
  if (name == "eval") return cmd_eval(ws);
  if (name == "manual-export") return export_manual(ws, cfg.manual_n);
  throw Error("unknown subcommand '" + name + "'");
}

void run_pipeline(const RunConfig& cfg) {
  const std::vector<std::string> front = cfg.captions.empty() ? std::vector<std::string>{"synth"}
                                                              : std::vector<std::string>{"extract", "align", "assemble"};
  for (const auto& name : front) run_command(name, cfg);
  for (const char* name : {"split", "featurize", "train-relations", "train-ssvm", "baseline", "eval"}) {
    run_command(name, cfg);
  }
  // The standalone subcommand refuses n above the population; the full run caps it.
  const Workspace ws(cfg);
  const Vocabulary vocab = load_vocab(ws);
  const std::size_t population = manual_population(ws, load_examples(ws, vocab), load_splits(ws));
  export_manual(ws, std::min(cfg.manual_n, population));
}

}  // namespace srobench
