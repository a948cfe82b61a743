#include <cstring>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "srobench/pipeline.hpp"
#include "srobench/types.hpp"

namespace {

// --config is applied before the other flags so explicit flags win.
std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return argv[i + 1];
    if (std::strncmp(argv[i], "--config=", 9) == 0) return argv[i] + 9;
  }
  return {};
}

void add_options(CLI::App& app, srobench::RunConfig& c, std::string& config_path) {
  app.add_option("--config", config_path, "JSON config file; explicit flags override it");
  app.add_option("--workdir", c.workdir, "Artifact directory");
  app.add_option("--captions", c.captions, "Parsed captions (JSON lines)");
  app.add_option("--detections", c.detections, "Detector output (JSON lines)");
  app.add_option("--prune", c.prune, "Alignment allow/deny list (TSV)");
  app.add_option("--benchmark-ids", c.benchmark_ids, "Image ids of the benchmark training split, one per line");
  app.add_option("--noun-pool", c.noun_pool);
  app.add_option("--entity-cap", c.entity_cap);
  app.add_option("--relation-cap", c.relation_cap);
  app.add_option("--top-m", c.top_m, "Labels kept per entity by PMI");
  app.add_option("--presence-threshold", c.presence_threshold);
  app.add_option("--folds", c.folds);
  app.add_option("--min-entity-count", c.min_entity_count);
  app.add_option("--seed", c.seed, "Split, SC sampling and manual-export seed");
  app.add_option("--relation-lambda", c.relation_lambda);
  app.add_option("--relation-epochs", c.relation_epochs);
  app.add_option("--relation-seed", c.relation_seed);
  app.add_option("--ssvm-lambda", c.ssvm_lambda);
  app.add_option("--ssvm-epochs", c.ssvm_epochs);
  app.add_option("--ssvm-seed", c.ssvm_seed);
  app.add_option("--variant", c.variant, "Relation feature variant, or 'all'");
  app.add_option("--k", c.ks, "Precision cut-offs")->delimiter(',');
  app.add_option("--sc-repetitions", c.sc_repetitions);
  app.add_option("--pool", c.pool, "all-pairs or gold-pairs");
  app.add_option("--manual-n", c.manual_n);
  app.add_option("--manual-variant", c.manual_variant);
  app.add_option("--synth-entities", c.synth_entities);
  app.add_option("--synth-relations", c.synth_relations);
  app.add_option("--synth-images", c.synth_images);
  app.add_option("--synth-noise", c.synth_noise);
  app.add_option("--synth-bias", c.synth_bias);
  app.add_option("--synth-seed", c.synth_seed);
  app.add_flag("--force", c.force, "Accept artifacts produced under a different config hash");
}

}  // namespace

int main(int argc, char** argv) {
  srobench::RunConfig cfg;
  try {
    if (const auto path = find_config(argc, argv); !path.empty()) cfg = srobench::load_config(path);
  } catch (const srobench::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Compositional SRO triplet benchmark"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  add_options(app, cfg, config_path);
  for (const auto& name : srobench::subcommands()) app.add_subcommand(name);
  app.add_subcommand("pipeline", "Run every stage in order");
  app.footer("Worker threads: SROBENCH_THREADS (default: all cores).");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "pipeline") {
      srobench::run_pipeline(cfg);
    } else {
      srobench::run_command(name, cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
