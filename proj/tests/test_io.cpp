#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "srobench/io.hpp"

using namespace srobench;

namespace {

const char* kDetectionLine =
    R"({"image_id":"i1","label":"bull","score":0.9,"box":{"x":10,"y":10,"w":20,"h":20},"image_size":{"width":100,"height":100}})";

Vocabulary small_vocab() { return Vocabulary({"cow", "field", "man"}, {"in", "on"}); }

ImageExample sample_example() {
  ImageExample ex;
  ex.image_id = "img7";
  ex.subject_box = {0.1, 0.2, 0.3, 0.25};
  ex.object_box = {0.05, 0.5, 0.9, 0.45};
  ex.subject_scores = {{"lbl_bull", 0.9}, {"lbl_cow", 0.1 + 0.2}};
  ex.object_scores = {{"lbl_meadow", 0.8}};
  ex.gold = {{0, 0, 1}, {0, 1, 1}};
  return ex;
}

}  // namespace

TEST_CASE("detections are rescaled to image fractions") {
  const auto recs = io::parse_detections(std::string(kDetectionLine) + "\n");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].image_id == "i1");
  CHECK(recs[0].label == "bull");
  CHECK(recs[0].score == 0.9);
  CHECK(recs[0].box == BoundingBox{0.1, 0.1, 0.2, 0.2});
  CHECK(io::parse_detections("").empty());
}

TEST_CASE("a detection score outside [0,1] is an error naming its line") {
  std::string text = std::string(kDetectionLine) + "\n" + kDetectionLine + "\n";
  text.replace(text.rfind("0.9"), 3, "1.5");
  try {
    io::parse_detections(text);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(io::parse_detections("{not json}\n"), Error);
}

TEST_CASE("examples round-trip through JSON lines") {
  const auto vocab = small_vocab();
  const std::vector<ImageExample> ex{sample_example()};
  const auto text = io::examples_to_jsonl(ex, vocab);
  const auto back = io::examples_from_jsonl(text, vocab);
  REQUIRE(back.size() == 1);
  CHECK(back[0].image_id == ex[0].image_id);
  CHECK(back[0].subject_box == ex[0].subject_box);
  CHECK(back[0].object_box == ex[0].object_box);
  CHECK(back[0].subject_scores == ex[0].subject_scores);
  CHECK(back[0].gold == ex[0].gold);
  CHECK(io::examples_to_jsonl(back, vocab) == text);

  auto same_box = ex;
  same_box[0].object_box = same_box[0].subject_box;
  CHECK_THROWS_AS(io::examples_from_jsonl(io::examples_to_jsonl(same_box, vocab), vocab), Error);
  CHECK_THROWS_AS(io::examples_from_jsonl(text, Vocabulary({"cow"}, {"in"})), Error);
}

TEST_CASE("folds round-trip through TSV") {
  SplitFold f;
  f.name = "fold_2";
  f.fold_id = 2;
  f.train = {0, 3};
  f.test = {1};
  f.removed = {{2, "rare_entity"}};
  f.moved = {{3, "unseen_entity"}};
  const auto text = io::fold_to_tsv(f, 4);
  const auto back = io::fold_from_tsv(text, "fold_2", 2);
  CHECK(back.train == f.train);
  CHECK(back.test == f.test);
  CHECK(back.removed == f.removed);
  CHECK(back.moved == f.moved);
  CHECK(io::fold_to_tsv(back, 4) == text);
  CHECK_THROWS_AS(io::fold_to_tsv(f, 5), Error);
}

TEST_CASE("feature cache round-trips at float precision") {
  std::mt19937_64 rng(1);
  std::vector<SpatialFeatures> rows(3);
  for (auto& r : rows)
    for (auto& v : r) v = fixtures::uniform(rng, -3, 3);
  const auto bytes = io::features_to_bin(rows);
  CHECK(bytes.size() == 17 + 3 * kSpatialDims * 4);
  CHECK(bytes.substr(0, 4) == "SROF");
  const auto back = io::features_from_bin(bytes);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t d = 0; d < kSpatialDims; ++d) CHECK(back[i][d] == static_cast<double>(static_cast<float>(rows[i][d])));
  CHECK_THROWS_AS(io::features_from_bin(bytes.substr(0, bytes.size() - 1)), Error);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(io::features_from_bin(bad), Error);
}

TEST_CASE("model JSON round-trips") {
  const auto vocab = small_vocab();
  CHECK(io::vocab_from_json(io::vocab_to_json(vocab)).entities() == vocab.entities());
  auto tampered = io::vocab_to_json(vocab);
  tampered["hash"] = "0000000000000000";
  CHECK_THROWS_AS(io::vocab_from_json(tampered), Error);

  const ModelWeights w{0.1, -2.5, 3.0, 1e-7, 42.0};
  CHECK(io::weights_from_json(io::weights_to_json(w)) == w);

  RelationModel m;
  m.variant = RelationFeatureVariant::kSubject;
  m.one_hot_width = 3;
  m.input_dims = 3;
  m.num_relations = 2;
  m.weights = {{0.1, 0.2, 0.3}, {-1, 0, 1}};
  m.bias = {0.5, -0.5};
  const auto mb = io::relation_model_from_json(io::relation_model_to_json(m));
  CHECK(mb.weights == m.weights);
  CHECK(mb.bias == m.bias);
  CHECK(mb.variant == m.variant);
  auto broken = io::relation_model_to_json(m);
  broken["d"] = 4;
  CHECK_THROWS_AS(io::relation_model_from_json(broken), Error);

  const std::vector<SROTriplet> train{{0, 0, 1}, {2, 1, 1}};
  const auto t = bigram_tables(train, 3, 2);
  const auto tb = io::tables_from_json(io::tables_to_json(t));
  CHECK(tb.sr(2, 1) == t.sr(2, 1));
  CHECK(tb.ro(0, 1) == t.ro(0, 1));

  const EntityPotentialMatrix em({{{"lbl_bull", 0.75}, {"lbl_ox", 0.25}}, {}, {{"lbl_man", 1.0}}});
  const auto eb = io::entity_matrix_from_json(io::entity_matrix_to_json(em, vocab), vocab);
  CHECK(eb.rows() == em.rows());

  const auto sc = fit_sc(train, 3, 2);
  const auto scb = io::baseline_from_json(io::baseline_to_json(sc));
  CHECK(scb.p_relation == sc.p_relation);
  CHECK(scb.p_subject == sc.p_subject);
  const auto mf = fit_mf(train, 3, 2);
  CHECK(io::baseline_from_json(io::baseline_to_json(mf)).mode == mf.mode);

  const auto mem = fit_memorizer(train);
  CHECK(io::memorizer_from_json(io::memorizer_to_json(mem)).counts == mem.counts);

  Normalizer n;
  n.mean.fill(0.3);
  n.stddev.fill(1.7);
  const auto nb = io::normalizer_from_json(io::normalizer_to_json(n));
  CHECK(nb.mean == n.mean);
  CHECK(nb.stddev == n.stddev);
}

TEST_CASE("TSV artifacts round-trip on disk") {
  const auto dir = fixtures::temp_dir("io_tsv");
  const std::vector<io::CaptionTriplet> rows{{"i1", "c1", {"man", "ride", "hors"}}, {"i2", "c9", {"dog", "sit on", "couch"}}};
  io::write_triplets(dir / "t.tsv", rows);
  const auto back = io::read_triplets(dir / "t.tsv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].terms == rows[1].terms);
  CHECK_THROWS_AS(io::write_triplets(dir / "bad.tsv", {{"i\t1", "c", {"a", "b", "c"}}}), Error);

  AlignmentMap a;
  a.by_entity["cow"] = {{"lbl_bull", 1.5}, {"lbl_cow", 1.0}};
  io::write_alignment(dir / "a.tsv", a);
  CHECK(io::read_alignment(dir / "a.tsv").by_entity == a.by_entity);

  io::write_file(dir / "p.tsv", "# comment\nmode\tentity\tlabel\ndeny\tbed\tcat\nallow\tcow\tbull\n");
  const auto prune = io::read_prune(dir / "p.tsv");
  REQUIRE(prune.size() == 2);
  CHECK(prune[0].mode == PruneRule::Mode::kDeny);
  CHECK(prune[1].label == "bull");
  io::write_file(dir / "q.tsv", "block\tbed\tcat\n");
  CHECK_THROWS_AS(io::read_prune(dir / "q.tsv"), Error);

  CHECK(io::file_digest(dir / "a.tsv") == io::file_digest(dir / "a.tsv"));
  CHECK(io::file_digest(dir / "a.tsv").size() == 16);
  CHECK_THROWS_AS(io::read_file(dir / "missing.tsv"), Error);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(io::parse_double(io::format_double(v), "x") == v);
  }
  CHECK_THROWS_AS(io::parse_double("1.5abc", "x"), Error);
}
