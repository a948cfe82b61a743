#include "srobench/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace srobench::io {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

// Non-empty lines with their 1-based line numbers; a trailing '\r' is dropped.
std::vector<std::pair<std::size_t, std::string>> lines_of(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.emplace_back(n, line);
  }
  return out;
}

void check_field(const std::string& value, const char* what) {
  if (value.empty() || value.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(std::string("cannot write ") + what + " '" + value + "': empty or contains tab/newline");
  }
}

json box_to_json(const BoundingBox& b) { return {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

BoundingBox box_from_json(const json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()};
}

void check_scores(const ScoreMap& scores) {
  for (const auto& [label, score] : scores) {
    if (label.empty()) throw Error("empty detector label");
    if (!(score >= 0.0 && score <= 1.0)) throw Error("score " + format_double(score) + " outside [0,1]");
  }
}

template <typename T>
T get_u(const std::string& bytes, std::size_t offset) {
  if (offset + sizeof(T) > bytes.size()) throw Error("features.bin truncated");
  T v{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

template <typename T>
void put_u(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

constexpr char kFeatureMagic[4] = {'S', 'R', 'O', 'F'};
constexpr std::uint8_t kFeatureVersion = 1;

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string file_digest(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(where + ": not a number: '" + text + "'");
  }
  return v;
}

std::vector<DetectionRecord> parse_detections(const std::string& text) {
  std::vector<DetectionRecord> out;
  for (const auto& [n, line] : lines_of(text)) {
    const std::string where = "detections line " + std::to_string(n);
    try {
      const auto j = json::parse(line);
      DetectionRecord rec;
      rec.image_id = j.at("image_id").get<std::string>();
      rec.label = j.at("label").get<std::string>();
      rec.score = j.at("score").get<double>();
      const double width = j.at("image_size").at("width").get<double>();
      const double height = j.at("image_size").at("height").get<double>();
      if (!(width > 0 && height > 0)) throw Error("image_size must be positive");
      const auto px = box_from_json(j.at("box"));
      rec.box = {px.x / width, px.y / height, px.w / width, px.h / height};
      if (rec.image_id.empty() || rec.label.empty()) throw Error("empty image_id or label");
      if (!(rec.score >= 0.0 && rec.score <= 1.0)) {
        throw Error("score " + format_double(rec.score) + " outside [0,1] rejected");
      }
      validate_box(rec.box);
      out.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw Error(where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<DetectionRecord> load_detections(const fs::path& path) { return parse_detections(read_file(path)); }

std::vector<CaptionParse> load_captions(const fs::path& path) {
  std::vector<CaptionParse> out;
  for (const auto& [n, line] : lines_of(read_file(path))) {
    const std::string where = path.filename().string() + " line " + std::to_string(n);
    try {
      const auto j = json::parse(line);
      CaptionParse parse;
      parse.image_id = j.at("image_id").get<std::string>();
      parse.caption_id = j.at("caption_id").get<std::string>();
      for (const auto& t : j.at("tokens")) {
        parse.tokens.push_back({t.at("form").get<std::string>(), t.value("lemma", std::string()),
                                t.at("pos").get<std::string>()});
      }
      for (const auto& e : j.at("edges")) {
        parse.edges.push_back({e.at("head").get<int>(), e.at("dependent").get<int>(), e.at("label").get<std::string>()});
      }
      parse.root = j.at("root").get<int>();
      validate_parse(parse);
      out.push_back(std::move(parse));
    } catch (const json::exception& e) {
      throw Error(where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }
  return out;
}

std::string triplets_to_tsv(const std::vector<CaptionTriplet>& rows) {
  std::string out = "image_id\tcaption_id\tsubject\trelation\tobject\n";
  for (const auto& r : rows) {
    for (const auto* f : {&r.image_id, &r.caption_id, &r.terms.subject, &r.terms.relation, &r.terms.object}) {
      check_field(*f, "triplet field");
    }
    out += r.image_id + '\t' + r.caption_id + '\t' + r.terms.subject + '\t' + r.terms.relation + '\t' +
           r.terms.object + '\n';
  }
  return out;
}

void write_triplets(const fs::path& path, const std::vector<CaptionTriplet>& rows) {
  write_file(path, triplets_to_tsv(rows));
}

std::vector<CaptionTriplet> read_triplets(const fs::path& path) {
  std::vector<CaptionTriplet> out;
  for (const auto& [n, line] : lines_of(read_file(path))) {
    if (n == 1 && line.rfind("image_id\t", 0) == 0) continue;
    const auto f = split_tabs(line);
    if (f.size() != 5) throw Error(path.filename().string() + " line " + std::to_string(n) + ": expected 5 fields");
    out.push_back({f[0], f[1], {f[2], f[3], f[4]}});
  }
  return out;
}

json vocab_to_json(const Vocabulary& vocab) {
  return {{"entities", vocab.entities()}, {"relations", vocab.relations()}, {"hash", hex64(vocab.hash())}};
}

Vocabulary vocab_from_json(const json& j) {
  Vocabulary v(j.at("entities").get<std::vector<std::string>>(), j.at("relations").get<std::vector<std::string>>());
  if (j.contains("hash") && j.at("hash").get<std::string>() != hex64(v.hash())) {
    throw Error("vocabulary hash does not match its term lists");
  }
  return v;
}

std::string alignment_to_tsv(const AlignmentMap& alignment) {
  std::string out = "entity\tlabel\tweight\n";
  for (const auto& [entity, labels] : alignment.by_entity) {
    check_field(entity, "entity");
    for (const auto& [label, weight] : labels) {
      check_field(label, "label");
      out += entity + '\t' + label + '\t' + format_double(weight) + '\n';
    }
  }
  return out;
}

void write_alignment(const fs::path& path, const AlignmentMap& alignment) {
  write_file(path, alignment_to_tsv(alignment));
}

AlignmentMap read_alignment(const fs::path& path) {
  AlignmentMap out;
  for (const auto& [n, line] : lines_of(read_file(path))) {
    if (n == 1 && line.rfind("entity\t", 0) == 0) continue;
    const std::string where = path.filename().string() + " line " + std::to_string(n);
    const auto f = split_tabs(line);
    if (f.size() != 3) throw Error(where + ": expected 3 fields");
    const double w = parse_double(f[2], where);
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(where + ": weight must be positive and finite");
    out.by_entity[f[0]].emplace_back(f[1], w);
  }
  return out;
}

std::vector<PruneRule> read_prune(const fs::path& path) {
  std::vector<PruneRule> out;
  for (const auto& [n, line] : lines_of(read_file(path))) {
    if (line[0] == '#') continue;
    const auto f = split_tabs(line);
    const std::string where = path.filename().string() + " line " + std::to_string(n);
    if (f.size() != 3) throw Error(where + ": expected mode, entity, label");
    if (f[0] == "mode") continue;
    PruneRule rule;
    if (f[0] == "allow") {
      rule.mode = PruneRule::Mode::kAllow;
    } else if (f[0] == "deny") {
      rule.mode = PruneRule::Mode::kDeny;
    } else {
      throw Error(where + ": mode must be allow or deny");
    }
    rule.entity = f[1];
    rule.label = f[2];
    out.push_back(std::move(rule));
  }
  return out;
}

std::string examples_to_jsonl(const std::vector<ImageExample>& examples, const Vocabulary& vocab) {
  std::string out;
  for (const auto& ex : examples) {
    json gold = json::array();
    for (const auto& t : ex.gold) {
      const auto terms = vocab.terms(t);
      gold.push_back({terms.subject, terms.relation, terms.object});
    }
    const json j = {{"image_id", ex.image_id},
                    {"sbox", box_to_json(ex.subject_box)},
                    {"obox", box_to_json(ex.object_box)},
                    {"s_scores", ex.subject_scores},
                    {"o_scores", ex.object_scores},
                    {"gold", gold}};
    out += j.dump() + '\n';
  }
  return out;
}

std::vector<ImageExample> examples_from_jsonl(const std::string& text, const Vocabulary& vocab) {
  std::vector<ImageExample> out;
  for (const auto& [n, line] : lines_of(text)) {
    const std::string where = "examples line " + std::to_string(n);
    try {
      const auto j = json::parse(line);
      ImageExample ex;
      ex.image_id = j.at("image_id").get<std::string>();
      ex.subject_box = box_from_json(j.at("sbox"));
      ex.object_box = box_from_json(j.at("obox"));
      ex.subject_scores = j.at("s_scores").get<ScoreMap>();
      ex.object_scores = j.at("o_scores").get<ScoreMap>();
      validate_box(ex.subject_box);
      validate_box(ex.object_box);
      if (ex.subject_box == ex.object_box) throw Error("identical subject and object boxes");
      check_scores(ex.subject_scores);
      check_scores(ex.object_scores);
      for (const auto& g : j.at("gold")) {
        const auto terms = g.get<std::vector<std::string>>();
        if (terms.size() != 3) throw Error("gold entries need 3 terms");
        const auto t = vocab.index({terms[0], terms[1], terms[2]});
        if (!t) throw Error("gold triplet (" + terms[0] + ", " + terms[1] + ", " + terms[2] + ") not in vocabulary");
        ex.gold.push_back(*t);
      }
      std::sort(ex.gold.begin(), ex.gold.end());
      ex.gold.erase(std::unique(ex.gold.begin(), ex.gold.end()), ex.gold.end());
      if (ex.gold.empty()) throw Error("empty gold set");
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw Error(where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }
  return out;
}

std::string fold_to_tsv(const SplitFold& fold, std::size_t n_examples) {
  std::vector<std::string> role(n_examples);
  auto assign = [&](std::size_t id, std::string r) {
    if (id >= n_examples || !role[id].empty()) throw Error("fold " + fold.name + ": bad or repeated example id");
    role[id] = std::move(r);
  };
  for (auto id : fold.train) assign(id, "train");
  for (auto id : fold.test) assign(id, "test");
  for (const auto& [id, reason] : fold.removed) assign(id, "removed:" + reason);
  std::string out = "example_id\trole\tnote\n";
  for (std::size_t i = 0; i < n_examples; ++i) {
    if (role[i].empty()) throw Error("fold " + fold.name + ": example " + std::to_string(i) + " unassigned");
    auto moved = fold.moved.find(i);
    out += std::to_string(i) + '\t' + role[i] + '\t' + (moved == fold.moved.end() ? "" : "moved:" + moved->second) +
           '\n';
  }
  return out;
}

SplitFold fold_from_tsv(const std::string& text, const std::string& name, int fold_id) {
  SplitFold fold;
  fold.name = name;
  fold.fold_id = fold_id;
  for (const auto& [n, line] : lines_of(text)) {
    if (n == 1 && line.rfind("example_id\t", 0) == 0) continue;
    const auto f = split_tabs(line);
    const std::string where = name + ".tsv line " + std::to_string(n);
    if (f.size() < 2 || f.size() > 3) throw Error(where + ": expected example_id, role[, note]");
    std::size_t id = 0;
    const auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), id);
    if (res.ec != std::errc() || res.ptr != f[0].data() + f[0].size()) throw Error(where + ": bad example id");
    if (f[1] == "train") {
      fold.train.push_back(id);
    } else if (f[1] == "test") {
      fold.test.push_back(id);
    } else if (f[1].rfind("removed:", 0) == 0) {
      fold.removed[id] = f[1].substr(8);
    } else {
      throw Error(where + ": unknown role '" + f[1] + "'");
    }
    if (f.size() == 3 && f[2].rfind("moved:", 0) == 0) fold.moved[id] = f[2].substr(6);
  }
  return fold;
}

std::string features_to_bin(const std::vector<SpatialFeatures>& rows) {
  std::string out(kFeatureMagic, 4);
  out.push_back(static_cast<char>(kFeatureVersion));
  put_u<std::uint32_t>(out, static_cast<std::uint32_t>(kSpatialDims));
  put_u<std::uint64_t>(out, rows.size());
  for (const auto& row : rows) {
    for (double v : row) put_u<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

std::vector<SpatialFeatures> features_from_bin(const std::string& bytes) {
  if (bytes.size() < 17 || std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) throw Error("features.bin: bad magic");
  if (static_cast<std::uint8_t>(bytes[4]) != kFeatureVersion) throw Error("features.bin: unsupported layout version");
  if (get_u<std::uint32_t>(bytes, 5) != kSpatialDims) throw Error("features.bin: unexpected dimensionality");
  const auto rows = get_u<std::uint64_t>(bytes, 9);
  if (bytes.size() != 17 + rows * kSpatialDims * 4) throw Error("features.bin: size does not match header");
  std::vector<SpatialFeatures> out(rows);
  std::size_t offset = 17;
  for (auto& row : out) {
    for (double& v : row) {
      v = std::bit_cast<float>(get_u<std::uint32_t>(bytes, offset));
      offset += 4;
    }
  }
  return out;
}

json normalizer_to_json(const Normalizer& n) { return {{"mean", n.mean}, {"std", n.stddev}}; }

Normalizer normalizer_from_json(const json& j) {
  Normalizer n;
  n.mean = j.at("mean").get<SpatialFeatures>();
  n.stddev = j.at("std").get<SpatialFeatures>();
  return n;
}

json relation_model_to_json(const RelationModel& m) {
  return {{"variant", std::string(variant_name(m.variant))},
          {"d", m.input_dims},
          {"one_hot_width", m.one_hot_width},
          {"num_relations", m.num_relations},
          {"W", m.weights},
          {"bias", m.bias},
          {"log_frequency", m.log_frequency}};
}

RelationModel relation_model_from_json(const json& j) {
  RelationModel m;
  const auto name = j.at("variant").get<std::string>();
  const auto variant = parse_variant(name);
  if (!variant) throw Error("relation model: unknown variant '" + name + "'");
  m.variant = *variant;
  m.input_dims = j.at("d").get<std::size_t>();
  m.one_hot_width = j.at("one_hot_width").get<std::size_t>();
  m.num_relations = j.at("num_relations").get<int>();
  m.weights = j.at("W").get<std::vector<std::vector<double>>>();
  m.bias = j.at("bias").get<std::vector<double>>();
  m.log_frequency = j.at("log_frequency").get<std::vector<double>>();
  if (m.input_dims != variant_dims(m.variant, m.one_hot_width)) throw Error("relation model: d does not match variant");
  if (m.variant == RelationFeatureVariant::kNone) {
    if (m.log_frequency.size() != static_cast<std::size_t>(m.num_relations)) {
      throw Error("relation model: log_frequency size mismatch");
    }
  } else {
    if (m.weights.size() != static_cast<std::size_t>(m.num_relations) || m.bias.size() != m.weights.size()) {
      throw Error("relation model: weight rows do not match num_relations");
    }
    for (const auto& row : m.weights) {
      if (row.size() != m.input_dims) throw Error("relation model: weight row has wrong width");
    }
  }
  return m;
}

json weights_to_json(const ModelWeights& w) {
  return {{"w_S", w.s}, {"w_O", w.o}, {"w_R", w.r}, {"w_SR", w.sr}, {"w_RO", w.ro}};
}

ModelWeights weights_from_json(const json& j) {
  return {j.at("w_S").get<double>(), j.at("w_O").get<double>(), j.at("w_R").get<double>(), j.at("w_SR").get<double>(),
          j.at("w_RO").get<double>()};
}

json tables_to_json(const BigramTables& t) {
  json sr = json::array(), ro = json::array();
  for (int s = 0; s < t.num_entities(); ++s) {
    std::vector<double> row;
    for (int r = 0; r < t.num_relations(); ++r) row.push_back(t.sr(s, r));
    sr.push_back(row);
  }
  for (int r = 0; r < t.num_relations(); ++r) {
    std::vector<double> row;
    for (int o = 0; o < t.num_entities(); ++o) row.push_back(t.ro(r, o));
    ro.push_back(row);
  }
  return {{"num_entities", t.num_entities()}, {"num_relations", t.num_relations()}, {"f_SR", sr}, {"f_RO", ro}};
}

BigramTables tables_from_json(const json& j) {
  const int ne = j.at("num_entities").get<int>();
  const int nr = j.at("num_relations").get<int>();
  BigramTables t(ne, nr);
  const auto sr = j.at("f_SR").get<std::vector<std::vector<double>>>();
  const auto ro = j.at("f_RO").get<std::vector<std::vector<double>>>();
  if (sr.size() != static_cast<std::size_t>(ne) || ro.size() != static_cast<std::size_t>(nr)) {
    throw Error("bigram tables: shape mismatch");
  }
  for (int s = 0; s < ne; ++s) {
    if (sr[static_cast<std::size_t>(s)].size() != static_cast<std::size_t>(nr)) throw Error("bigram tables: shape mismatch");
    for (int r = 0; r < nr; ++r) t.sr(s, r) = sr[static_cast<std::size_t>(s)][static_cast<std::size_t>(r)];
  }
  for (int r = 0; r < nr; ++r) {
    if (ro[static_cast<std::size_t>(r)].size() != static_cast<std::size_t>(ne)) throw Error("bigram tables: shape mismatch");
    for (int o = 0; o < ne; ++o) t.ro(r, o) = ro[static_cast<std::size_t>(r)][static_cast<std::size_t>(o)];
  }
  return t;
}

json entity_matrix_to_json(const EntityPotentialMatrix& m, const Vocabulary& vocab) {
  json rows = json::object();
  for (int e = 0; e < m.num_entities(); ++e) {
    json row = json::object();
    for (const auto& [label, w] : m.row(e)) row[label] = w;
    rows[vocab.entity(e)] = row;
  }
  return {{"rows", rows}};
}

EntityPotentialMatrix entity_matrix_from_json(const json& j, const Vocabulary& vocab) {
  std::vector<std::vector<std::pair<std::string, double>>> rows(static_cast<std::size_t>(vocab.num_entities()));
  for (const auto& [entity, row] : j.at("rows").items()) {
    const auto e = vocab.entity_index(entity);
    if (!e) throw Error("entity matrix: unknown entity '" + entity + "'");
    for (const auto& [label, w] : row.items()) rows[static_cast<std::size_t>(*e)].emplace_back(label, w.get<double>());
  }
  return EntityPotentialMatrix(std::move(rows));
}

json baseline_to_json(const BaselineModel& m) {
  json j = {{"num_entities", m.num_entities}, {"num_relations", m.num_relations}};
  if (m.kind == BaselineModel::Kind::kMostFrequent) {
    j["kind"] = "MF";
    j["mode"] = {m.mode.s, m.mode.r, m.mode.o};
  } else {
    j["kind"] = "SC";
    j["p_R"] = m.p_relation;
    j["p_S_given_R"] = m.p_subject;
    j["p_O_given_R"] = m.p_object;
  }
  return j;
}

BaselineModel baseline_from_json(const json& j) {
  BaselineModel m;
  m.num_entities = j.at("num_entities").get<int>();
  m.num_relations = j.at("num_relations").get<int>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "MF") {
    m.kind = BaselineModel::Kind::kMostFrequent;
    const auto mode = j.at("mode").get<std::vector<int>>();
    if (mode.size() != 3) throw Error("baseline: MF mode needs 3 entries");
    m.mode = {mode[0], mode[1], mode[2]};
  } else if (kind == "SC") {
    m.kind = BaselineModel::Kind::kStochasticConditional;
    m.p_relation = j.at("p_R").get<std::vector<double>>();
    m.p_subject = j.at("p_S_given_R").get<std::vector<std::vector<double>>>();
    m.p_object = j.at("p_O_given_R").get<std::vector<std::vector<double>>>();
  } else {
    throw Error("baseline: unknown kind '" + kind + "'");
  }
  return m;
}

json memorizer_to_json(const MemorizerModel& m) {
  json rows = json::array();
  for (const auto& [t, count] : m.counts) rows.push_back({t.s, t.r, t.o, count});
  return {{"kind", "Memorizer"}, {"counts", rows}};
}

MemorizerModel memorizer_from_json(const json& j) {
  MemorizerModel m;
  for (const auto& row : j.at("counts")) {
    m.counts[{row.at(0).get<int>(), row.at(1).get<int>(), row.at(2).get<int>()}] = row.at(3).get<double>();
  }
  return m;
}

json world_truth_to_json(const WorldTruth& truth) {
  json rules = json::array();
  for (const auto& r : truth.rules) {
    rules.push_back({{"name", r.name},
                     {"dx", {r.dx_min, r.dx_max}},
                     {"dy", {r.dy_min, r.dy_max}},
                     {"overlap", {r.overlap_min, r.overlap_max}}});
  }
  return {{"labels", truth.labels},
          {"entity_prior", truth.entity_prior},
          {"preferred_relation", truth.preferred_relation},
          {"rules", rules}};
}

std::string dump(const json& j) { return j.dump(2) + '\n'; }

}  // namespace srobench::io
