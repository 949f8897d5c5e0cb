#include "fnd/schemes.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "fnd/error.hpp"
#include "fnd/fingerprint.hpp"
#include "fnd/models/serialize.hpp"
#include "fnd/rng.hpp"

namespace fnd {

using nlohmann::json;

namespace {

// Seed streams derived from the master seed.
constexpr std::uint64_t kModelStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kCurveStream = 3;
constexpr std::uint64_t kSubsampleStream = 4;

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorKind::SpecValidation, message); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

YAML::Node parse_yaml(const std::string& text, const std::string& what) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    invalid(what + ": " + e.what());
  }
}

json scalar_to_json(const YAML::Node& node) {
  const auto& text = node.Scalar();
  if (node.Tag() == "!") return text;
  if (text == "~" || text == "null" || text.empty()) return nullptr;
  if (text == "true" || text == "True") return true;
  if (text == "false" || text == "False") return false;
  const char* first = text.data();
  const char* last = first + text.size();
  if (text.find_first_of(".eE") == std::string::npos) {
    if (text.front() == '-') {
      std::int64_t v = 0;
      if (auto [p, ec] = std::from_chars(first, last, v); ec == std::errc{} && p == last) return v;
    } else {
      std::uint64_t v = 0;
      if (auto [p, ec] = std::from_chars(first, last, v); ec == std::errc{} && p == last) return v;
    }
  }
  double d = 0;
  if (auto [p, ec] = std::from_chars(first, last, d); ec == std::errc{} && p == last) return d;
  return text;
}

json to_json_value(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(to_json_value(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = to_json_value(kv.second);
      return out;
    }
  }
  return nullptr;
}

void require_map(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) invalid(where + " must be a mapping");
}

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<std::string_view> allowed) {
  require_map(node, where);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      invalid("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

std::string get_string(const YAML::Node& node, const std::string& key) {
  const auto v = to_json_value(node);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return node.Scalar();
  invalid(key + " must be a string");
}

std::uint64_t get_uint(const YAML::Node& node, const std::string& key) {
  const auto v = to_json_value(node);
  if (!v.is_number_unsigned()) invalid(key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double get_double(const YAML::Node& node, const std::string& key) {
  const auto v = to_json_value(node);
  if (!v.is_number()) invalid(key + " must be a number");
  return v.get<double>();
}

bool get_bool(const YAML::Node& node, const std::string& key) {
  const auto v = to_json_value(node);
  if (!v.is_boolean()) invalid(key + " must be a boolean");
  return v.get<bool>();
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& key) {
  std::vector<std::string> out;
  if (node.IsScalar()) {
    out.push_back(get_string(node, key));
  } else if (node.IsSequence()) {
    for (const auto& item : node) out.push_back(get_string(item, key));
  } else {
    invalid(key + " must be a string or a list of strings");
  }
  return out;
}

std::string lower_trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Label parse_class(const std::string& text, const std::string& where) {
  const auto t = lower_trim(text);
  if (t == "fake") return Label::Fake;
  if (t == "true" || t == "real") return Label::True;
  invalid(where + ": class must be FAKE or TRUE, got '" + text + "'");
}

bool is_neural_scheme(Scheme s) { return s != Scheme::ClassicalEs; }

bool is_classical(Algorithm a) { return !is_sequence_model(a) && a != Algorithm::Constant; }

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::ClassicalEs: return "1";
    case Scheme::NeuralEs: return "2";
    case Scheme::NeuralEn: return "3";
    case Scheme::CrossLingual: return "4";
    case Scheme::Curve: return "curve";
  }
  return "1";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "1") return Scheme::ClassicalEs;
  if (text == "2") return Scheme::NeuralEs;
  if (text == "3") return Scheme::NeuralEn;
  if (text == "4") return Scheme::CrossLingual;
  if (text == "curve") return Scheme::Curve;
  invalid("unknown scheme '" + std::string(text) + "' (expected 1, 2, 3, 4 or curve)");
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.parent_path());
}

DatasetManifest DatasetManifest::parse(const std::string& yaml, const std::filesystem::path& base_dir) {
  const auto root = parse_yaml(yaml, "datasets manifest");
  if (!root.IsMap() || !root["datasets"]) invalid("datasets manifest must have a top-level 'datasets' mapping");
  check_keys(root, "", {"datasets"});
  const auto datasets = root["datasets"];
  require_map(datasets, "datasets");
  if (datasets.size() == 0) invalid("datasets manifest lists no datasets");

  DatasetManifest m;
  for (const auto& kv : datasets) {
    DatasetEntry e;
    e.name = kv.first.as<std::string>();
    const auto where = "datasets." + e.name;
    const auto& node = kv.second;
    check_keys(node, where, {"path", "language", "text", "label", "id", "delimiter", "labels", "merge"});
    if (node["merge"]) {
      if (node["path"]) invalid(where + ": an entry has either path or merge, not both");
      e.merge = string_list(node["merge"], where + ".merge");
      if (e.merge.empty()) invalid(where + ".merge is empty");
      if (node["language"]) invalid(where + ": a merge takes its language from the merged datasets");
      m.entries_.emplace(e.name, std::move(e));
      continue;
    }
    if (!node["path"]) invalid(where + ": missing path");
    if (!node["language"]) invalid(where + ": missing language");
    e.path = get_string(node["path"], where + ".path");
    if (e.path.is_relative() && !base_dir.empty()) e.path = base_dir / e.path;
    try {
      e.language = parse_language(get_string(node["language"], where + ".language"));
    } catch (const Error& err) {
      invalid(where + ": " + err.what());
    }
    if (node["text"]) e.schema.text_columns = string_list(node["text"], where + ".text");
    if (node["label"]) e.schema.label_column = get_string(node["label"], where + ".label");
    if (node["id"]) e.schema.id_column = get_string(node["id"], where + ".id");
    if (node["delimiter"]) {
      auto d = get_string(node["delimiter"], where + ".delimiter");
      if (d == "\\t" || d == "tab") d = "\t";
      if (d.size() != 1) invalid(where + ".delimiter must be a single character");
      e.schema.delimiter = d.front();
    }
    if (node["labels"]) {
      require_map(node["labels"], where + ".labels");
      e.schema.label_map.clear();
      for (const auto& l : node["labels"]) {
        e.schema.label_map[lower_trim(l.first.as<std::string>())] =
            parse_class(l.second.as<std::string>(), where + ".labels");
      }
    }
    m.entries_.emplace(e.name, std::move(e));
  }

  for (const auto& [name, e] : m.entries_) {
    for (const auto& part : e.merge) {
      if (!m.contains(part)) invalid("datasets." + name + " merges unknown dataset '" + part + "'");
    }
    (void)m.language(name);
  }
  return m;
}

const DatasetEntry& DatasetManifest::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) invalid("unknown dataset '" + name + "'");
  return it->second;
}

Language DatasetManifest::language(const std::string& name) const {
  std::function<Language(const std::string&, std::size_t)> resolve = [&](const std::string& n, std::size_t depth) {
    if (depth > entries_.size()) invalid("dataset '" + name + "' has a cyclic merge");
    const auto& e = at(n);
    if (e.merge.empty()) return e.language;
    const Language first = resolve(e.merge.front(), depth + 1);
    for (const auto& part : e.merge) {
      if (resolve(part, depth + 1) != first) invalid("dataset '" + n + "' merges corpora of different languages");
    }
    return first;
  };
  return resolve(name, 0);
}

std::vector<std::string> DatasetManifest::names() const {
  std::vector<std::string> out;
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

Corpus DatasetManifest::load_corpus(const std::string& name, std::vector<std::pair<std::string, LoadStats>>* stats) const {
  (void)language(name);
  const auto& e = at(name);
  if (e.merge.empty()) {
    LoadStats s;
    auto corpus = load_csv(e.path, e.schema, e.language, e.name, &s);
    if (stats) stats->emplace_back(e.name, s);
    return Corpus(name, std::vector<Document>(corpus.documents()));
  }
  std::vector<Corpus> parts;
  for (const auto& part : e.merge) parts.push_back(load_corpus(part, stats));
  return merge(parts, name);
}

ModelConfig ExperimentSpec::model() const {
  ModelConfig config;
  try {
    config = config_from_json(family, params);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SpecValidation) throw;
    invalid(std::string("model.params: ") + e.what());
  }
  if (!params.contains("seed")) set_seed(config, derive_seed(seed, kModelStream));
  return config;
}

PipelineConfig ExperimentSpec::pipeline(Language language) const {
  PipelineConfig p;
  if (is_neural_scheme(scheme)) {
    p.normalize.stop_words = language == Language::En ? StopWordList::En : StopWordList::Es;
    p.normalize.stemming = StemmerKind::Off;
    p.max_len = language == Language::En ? 1500 : 500;
    if (is_sequence_model(family)) p.representation = Representation::Sequence;
  }
  ModelConfig scratch = ConstantConfig{};
  for (const auto& [key, value] : preprocessing) apply_override(key, value, scratch, p, language);
  return p;
}

SplitPlan ExperimentSpec::plan() const {
  SplitPlan p = split;
  p.seed = derive_seed(seed, kSplitStream);
  return p;
}

CurveOptions ExperimentSpec::curve_options() const {
  CurveOptions c = curve;
  c.seed = derive_seed(seed, kCurveStream);
  return c;
}

ExperimentSpec parse_spec(const std::string& yaml) {
  const auto root = parse_yaml(yaml, "experiment spec");
  check_keys(root, "", {"name", "scheme", "data", "model", "normalize", "represent", "split", "grid", "curve", "seed",
                        "output"});
  ExperimentSpec s;
  if (!root["scheme"]) invalid("missing scheme");
  s.scheme = parse_scheme(get_string(root["scheme"], "scheme"));
  if (root["name"]) s.name = get_string(root["name"], "name");

  if (!root["data"]) invalid("missing data");
  const auto data = root["data"];
  check_keys(data, "data", {"train", "validate", "subsample"});
  if (!data["train"]) invalid("missing data.train");
  s.train = get_string(data["train"], "data.train");
  if (data["validate"]) s.validate = get_string(data["validate"], "data.validate");
  if (data["subsample"]) s.subsample = get_uint(data["subsample"], "data.subsample");

  if (!root["model"]) invalid("missing model");
  const auto model = root["model"];
  check_keys(model, "model", {"family", "params"});
  if (!model["family"]) invalid("missing model.family");
  try {
    s.family = parse_algorithm(get_string(model["family"], "model.family"));
  } catch (const Error& e) {
    invalid(std::string("model.family: ") + e.what());
  }
  if (model["params"]) {
    require_map(model["params"], "model.params");
    s.params = to_json_value(model["params"]);
  }

  if (root["normalize"]) {
    check_keys(root["normalize"], "normalize", {"lowercase", "strip_non_alnum", "stop_words", "stemming"});
    for (const auto& kv : root["normalize"])
      s.preprocessing.emplace_back("normalize." + kv.first.as<std::string>(), to_json_value(kv.second));
  }
  if (root["represent"]) {
    check_keys(root["represent"], "represent", {"kind", "vocab_size", "max_len", "oov"});
    for (const auto& kv : root["represent"])
      s.preprocessing.emplace_back("represent." + kv.first.as<std::string>(), to_json_value(kv.second));
  }

  if (root["split"]) {
    const auto split = root["split"];
    check_keys(split, "split", {"iterations", "train_fraction", "dev_fraction", "stratified"});
    if (split["iterations"]) s.split.iterations = get_uint(split["iterations"], "split.iterations");
    if (split["train_fraction"]) s.split.train_fraction = get_double(split["train_fraction"], "split.train_fraction");
    if (split["dev_fraction"]) s.split.dev_fraction_of_train = get_double(split["dev_fraction"], "split.dev_fraction");
    if (split["stratified"]) s.split.stratified = get_bool(split["stratified"], "split.stratified");
  }

  if (root["grid"]) {
    require_map(root["grid"], "grid");
    for (const auto& kv : root["grid"]) {
      GridAxis axis{kv.first.as<std::string>(), {}};
      const auto values = to_json_value(kv.second);
      if (values.is_array()) {
        axis.values.assign(values.begin(), values.end());
      } else {
        axis.values.push_back(values);
      }
      s.grid.axes.push_back(std::move(axis));
    }
  }

  if (root["curve"]) {
    const auto curve = root["curve"];
    check_keys(curve, "curve", {"points", "repeats", "dev_fraction"});
    if (curve["points"]) {
      if (!curve["points"].IsSequence()) invalid("curve.points must be a list");
      s.curve.points.clear();
      for (const auto& p : curve["points"]) s.curve.points.push_back(get_uint(p, "curve.points"));
    }
    if (curve["repeats"]) s.curve.repeats = get_uint(curve["repeats"], "curve.repeats");
    if (curve["dev_fraction"]) s.curve.dev_fraction = get_double(curve["dev_fraction"], "curve.dev_fraction");
  }

  if (root["seed"]) s.seed = get_uint(root["seed"], "seed");
  if (root["output"]) s.output = get_string(root["output"], "output");
  if (s.validate.empty() && s.scheme != Scheme::CrossLingual && s.scheme != Scheme::Curve) s.validate = s.train;
  return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path) { return parse_spec(read_file(path)); }

json to_json(const ExperimentSpec& s) {
  json j{{"name", s.name},
         {"scheme", std::string(to_string(s.scheme))},
         {"data", {{"train", s.train}, {"validate", s.validate}}},
         {"model", {{"family", std::string(to_string(s.family))}, {"params", s.params}}},
         {"split",
          {{"iterations", s.split.iterations},
           {"train_fraction", s.split.train_fraction},
           {"dev_fraction", s.split.dev_fraction_of_train},
           {"stratified", s.split.stratified}}},
         {"seed", s.seed},
         {"output", s.output.generic_string()}};
  if (s.subsample) j["data"]["subsample"] = *s.subsample;
  j["preprocessing"] = json::array();
  for (const auto& [key, value] : s.preprocessing) j["preprocessing"].push_back({{"key", key}, {"value", value}});
  j["grid"] = json::array();
  for (const auto& axis : s.grid.axes) j["grid"].push_back({{"key", axis.key}, {"values", axis.values}});
  if (s.scheme == Scheme::Curve) {
    j["curve"] = {{"points", s.curve.points}, {"repeats", s.curve.repeats}, {"dev_fraction", s.curve.dev_fraction}};
  }
  return j;
}

std::string spec_fingerprint(const ExperimentSpec& spec) { return fingerprint_of(to_json(spec).dump()); }

std::vector<std::string> validate_spec(const ExperimentSpec& spec, const DatasetManifest* manifest) {
  std::vector<std::string> v;
  const bool cross = spec.scheme == Scheme::CrossLingual || spec.scheme == Scheme::Curve;

  if (spec.train.empty()) v.push_back("data.train is required");
  if (cross && spec.validate.empty()) v.push_back("scheme " + std::string(to_string(spec.scheme)) +
                                                  " requires data.validate (the translated corpus)");
  if (!cross && !spec.validate.empty() && spec.validate != spec.train) {
    v.push_back("scheme/dataset mismatch: scheme " + std::string(to_string(spec.scheme)) +
                " trains and validates on the same corpus, but data.validate differs from data.train");
  }
  if (cross && !spec.validate.empty() && spec.validate == spec.train) {
    v.push_back("scheme/dataset mismatch: data.validate must be the translated corpus, not the training corpus");
  }

  std::optional<Language> train_language;
  if (manifest) {
    auto language_of = [&](const std::string& name) -> std::optional<Language> {
      if (name.empty()) return std::nullopt;
      if (!manifest->contains(name)) {
        v.push_back("unknown dataset '" + name + "'");
        return std::nullopt;
      }
      try {
        return manifest->language(name);
      } catch (const Error& e) {
        v.push_back(e.what());
        return std::nullopt;
      }
    };
    train_language = language_of(spec.train);
    const auto validate_language = spec.validate == spec.train ? train_language : language_of(spec.validate);
    auto expect = [&](const std::optional<Language>& got, Language want, const std::string& role) {
      if (got && *got != want) {
        v.push_back("scheme/dataset mismatch: scheme " + std::string(to_string(spec.scheme)) + " needs a " +
                    std::string(to_string(want)) + " " + role + " corpus, got " + std::string(to_string(*got)));
      }
    };
    switch (spec.scheme) {
      case Scheme::ClassicalEs:
      case Scheme::NeuralEs:
        expect(train_language, Language::Es, "training");
        break;
      case Scheme::NeuralEn:
        expect(train_language, Language::En, "training");
        break;
      case Scheme::CrossLingual:
      case Scheme::Curve:
        expect(train_language, Language::En, "training");
        expect(validate_language, Language::EsTranslated, "validation");
        break;
    }
  }

  if (spec.scheme == Scheme::ClassicalEs && is_sequence_model(spec.family)) {
    v.push_back("scheme 1 evaluates classical models (svm, rf, gbt, mlp); got " + std::string(to_string(spec.family)));
  }
  if (is_neural_scheme(spec.scheme) && is_classical(spec.family)) {
    v.push_back("scheme " + std::string(to_string(spec.scheme)) + " evaluates sequence models (cnn, lstm); got " +
                std::string(to_string(spec.family)));
  }

  std::optional<ModelConfig> model;
  try {
    model = spec.model();
    validate(*model);
  } catch (const Error& e) {
    v.push_back(std::string("model.params: ") + e.what());
  }
  std::optional<PipelineConfig> pipeline;
  try {
    pipeline = spec.pipeline(train_language.value_or(spec.scheme == Scheme::NeuralEn || spec.scheme == Scheme::CrossLingual ||
                                                             spec.scheme == Scheme::Curve
                                                         ? Language::En
                                                         : Language::Es));
  } catch (const Error& e) {
    v.push_back(e.what());
  }

  auto check_compat = [&](Algorithm family, Representation r, const std::string& where) {
    if (is_sequence_model(family) && r != Representation::Sequence) {
      v.push_back("sequence model requires id sequences" + where);
    }
    if (is_classical(family) && r == Representation::Sequence) {
      v.push_back("classical model requires sparse features (bow or tfidf)" + where);
    }
  };
  if (pipeline) check_compat(spec.family, pipeline->representation, "");
  if (model) {
    const EmbeddingConfig* emb = nullptr;
    if (const auto* c = std::get_if<CnnConfig>(&*model)) emb = &c->embedding;
    if (const auto* c = std::get_if<LstmConfig>(&*model)) emb = &c->embedding;
    if (emb && !emb->trainable && emb->source.empty()) {
      v.push_back("fixed embedding requires model.params.embedding.source");
    }
  }

  const auto& p = spec.split;
  if (p.iterations < 1) v.push_back("split.iterations must be at least 1");
  if (!(p.train_fraction > 0.0 && p.train_fraction < 1.0)) v.push_back("split.train_fraction must lie in (0, 1)");
  if (!(p.dev_fraction_of_train >= 0.0 && p.dev_fraction_of_train < 1.0)) {
    v.push_back("split.dev_fraction must lie in [0, 1)");
  }
  if (spec.subsample && *spec.subsample < 10) v.push_back("data.subsample must be at least 10");

  if (!spec.grid.axes.empty()) {
    if (cross) v.push_back("grid search applies to schemes 1, 2 and 3 only");
    std::set<std::string> seen;
    for (const auto& axis : spec.grid.axes) {
      if (!seen.insert(axis.key).second) v.push_back("grid axis '" + axis.key + "' appears twice");
      if (axis.values.empty()) v.push_back("grid axis '" + axis.key + "' has no values");
    }
    if (model && pipeline && v.empty()) {
      try {
        const auto candidates = expand_grid(spec.grid, *model, *pipeline, train_language.value_or(Language::Es));
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          check_compat(algorithm_of(candidates[i].model), candidates[i].pipeline.representation,
                       " (grid point " + candidates[i].overrides.dump() + ")");
        }
      } catch (const Error& e) {
        v.push_back(std::string("grid: ") + e.what());
      }
    }
  }

  if (spec.scheme == Scheme::Curve) {
    if (spec.curve.points.empty()) v.push_back("curve.points must not be empty");
    if (spec.curve.repeats < 1) v.push_back("curve.repeats must be at least 1");
    if (!(spec.curve.dev_fraction >= 0.0 && spec.curve.dev_fraction < 1.0)) {
      v.push_back("curve.dev_fraction must lie in [0, 1)");
    }
  }
  return v;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const DatasetManifest& manifest,
                                const RunOptions& options) {
  if (const auto violations = validate_spec(spec, &manifest); !violations.empty()) {
    invalid("invalid experiment spec:\n  " + join(violations, "\n  "));
  }
  const auto fingerprint = spec_fingerprint(spec);
  Corpus train = manifest.load_corpus(spec.train);
  if (spec.subsample) train = stratified_subsample(train, *spec.subsample, derive_seed(spec.seed, kSubsampleStream));
  const auto language = manifest.language(spec.train);
  const auto model = spec.model();
  const auto pipeline = spec.pipeline(language);

  EvalOptions eval;
  eval.name = spec.name;
  eval.jobs = options.jobs;

  ExperimentResult result;
  std::optional<Corpus> translated;
  if (spec.scheme == Scheme::CrossLingual || spec.scheme == Scheme::Curve) translated = manifest.load_corpus(spec.validate);

  if (spec.scheme == Scheme::Curve) {
    auto curve = learning_curve(model, pipeline, train, *translated, spec.curve_options(), eval);
    curve.spec_fingerprint = fingerprint;
    result.curve = std::move(curve);
  } else if (!spec.grid.axes.empty()) {
    const auto candidates = expand_grid(spec.grid, model, pipeline, language);
    auto grid = grid_search(candidates, train, spec.plan(), eval);
    grid.spec_fingerprint = fingerprint;
    for (auto& r : grid.reports) r.spec_fingerprint = fingerprint;
    result.grid = std::move(grid);
  } else {
    if (translated) eval.external = &*translated;
    auto report = bootstrap_evaluate(model, train, spec.plan(), pipeline, eval);
    report.spec_fingerprint = fingerprint;
    if (translated) {
      const auto a = tokenize_corpus(*translated, pipeline.normalize);
      const auto b = tokenize_corpus(train, pipeline.normalize);
      auto uncapped = [](const std::vector<TokenizedDoc>& docs) {
        std::size_t tokens = 0;
        for (const auto& d : docs) tokens += d.size();
        return build_vocab(docs, tokens + 2);
      };
      const double overlap = vocabulary_overlap(uncapped(a), uncapped(b));
      std::ostringstream msg;
      msg.precision(3);
      msg << "only " << overlap * 100.0 << "% of the validation vocabulary occurs in the training corpus";
      if (overlap < 0.9) report.warnings.push_back(msg.str());
    }
    result.report = std::move(report);
  }

  if (!options.persist) return result;
  const auto dir = options.output.empty() ? spec.output : options.output;
  if (dir.empty()) invalid("no output directory (set 'output' in the spec or pass --out)");
  std::filesystem::create_directories(dir);
  auto spec_json = to_json(spec);
  spec_json["fingerprint"] = fingerprint;
  write_json(spec_json, dir / "spec.json");
  result.files.push_back(dir / "spec.json");
  std::vector<EvalReport> rows;
  if (result.report) {
    write_json(to_json(*result.report), dir / "report.json");
    result.files.push_back(dir / "report.json");
    rows.push_back(*result.report);
  }
  if (result.grid) {
    write_json(to_json(*result.grid), dir / "grid.json");
    result.files.push_back(dir / "grid.json");
    rows = result.grid->reports;
  }
  if (result.curve) {
    write_json(to_json(*result.curve), dir / "curve.json");
    result.files.push_back(dir / "curve.json");
  }
  if (!rows.empty()) {
    std::ofstream csv(dir / "results.csv");
    if (!csv) throw Error(ErrorKind::MissingFile, "cannot write " + (dir / "results.csv").string());
    write_results_csv(csv, rows);
    result.files.push_back(dir / "results.csv");
  }
  return result;
}

json corpus_statistics(const Corpus& corpus, const NormalizerConfig& tokenizer, double percentile) {
  const auto counts = corpus.class_counts();
  json j{{"name", corpus.name()}, {"documents", corpus.size()}, {"fake", counts.fake}, {"true", counts.real}};
  if (corpus.empty()) return j;
  const auto h = length_histogram(corpus, tokenizer, percentile);
  json bins = json::array();
  for (const auto& b : h.bins) bins.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}});
  j["lengths"] = {{"min", h.min_length},        {"max", h.max_length},
                  {"mean", h.mean_length},      {"percentile", h.percentile},
                  {"recommended_max_len", h.recommended_max_len}, {"bins", bins}};
  return j;
}

}  // namespace fnd
