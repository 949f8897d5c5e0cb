#include "fnd/eval/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "fnd/error.hpp"
#include "fnd/fingerprint.hpp"
#include "fnd/models/serialize.hpp"
#include "fnd/parallel.hpp"
#include "fnd/rng.hpp"

namespace fnd {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_neural(Algorithm a) { return a == Algorithm::Mlp || is_sequence_model(a); }

const EmbeddingConfig* fixed_embedding(const ModelConfig& model) {
  if (const auto* c = std::get_if<CnnConfig>(&model)) return c->embedding.trainable ? nullptr : &c->embedding;
  if (const auto* c = std::get_if<LstmConfig>(&model)) return c->embedding.trainable ? nullptr : &c->embedding;
  return nullptr;
}

std::vector<Label> select_labels(std::span<const Label> labels, std::span<const std::size_t> indices) {
  std::vector<Label> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(labels[i]);
  return out;
}

std::vector<std::string> select_ids(std::span<const std::string> ids, std::span<const std::size_t> indices) {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(ids[i]);
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::shared_ptr<const EmbeddingFile> load_embedding_file(const EmbeddingConfig& cfg,
                                                         std::span<const PreparedCorpus* const> corpora) {
  if (cfg.source.empty()) throw Error(ErrorKind::SpecValidation, "fixed embedding requires embedding.source");
  std::unordered_set<std::string> keep;
  for (const auto* c : corpora) {
    if (!c) continue;
    for (const auto& doc : c->tokens) keep.insert(doc.begin(), doc.end());
  }
  return std::make_shared<const EmbeddingFile>(EmbeddingFile::load(cfg.source, &keep));
}

Prediction predict_features(const TrainedModel& model, const Features& f) {
  return std::visit([&](const auto& x) { return predict(model, x); }, f);
}

std::uint64_t corpus_hash(const Corpus& corpus) {
  std::uint64_t h = fnv1a64(corpus.name());
  for (const auto& d : corpus.documents()) {
    h = fnv1a64(d.id, h);
    h = fnv1a64(to_string(d.label), h);
    h = fnv1a64(d.text, h);
    h = fnv1a64("\x1e", h);
  }
  return h;
}

json plan_json(const SplitPlan& p) {
  return {{"iterations", p.iterations},
          {"train_fraction", p.train_fraction},
          {"dev_fraction_of_train", p.dev_fraction_of_train},
          {"seed", p.seed},
          {"stratified", p.stratified}};
}

void pool_confusion(Eigen::Matrix2d& counts, std::span<const Label> pred, std::span<const Label> truth) {
  if (!truth.empty()) counts += confusion(pred, truth, false);
}

/// Token cache keyed by document text so that re-mixed corpora reuse tokens.
class TokenCache {
 public:
  TokenCache(const NormalizerConfig& config, std::span<const Corpus* const> corpora) {
    const Normalizer normalizer(config);
    for (const auto* c : corpora) {
      for (const auto& d : c->documents()) {
        if (!cache_.contains(d.text)) cache_.emplace(d.text, normalizer(d.text));
      }
    }
  }

  PreparedCorpus prepare(const Corpus& corpus) const {
    PreparedCorpus p;
    p.corpus = &corpus;
    p.tokens.reserve(corpus.size());
    for (const auto& d : corpus.documents()) {
      p.tokens.push_back(cache_.at(d.text));
      p.labels.push_back(d.label);
      p.ids.push_back(d.id);
    }
    return p;
  }

 private:
  std::unordered_map<std::string, TokenizedDoc> cache_;
};

StopWordList language_stop_list(Language language) {
  return language == Language::En ? StopWordList::En : StopWordList::Es;
}

StemmerKind language_stemmer(Language language) {
  return language == Language::En ? StemmerKind::PorterEn : StemmerKind::LightEs;
}

const std::unordered_map<std::string, std::string>& param_aliases() {
  static const std::unordered_map<std::string, std::string> aliases{
      {"F", "filters"}, {"KS", "kernel_size"}, {"KR", "kr"}, {"RR", "rr"}, {"D", "dropout"},
      {"units_per_layer", "units"}};
  return aliases;
}

std::size_t as_count(const std::string& key, const json& value) {
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
    throw Error(ErrorKind::SpecValidation, key + " must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

bool as_bool(const std::string& key, const json& value) {
  if (!value.is_boolean()) throw Error(ErrorKind::SpecValidation, key + " must be a boolean");
  return value.get<bool>();
}

std::string as_string(const std::string& key, const json& value) {
  if (!value.is_string()) throw Error(ErrorKind::SpecValidation, key + " must be a string");
  return value.get<std::string>();
}

void apply_normalize(const std::string& field, const std::string& key, const json& value, NormalizerConfig& n,
                     Language language) {
  if (field == "lowercase") {
    n.lowercase = as_bool(key, value);
  } else if (field == "strip_non_alnum") {
    n.strip_non_alnum = as_bool(key, value);
  } else if (field == "stop_words") {
    if (value.is_boolean()) {
      n.stop_words = value.get<bool>() ? language_stop_list(language) : StopWordList::None;
      return;
    }
    const auto text = as_string(key, value);
    if (text == "none") {
      n.stop_words = StopWordList::None;
    } else if (text == "en") {
      n.stop_words = StopWordList::En;
    } else if (text == "es") {
      n.stop_words = StopWordList::Es;
    } else {
      n.stop_words = StopWordList::Custom;
      n.stop_words_path = text;
    }
  } else if (field == "stemming") {
    if (value.is_boolean()) {
      n.stemming = value.get<bool>() ? language_stemmer(language) : StemmerKind::Off;
      return;
    }
    try {
      n.stemming = parse_stemmer(as_string(key, value));
    } catch (const Error& e) {
      throw Error(ErrorKind::SpecValidation, key + ": " + e.what());
    }
  } else {
    throw Error(ErrorKind::SpecValidation, "unknown override key '" + key + "'");
  }
}

void apply_represent(const std::string& field, const std::string& key, const json& value, PipelineConfig& p) {
  if (field == "kind") {
    try {
      p.representation = parse_representation(as_string(key, value));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SpecValidation) throw;
      throw Error(ErrorKind::SpecValidation, key + ": " + e.what());
    }
  } else if (field == "vocab_size") {
    p.vocab_size = as_count(key, value);
    if (p.vocab_size == 0) throw Error(ErrorKind::SpecValidation, key + " must be positive");
  } else if (field == "max_len") {
    p.max_len = as_count(key, value);
    if (p.max_len == 0) throw Error(ErrorKind::SpecValidation, key + " must be positive");
  } else if (field == "oov") {
    const auto text = as_string(key, value);
    if (text == "unk") {
      p.oov = OovMode::UnkColumn;
    } else if (text == "drop") {
      p.oov = OovMode::Drop;
    } else {
      throw Error(ErrorKind::SpecValidation, key + " must be 'unk' or 'drop'");
    }
  } else {
    throw Error(ErrorKind::SpecValidation, "unknown override key '" + key + "'");
  }
}

void apply_model_param(const std::string& path, const std::string& key, const json& value, ModelConfig& model) {
  json params = config_to_json(model);
  json* node = &params;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorKind::SpecValidation, "malformed override key '" + key + "'");
    if (node == &params) {
      if (auto it = param_aliases().find(part); it != param_aliases().end()) part = it->second;
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw Error(ErrorKind::SpecValidation, "override key '" + key + "' is not nested");
    node = &child;
    start = dot + 1;
  }
  model = config_from_json(algorithm_of(model), params);
}

}  // namespace

PreparedCorpus prepare(const Corpus& corpus, const NormalizerConfig& normalize) {
  PreparedCorpus p;
  p.corpus = &corpus;
  p.tokens = tokenize_corpus(corpus, normalize);
  p.labels = corpus.labels();
  p.ids.reserve(corpus.size());
  for (const auto& d : corpus.documents()) p.ids.push_back(d.id);
  return p;
}

IterationOutcome fit_and_score(const ModelConfig& model, const PipelineConfig& pipeline, const PreparedCorpus& data,
                               const SplitIndices& split, const PreparedCorpus* external,
                               const EmbeddingFile* embeddings) {
  const auto train_docs = select(data.tokens, split.train);
  const auto train_labels = select_labels(data.labels, split.train);
  const auto train_ids = select_ids(data.ids, split.train);
  auto fitted = FittedPipeline::fit(pipeline, train_docs, train_ids);

  const auto x_train = fitted.transform(train_docs);
  const auto dev_labels = select_labels(data.labels, split.dev);
  std::optional<Features> x_dev;
  if (!split.dev.empty()) x_dev = fitted.transform(select(data.tokens, split.dev));

  std::optional<TrainedModel> trained;
  if (const auto* x = std::get_if<FeatureMatrix>(&x_train)) {
    std::optional<DevSet<FeatureMatrix>> dev;
    if (x_dev) dev = DevSet<FeatureMatrix>{&std::get<FeatureMatrix>(*x_dev), dev_labels};
    trained = train(model, *x, train_labels, dev ? &*dev : nullptr);
  } else {
    const auto& s = std::get<SequenceBatch>(x_train);
    std::optional<EmbeddingTable> table;
    if (const auto* emb = fixed_embedding(model)) {
      std::shared_ptr<const EmbeddingFile> owned;
      if (!embeddings) {
        const PreparedCorpus* sources[] = {&data};
        owned = load_embedding_file(*emb, sources);
        embeddings = owned.get();
      }
      table = embeddings->restrict_to(fitted.vocabulary(), emb->oov);
    }
    std::optional<DevSet<SequenceBatch>> dev;
    if (x_dev) dev = DevSet<SequenceBatch>{&std::get<SequenceBatch>(*x_dev), dev_labels};
    trained = train(model, s, train_labels, table ? &*table : nullptr, dev ? &*dev : nullptr);
  }

  IterationOutcome out{std::move(*trained), std::move(fitted), {}, {}, std::nullopt};
  if (x_dev) out.dev = predict_features(out.model, *x_dev);
  if (!split.test.empty()) out.test = predict_features(out.model, out.pipeline.transform(select(data.tokens, split.test)));
  if (external) out.external = predict_features(out.model, out.pipeline.transform(external->tokens));
  return out;
}

EvalReport bootstrap_evaluate(const ModelConfig& model, const Corpus& corpus, const SplitPlan& plan,
                              const PipelineConfig& pipeline, const EvalOptions& options) {
  const auto start = Clock::now();
  if (plan.iterations < 1) throw Error(ErrorKind::InvalidArgument, "iterations must be positive");
  validate(model);

  const auto splits = shuffle_split(corpus, plan);
  const auto data = prepare(corpus, pipeline.normalize);
  std::optional<PreparedCorpus> external;
  if (options.external) external = prepare(*options.external, pipeline.normalize);

  auto embeddings = options.embeddings;
  if (const auto* emb = fixed_embedding(model); emb && !embeddings) {
    const PreparedCorpus* sources[] = {&data};
    embeddings = load_embedding_file(*emb, sources);
  }

  struct Slot {
    IterationResult result;
    std::vector<Label> test_pred;
    std::vector<Label> external_pred;
  };
  std::vector<Slot> slots(plan.iterations);
  const auto algorithm = algorithm_of(model);
  const auto base_seed = seed_of(model);

  parallel_for(plan.iterations, options.jobs, [&](std::size_t i) {
    ModelConfig cfg = model;
    set_seed(cfg, derive_seed(base_seed, i));
    const auto& split = splits[i];
    auto outcome = fit_and_score(cfg, pipeline, data, split, external ? &*external : nullptr, embeddings.get());

    auto& slot = slots[i];
    auto& r = slot.result;
    r.iteration = i;
    r.seed = seed_of(cfg);
    r.train_size = split.train.size();
    r.dev_size = split.dev.size();
    r.test_size = split.test.size();
    if (!split.dev.empty()) r.dev_accuracy = accuracy(outcome.dev.labels, select_labels(data.labels, split.dev));
    r.test_accuracy = accuracy(outcome.test.labels, select_labels(data.labels, split.test));
    if (outcome.external) {
      r.external_accuracy = accuracy(outcome.external->labels, external->labels);
      slot.external_pred = std::move(outcome.external->labels);
    }
    if (is_neural(algorithm)) r.epochs = outcome.model.history.loss.size();
    r.model_fingerprint = model_fingerprint(outcome.model);
    slot.test_pred = std::move(outcome.test.labels);
  });

  EvalReport report;
  report.name = options.name;
  report.algorithm = std::string(to_string(algorithm));
  report.model_config = config_to_json(model);
  report.pipeline = to_json(pipeline);
  report.plan = plan_json(plan);
  report.corpus = corpus.name();
  if (options.external) report.external_corpus = options.external->name();
  report.seed = base_seed;

  std::vector<double> dev_acc, test_acc, external_acc;
  Eigen::Matrix2d counts = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d external_counts = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& r = slots[i].result;
    if (r.dev_accuracy) dev_acc.push_back(*r.dev_accuracy);
    test_acc.push_back(r.test_accuracy);
    pool_confusion(counts, slots[i].test_pred, select_labels(data.labels, splits[i].test));
    if (r.external_accuracy) {
      external_acc.push_back(*r.external_accuracy);
      pool_confusion(external_counts, slots[i].external_pred, external->labels);
    }
    report.iterations.push_back(r);
  }
  if (dev_acc.size() == slots.size()) report.dev = mean_std(dev_acc);
  report.test = mean_std(test_acc);
  report.confusion = normalize_rows(counts);
  if (!external_acc.empty()) {
    report.external = mean_std(external_acc);
    report.external_confusion = normalize_rows(external_counts);
  }

  std::string canonical = config_fingerprint(model);
  canonical += "|" + pipeline.canonical();
  canonical += "|" + report.plan.dump();
  canonical += "|" + to_hex(corpus_hash(corpus));
  if (options.external) canonical += "|" + to_hex(corpus_hash(*options.external));
  if (embeddings && fixed_embedding(model)) canonical += "|emb=" + embeddings->source();
  report.config_fingerprint = fingerprint_of(canonical);
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.values.size();
  return n;
}

std::vector<json> Grid::points() const {
  for (const auto& axis : axes) {
    if (axis.values.empty()) throw Error(ErrorKind::SpecValidation, "grid axis '" + axis.key + "' has no values");
  }
  std::vector<json> out;
  const auto total = size();
  out.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    json point = json::object();
    std::size_t rest = flat;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& axis = axes[a];
      point[axis.key] = axis.values[rest % axis.values.size()];
      rest /= axis.values.size();
    }
    out.push_back(std::move(point));
  }
  return out;
}

void apply_override(const std::string& key, const json& value, ModelConfig& model, PipelineConfig& pipeline,
                    Language language) {
  static constexpr std::string_view kModel = "model.params.";
  static constexpr std::string_view kNormalize = "normalize.";
  static constexpr std::string_view kRepresent = "represent.";
  try {
    if (key.starts_with(kModel)) {
      apply_model_param(key.substr(kModel.size()), key, value, model);
    } else if (key.starts_with(kNormalize)) {
      apply_normalize(key.substr(kNormalize.size()), key, value, pipeline.normalize, language);
    } else if (key.starts_with(kRepresent)) {
      apply_represent(key.substr(kRepresent.size()), key, value, pipeline);
    } else {
      throw Error(ErrorKind::SpecValidation, "unknown override key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SpecValidation, key + ": " + e.what());
  }
}

std::vector<Candidate> expand_grid(const Grid& grid, const ModelConfig& model, const PipelineConfig& pipeline,
                                   Language language) {
  std::vector<Candidate> out;
  for (auto& point : grid.points()) {
    Candidate c{model, pipeline, point};
    for (const auto& axis : grid.axes) apply_override(axis.key, point.at(axis.key), c.model, c.pipeline, language);
    validate(c.model);
    out.push_back(std::move(c));
  }
  return out;
}

GridReport rank_reports(std::vector<EvalReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::Empty, "grid produced no reports");
  GridReport g;
  const bool use_dev = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.dev.has_value(); });
  g.criterion = use_dev ? "dev_acc" : "test_acc";
  auto score = [&](std::size_t i) { return use_dev ? reports[i].dev->mean : reports[i].test.mean; };
  g.ranking = all_indices(reports.size());
  std::stable_sort(g.ranking.begin(), g.ranking.end(), [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
  g.best = g.ranking.front();
  g.reports = std::move(reports);
  return g;
}

GridReport grid_search(std::span<const Candidate> candidates, const Corpus& corpus, const SplitPlan& plan,
                       const EvalOptions& options) {
  const auto start = Clock::now();
  if (candidates.empty()) throw Error(ErrorKind::Empty, "empty grid");
  std::vector<EvalReport> reports;
  reports.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto report = bootstrap_evaluate(c.model, corpus, plan, c.pipeline, options);
    report.overrides = c.overrides;
    reports.push_back(std::move(report));
  }
  auto grid = rank_reports(std::move(reports));
  grid.name = options.name;
  grid.wall_clock_seconds = seconds_since(start);
  return grid;
}

CurveReport learning_curve(const ModelConfig& model, const PipelineConfig& pipeline, const Corpus& base_train,
                           const Corpus& translated, const CurveOptions& curve, const EvalOptions& options) {
  const auto start = Clock::now();
  validate(model);
  if (curve.points.empty()) throw Error(ErrorKind::InvalidArgument, "no curve points");
  if (curve.repeats < 1) throw Error(ErrorKind::InvalidArgument, "curve repeats must be positive");
  if (curve.dev_fraction < 0.0 || curve.dev_fraction >= 1.0) {
    throw Error(ErrorKind::InvalidArgument, "curve dev fraction must lie in [0, 1)");
  }
  auto points = curve.points;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.back() > translated.size()) {
    throw Error(ErrorKind::NTooLarge, "curve point " + std::to_string(points.back()) + " exceeds the " +
                                          std::to_string(translated.size()) + " translated documents");
  }

  const Corpus* sources[] = {&base_train, &translated};
  const TokenCache cache(pipeline.normalize, sources);

  auto embeddings = options.embeddings;
  if (const auto* emb = fixed_embedding(model); emb && !embeddings) {
    const auto base = cache.prepare(base_train);
    const auto trans = cache.prepare(translated);
    const PreparedCorpus* prepared[] = {&base, &trans};
    embeddings = load_embedding_file(*emb, prepared);
  }

  const std::size_t tasks = points.size() * curve.repeats;
  std::vector<double> acc(tasks);
  std::vector<std::pair<std::size_t, std::size_t>> sizes(tasks);
  const auto base_seed = seed_of(model);

  parallel_for(tasks, options.jobs, [&](std::size_t t) {
    const std::size_t n = points[t / curve.repeats];
    const std::size_t rep = t % curve.repeats;
    const auto mix = mix_for_curve(base_train, translated, n, derive_seed(derive_seed(curve.seed, n), rep));
    if (mix.holdout_empty) {
      sizes[t] = {mix.train.size(), 0};
      return;
    }
    const auto train_data = cache.prepare(mix.train);
    const auto holdout = cache.prepare(mix.holdout);

    SplitIndices split;
    split.train = all_indices(mix.train.size());
    if (curve.dev_fraction > 0.0) {
      Rng rng(derive_seed(derive_seed(curve.seed, n), rep + 0xde7));
      rng.shuffle(split.train.begin(), split.train.end());
      const auto dev_n = static_cast<std::size_t>(std::ceil(curve.dev_fraction * static_cast<double>(split.train.size())));
      split.dev.assign(split.train.begin(), split.train.begin() + static_cast<std::ptrdiff_t>(dev_n));
      split.train.erase(split.train.begin(), split.train.begin() + static_cast<std::ptrdiff_t>(dev_n));
      std::sort(split.dev.begin(), split.dev.end());
      std::sort(split.train.begin(), split.train.end());
    }

    ModelConfig cfg = model;
    set_seed(cfg, derive_seed(base_seed, rep));
    const auto outcome = fit_and_score(cfg, pipeline, train_data, split, &holdout, embeddings.get());
    acc[t] = accuracy(outcome.external->labels, holdout.labels);
    sizes[t] = {split.train.size(), holdout.labels.size()};
  });

  CurveReport report;
  report.name = options.name;
  report.algorithm = std::string(to_string(algorithm_of(model)));
  report.model_config = config_to_json(model);
  report.pipeline = to_json(pipeline);
  report.base_corpus = base_train.name();
  report.translated_corpus = translated.name();
  report.seed = curve.seed;
  for (std::size_t p = 0; p < points.size(); ++p) {
    CurvePoint point;
    point.n = points[p];
    point.train_size = sizes[p * curve.repeats].first;
    point.holdout_size = sizes[p * curve.repeats].second;
    if (point.holdout_size == 0) {
      report.warnings.push_back("n=" + std::to_string(point.n) + " leaves an empty translated holdout; not scored");
    } else {
      point.accuracies.assign(acc.begin() + static_cast<std::ptrdiff_t>(p * curve.repeats),
                              acc.begin() + static_cast<std::ptrdiff_t>((p + 1) * curve.repeats));
      point.accuracy = mean_std(point.accuracies);
    }
    report.points.push_back(std::move(point));
  }

  std::string canonical = config_fingerprint(model);
  canonical += "|" + pipeline.canonical();
  canonical += "|" + to_hex(corpus_hash(base_train)) + "|" + to_hex(corpus_hash(translated));
  canonical += "|seed=" + std::to_string(curve.seed) + "|repeats=" + std::to_string(curve.repeats);
  canonical += "|dev=" + std::to_string(curve.dev_fraction);
  for (auto n : points) canonical += "|n=" + std::to_string(n);
  if (embeddings && fixed_embedding(model)) canonical += "|emb=" + embeddings->source();
  report.config_fingerprint = fingerprint_of(canonical);
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

}  // namespace fnd
