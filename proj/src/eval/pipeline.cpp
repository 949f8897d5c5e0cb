#include "fnd/eval/pipeline.hpp"

#include "fnd/error.hpp"

namespace fnd {

std::string_view to_string(Representation r) noexcept {
  switch (r) {
    case Representation::Bow: return "bow";
    case Representation::Tfidf: return "tfidf";
    case Representation::Sequence: return "sequence";
  }
  return "tfidf";
}

Representation parse_representation(std::string_view text) {
  if (text == "bow") return Representation::Bow;
  if (text == "tfidf" || text == "tf-idf") return Representation::Tfidf;
  if (text == "sequence" || text == "sequences") return Representation::Sequence;
  throw Error(ErrorKind::InvalidArgument, "unknown representation '" + std::string(text) + "'");
}

std::string PipelineConfig::canonical() const {
  std::string out = normalize.canonical();
  out += "|repr=" + std::string(to_string(representation));
  out += "|vocab=" + std::to_string(vocab_size);
  out += "|oov=" + std::string(oov == OovMode::UnkColumn ? "unk" : "drop");
  if (representation == Representation::Sequence) out += "|max_len=" + std::to_string(max_len);
  return out;
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j{{"lowercase", c.normalize.lowercase},
                   {"strip_non_alnum", c.normalize.strip_non_alnum},
                   {"stop_words", std::string(to_string(c.normalize.stop_words))},
                   {"stemming", std::string(to_string(c.normalize.stemming))},
                   {"representation", std::string(to_string(c.representation))},
                   {"vocab_size", c.vocab_size},
                   {"oov", c.oov == OovMode::UnkColumn ? "unk" : "drop"},
                   {"canonical", c.canonical()}};
  if (c.normalize.stop_words == StopWordList::Custom) j["stop_words_path"] = c.normalize.stop_words_path.string();
  if (c.representation == Representation::Sequence) j["max_len"] = c.max_len;
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  try {
    PipelineConfig c;
    c.normalize.lowercase = j.at("lowercase").get<bool>();
    c.normalize.strip_non_alnum = j.at("strip_non_alnum").get<bool>();
    const auto stop = j.at("stop_words").get<std::string>();
    if (stop == "none") {
      c.normalize.stop_words = StopWordList::None;
    } else if (stop == "en") {
      c.normalize.stop_words = StopWordList::En;
    } else if (stop == "es") {
      c.normalize.stop_words = StopWordList::Es;
    } else {
      c.normalize.stop_words = StopWordList::Custom;
      c.normalize.stop_words_path = j.at("stop_words_path").get<std::string>();
    }
    c.normalize.stemming = parse_stemmer(j.at("stemming").get<std::string>());
    c.representation = parse_representation(j.at("representation").get<std::string>());
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.oov = j.at("oov").get<std::string>() == "drop" ? OovMode::Drop : OovMode::UnkColumn;
    if (j.contains("max_len")) c.max_len = j.at("max_len").get<std::size_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SpecValidation, std::string("pipeline config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SpecValidation) throw;
    throw Error(ErrorKind::SpecValidation, std::string("pipeline config: ") + e.what());
  }
}

FittedPipeline FittedPipeline::restore(PipelineConfig config, Vocabulary vocab, std::optional<TfidfWeights> idf) {
  if (config.representation == Representation::Tfidf && !idf) {
    throw Error(ErrorKind::SpecValidation, "tf-idf pipeline without idf weights");
  }
  FittedPipeline p;
  p.config_ = std::move(config);
  p.vocab_ = std::move(vocab);
  p.idf_ = std::move(idf);
  return p;
}

nlohmann::json to_json(const FittedPipeline& p) {
  const auto& v = p.vocabulary();
  nlohmann::json j{{"config", to_json(p.config())},
                   {"vocabulary",
                    {{"tokens", v.tokens()},
                     {"document_frequencies", v.document_frequencies()},
                     {"max_size", v.max_size()},
                     {"training_documents", v.training_documents()},
                     {"provenance", v.provenance()},
                     {"fingerprint", v.fingerprint()}}}};
  if (p.idf()) {
    const auto& idf = p.idf()->idf;
    j["idf"] = {{"documents", p.idf()->documents}, {"values", std::vector<double>(idf.data(), idf.data() + idf.size())}};
  }
  return j;
}

FittedPipeline fitted_pipeline_from_json(const nlohmann::json& j) {
  try {
    auto config = pipeline_config_from_json(j.at("config"));
    const auto& v = j.at("vocabulary");
    Vocabulary vocab(v.at("tokens").get<std::vector<std::string>>(),
                     v.at("document_frequencies").get<std::vector<std::size_t>>(), v.at("max_size").get<std::size_t>(),
                     v.at("training_documents").get<std::size_t>(), v.at("provenance").get<std::string>());
    if (vocab.fingerprint() != v.at("fingerprint").get<std::string>()) {
      throw Error(ErrorKind::Parse, "vocabulary fingerprint mismatch");
    }
    std::optional<TfidfWeights> idf;
    if (j.contains("idf")) {
      const auto values = j.at("idf").at("values").get<std::vector<double>>();
      TfidfWeights w;
      w.idf = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
      w.documents = j.at("idf").at("documents").get<std::size_t>();
      idf = std::move(w);
    }
    return FittedPipeline::restore(std::move(config), std::move(vocab), std::move(idf));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed pipeline: ") + e.what());
  }
}

FittedPipeline FittedPipeline::fit(const PipelineConfig& config, std::span<const TokenizedDoc> train_docs,
                                   std::span<const std::string> train_ids) {
  FittedPipeline p;
  p.config_ = config;
  p.vocab_ = build_vocab(train_docs, config.vocab_size, provenance_of(train_ids), config.normalize.pad_token,
                         config.normalize.unk_token);
  if (config.representation == Representation::Tfidf) p.idf_ = tfidf_fit(bow_matrix(train_docs, p.vocab_, config.oov));
  return p;
}

Features FittedPipeline::transform(std::span<const TokenizedDoc> docs) const {
  switch (config_.representation) {
    case Representation::Bow: return bow_matrix(docs, vocab_, config_.oov);
    case Representation::Tfidf: return tfidf_transform(bow_matrix(docs, vocab_, config_.oov), *idf_);
    case Representation::Sequence: return encode_sequences(docs, vocab_, config_.max_len);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown representation");
}

std::vector<TokenizedDoc> tokenize_corpus(const Corpus& corpus, const NormalizerConfig& config) {
  const Normalizer normalizer(config);
  std::vector<TokenizedDoc> out;
  out.reserve(corpus.size());
  for (const auto& d : corpus.documents()) out.push_back(normalizer(d.text));
  return out;
}

std::vector<TokenizedDoc> select(std::span<const TokenizedDoc> docs, std::span<const std::size_t> indices) {
  std::vector<TokenizedDoc> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(docs[i]);
  return out;
}

}  // namespace fnd
