#include "fnd/models/model.hpp"

#include "fnd/error.hpp"
#include "fnd/models/serialize.hpp"

namespace fnd {

namespace {

void validate_early_stopping(const std::optional<EarlyStopping>& es) {
  if (!es) return;
  if (es->patience < 1) throw Error(ErrorKind::InvalidArgument, "patience must be at least 1");
  if (!(es->tolerance >= 0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be non-negative");
}

void validate_common(std::size_t epochs, std::size_t batch_size, double learning_rate) {
  if (epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be at least 1");
  if (batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch_size must be at least 1");
  if (!(learning_rate > 0)) throw Error(ErrorKind::InvalidArgument, "learning_rate must be positive");
}

void check_rows(Eigen::Index rows, std::span<const Label> y) {
  if (static_cast<std::size_t>(rows) != y.size()) throw Error(ErrorKind::LengthMismatch, "rows and labels differ in count");
  require_two_classes(y);
}

template <class Config>
TrainedModel shell(const Config& config, const std::string& representation) {
  TrainedModel m;
  m.config = config;
  m.algorithm = algorithm_of(m.config);
  m.config_fingerprint = config_fingerprint(m.config);
  m.representation = representation;
  return m;
}

template <class Input>
void check_dev(const DevSet<Input>* dev, const std::string& representation) {
  if (dev && dev->x && dev->x->representation != representation) {
    throw Error(ErrorKind::RepresentationMismatch, "dev features were built differently from the training features");
  }
}

std::size_t id_space(const SequenceBatch& s) {
  std::size_t v = s.vocabulary_size;
  if (s.ids.size() > 0) v = std::max(v, static_cast<std::size_t>(s.ids.maxCoeff()) + 1);
  return std::max<std::size_t>(v, 2);
}

std::optional<nn::Mat<float>> fixed_matrix(const EmbeddingConfig& cfg, const EmbeddingTable* fixed, std::size_t vocab) {
  if (cfg.trainable) return std::nullopt;
  if (!fixed) throw Error(ErrorKind::InvalidArgument, "fixed embedding requested but no table was supplied");
  if (static_cast<std::size_t>(fixed->dim()) != cfg.dim) {
    throw Error(ErrorKind::ShapeMismatch, "embedding table has dimension " + std::to_string(fixed->dim()) +
                                              ", configuration expects " + std::to_string(cfg.dim));
  }
  if (static_cast<std::size_t>(fixed->vectors().rows()) < vocab) {
    throw Error(ErrorKind::ShapeMismatch, "embedding table covers fewer ids than the sequences use");
  }
  return fixed->vectors().topRows(static_cast<Eigen::Index>(vocab));
}

}  // namespace

void MlpConfig::validate() const {
  if (hidden_layers < 1) throw Error(ErrorKind::InvalidArgument, "hidden_layers must be at least 1");
  if (units < 1) throw Error(ErrorKind::InvalidArgument, "units must be at least 1");
  if (!(l2 >= 0)) throw Error(ErrorKind::InvalidArgument, "l2 must be non-negative");
  validate_common(epochs, batch_size, learning_rate);
  validate_early_stopping(early_stopping);
}

void CnnConfig::validate() const {
  if (filters < 1) throw Error(ErrorKind::InvalidArgument, "filters must be at least 1");
  if (kernel_size < 1) throw Error(ErrorKind::InvalidArgument, "kernel_size must be at least 1");
  if (dense_units < 1) throw Error(ErrorKind::InvalidArgument, "dense_units must be at least 1");
  if (embedding.dim < 1) throw Error(ErrorKind::InvalidArgument, "embedding dim must be at least 1");
  if (!(kr >= 0)) throw Error(ErrorKind::InvalidArgument, "KR must be non-negative");
  validate_common(epochs, batch_size, learning_rate);
  validate_early_stopping(early_stopping);
}

void LstmConfig::validate() const {
  if (units < 1) throw Error(ErrorKind::InvalidArgument, "units must be at least 1");
  if (embedding.dim < 1) throw Error(ErrorKind::InvalidArgument, "embedding dim must be at least 1");
  if (!(kr >= 0) || !(rr >= 0)) throw Error(ErrorKind::InvalidArgument, "KR and RR must be non-negative");
  if (!(dropout >= 0 && dropout < 1)) throw Error(ErrorKind::InvalidArgument, "dropout must lie in [0, 1)");
  validate_common(epochs, batch_size, learning_rate);
  validate_early_stopping(early_stopping);
}

Algorithm algorithm_of(const ModelConfig& config) noexcept {
  static constexpr Algorithm kByIndex[] = {Algorithm::Svm, Algorithm::RandomForest, Algorithm::Gbt,
                                           Algorithm::Mlp, Algorithm::Cnn,          Algorithm::Lstm,
                                           Algorithm::Constant};
  return kByIndex[config.index()];
}

ModelConfig default_config(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Svm: return SvmConfig{};
    case Algorithm::RandomForest: return ForestConfig{};
    case Algorithm::Gbt: return GbtConfig{};
    case Algorithm::Mlp: return MlpConfig{};
    case Algorithm::Cnn: return CnnConfig{};
    case Algorithm::Lstm: return LstmConfig{};
    case Algorithm::Constant: return ConstantConfig{};
  }
  return SvmConfig{};
}

std::uint64_t seed_of(const ModelConfig& config) noexcept {
  return std::visit([](const auto& c) { return c.seed; }, config);
}

void set_seed(ModelConfig& config, std::uint64_t seed) noexcept {
  std::visit([seed](auto& c) { c.seed = seed; }, config);
}

void validate(const ModelConfig& config) {
  std::visit([](const auto& c) { c.validate(); }, config);
}

TrainedModel train_svm(const FeatureMatrix& x, std::span<const Label> y, const SvmConfig& config) {
  check_rows(x.rows(), y);
  auto m = shell(config, x.representation);
  m.state = LinearSvm::fit(x.values, y, config);
  return m;
}

TrainedModel train_random_forest(const FeatureMatrix& x, std::span<const Label> y, const ForestConfig& config) {
  check_rows(x.rows(), y);
  auto m = shell(config, x.representation);
  m.state = RandomForest::fit(x.values, y, config);
  return m;
}

TrainedModel train_gbt(const FeatureMatrix& x, std::span<const Label> y, const GbtConfig& config) {
  check_rows(x.rows(), y);
  auto m = shell(config, x.representation);
  m.state = GradientBoostedTrees::fit(x.values, y, config, &m.history);
  return m;
}

TrainedModel train_mlp(const FeatureMatrix& x, std::span<const Label> y, const MlpConfig& config,
                       const DevSet<FeatureMatrix>* dev) {
  config.validate();
  check_rows(x.rows(), y);
  check_dev(dev, x.representation);
  auto m = shell(config, x.representation);
  const std::vector<std::size_t> hidden(config.hidden_layers, config.units);
  nn::Mlp<float> net(static_cast<std::size_t>(x.cols()), hidden, derive_seed(config.seed, 1), config.l2);
  const nn::FitOptions options{config.epochs, config.batch_size, config.learning_rate, config.seed, config.early_stopping};
  const nn::DevData<SparseRowMatrix> dev_data{dev && dev->x ? &dev->x->values : nullptr, dev ? dev->y : std::span<const Label>{}};
  m.history = nn::fit(net, x.values, to_targets(y), options, dev_data.x ? &dev_data : nullptr);
  m.state = std::move(net);
  return m;
}

TrainedModel train_cnn_text(const SequenceBatch& s, std::span<const Label> y, const CnnConfig& config,
                            const EmbeddingTable* fixed, const DevSet<SequenceBatch>* dev) {
  config.validate();
  check_rows(s.rows(), y);
  check_dev(dev, s.representation);
  auto m = shell(config, s.representation);
  const std::size_t vocab = id_space(s);
  const auto table = fixed_matrix(config.embedding, fixed, vocab);
  const nn::CnnShape shape{vocab, static_cast<std::size_t>(s.max_len()), config.embedding.dim, config.filters,
                           config.kernel_size, config.dense_units};
  nn::TextCnn<float> net(shape, config.kr, derive_seed(config.seed, 1), table ? &*table : nullptr);
  const nn::FitOptions options{config.epochs, config.batch_size, config.learning_rate, config.seed, config.early_stopping};
  const nn::DevData<IdMatrix> dev_data{dev && dev->x ? &dev->x->ids : nullptr, dev ? dev->y : std::span<const Label>{}};
  m.history = nn::fit(net, s.ids, to_targets(y), options, dev_data.x ? &dev_data : nullptr);
  m.state = std::move(net);
  return m;
}

TrainedModel train_lstm_text(const SequenceBatch& s, std::span<const Label> y, const LstmConfig& config,
                             const EmbeddingTable* fixed, const DevSet<SequenceBatch>* dev) {
  config.validate();
  check_rows(s.rows(), y);
  check_dev(dev, s.representation);
  auto m = shell(config, s.representation);
  const std::size_t vocab = id_space(s);
  const auto table = fixed_matrix(config.embedding, fixed, vocab);
  const nn::LstmShape shape{vocab, static_cast<std::size_t>(s.max_len()), config.embedding.dim, config.units};
  nn::TextLstm<float> net(shape, {config.kr, config.rr, config.dropout}, derive_seed(config.seed, 1),
                          table ? &*table : nullptr);
  const nn::FitOptions options{config.epochs, config.batch_size, config.learning_rate, config.seed, config.early_stopping};
  const nn::DevData<IdMatrix> dev_data{dev && dev->x ? &dev->x->ids : nullptr, dev ? dev->y : std::span<const Label>{}};
  m.history = nn::fit(net, s.ids, to_targets(y), options, dev_data.x ? &dev_data : nullptr);
  m.state = std::move(net);
  return m;
}

TrainedModel train_constant(const std::string& representation, std::span<const Label> y, const ConstantConfig& config) {
  if (y.empty()) throw Error(ErrorKind::EmptyInput, "no training samples");
  auto m = shell(config, representation);
  m.state = ConstantModel{config.label};
  return m;
}

TrainedModel train(const ModelConfig& config, const FeatureMatrix& x, std::span<const Label> y,
                   const DevSet<FeatureMatrix>* dev) {
  switch (algorithm_of(config)) {
    case Algorithm::Svm: return train_svm(x, y, std::get<SvmConfig>(config));
    case Algorithm::RandomForest: return train_random_forest(x, y, std::get<ForestConfig>(config));
    case Algorithm::Gbt: return train_gbt(x, y, std::get<GbtConfig>(config));
    case Algorithm::Mlp: return train_mlp(x, y, std::get<MlpConfig>(config), dev);
    case Algorithm::Constant: return train_constant(x.representation, y, std::get<ConstantConfig>(config));
    default: break;
  }
  throw Error(ErrorKind::RepresentationMismatch,
              std::string(to_string(algorithm_of(config))) + " consumes id sequences, not sparse features");
}

TrainedModel train(const ModelConfig& config, const SequenceBatch& s, std::span<const Label> y,
                   const EmbeddingTable* fixed, const DevSet<SequenceBatch>* dev) {
  switch (algorithm_of(config)) {
    case Algorithm::Cnn: return train_cnn_text(s, y, std::get<CnnConfig>(config), fixed, dev);
    case Algorithm::Lstm: return train_lstm_text(s, y, std::get<LstmConfig>(config), fixed, dev);
    case Algorithm::Constant: return train_constant(s.representation, y, std::get<ConstantConfig>(config));
    default: break;
  }
  throw Error(ErrorKind::RepresentationMismatch,
              std::string(to_string(algorithm_of(config))) + " consumes sparse features, not id sequences");
}

namespace {

Prediction constant_prediction(const ConstantModel& c, Eigen::Index rows) {
  return prediction_from_scores(Eigen::VectorXd::Constant(rows, c.label == Label::Fake ? 1.0 : 0.0));
}

void check_representation(const TrainedModel& model, const std::string& representation) {
  if (model.representation != representation) {
    throw Error(ErrorKind::RepresentationMismatch,
                "features '" + representation + "' do not match the training representation '" + model.representation + "'");
  }
}

}  // namespace

Prediction predict(const TrainedModel& model, const FeatureMatrix& x) {
  check_representation(model, x.representation);
  return std::visit(
      [&](const auto& state) -> Prediction {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          return constant_prediction(state, x.rows());
        } else if constexpr (std::is_same_v<T, nn::Mlp<float>>) {
          return prediction_from_scores(state.scores(x.values).template cast<double>());
        } else if constexpr (std::is_same_v<T, LinearSvm> || std::is_same_v<T, RandomForest> ||
                             std::is_same_v<T, GradientBoostedTrees>) {
          return prediction_from_scores(state.scores(x.values));
        } else {
          throw Error(ErrorKind::RepresentationMismatch, "sequence model given sparse features");
        }
      },
      model.state);
}

Prediction predict(const TrainedModel& model, const SequenceBatch& s) {
  check_representation(model, s.representation);
  return std::visit(
      [&](const auto& state) -> Prediction {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          return constant_prediction(state, s.rows());
        } else if constexpr (std::is_same_v<T, nn::TextCnn<float>> || std::is_same_v<T, nn::TextLstm<float>>) {
          return prediction_from_scores(state.scores(s.ids).template cast<double>());
        } else {
          throw Error(ErrorKind::RepresentationMismatch, "sparse-feature model given id sequences");
        }
      },
      model.state);
}

}  // namespace fnd
