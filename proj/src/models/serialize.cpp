#include "fnd/models/serialize.hpp"

#include <fstream>
#include <set>

#include "fnd/error.hpp"
#include "fnd/fingerprint.hpp"

namespace fnd {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json early_stopping_json(const std::optional<EarlyStopping>& es) {
  if (!es) return nullptr;
  return {{"tolerance", es->tolerance}, {"patience", es->patience}, {"restore_best", es->restore_best}};
}

json embedding_json(const EmbeddingConfig& e) {
  return {{"trainable", e.trainable}, {"dim", e.dim}, {"source", e.source}, {"oov", std::string(to_string(e.oov))}};
}

/// Reads known keys from a params object, rejecting anything else.
class ParamReader {
 public:
  ParamReader(const json& params, std::string algorithm) : params_(params), algorithm_(std::move(algorithm)) {
    if (!params_.is_null() && !params_.is_object()) {
      throw Error(ErrorKind::SpecValidation, "parameters for " + algorithm_ + " must be a mapping");
    }
  }

  template <class T>
  void read(std::string_view key, T& out, std::string_view alias = {}) {
    const json* value = find(key);
    if (!value && !alias.empty()) value = find(alias);
    if (!value) return;
    try {
      if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
        if (!value->is_number_unsigned() && !(value->is_number_integer() && value->get<std::int64_t>() >= 0)) {
          throw std::invalid_argument("");
        }
      }
      out = value->get<T>();
    } catch (const std::exception&) {
      throw Error(ErrorKind::SpecValidation, "invalid value for " + algorithm_ + "." + std::string(key) + ": " + value->dump());
    }
  }

  void read_optional_size(std::string_view key, std::optional<std::size_t>& out) {
    const json* value = find(key);
    if (!value) return;
    if (value->is_null() || (value->is_number_integer() && value->get<std::int64_t>() == 0)) {
      out.reset();
      return;
    }
    std::size_t v = 0;
    read(key, v);
    out = v;
  }

  void read_early_stopping(std::optional<EarlyStopping>& out) {
    const json* value = find("early_stopping");
    if (!value) return;
    if (value->is_null() || (value->is_boolean() && !value->get<bool>())) {
      out.reset();
      return;
    }
    EarlyStopping es;
    if (value->is_object()) {
      ParamReader sub(*value, algorithm_ + ".early_stopping");
      sub.read("tolerance", es.tolerance);
      sub.read("patience", es.patience);
      sub.read("restore_best", es.restore_best);
      sub.finish();
    } else if (!value->is_boolean()) {
      throw Error(ErrorKind::SpecValidation, algorithm_ + ".early_stopping must be a mapping");
    }
    out = es;
  }

  void read_embedding(EmbeddingConfig& out) {
    const json* value = find("embedding");
    if (!value) return;
    ParamReader sub(*value, algorithm_ + ".embedding");
    std::string kind;
    sub.read("kind", kind);
    if (!kind.empty()) {
      if (kind != "trainable" && kind != "fixed") {
        throw Error(ErrorKind::SpecValidation, "embedding kind must be 'trainable' or 'fixed'");
      }
      out.trainable = kind == "trainable";
    }
    sub.read("trainable", out.trainable);
    sub.read("dim", out.dim);
    sub.read("source", out.source);
    std::string oov(to_string(out.oov));
    sub.read("oov", oov);
    try {
      out.oov = parse_oov_policy(oov);
    } catch (const Error& e) {
      throw Error(ErrorKind::SpecValidation, e.what());
    }
    sub.finish();
  }

  void finish() const {
    if (!params_.is_object()) return;
    for (const auto& [key, value] : params_.items()) {
      if (!used_.count(key)) throw Error(ErrorKind::SpecValidation, "unknown parameter " + algorithm_ + "." + key);
    }
  }

 private:
  const json* find(std::string_view key) {
    if (!params_.is_object()) return nullptr;
    const auto it = params_.find(std::string(key));
    if (it == params_.end()) return nullptr;
    used_.insert(std::string(key));
    return &*it;
  }

  const json& params_;
  std::string algorithm_;
  std::set<std::string> used_;
};

json matrix_json(const auto& m) {
  std::vector<double> data(static_cast<std::size_t>(m.size()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) data[static_cast<std::size_t>(c * m.rows() + r)] = static_cast<double>(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

template <class Scalar>
nn::Mat<Scalar> matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw Error(ErrorKind::Parse, "matrix data size mismatch");
  nn::Mat<Scalar> m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = static_cast<Scalar>(data[static_cast<std::size_t>(c * rows + r)].get<double>());
  }
  return m;
}

json tree_json(const DecisionTree& tree) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(), value = json::array();
  for (const auto& n : tree.nodes()) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

DecisionTree tree_from_json(const json& j) {
  const auto& feature = j.at("feature");
  std::vector<TreeNode> nodes(feature.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    nodes[k] = {feature[k].get<std::int32_t>(), j.at("threshold")[k].get<double>(), j.at("left")[k].get<std::int32_t>(),
                j.at("right")[k].get<std::int32_t>(), j.at("value")[k].get<double>()};
    if (nodes[k].feature >= 0) {
      const auto limit = static_cast<std::int32_t>(nodes.size());
      if (nodes[k].left <= 0 || nodes[k].left >= limit || nodes[k].right <= 0 || nodes[k].right >= limit) {
        throw Error(ErrorKind::Parse, "tree child index out of range");
      }
    }
  }
  if (nodes.empty()) throw Error(ErrorKind::Parse, "empty tree");
  return DecisionTree(std::move(nodes));
}

template <class Net>
json params_json(const Net& net) {
  json out = json::array();
  for (const auto& p : net.parameters()) {
    json m = matrix_json(p.value);
    m["name"] = p.name;
    m["trainable"] = p.trainable;
    out.push_back(std::move(m));
  }
  return out;
}

template <class Net>
void restore_params(Net& net, const json& j) {
  auto& params = net.parameters();
  if (j.size() != params.size()) throw Error(ErrorKind::Parse, "parameter count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = matrix_from_json<float>(j[k]);
    if (j[k].at("name").get<std::string>() != params[k].name || value.rows() != params[k].value.rows() ||
        value.cols() != params[k].value.cols()) {
      throw Error(ErrorKind::Parse, "parameter '" + params[k].name + "' does not match the configuration");
    }
    params[k].value = std::move(value);
  }
}

}  // namespace

json config_to_json(const ModelConfig& config) {
  return std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SvmConfig>) {
          return {{"kernel", std::string(to_string(c.kernel))}, {"C", c.C}, {"gamma", c.gamma}, {"rff_features", c.rff_features},
                  {"epochs", c.epochs}, {"learning_rate", c.learning_rate}, {"seed", c.seed}};
        } else if constexpr (std::is_same_v<T, ForestConfig>) {
          return {{"n_trees", c.n_trees}, {"max_features", c.max_features},
                  {"max_depth", c.max_depth ? json(*c.max_depth) : json(nullptr)}, {"min_samples_leaf", c.min_samples_leaf},
                  {"bootstrap", c.bootstrap}, {"seed", c.seed}, {"jobs", c.jobs}};
        } else if constexpr (std::is_same_v<T, GbtConfig>) {
          return {{"n_trees", c.n_trees}, {"max_features", c.max_features}, {"learning_rate", c.learning_rate},
                  {"tree_depth", c.tree_depth}, {"min_samples_leaf", c.min_samples_leaf}, {"seed", c.seed}};
        } else if constexpr (std::is_same_v<T, MlpConfig>) {
          return {{"hidden_layers", c.hidden_layers}, {"units", c.units}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
                  {"learning_rate", c.learning_rate}, {"l2", c.l2}, {"seed", c.seed},
                  {"early_stopping", early_stopping_json(c.early_stopping)}};
        } else if constexpr (std::is_same_v<T, CnnConfig>) {
          return {{"filters", c.filters}, {"kernel_size", c.kernel_size}, {"dense_units", c.dense_units}, {"kr", c.kr},
                  {"embedding", embedding_json(c.embedding)}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
                  {"learning_rate", c.learning_rate}, {"seed", c.seed},
                  {"early_stopping", early_stopping_json(c.early_stopping)}};
        } else if constexpr (std::is_same_v<T, ConstantConfig>) {
          return {{"label", std::string(to_string(c.label))}, {"seed", c.seed}};
        } else {
          return {{"units", c.units}, {"kr", c.kr}, {"rr", c.rr}, {"dropout", c.dropout},
                  {"embedding", embedding_json(c.embedding)}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
                  {"learning_rate", c.learning_rate}, {"seed", c.seed},
                  {"early_stopping", early_stopping_json(c.early_stopping)}};
        }
      },
      config);
}

ModelConfig config_from_json(Algorithm algorithm, const json& params) {
  ModelConfig config = default_config(algorithm);
  ParamReader r(params, std::string(to_string(algorithm)));
  std::visit(
      [&](auto& c) {
        using T = std::decay_t<decltype(c)>;
        r.read("seed", c.seed);
        if constexpr (std::is_same_v<T, SvmConfig>) {
          std::string kernel(to_string(c.kernel));
          r.read("kernel", kernel);
          try {
            c.kernel = parse_kernel(kernel);
          } catch (const Error& e) {
            throw Error(ErrorKind::SpecValidation, e.what());
          }
          r.read("C", c.C);
          r.read("gamma", c.gamma);
          r.read("rff_features", c.rff_features);
          r.read("epochs", c.epochs);
          r.read("learning_rate", c.learning_rate);
        } else if constexpr (std::is_same_v<T, ForestConfig>) {
          r.read("n_trees", c.n_trees);
          r.read("max_features", c.max_features);
          r.read_optional_size("max_depth", c.max_depth);
          r.read("min_samples_leaf", c.min_samples_leaf);
          r.read("bootstrap", c.bootstrap);
          r.read("jobs", c.jobs);
        } else if constexpr (std::is_same_v<T, GbtConfig>) {
          r.read("n_trees", c.n_trees);
          r.read("max_features", c.max_features);
          r.read("learning_rate", c.learning_rate);
          r.read("tree_depth", c.tree_depth);
          r.read("min_samples_leaf", c.min_samples_leaf);
        } else if constexpr (std::is_same_v<T, MlpConfig>) {
          r.read("hidden_layers", c.hidden_layers);
          r.read("units", c.units, "units_per_layer");
          r.read("epochs", c.epochs);
          r.read("batch_size", c.batch_size);
          r.read("learning_rate", c.learning_rate);
          r.read("l2", c.l2);
          r.read_early_stopping(c.early_stopping);
        } else if constexpr (std::is_same_v<T, CnnConfig>) {
          r.read("filters", c.filters, "F");
          r.read("kernel_size", c.kernel_size, "KS");
          r.read("dense_units", c.dense_units);
          r.read("kr", c.kr, "KR");
          r.read_embedding(c.embedding);
          r.read("epochs", c.epochs);
          r.read("batch_size", c.batch_size);
          r.read("learning_rate", c.learning_rate);
          r.read_early_stopping(c.early_stopping);
        } else if constexpr (std::is_same_v<T, ConstantConfig>) {
          std::string label(to_string(c.label));
          r.read("label", label);
          if (label == "FAKE" || label == "fake") {
            c.label = Label::Fake;
          } else if (label == "TRUE" || label == "true") {
            c.label = Label::True;
          } else {
            throw Error(ErrorKind::SpecValidation, "constant.label must be FAKE or TRUE");
          }
        } else {
          r.read("units", c.units);
          r.read("kr", c.kr, "KR");
          r.read("rr", c.rr, "RR");
          r.read("dropout", c.dropout, "D");
          r.read_embedding(c.embedding);
          r.read("epochs", c.epochs);
          r.read("batch_size", c.batch_size);
          r.read("learning_rate", c.learning_rate);
          r.read_early_stopping(c.early_stopping);
        }
      },
      config);
  r.finish();
  try {
    validate(config);
  } catch (const Error& e) {
    throw Error(ErrorKind::SpecValidation, std::string(to_string(algorithm)) + ": " + e.what());
  }
  return config;
}

std::string config_fingerprint(const ModelConfig& config) {
  json j = config_to_json(config);
  j.erase("jobs");
  j["algorithm"] = std::string(to_string(algorithm_of(config)));
  return fingerprint_of(j.dump());
}

json history_to_json(const TrainingHistory& h) {
  return {{"initial_loss", h.initial_loss},
          {"loss", h.loss},
          {"dev_accuracy", h.dev_accuracy},
          {"best_epoch", h.best_epoch ? json(*h.best_epoch) : json(nullptr)},
          {"best_dev_accuracy", h.best_dev_accuracy ? json(*h.best_dev_accuracy) : json(nullptr)},
          {"stopped_early", h.stopped_early}};
}

TrainingHistory history_from_json(const json& j) {
  TrainingHistory h;
  h.initial_loss = j.value("initial_loss", 0.0);
  h.loss = j.value("loss", std::vector<double>{});
  h.dev_accuracy = j.value("dev_accuracy", std::vector<double>{});
  if (j.contains("best_epoch") && !j["best_epoch"].is_null()) h.best_epoch = j["best_epoch"].get<std::size_t>();
  if (j.contains("best_dev_accuracy") && !j["best_dev_accuracy"].is_null()) {
    h.best_dev_accuracy = j["best_dev_accuracy"].get<double>();
  }
  h.stopped_early = j.value("stopped_early", false);
  return h;
}

json model_to_json(const TrainedModel& model) {
  json state = std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LinearSvm>) {
          json rff = nullptr;
          if (s.feature_map()) {
            const auto& m = *s.feature_map();
            rff = {{"features", m.features()}, {"gamma", m.gamma()}, {"seed", m.seed()}};
          }
          return {{"input_dim", s.input_dim()}, {"bias", s.bias()},
                  {"weights", std::vector<double>(s.weights().data(), s.weights().data() + s.weights().size())},
                  {"rff", rff}};
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          json trees = json::array();
          for (const auto& t : s.trees()) trees.push_back(tree_json(t));
          return {{"input_dim", s.input_dim()}, {"trees", trees}};
        } else if constexpr (std::is_same_v<T, GradientBoostedTrees>) {
          json stages = json::array();
          for (const auto& t : s.stages()) stages.push_back(tree_json(t));
          return {{"input_dim", s.input_dim()}, {"initial_score", s.initial_score()},
                  {"learning_rate", s.learning_rate()}, {"stages", stages}};
        } else if constexpr (std::is_same_v<T, nn::Mlp<float>>) {
          return {{"input_dim", s.input_dim()}, {"params", params_json(s)}};
        } else if constexpr (std::is_same_v<T, nn::TextCnn<float>>) {
          return {{"vocabulary_size", s.shape().vocabulary_size}, {"max_len", s.shape().max_len}, {"params", params_json(s)}};
        } else if constexpr (std::is_same_v<T, nn::TextLstm<float>>) {
          return {{"vocabulary_size", s.shape().vocabulary_size}, {"max_len", s.shape().max_len}, {"params", params_json(s)}};
        } else {
          return {{"label", std::string(to_string(s.label))}};
        }
      },
      model.state);
  return {{"format", "fnd-model"},
          {"version", kFormatVersion},
          {"algorithm", std::string(to_string(model.algorithm))},
          {"config", config_to_json(model.config)},
          {"config_fingerprint", model.config_fingerprint},
          {"representation", model.representation},
          {"history", history_to_json(model.history)},
          {"state", state}};
}

TrainedModel model_from_json(const json& j) {
  try {
    if (j.value("format", "") != "fnd-model") throw Error(ErrorKind::Parse, "not a model file");
    if (j.at("version").get<int>() != kFormatVersion) {
      throw Error(ErrorKind::Parse, "unsupported model format version " + j.at("version").dump());
    }
    TrainedModel m;
    m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    m.config = config_from_json(m.algorithm, j.at("config"));
    m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    if (m.config_fingerprint != config_fingerprint(m.config)) throw Error(ErrorKind::Parse, "config fingerprint mismatch");
    m.representation = j.at("representation").get<std::string>();
    m.history = history_from_json(j.at("history"));
    const json& s = j.at("state");
    switch (m.algorithm) {
      case Algorithm::Svm: {
        const auto w = s.at("weights").get<std::vector<double>>();
        const auto input_dim = s.at("input_dim").get<std::size_t>();
        std::optional<RandomFourierMap> map;
        if (!s.at("rff").is_null()) {
          const auto& r = s.at("rff");
          map.emplace(input_dim, r.at("features").get<std::size_t>(), r.at("gamma").get<double>(), r.at("seed").get<std::uint64_t>());
        }
        m.state = LinearSvm(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                            s.at("bias").get<double>(), input_dim, std::move(map));
        break;
      }
      case Algorithm::RandomForest: {
        std::vector<DecisionTree> trees;
        for (const auto& t : s.at("trees")) trees.push_back(tree_from_json(t));
        m.state = RandomForest(std::move(trees), s.at("input_dim").get<std::size_t>());
        break;
      }
      case Algorithm::Gbt: {
        std::vector<DecisionTree> stages;
        for (const auto& t : s.at("stages")) stages.push_back(tree_from_json(t));
        m.state = GradientBoostedTrees(s.at("initial_score").get<double>(), s.at("learning_rate").get<double>(),
                                       std::move(stages), s.at("input_dim").get<std::size_t>());
        break;
      }
      case Algorithm::Mlp: {
        const auto& c = std::get<MlpConfig>(m.config);
        const std::vector<std::size_t> hidden(c.hidden_layers, c.units);
        nn::Mlp<float> net(s.at("input_dim").get<std::size_t>(), hidden, 0, c.l2);
        restore_params(net, s.at("params"));
        m.state = std::move(net);
        break;
      }
      case Algorithm::Cnn: {
        const auto& c = std::get<CnnConfig>(m.config);
        const nn::CnnShape shape{s.at("vocabulary_size").get<std::size_t>(), s.at("max_len").get<std::size_t>(),
                                 c.embedding.dim, c.filters, c.kernel_size, c.dense_units};
        const auto table = matrix_from_json<float>(s.at("params").at(0));
        nn::TextCnn<float> net(shape, c.kr, 0, c.embedding.trainable ? nullptr : &table);
        restore_params(net, s.at("params"));
        m.state = std::move(net);
        break;
      }
      case Algorithm::Lstm: {
        const auto& c = std::get<LstmConfig>(m.config);
        const nn::LstmShape shape{s.at("vocabulary_size").get<std::size_t>(), s.at("max_len").get<std::size_t>(),
                                  c.embedding.dim, c.units};
        const auto table = matrix_from_json<float>(s.at("params").at(0));
        nn::TextLstm<float> net(shape, {c.kr, c.rr, c.dropout}, 0, c.embedding.trainable ? nullptr : &table);
        restore_params(net, s.at("params"));
        m.state = std::move(net);
        break;
      }
      case Algorithm::Constant:
        m.state = ConstantModel{std::get<ConstantConfig>(m.config).label};
        break;
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed model: ") + e.what());
  }
}

std::string model_fingerprint(const TrainedModel& model) { return fingerprint_of(model_to_json(model).at("state").dump()); }

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot read " + path.string());
  try {
    return model_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace fnd
