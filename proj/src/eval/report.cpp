#include "fnd/eval/report.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fnd/error.hpp"

namespace fnd {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::Matrix2d& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

Eigen::Matrix2d matrix_from(const json& j) {
  Eigen::Matrix2d m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }
MeanStd mean_std_from(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

template <class T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json iteration_json(const IterationResult& it) {
  json j{{"iteration", it.iteration},   {"seed", it.seed},
         {"train_size", it.train_size}, {"dev_size", it.dev_size},
         {"test_size", it.test_size},   {"test_acc", it.test_accuracy},
         {"model_fingerprint", it.model_fingerprint}};
  put_optional(j, "dev_acc", it.dev_accuracy);
  put_optional(j, "external_acc", it.external_accuracy);
  put_optional(j, "epochs", it.epochs);
  return j;
}

IterationResult iteration_from(const json& j) {
  IterationResult it;
  it.iteration = j.at("iteration").get<std::size_t>();
  it.seed = j.at("seed").get<std::uint64_t>();
  it.train_size = j.at("train_size").get<std::size_t>();
  it.dev_size = j.at("dev_size").get<std::size_t>();
  it.test_size = j.at("test_size").get<std::size_t>();
  it.test_accuracy = j.at("test_acc").get<double>();
  it.model_fingerprint = j.at("model_fingerprint").get<std::string>();
  it.dev_accuracy = get_optional<double>(j, "dev_acc");
  it.external_accuracy = get_optional<double>(j, "external_acc");
  it.epochs = get_optional<std::size_t>(j, "epochs");
  return it;
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(10) << *v;
  return s.str();
}

std::string csv_quote(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json deterministic_payload(const EvalReport& r) {
  json j{{"name", r.name},
         {"algorithm", r.algorithm},
         {"model_config", r.model_config},
         {"pipeline", r.pipeline},
         {"plan", r.plan},
         {"corpus", r.corpus},
         {"seed", r.seed},
         {"overrides", r.overrides},
         {"test_acc", mean_std_json(r.test)},
         {"confusion", matrix_json(r.confusion)},
         {"config_fingerprint", r.config_fingerprint},
         {"spec_fingerprint", r.spec_fingerprint},
         {"warnings", r.warnings}};
  if (!r.external_corpus.empty()) j["external_corpus"] = r.external_corpus;
  if (r.dev) j["dev_acc"] = mean_std_json(*r.dev);
  if (r.external) j["external_acc"] = mean_std_json(*r.external);
  if (r.external_confusion) j["external_confusion"] = matrix_json(*r.external_confusion);
  j["iterations"] = json::array();
  for (const auto& it : r.iterations) j["iterations"].push_back(iteration_json(it));
  return j;
}

json to_json(const EvalReport& r) {
  json j = deterministic_payload(r);
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

EvalReport eval_report_from_json(const json& j) {
  try {
    EvalReport r;
    r.name = j.at("name").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.model_config = j.at("model_config");
    r.pipeline = j.at("pipeline");
    r.plan = j.at("plan");
    r.corpus = j.at("corpus").get<std::string>();
    r.external_corpus = j.value("external_corpus", std::string{});
    r.seed = j.at("seed").get<std::uint64_t>();
    r.overrides = j.value("overrides", json::object());
    r.test = mean_std_from(j.at("test_acc"));
    if (j.contains("dev_acc")) r.dev = mean_std_from(j.at("dev_acc"));
    if (j.contains("external_acc")) r.external = mean_std_from(j.at("external_acc"));
    r.confusion = matrix_from(j.at("confusion"));
    if (j.contains("external_confusion")) r.external_confusion = matrix_from(j.at("external_confusion"));
    for (const auto& it : j.at("iterations")) r.iterations.push_back(iteration_from(it));
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    r.spec_fingerprint = j.value("spec_fingerprint", std::string{});
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed evaluation report: ") + e.what());
  }
}

json to_json(const GridReport& r) {
  json j{{"name", r.name},
         {"criterion", r.criterion},
         {"ranking", r.ranking},
         {"best", r.best},
         {"spec_fingerprint", r.spec_fingerprint},
         {"wall_clock_seconds", r.wall_clock_seconds}};
  j["reports"] = json::array();
  for (const auto& rep : r.reports) j["reports"].push_back(to_json(rep));
  return j;
}

GridReport grid_report_from_json(const json& j) {
  try {
    GridReport r;
    r.name = j.at("name").get<std::string>();
    r.criterion = j.at("criterion").get<std::string>();
    r.ranking = j.at("ranking").get<std::vector<std::size_t>>();
    r.best = j.at("best").get<std::size_t>();
    r.spec_fingerprint = j.value("spec_fingerprint", std::string{});
    r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    for (const auto& rep : j.at("reports")) r.reports.push_back(eval_report_from_json(rep));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed grid report: ") + e.what());
  }
}

json to_json(const CurveReport& r) {
  json j{{"name", r.name},
         {"algorithm", r.algorithm},
         {"model_config", r.model_config},
         {"pipeline", r.pipeline},
         {"base_corpus", r.base_corpus},
         {"translated_corpus", r.translated_corpus},
         {"seed", r.seed},
         {"config_fingerprint", r.config_fingerprint},
         {"spec_fingerprint", r.spec_fingerprint},
         {"warnings", r.warnings},
         {"wall_clock_seconds", r.wall_clock_seconds}};
  j["points"] = json::array();
  for (const auto& p : r.points) {
    j["points"].push_back({{"n", p.n},
                           {"train_size", p.train_size},
                           {"holdout_size", p.holdout_size},
                           {"accuracies", p.accuracies},
                           {"accuracy", mean_std_json(p.accuracy)}});
  }
  return j;
}

CurveReport curve_report_from_json(const json& j) {
  try {
    CurveReport r;
    r.name = j.at("name").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.model_config = j.at("model_config");
    r.pipeline = j.at("pipeline");
    r.base_corpus = j.at("base_corpus").get<std::string>();
    r.translated_corpus = j.at("translated_corpus").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    r.spec_fingerprint = j.value("spec_fingerprint", std::string{});
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    for (const auto& p : j.at("points")) {
      CurvePoint point;
      point.n = p.at("n").get<std::size_t>();
      point.train_size = p.at("train_size").get<std::size_t>();
      point.holdout_size = p.at("holdout_size").get<std::size_t>();
      point.accuracies = p.at("accuracies").get<std::vector<double>>();
      point.accuracy = mean_std_from(p.at("accuracy"));
      r.points.push_back(std::move(point));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed curve report: ") + e.what());
  }
}

void write_results_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "name,algorithm,config_fingerprint,overrides,iteration,seed,train_size,dev_size,test_size,dev_acc,test_acc,"
         "external_acc,epochs,model_fingerprint\n";
  for (const auto& r : reports) {
    for (const auto& it : r.iterations) {
      out << csv_quote(r.name) << ',' << r.algorithm << ',' << r.config_fingerprint << ','
          << csv_quote(r.overrides.dump()) << ',' << it.iteration << ',' << it.seed << ',' << it.train_size << ','
          << it.dev_size << ',' << it.test_size << ',' << csv_number(it.dev_accuracy) << ','
          << csv_number(it.test_accuracy) << ',' << csv_number(it.external_accuracy) << ','
          << (it.epochs ? std::to_string(*it.epochs) : "") << ',' << it.model_fingerprint << '\n';
    }
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace fnd
