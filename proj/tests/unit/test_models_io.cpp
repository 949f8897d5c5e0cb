#include <doctest.h>

#include "fnd/error.hpp"
#include "fnd/models/serialize.hpp"
#include "support/model_fixtures.hpp"

using namespace fnd;
using nlohmann::json;

namespace {

template <class Input>
void check_round_trip(const TrainedModel& model, const Input& x) {
  fnd::testing::TempDir dir;
  const auto path = dir.path() / "model.json";
  save_model(model, path);
  const auto loaded = load_model(path);
  CHECK(loaded.algorithm == model.algorithm);
  CHECK(loaded.config_fingerprint == model.config_fingerprint);
  CHECK(loaded.representation == model.representation);
  CHECK(loaded.history.loss == model.history.loss);
  const auto a = predict(model, x);
  const auto b = predict(loaded, x);
  CHECK(a.labels == b.labels);
  REQUIRE(a.scores.size() == b.scores.size());
  for (Eigen::Index i = 0; i < a.scores.size(); ++i) CHECK(a.scores[i] == b.scores[i]);
}

}  // namespace

TEST_CASE("sparse-feature models round-trip bit-exactly") {
  const auto s = fnd::testing::sparse_split(80, 17, true);
  SvmConfig linear;
  check_round_trip(train_svm(s.train, s.y_train, linear), s.test);
  SvmConfig rbf;
  rbf.kernel = Kernel::Rbf;
  rbf.rff_features = 64;
  rbf.gamma = 0.1;
  check_round_trip(train_svm(s.train, s.y_train, rbf), s.test);
  ForestConfig f;
  f.n_trees = 7;
  f.max_features = 10;
  f.max_depth = 6;
  check_round_trip(train_random_forest(s.train, s.y_train, f), s.test);
  GbtConfig g;
  g.n_trees = 9;
  g.max_features = 20;
  check_round_trip(train_gbt(s.train, s.y_train, g), s.test);
  MlpConfig m;
  m.epochs = 3;
  m.hidden_layers = 2;
  check_round_trip(train_mlp(s.train, s.y_train, m), s.test);
}

TEST_CASE("sequence models round-trip bit-exactly") {
  const auto q = fnd::testing::sequence_split(40, 18, 12);
  CnnConfig c;
  c.epochs = 2;
  c.kernel_size = 3;
  c.embedding.dim = 6;
  check_round_trip(train_cnn_text(q.train, q.y_train, c), q.test);

  LstmConfig l;
  l.epochs = 2;
  l.units = 3;
  l.embedding.dim = 5;
  l.dropout = 0.2;
  check_round_trip(train_lstm_text(q.train, q.y_train, l), q.test);

  const EmbeddingTable table(Eigen::MatrixXf::Random(static_cast<Eigen::Index>(q.vocabulary_size), 4),
                             std::vector<bool>(q.vocabulary_size, true), OovPolicy::ZeroVector, "mem");
  l.embedding = {.trainable = false, .dim = 4, .source = "mem", .oov = OovPolicy::ZeroVector};
  check_round_trip(train_lstm_text(q.train, q.y_train, l, &table), q.test);
}

TEST_CASE("damaged model files are rejected") {
  const auto s = fnd::testing::sparse_split(30, 4, false);
  const auto model = train_svm(s.train, s.y_train, SvmConfig{});
  json j = model_to_json(model);
  j["version"] = 99;
  CHECK_THROWS_AS(model_from_json(j), Error);
  j = model_to_json(model);
  j["config"]["C"] = 5.0;
  CHECK_THROWS_AS(model_from_json(j), Error);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), Error);
}

TEST_SUITE("config parameters") {
  TEST_CASE("defaults and overrides") {
    const auto c = std::get<SvmConfig>(config_from_json(Algorithm::Svm, json{{"kernel", "rbf"}, {"C", 1000}, {"gamma", 1}}));
    CHECK(c.kernel == Kernel::Rbf);
    CHECK(c.C == 1000.0);
    CHECK(c.rff_features == 2048);
    const auto f = std::get<ForestConfig>(config_from_json(Algorithm::RandomForest, json::object()));
    CHECK(f.n_trees == 100);
    CHECK_FALSE(f.max_depth);
    CHECK(f.bootstrap);
  }

  TEST_CASE("upper-case aliases") {
    const auto l = std::get<LstmConfig>(
        config_from_json(Algorithm::Lstm, json{{"units", 4}, {"KR", 0.01}, {"RR", 0.01}, {"D", 0.5}}));
    CHECK(l.kr == 0.01);
    CHECK(l.rr == 0.01);
    CHECK(l.dropout == 0.5);
    const auto c = std::get<CnnConfig>(config_from_json(
        Algorithm::Cnn, json{{"F", 16}, {"KS", 10}, {"dense_units", 12}, {"embedding", {{"kind", "fixed"}, {"dim", 300}}}}));
    CHECK(c.filters == 16);
    CHECK(c.kernel_size == 10);
    CHECK_FALSE(c.embedding.trainable);
    CHECK(c.embedding.dim == 300);
  }

  TEST_CASE("invalid parameters") {
    auto kind_of = [](const json& params, Algorithm a) {
      try {
        config_from_json(a, params);
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::Empty;
    };
    CHECK(kind_of(json{{"trees", 5}}, Algorithm::RandomForest) == ErrorKind::SpecValidation);
    CHECK(kind_of(json{{"n_trees", -1}}, Algorithm::RandomForest) == ErrorKind::SpecValidation);
    CHECK(kind_of(json{{"n_trees", 0}}, Algorithm::RandomForest) == ErrorKind::SpecValidation);
    CHECK(kind_of(json{{"D", 1.0}}, Algorithm::Lstm) == ErrorKind::SpecValidation);
    CHECK(kind_of(json{{"KR", -0.1}}, Algorithm::Cnn) == ErrorKind::SpecValidation);
    CHECK(kind_of(json{{"learning_rate", 2.0}}, Algorithm::Gbt) == ErrorKind::SpecValidation);
    CHECK(kind_of(json{{"kernel", "poly"}}, Algorithm::Svm) == ErrorKind::SpecValidation);
    CHECK(kind_of(json{{"early_stopping", {{"patience", 0}}}}, Algorithm::Cnn) == ErrorKind::SpecValidation);
    CHECK(kind_of(json{{"hidden_layers", 0}}, Algorithm::Mlp) == ErrorKind::SpecValidation);
  }

  TEST_CASE("fingerprint ignores the worker count") {
    ForestConfig a;
    ForestConfig b;
    b.jobs = 8;
    CHECK(config_fingerprint(a) == config_fingerprint(b));
    b.n_trees = 5;
    CHECK(config_fingerprint(a) != config_fingerprint(b));
    CHECK(config_fingerprint(SvmConfig{}) != config_fingerprint(GbtConfig{}));
  }

  TEST_CASE("json round-trip of every configuration") {
    for (auto a : {Algorithm::Svm, Algorithm::RandomForest, Algorithm::Gbt, Algorithm::Mlp, Algorithm::Cnn, Algorithm::Lstm,
                   Algorithm::Constant}) {
      ModelConfig c = default_config(a);
      set_seed(c, 1234567890123ULL);
      const auto back = config_from_json(a, config_to_json(c));
      CHECK(config_fingerprint(back) == config_fingerprint(c));
      CHECK(seed_of(back) == 1234567890123ULL);
    }
  }
}
