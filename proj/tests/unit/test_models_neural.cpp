#include <doctest.h>

#include <cmath>

#include "fnd/error.hpp"
#include "fnd/models/gradcheck.hpp"
#include "fnd/models/model.hpp"
#include "support/model_fixtures.hpp"

using namespace fnd;
using fnd::testing::accuracy;
using fnd::testing::features;

namespace {

/// y_hat = w . x + b with loss 0.5 (y_hat - y)^2, averaged over the batch.
struct LinearSquared {
  using Scalar = double;
  std::vector<nn::Param<double>> params;

  LinearSquared() {
    nn::Mat<double> w(3, 1);
    w << 0.3, -1.2, 0.7;
    params.emplace_back("w", w);
    params.emplace_back("b", nn::Mat<double>::Constant(1, 1, 0.25));
  }
  std::vector<nn::Param<double>>& parameters() { return params; }

  double loss(const Eigen::MatrixXd& x, std::span<const std::size_t> rows, const Eigen::VectorXd& y) const {
    double total = 0;
    for (auto r : rows) {
      const double e = x.row(static_cast<Eigen::Index>(r)).dot(params[0].value.col(0)) + params[1].value(0, 0) - y[static_cast<Eigen::Index>(r)];
      total += 0.5 * e * e;
    }
    return total / static_cast<double>(rows.size());
  }

  double loss_and_gradient(const Eigen::MatrixXd& x, std::span<const std::size_t> rows, const Eigen::VectorXd& y, Rng*) {
    for (auto r : rows) {
      const auto i = static_cast<Eigen::Index>(r);
      const double e = x.row(i).dot(params[0].value.col(0)) + params[1].value(0, 0) - y[i];
      params[0].grad.col(0) += e * x.row(i).transpose() / static_cast<double>(rows.size());
      params[1].grad(0, 0) += e / static_cast<double>(rows.size());
    }
    return loss(x, rows, y);
  }
};

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

Eigen::VectorXd random_targets(std::size_t n, Rng& rng) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (auto& v : y) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
  y[0] = 1.0;
  if (n > 1) y[1] = 0.0;
  return y;
}

IdMatrix random_ids(std::size_t rows, std::size_t len, std::size_t vocab, Rng& rng, bool pad_tail = true) {
  IdMatrix ids(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(len));
  for (Eigen::Index r = 0; r < ids.rows(); ++r) {
    const auto real = pad_tail ? 1 + static_cast<Eigen::Index>(rng.below(len)) : ids.cols();
    for (Eigen::Index t = 0; t < ids.cols(); ++t) {
      ids(r, t) = t < real ? static_cast<std::int32_t>(1 + rng.below(vocab - 1)) : Vocabulary::kPadId;
    }
  }
  return ids;
}

SequenceBatch batch_of(IdMatrix ids, std::size_t vocab) {
  SequenceBatch b;
  b.ids = std::move(ids);
  b.representation = "seq:test";
  b.vocabulary_size = vocab;
  return b;
}

}  // namespace

TEST_SUITE("gradient check") {
  TEST_CASE("linear model with squared loss") {
    LinearSquared net;
    Eigen::MatrixXd x(1, 3);
    x << 1.5, -0.5, 2.0;
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 0.4);
    const auto rows = all_rows(1);
    const auto r = nn::gradient_check(net, x, rows, y);
    CHECK(r.max_relative_error <= 1e-8);
  }

  TEST_CASE("relative error definition") {
    CHECK(nn::relative_error(1.0, 1.0) == 0.0);
    CHECK(nn::relative_error(2.0, 1.0) == doctest::Approx(0.5));
    CHECK(nn::relative_error(0.0, 1e-9) == doctest::Approx(1e-3));
  }

  TEST_CASE("mlp on a 5-sample batch") {
    Rng rng(1);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 5; ++i) {
      std::vector<double> r(12, 0.0);
      for (auto& v : r) {
        if (rng.uniform() < 0.4) v = rng.uniform(-1, 1);
      }
      rows.push_back(r);
    }
    const auto x = features(rows);
    const auto y = random_targets(5, rng);
    for (std::size_t layers : {1, 2, 3}) {
      const std::vector<std::size_t> hidden(layers, 6);
      nn::Mlp<double> net(12, hidden, 7 + layers, 1e-3);
      const auto r = nn::gradient_check(net, x.values, all_rows(5), y);
      CAPTURE(layers);
      CAPTURE(r.worst_parameter);
      CHECK(r.max_relative_error <= 1e-4);
    }
  }

  TEST_CASE("cnn with frozen embedding on a 3-sample batch") {
    Rng rng(2);
    const std::size_t vocab = 12, len = 9, dim = 4;
    const IdMatrix ids = random_ids(3, len, vocab, rng, false);
    const auto y = random_targets(3, rng);
    nn::Mat<double> table = nn::uniform_matrix<double>(vocab, dim, rng, 1.0);
    table.row(0).setZero();
    const nn::CnnShape shape{vocab, len, dim, 3, 4, 5};
    nn::TextCnn<double> net(shape, 0.01, 5, &table);
    for (auto& p : net.parameters()) {
      if (p.name == "conv_bias" || p.name == "dense_bias") p.value.setConstant(0.1);
    }
    const auto r = nn::gradient_check(net, ids, all_rows(3), y);
    CAPTURE(r.worst_parameter);
    CHECK(r.max_relative_error <= 1e-4);
    CHECK_FALSE(net.parameters()[nn::TextCnn<double>::kEmbedding].trainable);
  }

  TEST_CASE("cnn with trainable embedding") {
    Rng rng(3);
    const std::size_t vocab = 10, len = 8;
    const IdMatrix ids = random_ids(3, len, vocab, rng);
    const auto y = random_targets(3, rng);
    nn::TextCnn<double> net({vocab, len, 5, 2, 3, 4}, 0.0, 11);
    for (auto& p : net.parameters()) {
      if (p.name == "conv_bias" || p.name == "dense_bias") p.value.setConstant(0.1);
    }
    const auto r = nn::gradient_check(net, ids, all_rows(3), y);
    CAPTURE(r.worst_parameter);
    CHECK(r.max_relative_error <= 1e-4);
  }

  TEST_CASE("lstm toy model through time") {
    Rng rng(4);
    const std::size_t vocab = 10, len = 6;
    IdMatrix ids = random_ids(2, len, vocab, rng, false);
    ids(1, 4) = ids(1, 5) = Vocabulary::kPadId;
    const auto y = random_targets(2, rng);
    nn::TextLstm<double> net({vocab, len, 4, 3}, {0.01, 0.02, 0.0}, 13);
    const auto r = nn::gradient_check(net, ids, all_rows(2), y);
    CAPTURE(r.worst_parameter);
    CHECK(r.max_relative_error <= 1e-4);
  }
}

TEST_SUITE("neural shapes") {
  TEST_CASE("convolution output length") {
    for (std::size_t ks : {1, 3, 10}) {
      nn::TextCnn<float> net({20, 10, 4, 2, ks, 3}, 0, 1);
      CHECK(net.conv_output_length() == 10 - ks + 1);
    }
    CHECK_THROWS_AS(nn::TextCnn<float>({20, 10, 4, 2, 11, 3}, 0, 1), Error);
  }

  TEST_CASE("sequence length mismatch") {
    Rng rng(1);
    const auto s = batch_of(random_ids(4, 8, 10, rng), 10);
    auto y = std::vector<Label>{Label::Fake, Label::True, Label::Fake, Label::True};
    CnnConfig c;
    c.kernel_size = 3;
    c.epochs = 1;
    const auto model = train_cnn_text(s, y, c);
    const auto other = batch_of(random_ids(2, 9, 10, rng), 10);
    auto shifted = other;
    shifted.representation = s.representation;
    try {
      predict(model, shifted);
      FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ShapeMismatch);
    }
  }

  TEST_CASE("fixed embedding must match the configured width") {
    Rng rng(2);
    const auto s = batch_of(random_ids(4, 6, 8, rng), 8);
    const std::vector<Label> y{Label::Fake, Label::True, Label::Fake, Label::True};
    const EmbeddingTable table(Eigen::MatrixXf::Ones(8, 3), std::vector<bool>(8, true), OovPolicy::ZeroVector, "mem");
    LstmConfig c;
    c.embedding.trainable = false;
    c.embedding.dim = 4;
    c.epochs = 1;
    CHECK_THROWS_AS(train_lstm_text(s, y, c, &table), Error);
    CHECK_THROWS_AS(train_lstm_text(s, y, c, nullptr), Error);
    c.embedding.dim = 3;
    const auto model = train_lstm_text(s, y, c, &table);
    const auto& net = std::get<nn::TextLstm<float>>(model.state);
    CHECK(net.parameters()[0].value.row(0).isZero());
    CHECK(net.parameters()[0].value.row(3) == Eigen::RowVectorXf::Ones(3));
  }
}

TEST_SUITE("neural training") {
  TEST_CASE("mlp learns XOR") {
    const auto x = features({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const std::vector<Label> y{Label::True, Label::Fake, Label::Fake, Label::True};
    MlpConfig c;
    c.hidden_layers = 1;
    c.units = 10;
    c.epochs = 2000;
    c.batch_size = 4;
    c.learning_rate = 0.02;
    c.seed = 3;
    const auto model = train_mlp(x, y, c);
    CHECK(accuracy(predict(model, x).labels, y) == 1.0);
  }

  TEST_CASE("loss at epoch 50 is below the initial loss") {
    const auto s = fnd::testing::sparse_split(20, 21, true, 0.3, 60);
    const auto q = fnd::testing::sequence_split(20, 22, 12, 0.3, 60);
    REQUIRE(s.y_train.size() == 20);

    MlpConfig m;
    m.epochs = 50;
    m.learning_rate = 1e-3;
    m.batch_size = 5;
    const auto mlp = train_mlp(s.train, s.y_train, m);
    CHECK(mlp.history.loss.size() == 50);
    CHECK(mlp.history.loss.back() < mlp.history.initial_loss);

    CnnConfig c;
    c.epochs = 50;
    c.kernel_size = 3;
    c.dense_units = 4;
    c.embedding.dim = 8;
    c.batch_size = 5;
    const auto cnn = train_cnn_text(q.train, q.y_train, c);
    CHECK(cnn.history.loss.back() < cnn.history.initial_loss);

    LstmConfig l;
    l.epochs = 50;
    l.units = 4;
    l.embedding.dim = 8;
    l.batch_size = 5;
    const auto lstm = train_lstm_text(q.train, q.y_train, l);
    CHECK(lstm.history.loss.back() < lstm.history.initial_loss);
  }

  TEST_CASE("cnn and lstm learn synthetic news") {
    const auto q = fnd::testing::sequence_split(400, 31, 30, 0.2);
    CnnConfig c;
    c.epochs = 15;
    c.kernel_size = 3;
    c.embedding.dim = 16;
    c.learning_rate = 5e-3;
    const auto cnn = train_cnn_text(q.train, q.y_train, c);
    CHECK(accuracy(predict(cnn, q.test).labels, q.y_test) >= 0.85);

    LstmConfig l;
    l.epochs = 30;
    l.units = 8;
    l.embedding.dim = 16;
    l.learning_rate = 1e-2;
    const auto lstm = train_lstm_text(q.train, q.y_train, l);
    CHECK(accuracy(predict(lstm, q.test).labels, q.y_test) >= 0.85);
  }

  TEST_CASE("early stopping halts and restores the best epoch") {
    const auto q = fnd::testing::sequence_split(120, 41, 20, 0.08);
    const DevSet<SequenceBatch> dev{&q.test, q.y_test};
    for (std::size_t patience : {1, 2, 3}) {
      CnnConfig c;
      c.epochs = 40;
      c.kernel_size = 3;
      c.embedding.dim = 8;
      c.learning_rate = 2e-2;
      c.early_stopping = EarlyStopping{.tolerance = 0.01, .patience = patience, .restore_best = true};
      const auto model = train_cnn_text(q.train, q.y_train, c, nullptr, &dev);
      const auto& h = model.history;
      REQUIRE(h.best_epoch);
      const std::size_t ran = h.loss.size();
      CAPTURE(patience);
      CHECK(ran <= *h.best_epoch + patience + 1);
      if (h.stopped_early) CHECK(ran == *h.best_epoch + patience + 1);
      for (std::size_t e = *h.best_epoch + 1; e < ran; ++e) CHECK(h.dev_accuracy[e] <= *h.best_dev_accuracy + 0.01);
      CHECK(accuracy(predict(model, q.test).labels, q.y_test) == *h.best_dev_accuracy);
    }
  }

  TEST_CASE("early stopping needs a dev set") {
    const auto q = fnd::testing::sequence_split(20, 1, 10);
    CnnConfig c;
    c.kernel_size = 3;
    c.early_stopping = EarlyStopping{};
    CHECK_THROWS_AS(train_cnn_text(q.train, q.y_train, c), Error);
  }

  TEST_CASE("diverging loss is reported") {
    const auto s = fnd::testing::sparse_split(30, 2, false);
    MlpConfig c;
    c.epochs = 50;
    c.learning_rate = 1e30;
    try {
      train_mlp(s.train, s.y_train, c);
      FAIL("expected DivergedLoss");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DivergedLoss);
    }
  }

  TEST_CASE("training is deterministic") {
    const auto q = fnd::testing::sequence_split(40, 51, 15);
    LstmConfig l;
    l.epochs = 3;
    l.units = 4;
    l.embedding.dim = 8;
    l.dropout = 0.3;
    l.seed = 77;
    const auto a = train_lstm_text(q.train, q.y_train, l);
    const auto b = train_lstm_text(q.train, q.y_train, l);
    const auto& pa = std::get<nn::TextLstm<float>>(a.state).parameters();
    const auto& pb = std::get<nn::TextLstm<float>>(b.state).parameters();
    for (std::size_t k = 0; k < pa.size(); ++k) CHECK(pa[k].value == pb[k].value);
    CHECK(predict(a, q.test).scores == predict(b, q.test).scores);
    l.seed = 78;
    const auto c = train_lstm_text(q.train, q.y_train, l);
    CHECK(predict(a, q.test).scores != predict(c, q.test).scores);
  }

  TEST_CASE("dropout is off at inference") {
    const auto q = fnd::testing::sequence_split(20, 61, 10);
    LstmConfig l;
    l.epochs = 2;
    l.units = 3;
    l.embedding.dim = 6;
    l.dropout = 0.5;
    const auto m = train_lstm_text(q.train, q.y_train, l);
    CHECK(predict(m, q.test).scores == predict(m, q.test).scores);
  }

  TEST_CASE("sequence models reject sparse features and vice versa") {
    const auto s = fnd::testing::sparse_split(20, 1, false);
    const auto q = fnd::testing::sequence_split(20, 1, 10);
    CHECK_THROWS_AS(train(ModelConfig{CnnConfig{}}, s.train, s.y_train), Error);
    CHECK_THROWS_AS(train(ModelConfig{SvmConfig{}}, q.train, q.y_train), Error);
  }
}
