#include <doctest.h>

#include <cmath>

#include "fnd/error.hpp"
#include "fnd/models/model.hpp"
#include "support/model_fixtures.hpp"

using namespace fnd;
using fnd::testing::accuracy;
using fnd::testing::features;

namespace {

std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t d, Rng& rng, double density = 0.5) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(d, 0.0));
  for (auto& r : rows) {
    for (auto& v : r) {
      if (rng.uniform() < density) v = std::round(rng.uniform(-3, 3) * 4) / 4;
    }
  }
  return rows;
}

std::vector<Label> random_labels(std::size_t n, Rng& rng) {
  std::vector<Label> y(n);
  for (auto& l : y) l = rng.uniform() < 0.5 ? Label::Fake : Label::True;
  y[0] = Label::Fake;
  y[1] = Label::True;
  return y;
}

/// Exhaustive best Gini decrease over every feature and midpoint threshold.
double brute_force_gini_gain(const std::vector<std::vector<double>>& rows, const std::vector<Label>& y) {
  const auto n = static_cast<double>(rows.size());
  double f_all = 0;
  for (auto l : y) f_all += l == Label::Fake;
  const double parent = n * gini_impurity(n - f_all, f_all);
  double best = 0;
  for (std::size_t c = 0; c < rows.front().size(); ++c) {
    std::vector<double> values;
    for (const auto& r : rows) values.push_back(r[c]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double thr = (values[k] + values[k + 1]) / 2;
      double ln = 0, lf = 0, rn = 0, rf = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool fake = y[i] == Label::Fake;
        if (rows[i][c] <= thr) {
          ln += 1;
          lf += fake;
        } else {
          rn += 1;
          rf += fake;
        }
      }
      best = std::max(best, parent - ln * gini_impurity(ln - lf, lf) - rn * gini_impurity(rn - rf, rf));
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("svm") {
  TEST_CASE("separable pair on one feature") {
    const auto x = features({{-1.0}, {1.0}});
    const std::vector<Label> y{Label::True, Label::Fake};
    const auto model = train_svm(x, y, SvmConfig{});
    const auto p = predict(model, x);
    CHECK(p.labels == y);
    const auto& svm = std::get<LinearSvm>(model.state);
    REQUIRE(svm.weights()[0] > 0);
    const double boundary = -svm.bias() / svm.weights()[0];
    CHECK(boundary > -1.0);
    CHECK(boundary < 1.0);
  }

  TEST_CASE("single class is rejected") {
    const auto x = features({{1.0}, {2.0}});
    CHECK_THROWS_AS(train_svm(x, std::vector<Label>{Label::Fake, Label::Fake}, SvmConfig{}), Error);
    try {
      train_svm(x, std::vector<Label>{Label::Fake, Label::Fake}, SvmConfig{});
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SingleClassInput);
    }
  }

  TEST_CASE("config invariants") {
    SvmConfig c;
    c.C = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.kernel = Kernel::Rbf;
    c.rff_features = 7;
    CHECK_THROWS_AS(c.validate(), Error);
    c.rff_features = 8;
    c.gamma = -1;
    CHECK_THROWS_AS(c.validate(), Error);
  }

  TEST_CASE("random Fourier features approximate the RBF kernel") {
    for (double gamma : {0.1, 1.0}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const RandomFourierMap map(6, 2048, gamma, seed);
        Rng rng(seed * 7919);
        double err = 0;
        for (int pair = 0; pair < 50; ++pair) {
          Eigen::VectorXd a(6), b(6);
          for (int k = 0; k < 6; ++k) {
            a[k] = rng.uniform(-0.6, 0.6);
            b[k] = rng.uniform(-0.6, 0.6);
          }
          const double exact = std::exp(-gamma * (a - b).squaredNorm());
          err += std::abs(map.transform(a).dot(map.transform(b)) - exact);
        }
        CAPTURE(gamma);
        CAPTURE(seed);
        CHECK(err / 50 <= 0.05);
      }
    }
  }

  TEST_CASE("sparse and dense transforms agree") {
    const RandomFourierMap map(3, 16, 0.5, 9);
    const auto x = features({{0.5, 0.0, -1.0}});
    Eigen::VectorXd dense(3);
    dense << 0.5, 0.0, -1.0;
    const Eigen::MatrixXd z = map.transform(x.values);
    CHECK((z.row(0).transpose() - map.transform(dense)).norm() < 1e-9);
  }

  TEST_CASE("rbf kernel separates a ring") {
    Rng rng(3);
    std::vector<std::vector<double>> rows;
    std::vector<Label> y;
    for (int i = 0; i < 300; ++i) {
      const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
      rows.push_back({a, b});
      y.push_back(a * a + b * b < 1.2 ? Label::Fake : Label::True);
    }
    const auto x = features(rows);
    SvmConfig linear;
    linear.C = 1e3;
    SvmConfig rbf = linear;
    rbf.kernel = Kernel::Rbf;
    rbf.gamma = 1.0;
    rbf.rff_features = 512;
    const double acc_linear = accuracy(predict(train_svm(x, y, linear), x).labels, y);
    const double acc_rbf = accuracy(predict(train_svm(x, y, rbf), x).labels, y);
    CHECK(acc_rbf >= 0.9);
    CHECK(acc_rbf > acc_linear);
  }

  TEST_CASE("learns synthetic news") {
    const auto s = fnd::testing::sparse_split(300, 11, true);
    SvmConfig c;
    c.C = 10;
    const auto model = train_svm(s.train, s.y_train, c);
    CHECK(accuracy(predict(model, s.test).labels, s.y_test) >= 0.9);
  }
}

TEST_SUITE("trees") {
  TEST_CASE("gini impurity") {
    CHECK(gini_impurity(5, 0) == 0.0);
    CHECK(gini_impurity(0, 3) == 0.0);
    CHECK(gini_impurity(3, 3) == doctest::Approx(0.5));
    CHECK(gini_impurity(1, 3) == doctest::Approx(0.375));
  }

  TEST_CASE("root split matches exhaustive search") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed);
      const auto rows = random_rows(30, 6, rng);
      const auto y = random_labels(30, rng);
      const auto x = features(rows);
      const TreeData data(x.values);
      const Eigen::VectorXd t = to_targets(y);
      const std::vector<double> w(30, 1.0);
      Rng tree_rng(seed);
      const auto tree = DecisionTree::grow(data, {t.data(), 30}, w, {.max_features = 6, .max_depth = 1}, tree_rng);
      const double expected = brute_force_gini_gain(rows, y);
      if (expected <= 0) continue;
      REQUIRE(tree.nodes().size() == 3);
      const auto& root = tree.nodes()[0];
      double ln = 0, lf = 0, rn = 0, rf = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool fake = y[i] == Label::Fake;
        if (rows[i][static_cast<std::size_t>(root.feature)] <= root.threshold) {
          ln += 1;
          lf += fake;
        } else {
          rn += 1;
          rf += fake;
        }
      }
      double pf = 0;
      for (auto l : y) pf += l == Label::Fake;
      const double gain = 30 * gini_impurity(30 - pf, pf) - ln * gini_impurity(ln - lf, lf) - rn * gini_impurity(rn - rf, rf);
      CAPTURE(seed);
      CHECK(gain == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  TEST_CASE("one tree memorizes four separable points") {
    const auto x = features({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const std::vector<Label> y{Label::True, Label::Fake, Label::Fake, Label::True};
    ForestConfig c;
    c.n_trees = 1;
    c.bootstrap = false;
    c.max_features = 2;
    const auto model = train_random_forest(x, y, c);
    CHECK(accuracy(predict(model, x).labels, y) == 1.0);
  }

  TEST_CASE("forest consistency on duplicate-free data") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(seed);
      const auto rows = random_rows(80, 12, rng, 0.3);
      const auto y = random_labels(80, rng);
      std::vector<std::vector<double>> unique_rows = rows;
      std::sort(unique_rows.begin(), unique_rows.end());
      if (std::adjacent_find(unique_rows.begin(), unique_rows.end()) != unique_rows.end()) continue;
      ForestConfig c;
      c.n_trees = 1;
      c.bootstrap = false;
      c.max_features = 1000;
      c.seed = seed;
      const auto x = features(rows);
      CAPTURE(seed);
      CHECK(accuracy(predict(train_random_forest(x, y, c), x).labels, y) == 1.0);
    }
  }

  TEST_CASE("vote fraction and tie rule") {
    std::vector<DecisionTree> trees;
    for (int i = 0; i < 500; ++i) trees.emplace_back(std::vector<TreeNode>{TreeNode{.value = i < 400 ? 1.0 : 0.0}});
    const RandomForest forest(trees, 1);
    const auto x = features({{0.0}, {1.0}});
    CHECK(forest.fake_votes(x.values, 0) == 400);
    const auto p = prediction_from_scores(forest.scores(x.values));
    CHECK(p.scores[0] == doctest::Approx(0.8));
    CHECK(p.labels[0] == Label::Fake);

    std::vector<DecisionTree> even;
    for (int i = 0; i < 4; ++i) even.emplace_back(std::vector<TreeNode>{TreeNode{.value = i < 2 ? 1.0 : 0.0}});
    const RandomForest tied(even, 1);
    const auto q = prediction_from_scores(tied.scores(x.values));
    CHECK(q.scores[0] == 0.5);
    CHECK(q.labels[0] == Label::Fake);

    const RandomForest split_leaf({DecisionTree(std::vector<TreeNode>{TreeNode{.value = 0.5}})}, 1);
    CHECK(split_leaf.fake_votes(x.values, 0) == 1);
  }

  TEST_CASE("identical forests for any worker count") {
    const auto s = fnd::testing::sparse_split(200, 5, true);
    ForestConfig c;
    c.n_trees = 12;
    c.max_features = 20;
    c.seed = 42;
    c.jobs = 1;
    const auto a = train_random_forest(s.train, s.y_train, c);
    c.jobs = 3;
    const auto b = train_random_forest(s.train, s.y_train, c);
    CHECK(a.config_fingerprint == b.config_fingerprint);
    const auto& fa = std::get<RandomForest>(a.state);
    const auto& fb = std::get<RandomForest>(b.state);
    for (std::size_t k = 0; k < fa.trees().size(); ++k) {
      const auto& na = fa.trees()[k].nodes();
      const auto& nb = fb.trees()[k].nodes();
      REQUIRE(na.size() == nb.size());
      for (std::size_t i = 0; i < na.size(); ++i) {
        CHECK(na[i].feature == nb[i].feature);
        CHECK(na[i].threshold == nb[i].threshold);
        CHECK(na[i].value == nb[i].value);
      }
    }
    CHECK(predict(a, s.test).scores == predict(b, s.test).scores);
  }

  TEST_CASE("forest learns synthetic news") {
    const auto s = fnd::testing::sparse_split(300, 12, true);
    ForestConfig c;
    c.n_trees = 50;
    c.max_features = 50;
    const auto model = train_random_forest(s.train, s.y_train, c);
    CHECK(accuracy(predict(model, s.test).labels, s.y_test) >= 0.9);
  }

  TEST_CASE("config invariants") {
    ForestConfig c;
    c.n_trees = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.max_features = 0;
    CHECK_THROWS_AS(c.validate(), Error);
  }
}

TEST_SUITE("gbt") {
  TEST_CASE("single class is rejected") {
    const auto x = features({{1.0}, {2.0}, {3.0}});
    try {
      train_gbt(x, std::vector<Label>(3, Label::True), GbtConfig{});
      FAIL("expected SingleClassInput");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SingleClassInput);
    }
  }

  TEST_CASE("zero stages predict the base rate") {
    std::vector<std::vector<double>> rows;
    std::vector<Label> y;
    for (int i = 0; i < 10; ++i) {
      rows.push_back({static_cast<double>(i)});
      y.push_back(i < 3 ? Label::Fake : Label::True);
    }
    const auto x = features(rows);
    GbtConfig c;
    c.n_trees = 5;
    const auto model = GradientBoostedTrees::fit(x.values, y, c).truncated(0);
    CHECK(model.initial_score() == doctest::Approx(std::log(0.3 / 0.7)).epsilon(1e-15));
    const auto s = model.scores(x.values);
    for (Eigen::Index i = 0; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(0.3).epsilon(1e-12));
  }

  TEST_CASE("training loss never increases per stage") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      Rng rng(seed);
      const auto x = features(random_rows(50, 8, rng));
      const auto y = random_labels(50, rng);
      for (double lr : {0.1, 0.05, 0.01}) {
        GbtConfig c;
        c.n_trees = 30;
        c.max_features = 1 + rng.below(8);
        c.learning_rate = lr;
        c.tree_depth = 1 + rng.below(4);
        c.seed = seed;
        TrainingHistory h;
        GradientBoostedTrees::fit(x.values, y, c, &h);
        REQUIRE(h.loss.size() == 30);
        double prev = h.initial_loss;
        for (double l : h.loss) {
          CHECK(l <= prev + 1e-12);
          prev = l;
        }
      }
    }
  }

  TEST_CASE("learns synthetic news") {
    const auto s = fnd::testing::sparse_split(300, 13, false);
    GbtConfig c;
    c.n_trees = 100;
    c.max_features = 100;
    const auto model = train_gbt(s.train, s.y_train, c);
    CHECK(model.history.loss.size() == 100);
    CHECK(accuracy(predict(model, s.test).labels, s.y_test) >= 0.85);
  }

  TEST_CASE("config invariants") {
    GbtConfig c;
    c.learning_rate = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.learning_rate = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c.learning_rate = 1.0;
    CHECK_NOTHROW(c.validate());
    c.tree_depth = 0;
    CHECK_THROWS_AS(c.validate(), Error);
  }
}

TEST_SUITE("prediction guard") {
  TEST_CASE("bow features against a tf-idf model") {
    const auto s = fnd::testing::sparse_split(60, 3, true);
    const auto bow = fnd::testing::sparse_split(60, 3, false);
    REQUIRE(s.train.representation != bow.test.representation);
    const auto model = train_svm(s.train, s.y_train, SvmConfig{});
    try {
      predict(model, bow.test);
      FAIL("expected RepresentationMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::RepresentationMismatch);
    }
    CHECK_NOTHROW(predict(model, s.test));
  }

  TEST_CASE("tie at 0.5 is FAKE") {
    CHECK(label_from_score(0.5) == Label::Fake);
    CHECK(label_from_score(std::nextafter(0.5, 0.0)) == Label::True);
  }
}
