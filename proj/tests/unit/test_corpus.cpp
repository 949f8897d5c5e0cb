#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "fnd/corpus.hpp"
#include "fnd/error.hpp"
#include "support/test_support.hpp"

using namespace fnd;
using fnd::testing::make_corpus;
using fnd::testing::TempDir;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected fnd::Error");
  return ErrorKind::InvalidArgument;
}

void check_partition(const SplitIndices& s, std::size_t n) {
  std::vector<std::size_t> all;
  all.insert(all.end(), s.train.begin(), s.train.end());
  all.insert(all.end(), s.dev.begin(), s.dev.end());
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(n);
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(all == expected);  // disjoint and exhaustive
}

}  // namespace

TEST_CASE("load_csv maps labels and preserves order") {
  TempDir dir;
  const auto path = dir.write("three.csv",
                              "id,text,label\n"
                              "a,\"First, with a comma\",fake\n"
                              "b,\"Second \"\"quoted\"\"\nacross lines\",true\n"
                              "c,Third,FAKE\n");
  CsvSchema schema;
  schema.id_column = "id";
  const Corpus c = load_csv(path, schema, Language::Es, "toy");
  REQUIRE(c.size() == 3);
  CHECK(c.class_counts() == ClassCounts{2, 1});
  CHECK(c[0].text == "First, with a comma");
  CHECK(c[1].text == "Second \"quoted\"\nacross lines");
  CHECK(c[2].id == "c");
  CHECK(c[2].language == Language::Es);
}

TEST_CASE("load_csv rejects unmappable labels and broken schemas") {
  TempDir dir;
  const auto bad_label = dir.write("maybe.csv", "text,label\nhello,fake\nworld,maybe\n");
  try {
    load_csv(bad_label, CsvSchema{}, Language::En, "toy");
    FAIL("expected UnmappableLabel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnmappableLabel);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }

  const auto no_label = dir.write("nolabel.csv", "text,klass\nhello,fake\n");
  CHECK(kind_of([&] { load_csv(no_label, CsvSchema{}, Language::En, "toy"); }) == ErrorKind::MissingColumn);

  const auto header_only = dir.write("empty.csv", "text,label\n");
  CHECK(kind_of([&] { load_csv(header_only, CsvSchema{}, Language::En, "toy"); }) == ErrorKind::EmptyCorpus);

  const auto blank_text = dir.write("blank.csv", "text,label\n   ,fake\nok,true\n");
  LoadStats stats;
  const Corpus c = load_csv(blank_text, CsvSchema{}, Language::En, "toy", &stats);
  CHECK(c.size() == 1);
  CHECK(stats.skipped_empty == 1);
}

TEST_CASE("load_csv honours custom delimiter, text columns and label map") {
  TempDir dir;
  const auto path = dir.write("semi.csv", "titulo;cuerpo;clase\nHola;mundo;Falsa\nAdios;amigos;Verdadera\n");
  CsvSchema schema;
  schema.delimiter = ';';
  schema.text_columns = {"titulo", "cuerpo"};
  schema.label_column = "clase";
  schema.label_map = {{"falsa", Label::Fake}, {"verdadera", Label::True}};
  const Corpus c = load_csv(path, schema, Language::Es, "kaggle");
  CHECK(c[0].text == "Hola mundo");
  CHECK(c[1].label == Label::True);
  CHECK(c[0].id == "1");
}

TEST_CASE("merge adds sizes and class counts") {
  // Source sizes of the two Spanish datasets (971 + 1600) and the two
  // English datasets; the class split per source is illustrative.
  const Corpus es = merge({make_corpus("corpus_a", 480, 491), make_corpus("corpus_b", 800, 800)}, "spanish");
  CHECK(es.size() == 2571);
  CHECK(es.class_counts() == ClassCounts{1280, 1291});

  const Corpus en = merge({make_corpus("isot", 23481, 21417, Language::En),
                           make_corpus("fake_or_real", 3164, 3171, Language::En)},
                          "english");
  CHECK(en.size() == 51233);
  CHECK(en.class_counts() == ClassCounts{26645, 24588});
}

TEST_CASE("merge identity and id disambiguation") {
  const Corpus one = make_corpus("solo", 2, 1);
  const Corpus merged = merge({one}, "solo");
  REQUIRE(merged.size() == one.size());
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(merged[i].id == one[i].id);

  const Corpus a = make_corpus("a", 1, 0);
  const Corpus b = make_corpus("b", 0, 1);
  const Corpus ab = merge({a, b}, "ab");
  REQUIRE(ab.size() == 2);
  CHECK(ab[0].id == "a:1");
  CHECK(ab[1].id == "b:1");
  CHECK(merge({a, a}, "twice").size() == 2);  // same source name still yields unique ids
}

TEST_CASE("split sizes") {
  SplitPlan two_way{.iterations = 5, .train_fraction = 0.8};
  auto s = split_sizes(10, two_way);
  CHECK(s.train == 8);
  CHECK(s.test == 2);
  CHECK(s.dev == 0);

  SplitPlan three_way{.iterations = 5, .train_fraction = 0.8, .dev_fraction_of_train = 0.2};
  s = split_sizes(2571, three_way);
  CHECK(s.test == 515);
  CHECK(s.dev == 412);
  CHECK(s.train == 1644);

  SplitPlan ninety{.iterations = 1, .train_fraction = 0.9};
  s = split_sizes(2571, ninety);
  CHECK(s.test == 258);
  CHECK(s.train == 2313);
}

TEST_CASE("shuffle_split partitions, is deterministic and independent across iterations") {
  const Corpus c = make_corpus("c", 5, 5);
  SplitPlan plan{.iterations = 5, .train_fraction = 0.8, .seed = 42};
  const auto a = shuffle_split(c, plan);
  const auto b = shuffle_split(c, plan);
  REQUIRE(a.size() == 5);
  bool any_differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].train.size() == 8);
    CHECK(a[i].test.size() == 2);
    check_partition(a[i], 10);
    CHECK(a[i].train == b[i].train);
    CHECK(a[i].test == b[i].test);
    if (i > 0 && a[i].test != a[0].test) any_differs = true;
  }
  CHECK(any_differs);

  plan.seed = 43;
  const auto other = shuffle_split(c, plan);
  bool seed_matters = false;
  for (std::size_t i = 0; i < a.size(); ++i) seed_matters |= other[i].test != a[i].test;
  CHECK(seed_matters);
}

TEST_CASE("shuffle_split property: random sizes and fractions") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n_fake = 5 + rng.below(200);
    const std::size_t n_true = 5 + rng.below(200);
    const Corpus c = make_corpus("p", n_fake, n_true);
    SplitPlan plan;
    plan.iterations = 1 + rng.below(4);
    plan.train_fraction = rng.uniform(0.5, 0.95);
    plan.dev_fraction_of_train = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.05, 0.4);
    plan.seed = rng.next();
    plan.stratified = rng.uniform() < 0.5;
    const auto expected = split_sizes(c.size(), plan);
    for (const auto& s : shuffle_split(c, plan)) {
      check_partition(s, c.size());
      CHECK(s.test.size() == expected.test);
      CHECK(s.dev.size() == expected.dev);
      CHECK(s.train.size() == expected.train);
    }
  }
}

TEST_CASE("stratified split keeps class proportions") {
  const Corpus c = make_corpus("strat", 300, 100);
  SplitPlan plan{.iterations = 3, .train_fraction = 0.8, .seed = 1, .stratified = true};
  for (const auto& s : shuffle_split(c, plan)) {
    const auto fake_in_test =
        std::count_if(s.test.begin(), s.test.end(), [&](auto i) { return c[i].label == Label::Fake; });
    CHECK(fake_in_test == 60);
  }
}

TEST_CASE("shuffle_split rejects tiny corpora") {
  const Corpus c = make_corpus("tiny", 4, 5);
  CHECK(kind_of([&] { shuffle_split(c, SplitPlan{}); }) == ErrorKind::CorpusTooSmall);
}

TEST_CASE("length histogram recommendation") {
  CHECK(length_histogram(std::vector<std::size_t>(12, 7)).recommended_max_len == 7);
  std::vector<std::size_t> one_to_ten(10);
  std::iota(one_to_ten.begin(), one_to_ten.end(), 1);
  const auto h = length_histogram(one_to_ten, 0.9, 4);
  CHECK(h.recommended_max_len == 9);
  std::size_t covered = 0;
  for (const auto& b : h.bins) covered += b.count;
  CHECK(covered == 10);
  CHECK(h.min_length == 1);
  CHECK(h.max_length == 10);

  // corpus overload counts normalized tokens
  std::vector<Document> docs;
  for (int i = 0; i < 3; ++i) docs.push_back({std::to_string(i), "uno dos tres cuatro cinco seis siete", Label::Fake, Language::Es, "s"});
  CHECK(length_histogram(Corpus("sevens", docs), NormalizerConfig{}).recommended_max_len == 7);
}

TEST_CASE("mix_for_curve partitions the translated corpus") {
  const Corpus base = make_corpus("english", 20, 20, Language::En);
  const Corpus translated = make_corpus("translated", 1280, 1291, Language::EsTranslated);

  const auto mix = mix_for_curve(base, translated, 2500, 3);
  CHECK(mix.train.size() == 40 + 2500);
  CHECK(mix.holdout.size() == 71);
  CHECK_FALSE(mix.holdout_empty);
  std::set<std::string> moved, held;
  for (const auto& d : mix.train.documents()) {
    if (d.source == "translated") moved.insert(d.text);
  }
  for (const auto& d : mix.holdout.documents()) held.insert(d.text);
  CHECK(moved.size() == 2500);
  for (const auto& t : held) CHECK_FALSE(moved.contains(t));

  const auto none = mix_for_curve(base, translated, 0, 3);
  CHECK(none.train.size() == base.size());
  CHECK(none.holdout.size() == translated.size());

  const auto all = mix_for_curve(base, translated, translated.size(), 3);
  CHECK(all.holdout_empty);
  CHECK(all.holdout.empty());

  CHECK(kind_of([&] { mix_for_curve(base, translated, translated.size() + 1, 3); }) == ErrorKind::NTooLarge);
}

TEST_CASE("stratified subsample") {
  const Corpus c = make_corpus("big", 600, 400);
  const Corpus s = stratified_subsample(c, 100, 5);
  CHECK(s.size() == 100);
  CHECK(s.class_counts() == ClassCounts{60, 40});
}
