#include <doctest.h>

#include <fstream>

#include "fnd/error.hpp"
#include "fnd/schemes.hpp"
#include "support/test_support.hpp"

using namespace fnd;
using nlohmann::json;

namespace {

std::string to_csv(const Corpus& c) {
  std::string out = "id,body,verdict\n";
  for (const auto& d : c.documents()) out += d.id + "," + d.text + "," + (d.label == Label::Fake ? "F" : "T") + "\n";
  return out;
}

/// Manifest with a Spanish pair (merged), an English corpus and a translated corpus.
struct Workspace {
  fnd::testing::TempDir dir;
  std::filesystem::path manifest;

  explicit Workspace(std::size_t translated_size = 120, std::uint64_t translated_seed = 5) {
    dir.write("es_a.csv", to_csv(fnd::testing::synthetic_news(90, 1, 0.2, 30, "es_a", Language::Es, "s")));
    dir.write("es_b.csv", to_csv(fnd::testing::synthetic_news(70, 2, 0.2, 30, "es_b", Language::Es, "s")));
    dir.write("en.csv", to_csv(fnd::testing::synthetic_news(160, 3, 0.2, 30, "en", Language::En, "e")));
    dir.write("tr.csv", to_csv(fnd::testing::synthetic_news(translated_size, translated_seed, 0.2, 30, "tr", Language::EsTranslated, "t")));
    const std::string schema = "    text: body\n    label: verdict\n    id: id\n    labels: {f: FAKE, t: TRUE}\n";
    manifest = dir.write("datasets.yaml", "datasets:\n"
                                          "  es_a:\n    path: es_a.csv\n    language: es\n" + schema +
                                              "  es_b:\n    path: es_b.csv\n    language: es\n" + schema +
                                              "  spanish:\n    merge: [es_a, es_b]\n"
                                              "  english:\n    path: en.csv\n    language: en\n" + schema +
                                              "  translated:\n    path: tr.csv\n    language: es-translated\n" + schema);
  }
};

bool has_violation(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

const char* kScheme1 = R"(
name: rf-baseline
scheme: 1
data:
  train: spanish
model:
  family: rf
  params: {n_trees: 10, max_features: 20}
represent:
  kind: tfidf
  vocab_size: 300
split:
  iterations: 2
seed: 7
)";

}  // namespace

TEST_CASE("spec parsing fills defaults and keeps declared order") {
  const auto s = parse_spec(R"(
scheme: 3
data: {train: english}
model:
  family: cnn
  params: {F: 8, KS: 3, embedding: {dim: 16}}
normalize: {stemming: false}
represent: {max_len: 40, vocab_size: 200}
split: {iterations: 3, train_fraction: 0.9, dev_fraction: 0.2}
seed: 11
output: out/cnn
)");
  CHECK(s.scheme == Scheme::NeuralEn);
  CHECK(s.validate == "english");
  CHECK(s.family == Algorithm::Cnn);
  CHECK(s.split.iterations == 3);
  CHECK(s.split.train_fraction == 0.9);
  CHECK(s.split.dev_fraction_of_train == 0.2);
  REQUIRE(s.preprocessing.size() == 3);
  CHECK(s.preprocessing[1].first == "represent.max_len");

  const auto cnn = std::get<CnnConfig>(s.model());
  CHECK(cnn.filters == 8);
  CHECK(cnn.kernel_size == 3);
  CHECK(cnn.embedding.dim == 16);
  CHECK(cnn.seed == derive_seed(11, 1));
  CHECK(s.plan().seed == derive_seed(11, 2));

  const auto p = s.pipeline(Language::En);
  CHECK(p.normalize.stop_words == StopWordList::En);
  CHECK(p.normalize.stemming == StemmerKind::Off);
  CHECK(p.representation == Representation::Sequence);
  CHECK(p.max_len == 40);
  CHECK(p.vocab_size == 200);

  const auto es = parse_spec("scheme: 2\ndata: {train: spanish}\nmodel: {family: lstm}\n").pipeline(Language::Es);
  CHECK(es.max_len == 500);
  CHECK(es.normalize.stop_words == StopWordList::Es);
  const auto en = parse_spec("scheme: 3\ndata: {train: english}\nmodel: {family: lstm}\n").pipeline(Language::En);
  CHECK(en.max_len == 1500);
  const auto classical = parse_spec(kScheme1).pipeline(Language::Es);
  CHECK(classical.normalize.stop_words == StopWordList::None);
  CHECK(classical.representation == Representation::Tfidf);
}

TEST_CASE("malformed specs are rejected") {
  for (const std::string bad : {"scheme: 1\ndata: {train: a}\nmodel: {family: rf}\nbogus: 1\n",
                                "scheme: 9\ndata: {train: a}\nmodel: {family: rf}\n",
                                "scheme: 1\ndata: {train: a}\nmodel: {family: xgboost}\n",
                                "scheme: 1\ndata: {train: a, other: b}\nmodel: {family: rf}\n",
                                "scheme: 1\nmodel: {family: rf}\n",
                                "scheme: 1\ndata: {train: a}\nmodel: {family: rf}\nseed: -4\n",
                                "scheme: 1\ndata: [train\n",
                                "scheme: 1\ndata: {train: a}\nmodel: {family: rf}\nsplit: {iterations: many}\n"}) {
    CAPTURE(bad);
    try {
      parse_spec(bad);
      FAIL("expected SpecValidation");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SpecValidation);
    }
  }
  CHECK_THROWS_AS(load_spec("/nonexistent/spec.yaml"), Error);
}

TEST_CASE("validation reports binding and compatibility violations") {
  Workspace ws;
  const auto manifest = DatasetManifest::load(ws.manifest);

  const auto ok = parse_spec("scheme: 3\ndata: {train: english}\nmodel: {family: cnn}\n");
  CHECK(validate_spec(ok, &manifest).empty());
  CHECK(validate_spec(parse_spec(kScheme1), &manifest).empty());

  const auto wrong_language = parse_spec("scheme: 2\ndata: {train: english}\nmodel: {family: lstm}\n");
  CHECK(has_violation(validate_spec(wrong_language, &manifest), "scheme/dataset mismatch"));
  CHECK(validate_spec(wrong_language).empty());

  const auto tfidf_cnn =
      parse_spec("scheme: 3\ndata: {train: english}\nmodel: {family: cnn}\nrepresent: {kind: tfidf}\n");
  CHECK(has_violation(validate_spec(tfidf_cnn, &manifest), "sequence model requires id sequences"));

  const auto seq_rf = parse_spec("scheme: 1\ndata: {train: spanish}\nmodel: {family: rf}\nrepresent: {kind: sequence}\n");
  CHECK(has_violation(validate_spec(seq_rf, &manifest), "classical model requires sparse features"));

  const auto cnn_scheme1 = parse_spec("scheme: 1\ndata: {train: spanish}\nmodel: {family: cnn}\n");
  CHECK(has_violation(validate_spec(cnn_scheme1, &manifest), "scheme 1 evaluates classical models"));
  const auto svm_scheme2 = parse_spec("scheme: 2\ndata: {train: spanish}\nmodel: {family: svm}\n");
  CHECK(has_violation(validate_spec(svm_scheme2, &manifest), "evaluates sequence models"));

  const auto s4_wrong = parse_spec("scheme: 4\ndata: {train: english, validate: spanish}\nmodel: {family: cnn}\n");
  CHECK(has_violation(validate_spec(s4_wrong, &manifest), "scheme/dataset mismatch"));
  const auto s4_missing = parse_spec("scheme: 4\ndata: {train: english}\nmodel: {family: cnn}\n");
  CHECK(has_violation(validate_spec(s4_missing, &manifest), "requires data.validate"));
  const auto s1_validate = parse_spec("scheme: 1\ndata: {train: spanish, validate: es_a}\nmodel: {family: rf}\n");
  CHECK(has_violation(validate_spec(s1_validate, &manifest), "scheme/dataset mismatch"));

  const auto unknown = parse_spec("scheme: 3\ndata: {train: german}\nmodel: {family: cnn}\n");
  CHECK(has_violation(validate_spec(unknown, &manifest), "unknown dataset 'german'"));

  const auto s4_grid = parse_spec(
      "scheme: 4\ndata: {train: english, validate: translated}\nmodel: {family: cnn}\ngrid: {model.params.KS: [3, 5]}\n");
  CHECK(has_violation(validate_spec(s4_grid, &manifest), "grid search applies to schemes 1, 2 and 3"));
  const auto bad_axis = parse_spec("scheme: 1\ndata: {train: spanish}\nmodel: {family: rf}\ngrid: {model.params.depth: [3]}\n");
  CHECK(has_violation(validate_spec(bad_axis, &manifest), "grid:"));
  const auto grid_seq = parse_spec(
      "scheme: 1\ndata: {train: spanish}\nmodel: {family: svm}\ngrid: {represent.kind: [bow, sequence]}\n");
  CHECK(has_violation(validate_spec(grid_seq, &manifest), "grid point"));

  const auto bad_params = parse_spec("scheme: 1\ndata: {train: spanish}\nmodel: {family: rf, params: {n_trees: 0}}\n");
  CHECK(has_violation(validate_spec(bad_params, &manifest), "model.params"));
  const auto fixed = parse_spec("scheme: 3\ndata: {train: english}\nmodel: {family: lstm, params: {embedding: {trainable: false}}}\n");
  CHECK(has_violation(validate_spec(fixed, &manifest), "embedding.source"));
  const auto split = parse_spec("scheme: 1\ndata: {train: spanish}\nmodel: {family: rf}\nsplit: {train_fraction: 1.5}\n");
  CHECK(has_violation(validate_spec(split, &manifest), "train_fraction"));
}

TEST_CASE("manifest resolves paths, merges and label maps") {
  Workspace ws;
  const auto manifest = DatasetManifest::load(ws.manifest);
  CHECK(manifest.names() == std::vector<std::string>{"english", "es_a", "es_b", "spanish", "translated"});
  CHECK(manifest.language("spanish") == Language::Es);
  CHECK(manifest.at("es_a").path == ws.dir.path() / "es_a.csv");
  std::vector<std::pair<std::string, LoadStats>> stats;
  const auto spanish = manifest.load_corpus("spanish", &stats);
  CHECK(spanish.size() == 160);
  CHECK(spanish.name() == "spanish");
  CHECK(stats.size() == 2);
  CHECK(spanish.class_counts().fake == 80);
  CHECK(spanish[0].id == "es_a-0");

  CHECK_THROWS_AS(DatasetManifest::parse("datasets:\n  x:\n    merge: [y]\n"), Error);
  CHECK_THROWS_AS(DatasetManifest::parse("datasets: {}\n"), Error);
  CHECK_THROWS_AS(DatasetManifest::parse("datasets:\n  x: {path: a.csv}\n"), Error);
  CHECK_THROWS_AS(DatasetManifest::parse("datasets:\n  x: {path: a.csv, language: fr}\n"), Error);
  CHECK_THROWS_AS(DatasetManifest::parse("datasets:\n  x: {path: a.csv, language: en, labels: {a: maybe}}\n"), Error);
  CHECK_THROWS_WITH_AS(
      DatasetManifest::parse(
          "datasets:\n  a: {path: a.csv, language: en}\n  b: {path: b.csv, language: es}\n  m: {merge: [a, b]}\n"),
      doctest::Contains("different languages"), Error);
  const auto missing = DatasetManifest::parse("datasets:\n  a: {path: /nonexistent.csv, language: en}\n");
  try {
    missing.load_corpus("a");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingFile);
  }
}

TEST_CASE("scheme 1 run persists reports and reproduces byte for byte") {
  Workspace ws;
  const auto manifest = DatasetManifest::load(ws.manifest);
  const auto spec = parse_spec(kScheme1);
  RunOptions opts;
  opts.output = ws.dir.path() / "run1";
  const auto a = run_experiment(spec, manifest, opts);
  REQUIRE(a.report.has_value());
  CHECK(a.report->spec_fingerprint == spec_fingerprint(spec));
  CHECK(a.report->iterations.size() == 2);
  CHECK(a.report->test.mean > 0.7);
  CHECK(std::filesystem::exists(opts.output / "report.json"));
  CHECK(std::filesystem::exists(opts.output / "results.csv"));
  CHECK(read_json(opts.output / "spec.json").at("fingerprint") == spec_fingerprint(spec));

  opts.output = ws.dir.path() / "run2";
  opts.jobs = 2;
  const auto b = run_experiment(spec, manifest, opts);
  CHECK(deterministic_payload(*a.report) == deterministic_payload(*b.report));
  CHECK(deterministic_payload(eval_report_from_json(read_json(ws.dir.path() / "run1" / "report.json"))) ==
        deterministic_payload(*b.report));

  auto reseeded = spec;
  reseeded.seed = 8;
  CHECK(spec_fingerprint(reseeded) != spec_fingerprint(spec));

  auto broken = parse_spec("scheme: 2\ndata: {train: english}\nmodel: {family: lstm}\n");
  CHECK_THROWS_WITH_AS(run_experiment(broken, manifest, opts), doctest::Contains("scheme/dataset mismatch"), Error);
}

TEST_CASE("scheme 1 grid writes a ranked grid report") {
  Workspace ws;
  const auto manifest = DatasetManifest::load(ws.manifest);
  auto spec = parse_spec(std::string(kScheme1) + "grid:\n  represent.kind: [bow, tfidf]\n  model.params.n_trees: [5, 10]\n");
  RunOptions opts;
  opts.output = ws.dir.path() / "grid";
  const auto r = run_experiment(spec, manifest, opts);
  REQUIRE(r.grid.has_value());
  CHECK(r.grid->reports.size() == 4);
  CHECK(r.grid->criterion == "test_acc");
  CHECK(r.grid->reports[1].overrides == json{{"represent.kind", "bow"}, {"model.params.n_trees", 10}});
  CHECK(r.grid->reports[3].spec_fingerprint == spec_fingerprint(spec));
  CHECK(std::filesystem::exists(opts.output / "grid.json"));
}

TEST_CASE("scheme 4 model is independent of the translated corpus") {
  const std::string text = R"(
scheme: 4
data: {train: english, validate: translated}
model:
  family: cnn
  params: {F: 4, KS: 3, dense_units: 4, epochs: 2, embedding: {dim: 8}}
represent: {max_len: 30, vocab_size: 200}
split: {iterations: 2}
seed: 3
)";
  const auto spec = parse_spec(text);
  Workspace w1, w2(121, 6);
  RunOptions opts;
  opts.persist = false;
  const auto a = run_experiment(spec, DatasetManifest::load(w1.manifest), opts);
  const auto b = run_experiment(spec, DatasetManifest::load(w2.manifest), opts);
  REQUIRE(a.report->external.has_value());
  CHECK(a.report->external_corpus == "translated");
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.report->iterations[i].model_fingerprint == b.report->iterations[i].model_fingerprint);
    CHECK(a.report->iterations[i].test_accuracy == b.report->iterations[i].test_accuracy);
  }
  CHECK(a.report->iterations[0].external_accuracy != b.report->iterations[0].external_accuracy);
  CHECK(!a.report->warnings.empty());
}

TEST_CASE("curve spec produces ordered points") {
  Workspace ws;
  const auto spec = parse_spec(R"(
scheme: curve
data: {train: english, validate: translated}
model: {family: constant}
represent: {kind: bow}
curve: {points: [40, 0, 80], repeats: 2}
seed: 1
output: unused
)");
  RunOptions opts;
  opts.output = ws.dir.path() / "curve";
  const auto r = run_experiment(spec, DatasetManifest::load(ws.manifest), opts);
  REQUIRE(r.curve.has_value());
  REQUIRE(r.curve->points.size() == 3);
  CHECK(r.curve->points[0].n == 0);
  CHECK(r.curve->points[0].holdout_size == 120);
  CHECK(r.curve->points[2].holdout_size == 40);
  CHECK(r.curve->spec_fingerprint == spec_fingerprint(spec));
  CHECK(std::filesystem::exists(opts.output / "curve.json"));
}

TEST_CASE("corpus statistics report size, balance and lengths") {
  const auto c = fnd::testing::make_corpus("tiny", 3, 2);
  const auto s = corpus_statistics(c, NormalizerConfig{});
  CHECK(s.at("documents") == 5);
  CHECK(s.at("fake") == 3);
  CHECK(s.at("true") == 2);
  CHECK(s.at("lengths").at("recommended_max_len") == 3);
  CHECK(s.at("lengths").at("bins").size() >= 1);
}
