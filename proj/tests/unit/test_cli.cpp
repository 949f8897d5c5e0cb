#include <doctest.h>

#include <sstream>

#include "fnd/cli.hpp"
#include "fnd/schemes.hpp"
#include "support/test_support.hpp"

using namespace fnd;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fnd");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string to_csv(const Corpus& c) {
  std::string out = "id,body,verdict\n";
  for (const auto& d : c.documents()) out += d.id + "," + d.text + "," + (d.label == Label::Fake ? "F" : "T") + "\n";
  return out;
}

struct Workspace {
  fnd::testing::TempDir dir;
  std::string manifest;
  std::string spec;

  Workspace() {
    dir.write("es.csv", to_csv(fnd::testing::synthetic_news(120, 1, 0.25, 30, "es", Language::Es, "s")));
    manifest = dir.write("datasets.yaml",
                         "datasets:\n  spanish:\n    path: es.csv\n    language: es\n    text: body\n"
                         "    label: verdict\n    labels: {f: FAKE, t: TRUE}\n")
                   .string();
    spec = dir.write("svm.yaml", R"(
name: svm
scheme: 1
data: {train: spanish}
model:
  family: svm
  params: {kernel: linear, C: 1, epochs: 5}
represent: {kind: tfidf, vocab_size: 200}
split: {iterations: 2}
seed: 3
)")
               .string();
  }

  std::string out(const std::string& sub) const { return (dir.path() / sub).string(); }
};

}  // namespace

TEST_CASE("exit codes separate usage errors from runtime failures") {
  Workspace w;
  CHECK(cli({}).code == kExitValidation);
  CHECK(cli({"bogus"}).code == kExitValidation);
  CHECK(cli({"eval", "--manifest", w.manifest}).code == kExitValidation);
  CHECK(cli({"--help"}).code == kExitOk);

  const auto bad_spec = w.dir.write("bad.yaml", "scheme: 2\ndata: {train: spanish}\nmodel: {family: svm}\n").string();
  const auto r = cli({"eval", "--spec", bad_spec, "--manifest", w.manifest});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("violation") != std::string::npos);

  const auto missing = w.dir.write("missing.yaml", "datasets:\n  spanish:\n    path: nope.csv\n    language: es\n");
  CHECK(cli({"eval", "--spec", w.spec, "--manifest", missing.string()}).code == kExitRuntime);

  const auto garbage = w.dir.write("garbage.json", "{not json").string();
  CHECK(cli({"report", garbage}).code == kExitRuntime);
  const auto other = w.dir.write("other.json", "{\"x\": 1}").string();
  CHECK(cli({"report", other}).code == kExitRuntime);

  CHECK(cli({"grid", "--spec", w.spec, "--manifest", w.manifest}).code == kExitValidation);
  CHECK(cli({"curve", "--spec", w.spec, "--manifest", w.manifest}).code == kExitValidation);
}

TEST_CASE("eval writes reports that report and inspect can render") {
  Workspace w;
  const auto r = cli({"eval", "--spec", w.spec, "--manifest", w.manifest, "--out", w.out("run")});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("test_acc=") != std::string::npos);

  const auto report = w.out("run/report.json");
  const auto table = cli({"report", report});
  REQUIRE(table.code == kExitOk);
  CHECK(table.out.find("test_acc") != std::string::npos);
  CHECK(table.out.find("svm") != std::string::npos);

  const auto confusion = cli({"report", report, "--format", "confusion"});
  REQUIRE(confusion.code == kExitOk);
  CHECK(confusion.out.find("FAKE") != std::string::npos);

  CHECK(cli({"report", report, "--format", "curve-data"}).code == kExitValidation);
  CHECK(cli({"report", report, "--format", "xml"}).code == kExitValidation);

  const auto inspect = cli({"inspect", report});
  REQUIRE(inspect.code == kExitOk);
  CHECK(inspect.out.find("test_acc=") != std::string::npos);

  // Same seed, different job count: identical summary line.
  const auto again = cli({"eval", "--spec", w.spec, "--manifest", w.manifest, "--jobs", "2", "--out", w.out("run2")});
  CHECK(again.out == r.out);
  const auto reseeded = cli({"eval", "--spec", w.spec, "--manifest", w.manifest, "--seed", "99", "--out", w.out("run3")});
  REQUIRE(reseeded.code == kExitOk);
}

TEST_CASE("train saves a model and pipeline that inspect recognizes") {
  Workspace w;
  const auto r = cli({"train", "--spec", w.spec, "--manifest", w.manifest, "--out", w.out("model")});
  REQUIRE(r.code == kExitOk);
  const auto inspect = cli({"inspect", w.out("model/model.json"), w.out("model/pipeline.json")});
  REQUIRE(inspect.code == kExitOk);
  CHECK(inspect.out.find("kind: model") != std::string::npos);
  CHECK(inspect.out.find("algorithm: svm") != std::string::npos);
  CHECK(inspect.out.find("kind: pipeline") != std::string::npos);
}

TEST_CASE("prepare summarizes corpora") {
  Workspace w;
  const auto r = cli({"prepare", "--manifest", w.manifest, "--format", "json"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 1);
  CHECK(j[0]["documents"] == 120);
  CHECK(j[0]["fake"] == 60);
  CHECK(j[0]["language"] == "es");
  CHECK(cli({"prepare", "--manifest", w.manifest}).out.find("spanish") != std::string::npos);
  CHECK(cli({"prepare", "--manifest", w.manifest, "unknown"}).code != kExitOk);
}

TEST_CASE("renderers") {
  EvalReport a, b;
  a.name = "a";
  a.test = {0.6, 0.01};
  b.name = "b";
  b.test = {0.8, 0.02};
  b.dev = MeanStd{0.7, 0.0};
  const auto t = render_table({a, b});
  CHECK(t.find("b ") < t.find("a "));
  CHECK(t.find("0.7000") != std::string::npos);

  CurveReport c;
  CurvePoint empty;
  empty.n = 2500;
  CurvePoint p0;
  p0.n = 0;
  p0.accuracies = {0.5, 0.7};
  p0.accuracy = {0.6, 0.1};
  c.points = {p0, empty};
  CHECK(render_curve_data(c) == "0 0.600000\n");

  a.confusion = Eigen::Matrix2d{{0.75, 0.25}, {0.1, 0.9}};
  const auto m = render_confusion(a);
  CHECK(m.find("0.7500") < m.find("0.2500"));
  CHECK(m.find("0.2500") < m.find("0.1000"));
}

TEST_CASE("shipped configs parse and validate") {
  const std::filesystem::path dir = FND_CONFIG_DIR;
  const auto manifest = DatasetManifest::load(dir / "datasets.yaml");
  std::size_t specs = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().filename() == "datasets.yaml") continue;
    CAPTURE(entry.path().string());
    const auto spec = load_spec(entry.path());
    CHECK(validate_spec(spec, &manifest).empty());
    ++specs;
  }
  CHECK(specs >= 6);
}
