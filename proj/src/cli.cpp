#include "fnd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "fnd/error.hpp"
#include "fnd/models/serialize.hpp"
#include "fnd/schemes.hpp"

namespace fnd {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string label_of(const EvalReport& r) {
  std::string label = r.name.empty() ? r.algorithm : r.name;
  if (!r.overrides.empty()) label += " " + r.overrides.dump();
  return label;
}

/// Reports of any kind found in one JSON file.
struct LoadedReports {
  std::vector<EvalReport> evals;
  std::vector<CurveReport> curves;
};

LoadedReports load_reports(const std::string& path) {
  const auto j = read_json(path);
  LoadedReports out;
  if (!j.is_object()) throw Error(ErrorKind::Parse, path + ": not a report");
  if (j.contains("points")) {
    out.curves.push_back(curve_report_from_json(j));
  } else if (j.contains("reports")) {
    auto grid = grid_report_from_json(j);
    out.evals = std::move(grid.reports);
  } else if (j.contains("iterations")) {
    out.evals.push_back(eval_report_from_json(j));
  } else {
    throw Error(ErrorKind::Parse, path + ": not an evaluation, grid or curve report");
  }
  return out;
}

std::string summarize(const EvalReport& r) {
  std::string line = label_of(r) + ": test_acc=" + fixed(r.test.mean) + " std=" + fixed(r.test.std);
  if (r.dev) line += " dev_acc=" + fixed(r.dev->mean) + " std=" + fixed(r.dev->std);
  if (r.external) line += " external_acc=" + fixed(r.external->mean) + " std=" + fixed(r.external->std);
  return line;
}

std::string render_curve_table(const CurveReport& c) {
  std::ostringstream s;
  s << std::left << std::setw(8) << "n" << std::setw(10) << "train" << std::setw(10) << "holdout" << std::setw(10)
    << "accuracy" << "std\n";
  for (const auto& p : c.points) {
    s << std::left << std::setw(8) << p.n << std::setw(10) << p.train_size << std::setw(10) << p.holdout_size;
    if (p.accuracies.empty()) {
      s << "-\n";
    } else {
      s << std::setw(10) << fixed(p.accuracy.mean) << fixed(p.accuracy.std) << '\n';
    }
  }
  return s.str();
}

struct Flags {
  std::string spec;
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string out;
  std::string format;
  bool verbose = false;
  std::vector<std::string> files;
  std::vector<std::string> names;
  double percentile = 0.9;
};

ExperimentSpec spec_with_overrides(const Flags& f) {
  auto spec = load_spec(f.spec);
  if (f.seed) spec.seed = *f.seed;
  return spec;
}

int cmd_prepare(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto manifest = DatasetManifest::load(f.manifest);
  auto names = f.names.empty() ? manifest.names() : f.names;
  json all = json::array();
  for (const auto& name : names) {
    std::vector<std::pair<std::string, LoadStats>> stats;
    const auto corpus = manifest.load_corpus(name, &stats);
    auto s = corpus_statistics(corpus, NormalizerConfig{}, f.percentile);
    s["language"] = std::string(to_string(manifest.language(name)));
    json sources = json::array();
    for (const auto& [source, st] : stats) {
      sources.push_back({{"name", source}, {"rows", st.rows}, {"skipped_empty", st.skipped_empty}});
      if (f.verbose && st.skipped_empty > 0) {
        err << source << ": skipped " << st.skipped_empty << " rows with empty text\n";
      }
    }
    s["sources"] = std::move(sources);
    all.push_back(std::move(s));
  }
  if (!f.out.empty()) write_json(all, f.out);
  if (f.format == "json") {
    out << all.dump(2) << '\n';
    return kExitOk;
  }
  out << std::left << std::setw(20) << "corpus" << std::setw(15) << "language" << std::setw(10) << "docs"
      << std::setw(8) << "fake" << std::setw(8) << "true" << std::setw(10) << "mean_len"
      << "max_len@" << fixed(f.percentile, 2) << '\n';
  for (const auto& s : all) {
    out << std::left << std::setw(20) << s.at("name").get<std::string>() << std::setw(15)
        << s.at("language").get<std::string>() << std::setw(10) << s.at("documents").get<std::size_t>()
        << std::setw(8) << s.at("fake").get<std::size_t>() << std::setw(8) << s.at("true").get<std::size_t>();
    if (s.contains("lengths")) {
      out << std::setw(10) << fixed(s.at("lengths").at("mean").get<double>(), 1)
          << s.at("lengths").at("recommended_max_len").get<std::size_t>();
    }
    out << '\n';
  }
  return kExitOk;
}

int cmd_train(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto spec = spec_with_overrides(f);
  const auto manifest = DatasetManifest::load(f.manifest);
  if (const auto v = validate_spec(spec, &manifest); !v.empty()) {
    for (const auto& s : v) err << "violation: " << s << '\n';
    return kExitValidation;
  }
  auto corpus = manifest.load_corpus(spec.train);
  if (spec.subsample) corpus = stratified_subsample(corpus, *spec.subsample, derive_seed(spec.seed, 4));
  const auto pipeline = spec.pipeline(manifest.language(spec.train));
  const auto data = prepare(corpus, pipeline.normalize);
  SplitIndices all;
  all.train.resize(corpus.size());
  std::iota(all.train.begin(), all.train.end(), 0);
  const auto outcome = fit_and_score(spec.model(), pipeline, data, all);

  const std::filesystem::path dir = f.out.empty() ? spec.output : std::filesystem::path(f.out);
  if (dir.empty()) throw Error(ErrorKind::SpecValidation, "no output directory (set 'output' or pass --out)");
  std::filesystem::create_directories(dir);
  save_model(outcome.model, dir / "model.json");
  write_json(to_json(outcome.pipeline), dir / "pipeline.json");
  out << "trained " << to_string(outcome.model.algorithm) << " on " << corpus.size() << " documents of "
      << corpus.name() << "\n"
      << "model " << (dir / "model.json").string() << " fingerprint " << model_fingerprint(outcome.model) << '\n'
      << "pipeline " << (dir / "pipeline.json").string() << '\n';
  return kExitOk;
}

enum class RunKind { Any, Grid, Curve };

int cmd_run(const Flags& f, RunKind kind, std::ostream& out, std::ostream& err) {
  const auto spec = spec_with_overrides(f);
  if (kind == RunKind::Grid && spec.grid.axes.empty()) {
    err << "violation: the spec declares no grid\n";
    return kExitValidation;
  }
  if (kind == RunKind::Curve && spec.scheme != Scheme::Curve) {
    err << "violation: the spec is not a curve scheme\n";
    return kExitValidation;
  }
  const auto manifest = DatasetManifest::load(f.manifest);
  if (const auto v = validate_spec(spec, &manifest); !v.empty()) {
    for (const auto& s : v) err << "violation: " << s << '\n';
    return kExitValidation;
  }
  RunOptions options;
  options.jobs = f.jobs;
  options.output = f.out;
  if (f.verbose) err << "running scheme " << to_string(spec.scheme) << " (" << spec_fingerprint(spec) << ")\n";
  const auto result = run_experiment(spec, manifest, options);
  if (result.report) {
    out << summarize(*result.report) << '\n';
    for (const auto& w : result.report->warnings) err << "warning: " << w << '\n';
  }
  if (result.grid) {
    out << "criterion " << result.grid->criterion << ", best: " << summarize(result.grid->reports[result.grid->best])
        << '\n';
    out << render_table(result.grid->reports);
  }
  if (result.curve) {
    out << render_curve_table(*result.curve);
    for (const auto& w : result.curve->warnings) err << "warning: " << w << '\n';
  }
  if (f.verbose) {
    for (const auto& file : result.files) err << "wrote " << file.string() << '\n';
  }
  return kExitOk;
}

int cmd_report(const Flags& f, std::ostream& out) {
  const std::string format = f.format.empty() ? "table" : f.format;
  LoadedReports all;
  for (const auto& file : f.files) {
    auto loaded = load_reports(file);
    for (auto& r : loaded.evals) all.evals.push_back(std::move(r));
    for (auto& c : loaded.curves) all.curves.push_back(std::move(c));
  }
  if (format == "table") {
    if (all.evals.empty()) throw Error(ErrorKind::InvalidArgument, "table format needs evaluation or grid reports");
    out << render_table(all.evals);
  } else if (format == "curve-data") {
    if (all.curves.empty()) throw Error(ErrorKind::InvalidArgument, "curve-data format needs curve reports");
    for (const auto& c : all.curves) out << render_curve_data(c);
  } else if (format == "confusion") {
    if (all.evals.empty()) throw Error(ErrorKind::InvalidArgument, "confusion format needs evaluation reports");
    for (std::size_t i = 0; i < all.evals.size(); ++i) out << (i ? "\n" : "") << render_confusion(all.evals[i]);
  } else if (format == "json") {
    json j = json::array();
    for (const auto& r : all.evals) j.push_back(to_json(r));
    for (const auto& c : all.curves) j.push_back(to_json(c));
    out << j.dump(2) << '\n';
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown format '" + format + "'");
  }
  return kExitOk;
}

int cmd_inspect(const Flags& f, std::ostream& out) {
  for (const auto& file : f.files) {
    const auto j = read_json(file);
    out << file << '\n';
    if (j.is_object() && j.value("format", "") == "fnd-model") {
      const auto m = model_from_json(j);
      out << "  kind: model\n  algorithm: " << to_string(m.algorithm) << "\n  config: " << config_to_json(m.config).dump()
          << "\n  config_fingerprint: " << m.config_fingerprint << "\n  model_fingerprint: " << model_fingerprint(m)
          << "\n  representation: " << m.representation << '\n';
      if (!m.history.loss.empty()) {
        out << "  epochs: " << m.history.loss.size() << "\n  final_loss: " << m.history.loss.back() << '\n';
      }
    } else if (j.is_object() && j.contains("vocabulary") && j.contains("config")) {
      const auto p = fitted_pipeline_from_json(j);
      out << "  kind: pipeline\n  config: " << p.config().canonical() << "\n  vocabulary: " << p.vocabulary().size()
          << " ids (cap " << p.vocabulary().max_size() << "), fitted on " << p.vocabulary().training_documents()
          << " documents\n  vocabulary_fingerprint: " << p.vocabulary().fingerprint() << '\n';
    } else {
      const auto loaded = load_reports(file);
      for (const auto& r : loaded.evals) out << "  " << summarize(r) << '\n';
      for (const auto& c : loaded.curves) {
        out << "  curve " << c.algorithm << " " << c.base_corpus << " + " << c.translated_corpus << '\n';
        std::istringstream table(render_curve_table(c));
        for (std::string line; std::getline(table, line);) out << "  " << line << '\n';
      }
    }
  }
  return kExitOk;
}

}  // namespace

std::string render_table(const std::vector<EvalReport>& reports) {
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return reports[a].test.mean > reports[b].test.mean; });
  std::size_t width = 6;
  for (const auto& r : reports) width = std::max(width, label_of(r).size() + 2);
  std::ostringstream s;
  s << std::left << std::setw(static_cast<int>(width)) << "config" << std::setw(10) << "dev_acc" << std::setw(10)
    << "std" << std::setw(10) << "test_acc" << std::setw(10) << "std" << "external_acc\n";
  for (auto i : order) {
    const auto& r = reports[i];
    s << std::left << std::setw(static_cast<int>(width)) << label_of(r) << std::setw(10)
      << (r.dev ? fixed(r.dev->mean) : "-") << std::setw(10) << (r.dev ? fixed(r.dev->std) : "-") << std::setw(10)
      << fixed(r.test.mean) << std::setw(10) << fixed(r.test.std) << (r.external ? fixed(r.external->mean) : "-")
      << '\n';
  }
  return s.str();
}

std::string render_curve_data(const CurveReport& curve) {
  std::ostringstream s;
  for (const auto& p : curve.points) {
    if (!p.accuracies.empty()) s << p.n << ' ' << fixed(p.accuracy.mean, 6) << '\n';
  }
  return s.str();
}

std::string render_confusion(const EvalReport& report) {
  const auto& m = report.confusion;
  std::ostringstream s;
  s << label_of(report) << '\n'
    << std::left << std::setw(12) << "true\\pred" << std::setw(8) << "FAKE" << "TRUE\n"
    << std::setw(12) << "FAKE" << std::setw(8) << fixed(m(0, 0)) << fixed(m(0, 1)) << '\n'
    << std::setw(12) << "TRUE" << std::setw(8) << fixed(m(1, 0)) << fixed(m(1, 1)) << '\n';
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fake news detection experiments"};
  app.name(args.empty() ? "fnd" : args.front());
  app.require_subcommand(1, 1);
  Flags f;

  auto add_spec = [&](CLI::App* sub) {
    sub->add_option("--spec", f.spec, "Experiment spec (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--manifest", f.manifest, "Datasets manifest (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "Override the master seed");
    sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", f.out, "Output directory (default: spec output)");
    sub->add_flag("-v,--verbose", f.verbose, "Progress on stderr");
  };

  auto* prepare_cmd = app.add_subcommand("prepare", "Corpus statistics from a datasets manifest");
  prepare_cmd->add_option("--manifest", f.manifest, "Datasets manifest (YAML)")->required()->check(CLI::ExistingFile);
  prepare_cmd->add_option("names", f.names, "Datasets to describe (default: all)");
  prepare_cmd->add_option("--out", f.out, "Write statistics JSON here");
  prepare_cmd->add_option("--format", f.format, "table or json")->check(CLI::IsMember({"table", "json"}));
  prepare_cmd->add_option("--percentile", f.percentile, "Length percentile for max_len")->check(CLI::Range(0.0, 1.0));
  prepare_cmd->add_flag("-v,--verbose", f.verbose, "Progress on stderr");

  auto* train_cmd = app.add_subcommand("train", "Fit the spec's model on its whole training corpus");
  add_spec(train_cmd);
  auto* eval_cmd = app.add_subcommand("eval", "Run an experiment spec");
  add_spec(eval_cmd);
  auto* grid_cmd = app.add_subcommand("grid", "Run a grid-search spec");
  add_spec(grid_cmd);
  auto* curve_cmd = app.add_subcommand("curve", "Run a learning-curve spec");
  add_spec(curve_cmd);

  auto* report_cmd = app.add_subcommand("report", "Render saved reports");
  report_cmd->add_option("reports", f.files, "Report files")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", f.format, "table, curve-data, confusion or json")
      ->check(CLI::IsMember({"table", "curve-data", "confusion", "json"}));

  auto* inspect_cmd = app.add_subcommand("inspect", "Describe model, pipeline or report files");
  inspect_cmd->add_option("files", f.files, "Files")->required()->check(CLI::ExistingFile);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (prepare_cmd->parsed()) return cmd_prepare(f, out, err);
    if (train_cmd->parsed()) return cmd_train(f, out, err);
    if (eval_cmd->parsed()) return cmd_run(f, RunKind::Any, out, err);
    if (grid_cmd->parsed()) return cmd_run(f, RunKind::Grid, out, err);
    if (curve_cmd->parsed()) return cmd_run(f, RunKind::Curve, out, err);
    if (report_cmd->parsed()) return cmd_report(f, out);
    if (inspect_cmd->parsed()) return cmd_inspect(f, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const bool validation = e.kind() == ErrorKind::SpecValidation || e.kind() == ErrorKind::InvalidArgument;
    return validation ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace fnd
