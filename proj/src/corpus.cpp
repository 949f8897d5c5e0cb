#include "fnd/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "fnd/csv.hpp"
#include "fnd/error.hpp"
#include "fnd/rng.hpp"

namespace fnd {

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::string ascii_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// ceil with a small guard so that e.g. (1 - 0.8) * 10 yields 2, not 3.
std::size_t guarded_ceil(double x) {
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

}  // namespace

std::string_view to_string(Label label) noexcept { return label == Label::Fake ? "FAKE" : "TRUE"; }

std::string_view to_string(Language language) noexcept {
  switch (language) {
    case Language::En: return "en";
    case Language::Es: return "es";
    case Language::EsTranslated: return "es-translated";
  }
  return "en";
}

Language parse_language(std::string_view text) {
  if (text == "en") return Language::En;
  if (text == "es") return Language::Es;
  if (text == "es-translated") return Language::EsTranslated;
  throw Error(ErrorKind::InvalidArgument, "unknown language tag '" + std::string(text) + "'");
}

Corpus::Corpus(std::string name, std::vector<Document> documents)
    : name_(std::move(name)), documents_(std::move(documents)) {
  std::unordered_set<std::string> seen;
  seen.reserve(documents_.size());
  for (const auto& d : documents_) {
    if (!seen.insert(d.id).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate document id '" + d.id + "' in corpus " + name_);
    }
    if (trim(d.text).empty()) {
      throw Error(ErrorKind::InvalidArgument, "document '" + d.id + "' has empty text");
    }
  }
}

ClassCounts Corpus::class_counts() const noexcept {
  ClassCounts c;
  for (const auto& d : documents_) (d.label == Label::Fake ? c.fake : c.real)++;
  return c;
}

std::vector<Label> Corpus::labels() const {
  std::vector<Label> out;
  out.reserve(documents_.size());
  for (const auto& d : documents_) out.push_back(d.label);
  return out;
}

Corpus Corpus::subset(const std::vector<std::size_t>& indices, std::string name) const {
  std::vector<Document> docs;
  docs.reserve(indices.size());
  for (auto i : indices) docs.push_back(documents_.at(i));
  return Corpus(name.empty() ? name_ : std::move(name), std::move(docs));
}

std::map<std::string, Label> CsvSchema::default_label_map() {
  return {{"fake", Label::Fake}, {"false", Label::Fake}, {"0", Label::Fake},
          {"true", Label::True}, {"real", Label::True},  {"1", Label::True}};
}

Corpus load_csv(const std::filesystem::path& path, const CsvSchema& schema, Language language,
                const std::string& source, LoadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());

  CsvReader reader(in, schema.delimiter);
  auto header = reader.next();
  if (!header) throw Error(ErrorKind::EmptyCorpus, path.string() + " has no header row");

  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header->size(); ++i) {
      if (trim((*header)[i]) == name) return i;
    }
    throw Error(ErrorKind::MissingColumn, "column '" + name + "' not found in " + path.string());
  };
  std::vector<std::size_t> text_cols;
  for (const auto& c : schema.text_columns) text_cols.push_back(column(c));
  const std::size_t label_col = column(schema.label_column);
  const std::optional<std::size_t> id_col =
      schema.id_column.empty() ? std::nullopt : std::optional(column(schema.id_column));

  LoadStats local;
  std::vector<Document> docs;
  std::size_t row = 0;
  while (auto record = reader.next()) {
    ++row;
    if (record->size() == 1 && (*record)[0].empty()) continue;  // blank line
    ++local.rows;
    auto field = [&](std::size_t col) -> const std::string& {
      if (col >= record->size()) {
        throw Error(ErrorKind::MissingColumn, path.string() + ": row " + std::to_string(row) +
                                                  " (line " + std::to_string(reader.record_line()) +
                                                  ") has too few fields");
      }
      return (*record)[col];
    };
    const std::string raw_label = ascii_lower(trim(field(label_col)));
    const auto it = schema.label_map.find(raw_label);
    if (it == schema.label_map.end()) {
      throw Error(ErrorKind::UnmappableLabel, path.string() + ": row " + std::to_string(row) +
                                                  " has label '" + raw_label + "'");
    }
    std::string text;
    for (auto c : text_cols) {
      std::string part = trim(field(c));
      if (part.empty()) continue;
      if (!text.empty()) text.push_back(' ');
      text += part;
    }
    if (text.empty()) {
      ++local.skipped_empty;
      continue;
    }
    Document d;
    d.id = id_col ? trim(field(*id_col)) : std::to_string(row);
    d.text = std::move(text);
    d.label = it->second;
    d.language = language;
    d.source = source;
    docs.push_back(std::move(d));
  }
  if (stats) *stats = local;
  if (docs.empty()) throw Error(ErrorKind::EmptyCorpus, path.string() + " has no valid rows");
  return Corpus(source, std::move(docs));
}

Corpus merge(const std::vector<Corpus>& corpora, std::string name) {
  std::unordered_map<std::string, std::size_t> owners;  // raw id -> number of inputs carrying it
  for (const auto& c : corpora) {
    std::unordered_set<std::string> local;
    for (const auto& d : c.documents()) {
      if (local.insert(d.id).second) ++owners[d.id];
    }
  }
  std::vector<Document> docs;
  std::unordered_set<std::string> used;
  for (const auto& c : corpora) {
    for (const auto& d : c.documents()) {
      Document copy = d;
      if (owners[d.id] > 1) copy.id = d.source + ":" + d.id;
      std::string candidate = copy.id;
      for (std::size_t k = 2; used.contains(candidate); ++k) candidate = copy.id + "#" + std::to_string(k);
      copy.id = std::move(candidate);
      used.insert(copy.id);
      docs.push_back(std::move(copy));
    }
  }
  return Corpus(std::move(name), std::move(docs));
}

SplitSizes split_sizes(std::size_t n, const SplitPlan& plan) {
  if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "train_fraction must lie in (0, 1)");
  }
  if (!(plan.dev_fraction_of_train >= 0.0 && plan.dev_fraction_of_train < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "dev_fraction_of_train must lie in [0, 1)");
  }
  SplitSizes s;
  s.test = std::min(n, guarded_ceil((1.0 - plan.train_fraction) * static_cast<double>(n)));
  const std::size_t train_all = n - s.test;
  s.dev = std::min(train_all, guarded_ceil(plan.dev_fraction_of_train * static_cast<double>(train_all)));
  s.train = train_all - s.dev;
  return s;
}

namespace {

void split_by_sizes(const std::vector<std::size_t>& order, const SplitSizes& sizes, SplitIndices& out) {
  // order = shuffled indices; test first, dev next, train last
  auto it = order.begin();
  out.test.insert(out.test.end(), it, it + static_cast<std::ptrdiff_t>(sizes.test));
  it += static_cast<std::ptrdiff_t>(sizes.test);
  out.dev.insert(out.dev.end(), it, it + static_cast<std::ptrdiff_t>(sizes.dev));
  it += static_cast<std::ptrdiff_t>(sizes.dev);
  out.train.insert(out.train.end(), it, order.end());
}

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

}  // namespace

std::vector<SplitIndices> shuffle_split(const Corpus& corpus, const SplitPlan& plan) {
  if (plan.iterations < 1) throw Error(ErrorKind::InvalidArgument, "iterations must be positive");
  const std::size_t n = corpus.size();
  if (n < 10) {
    throw Error(ErrorKind::CorpusTooSmall, "corpus " + corpus.name() + " has " + std::to_string(n) +
                                               " documents; at least 10 are required");
  }
  const SplitSizes sizes = split_sizes(n, plan);
  if (sizes.train == 0 || sizes.test == 0) {
    throw Error(ErrorKind::CorpusTooSmall, "split leaves an empty train or test partition");
  }

  std::vector<SplitIndices> out(plan.iterations);
  for (std::size_t it = 0; it < plan.iterations; ++it) {
    Rng rng(derive_seed(plan.seed, it));
    auto& split = out[it];
    if (!plan.stratified) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order.begin(), order.end());
      split_by_sizes(order, sizes, split);
    } else {
      // Allocate each partition per class in proportion to the class share.
      std::vector<std::size_t> fake, real;
      for (std::size_t i = 0; i < n; ++i) (corpus[i].label == Label::Fake ? fake : real).push_back(i);
      rng.shuffle(fake.begin(), fake.end());
      rng.shuffle(real.begin(), real.end());
      const double share = static_cast<double>(fake.size()) / static_cast<double>(n);
      SplitSizes fs;
      fs.test = std::min(fake.size(), round_half_up(share * static_cast<double>(sizes.test)));
      fs.dev = std::min(fake.size() - fs.test, round_half_up(share * static_cast<double>(sizes.dev)));
      fs.train = fake.size() - fs.test - fs.dev;
      SplitSizes rs{real.size() - (sizes.test - fs.test) - (sizes.dev - fs.dev), sizes.dev - fs.dev,
                    sizes.test - fs.test};
      split_by_sizes(fake, fs, split);
      split_by_sizes(real, rs, split);
    }
  }
  return out;
}

std::size_t percentile_length(std::vector<std::size_t> lengths, double percentile) {
  if (lengths.empty()) throw Error(ErrorKind::EmptyCorpus, "no documents to measure");
  if (!(percentile > 0.0 && percentile <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "percentile must lie in (0, 1]");
  }
  std::sort(lengths.begin(), lengths.end());
  const std::size_t needed =
      std::max<std::size_t>(1, guarded_ceil(percentile * static_cast<double>(lengths.size())));
  return lengths[needed - 1];
}

LengthHistogram length_histogram(const std::vector<std::size_t>& lengths, double percentile,
                                 std::size_t bin_width) {
  if (lengths.empty()) throw Error(ErrorKind::EmptyCorpus, "no documents to measure");
  if (bin_width == 0) throw Error(ErrorKind::InvalidArgument, "bin width must be positive");
  LengthHistogram h;
  h.percentile = percentile;
  h.min_length = *std::min_element(lengths.begin(), lengths.end());
  h.max_length = *std::max_element(lengths.begin(), lengths.end());
  h.mean_length = static_cast<double>(std::accumulate(lengths.begin(), lengths.end(), std::size_t{0})) /
                  static_cast<double>(lengths.size());
  const std::size_t nbins = h.max_length / bin_width + 1;
  h.bins.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    h.bins[b].lower = b * bin_width;
    h.bins[b].upper = (b + 1) * bin_width;
  }
  for (auto len : lengths) ++h.bins[len / bin_width].count;
  h.recommended_max_len = percentile_length(lengths, percentile);
  return h;
}

LengthHistogram length_histogram(const Corpus& corpus, const NormalizerConfig& tokenizer,
                                 double percentile, std::size_t bin_width) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "corpus " + corpus.name() + " is empty");
  const Normalizer normalizer(tokenizer);
  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.size());
  for (const auto& d : corpus.documents()) lengths.push_back(normalizer(d.text).size());
  return length_histogram(lengths, percentile, bin_width);
}

CurveMix mix_for_curve(const Corpus& base_train, const Corpus& translated, std::size_t n,
                       std::uint64_t seed) {
  if (n > translated.size()) {
    throw Error(ErrorKind::NTooLarge, "requested " + std::to_string(n) + " translated documents but only " +
                                          std::to_string(translated.size()) + " exist");
  }
  std::vector<std::size_t> order(translated.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  std::vector<std::size_t> moved(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(n), order.end());
  std::sort(moved.begin(), moved.end());
  std::sort(kept.begin(), kept.end());

  std::vector<Corpus> parts{base_train, translated.subset(moved)};
  CurveMix mix;
  mix.train = n == 0 ? base_train : merge(parts, base_train.name() + "+translated");
  if (!kept.empty()) mix.holdout = translated.subset(kept, translated.name() + "-holdout");
  mix.holdout_empty = kept.empty();
  return mix;
}

Corpus stratified_subsample(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n >= corpus.size()) return corpus;
  std::vector<std::size_t> fake, real;
  for (std::size_t i = 0; i < corpus.size(); ++i) (corpus[i].label == Label::Fake ? fake : real).push_back(i);
  Rng rng(seed);
  rng.shuffle(fake.begin(), fake.end());
  rng.shuffle(real.begin(), real.end());
  const std::size_t take_fake = std::min(
      fake.size(), round_half_up(static_cast<double>(n) * static_cast<double>(fake.size()) /
                                 static_cast<double>(corpus.size())));
  const std::size_t take_real = std::min(real.size(), n - take_fake);
  std::vector<std::size_t> chosen(fake.begin(), fake.begin() + static_cast<std::ptrdiff_t>(take_fake));
  chosen.insert(chosen.end(), real.begin(), real.begin() + static_cast<std::ptrdiff_t>(take_real));
  std::sort(chosen.begin(), chosen.end());
  return corpus.subset(chosen, corpus.name() + "-sub" + std::to_string(n));
}

}  // namespace fnd
