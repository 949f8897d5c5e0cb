#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fnd/textnorm.hpp"

namespace fnd {

/// Binary class. FAKE is the positive class throughout (score = P(FAKE)).
enum class Label : std::uint8_t { True = 0, Fake = 1 };

std::string_view to_string(Label label) noexcept;

enum class Language : std::uint8_t { En, Es, EsTranslated };

std::string_view to_string(Language language) noexcept;
Language parse_language(std::string_view text);

struct Document {
  std::string id;
  std::string text;
  Label label = Label::Fake;
  Language language = Language::En;
  std::string source;
};

struct ClassCounts {
  std::size_t fake = 0;
  std::size_t real = 0;

  std::size_t total() const noexcept { return fake + real; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Ordered collection of labeled documents with unique ids.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::string name, std::vector<Document> documents);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Document>& documents() const noexcept { return documents_; }
  const Document& operator[](std::size_t i) const { return documents_[i]; }
  std::size_t size() const noexcept { return documents_.size(); }
  bool empty() const noexcept { return documents_.empty(); }

  ClassCounts class_counts() const noexcept;
  std::vector<Label> labels() const;

  /// Sub-corpus with the given documents, in the given order.
  Corpus subset(const std::vector<std::size_t>& indices, std::string name = {}) const;

 private:
  std::string name_;
  std::vector<Document> documents_;
};

/// Column mapping for one CSV source.
struct CsvSchema {
  /// Columns concatenated (space-separated) to form the document text.
  std::vector<std::string> text_columns{"text"};
  std::string label_column = "label";
  /// Empty: ids are the 1-based data row numbers.
  std::string id_column;
  char delimiter = ',';
  /// Raw label (trimmed, lowercased) -> class.
  std::map<std::string, Label> label_map = default_label_map();

  static std::map<std::string, Label> default_label_map();
};

struct LoadStats {
  std::size_t rows = 0;
  std::size_t skipped_empty = 0;
};

Corpus load_csv(const std::filesystem::path& path, const CsvSchema& schema, Language language,
                const std::string& source, LoadStats* stats = nullptr);

/// Concatenates corpora. Raw ids shared by more than one input are prefixed
/// with "<source>:" in every input that carries them.
Corpus merge(const std::vector<Corpus>& corpora, std::string name);

struct SplitPlan {
  std::size_t iterations = 5;
  double train_fraction = 0.8;
  double dev_fraction_of_train = 0.0;
  std::uint64_t seed = 0;
  bool stratified = false;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
};

/// Partition sizes: test = ceil((1 - train_fraction) * N), dev = ceil(dev_fraction * (N - test)),
/// train takes the rest.
SplitSizes split_sizes(std::size_t n, const SplitPlan& plan);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

/// Independent random partitions (ShuffleSplit semantics), one per iteration.
std::vector<SplitIndices> shuffle_split(const Corpus& corpus, const SplitPlan& plan);

struct LengthHistogram {
  struct Bin {
    std::size_t lower = 0;  // inclusive
    std::size_t upper = 0;  // exclusive
    std::size_t count = 0;
  };
  std::vector<Bin> bins;
  std::size_t min_length = 0;
  std::size_t max_length = 0;
  double mean_length = 0.0;
  double percentile = 0.9;
  std::size_t recommended_max_len = 0;
};

/// Smallest L such that at least `percentile` of the lengths are <= L.
std::size_t percentile_length(std::vector<std::size_t> lengths, double percentile);

LengthHistogram length_histogram(const std::vector<std::size_t>& lengths, double percentile = 0.9,
                                 std::size_t bin_width = 50);

/// Token-count histogram of the normalized corpus with a recommended
/// sequence length at the given percentile.
LengthHistogram length_histogram(const Corpus& corpus, const NormalizerConfig& tokenizer,
                                 double percentile = 0.9, std::size_t bin_width = 50);

struct CurveMix {
  Corpus train;
  Corpus holdout;
  bool holdout_empty = false;
};

/// Moves n randomly chosen translated documents into the training corpus; the
/// rest of the translated corpus becomes the holdout.
CurveMix mix_for_curve(const Corpus& base_train, const Corpus& translated, std::size_t n,
                       std::uint64_t seed);

/// Class-proportional random subsample of n documents, preserving corpus order.
Corpus stratified_subsample(const Corpus& corpus, std::size_t n, std::uint64_t seed);

}  // namespace fnd
