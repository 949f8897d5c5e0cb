#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fnd {

using TokenizedDoc = std::vector<std::string>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int32_t>;
using SparseVector = Eigen::SparseVector<double, 0, std::int32_t>;
using IdMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Capped token index. Ids are dense: 0 is the padding token, 1 the unknown
/// token, then retained tokens by decreasing corpus frequency (ties broken
/// lexicographically).
class Vocabulary {
 public:
  static constexpr std::int32_t kPadId = 0;
  static constexpr std::int32_t kUnkId = 1;

  Vocabulary() = default;

  /// Rebuilds a fitted vocabulary from its serialized parts.
  Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> document_frequencies,
             std::size_t max_size, std::size_t training_documents, std::string provenance);

  std::int32_t id(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.contains(token); }
  const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  /// Number of ids, reserved ones included.
  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t max_size() const noexcept { return max_size_; }
  std::size_t document_frequency(std::int32_t id) const { return df_.at(static_cast<std::size_t>(id)); }
  std::size_t training_documents() const noexcept { return training_documents_; }

  /// Identifies the documents the vocabulary was fitted on.
  const std::string& provenance() const noexcept { return provenance_; }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<std::size_t>& document_frequencies() const noexcept { return df_; }

  /// Stable hash of the token list and cap.
  std::string fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::size_t max_size_ = 0;
  std::size_t training_documents_ = 0;
  std::string provenance_;
};

/// Keeps the max_size most frequent tokens (total occurrences). Throws
/// EmptyInput when docs is empty.
Vocabulary build_vocab(std::span<const TokenizedDoc> docs, std::size_t max_size, std::string provenance = {},
                       const std::string& pad_token = "<pad>", const std::string& unk_token = "<unk>");

/// Provenance tag for a training index set: hash of the sorted document ids.
std::string provenance_of(std::span<const std::string> document_ids);

enum class OovMode { UnkColumn, Drop };
enum class FeatureKind { Counts, Tfidf };

std::string_view to_string(FeatureKind kind) noexcept;

/// Row-major document-term matrix. `representation` binds the matrix to the
/// fitted pipeline state that produced it; models refuse matrices whose
/// representation differs from the one they were trained on.
struct FeatureMatrix {
  SparseRowMatrix values;
  FeatureKind kind = FeatureKind::Counts;
  std::string representation;

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }
};

SparseVector bow(std::span<const std::string> tokens, const Vocabulary& vocab, OovMode oov = OovMode::UnkColumn);

FeatureMatrix bow_matrix(std::span<const TokenizedDoc> docs, const Vocabulary& vocab,
                         OovMode oov = OovMode::UnkColumn);

/// Smoothed inverse document frequencies fitted on a training count matrix:
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
struct TfidfWeights {
  Eigen::VectorXd idf;
  std::size_t documents = 0;

  std::string fingerprint() const;
};

TfidfWeights tfidf_fit(const FeatureMatrix& train_counts);

/// tf * idf per entry, then each row scaled to unit L2 norm (empty rows stay empty).
FeatureMatrix tfidf_transform(const FeatureMatrix& counts, const TfidfWeights& weights);

/// Fixed-length id sequences, one row per document.
struct SequenceBatch {
  IdMatrix ids;
  std::string representation;
  /// Number of valid ids (vocabulary size including the reserved tokens).
  std::size_t vocabulary_size = 0;

  Eigen::Index rows() const noexcept { return ids.rows(); }
  Eigen::Index max_len() const noexcept { return ids.cols(); }
};

std::vector<std::int32_t> encode_sequence(std::span<const std::string> tokens, const Vocabulary& vocab,
                                          std::size_t max_len);

SequenceBatch encode_sequences(std::span<const TokenizedDoc> docs, const Vocabulary& vocab, std::size_t max_len);

/// Coordinate-list dump: one "row col value" line per stored entry.
void write_coo(std::ostream& out, const FeatureMatrix& matrix);

/// Fraction of the non-reserved tokens of `a` that also occur in `b`.
double vocabulary_overlap(const Vocabulary& a, const Vocabulary& b);

}  // namespace fnd
