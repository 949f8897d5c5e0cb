#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fnd/vectorize.hpp"

namespace fnd {

enum class OovPolicy { ZeroVector, MeanVector };

std::string_view to_string(OovPolicy policy) noexcept;
OovPolicy parse_oov_policy(std::string_view text);

/// Pre-trained vectors aligned with a vocabulary: row i holds the vector of
/// vocabulary id i. Padding is always the zero vector; ids missing from the
/// source file resolve through the OOV policy.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(Eigen::MatrixXf vectors, std::vector<bool> found, OovPolicy policy, std::string source);

  Eigen::Index dim() const noexcept { return vectors_.cols(); }
  const Eigen::MatrixXf& vectors() const noexcept { return vectors_; }
  Eigen::VectorXf lookup(std::int32_t id) const { return vectors_.row(id).transpose(); }
  Eigen::VectorXf lookup(const std::string& token, const Vocabulary& vocab) const {
    return lookup(vocab.id(token));
  }
  bool found(std::int32_t id) const { return found_.at(static_cast<std::size_t>(id)); }

  /// Fraction of non-reserved vocabulary tokens present in the source file.
  double coverage() const noexcept { return coverage_; }
  OovPolicy policy() const noexcept { return policy_; }
  const std::string& source() const noexcept { return source_; }

 private:
  Eigen::MatrixXf vectors_;
  std::vector<bool> found_;
  OovPolicy policy_ = OovPolicy::ZeroVector;
  double coverage_ = 0.0;
  std::string source_;
};

/// Raw token -> vector map parsed from a GloVe-style text file
/// ("token v1 ... vd" per line, space separated). Every line is validated;
/// only tokens in `keep` (when given) are retained.
class EmbeddingFile {
 public:
  static EmbeddingFile load(const std::filesystem::path& path,
                            const std::unordered_set<std::string>* keep = nullptr);

  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  const std::string& source() const noexcept { return source_; }

  /// Restricts to the vocabulary. Throws NoOverlap when no vocabulary token is covered.
  EmbeddingTable restrict_to(const Vocabulary& vocab, OovPolicy policy) const;

 private:
  Eigen::Index dim_ = 0;
  std::unordered_map<std::string, Eigen::VectorXf> vectors_;
  std::string source_;
};

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, OovPolicy policy);

}  // namespace fnd
