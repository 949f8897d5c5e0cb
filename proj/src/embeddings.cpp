#include "fnd/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "fnd/error.hpp"
#include "fnd/fingerprint.hpp"

namespace fnd {

std::string_view to_string(OovPolicy policy) noexcept {
  return policy == OovPolicy::ZeroVector ? "zero-vector" : "mean-vector";
}

OovPolicy parse_oov_policy(std::string_view text) {
  if (text == "zero-vector" || text == "zero") return OovPolicy::ZeroVector;
  if (text == "mean-vector" || text == "mean") return OovPolicy::MeanVector;
  throw Error(ErrorKind::InvalidArgument, "unknown OOV policy '" + std::string(text) + "'");
}

EmbeddingTable::EmbeddingTable(Eigen::MatrixXf vectors, std::vector<bool> found, OovPolicy policy,
                               std::string source)
    : vectors_(std::move(vectors)), found_(std::move(found)), policy_(policy), source_(std::move(source)) {
  const auto n = static_cast<std::size_t>(vectors_.rows());
  if (found_.size() != n || n < 2) throw Error(ErrorKind::ShapeMismatch, "embedding rows must match the vocabulary");
  std::size_t hits = 0;
  for (std::size_t i = 2; i < n; ++i) hits += found_[i];
  coverage_ = n > 2 ? static_cast<double>(hits) / static_cast<double>(n - 2) : 0.0;
  if (!vectors_.allFinite()) throw Error(ErrorKind::InvalidArgument, "embedding table contains non-finite values");
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

EmbeddingFile EmbeddingFile::load(const std::filesystem::path& path, const std::unordered_set<std::string>* keep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open embedding file " + path.string());
  EmbeddingFile file;
  file.source_ = path.filename().string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    const auto arity = static_cast<Eigen::Index>(fields.size()) - 1;
    if (file.dim_ == 0) {
      if (arity < 1) throw Error(ErrorKind::InconsistentDimension, path.string() + ":1 has no vector components");
      file.dim_ = arity;
    }
    if (arity != file.dim_) {
      throw Error(ErrorKind::InconsistentDimension,
                  path.string() + ":" + std::to_string(line_no) + " has " + std::to_string(arity) +
                      " components, expected " + std::to_string(file.dim_));
    }
    std::string token(fields[0]);
    if (keep && !keep->contains(token)) continue;
    Eigen::VectorXf v(file.dim_);
    for (Eigen::Index k = 0; k < file.dim_; ++k) {
      const auto f = fields[static_cast<std::size_t>(k) + 1];
      float value = 0.0f;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(value)) {
        throw Error(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + " has a malformed component '" +
                                          std::string(f) + "'");
      }
      v[k] = value;
    }
    file.vectors_.insert_or_assign(std::move(token), std::move(v));
  }
  if (file.dim_ == 0) throw Error(ErrorKind::EmptyInput, path.string() + " contains no vectors");
  return file;
}

EmbeddingTable EmbeddingFile::restrict_to(const Vocabulary& vocab, OovPolicy policy) const {
  const auto n = static_cast<Eigen::Index>(vocab.size());
  Eigen::MatrixXf table = Eigen::MatrixXf::Zero(n, dim_);
  std::vector<bool> found(static_cast<std::size_t>(n), false);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
  std::size_t hits = 0;
  for (Eigen::Index i = 2; i < n; ++i) {
    const auto it = vectors_.find(vocab.token(static_cast<std::int32_t>(i)));
    if (it == vectors_.end()) continue;
    table.row(i) = it->second.transpose();
    found[static_cast<std::size_t>(i)] = true;
    sum += it->second.cast<double>();
    ++hits;
  }
  if (hits == 0) throw Error(ErrorKind::NoOverlap, "no vocabulary token occurs in " + source_);
  if (policy == OovPolicy::MeanVector) {
    const Eigen::RowVectorXf mean = (sum / static_cast<double>(hits)).cast<float>().transpose();
    for (Eigen::Index i = 1; i < n; ++i) {
      if (!found[static_cast<std::size_t>(i)]) table.row(i) = mean;
    }
  }
  return EmbeddingTable(std::move(table), std::move(found), policy, source_);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, OovPolicy policy) {
  std::unordered_set<std::string> keep(vocab.tokens().begin() + 2, vocab.tokens().end());
  return EmbeddingFile::load(path, &keep).restrict_to(vocab, policy);
}

}  // namespace fnd
