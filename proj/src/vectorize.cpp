#include "fnd/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fnd/error.hpp"
#include "fnd/fingerprint.hpp"
#include "fnd/textnorm.hpp"

namespace fnd {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> document_frequencies,
                       std::size_t max_size, std::size_t training_documents, std::string provenance)
    : tokens_(std::move(tokens)),
      df_(std::move(document_frequencies)),
      max_size_(max_size),
      training_documents_(training_documents),
      provenance_(std::move(provenance)) {
  if (tokens_.size() < 2 || df_.size() != tokens_.size()) {
    throw Error(ErrorKind::InvalidArgument, "vocabulary needs reserved tokens and one frequency per token");
  }
  if (tokens_.size() > max_size_ + 2) {
    throw Error(ErrorKind::InvalidArgument, "vocabulary exceeds its cap");
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

std::int32_t Vocabulary::id(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

std::string Vocabulary::fingerprint() const {
  std::uint64_t h = fnv1a64("vocab/v1:" + std::to_string(max_size_));
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  return to_hex(h);
}

Vocabulary build_vocab(std::span<const TokenizedDoc> docs, std::size_t max_size, std::string provenance,
                       const std::string& pad_token, const std::string& unk_token) {
  if (docs.empty()) throw Error(ErrorKind::EmptyInput, "cannot build a vocabulary from zero documents");
  if (max_size == 0) throw Error(ErrorKind::InvalidArgument, "vocabulary cap must be positive");

  struct Stat {
    std::size_t count = 0;
    std::size_t df = 0;
    std::size_t last_doc = SIZE_MAX;
  };
  std::unordered_map<std::string, Stat> stats;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& t : docs[d]) {
      if (t == pad_token || t == unk_token) continue;
      auto& s = stats[t];
      ++s.count;
      if (s.last_doc != d) {
        ++s.df;
        s.last_doc = d;
      }
    }
  }
  std::vector<std::pair<const std::string*, const Stat*>> ranked;
  ranked.reserve(stats.size());
  for (const auto& [token, stat] : stats) ranked.emplace_back(&token, &stat);
  const auto by_rank = [](const auto& a, const auto& b) {
    if (a.second->count != b.second->count) return a.second->count > b.second->count;
    return *a.first < *b.first;
  };
  const std::size_t keep = std::min(max_size, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), by_rank);

  std::vector<std::string> tokens{pad_token, unk_token};
  std::vector<std::size_t> df{0, 0};
  tokens.reserve(keep + 2);
  df.reserve(keep + 2);
  for (std::size_t i = 0; i < keep; ++i) {
    tokens.push_back(*ranked[i].first);
    df.push_back(ranked[i].second->df);
  }
  return Vocabulary(std::move(tokens), std::move(df), max_size, docs.size(), std::move(provenance));
}

std::string provenance_of(std::span<const std::string> document_ids) {
  std::vector<std::string_view> sorted(document_ids.begin(), document_ids.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = fnv1a64("provenance/v1");
  for (auto id : sorted) {
    h = fnv1a64(id, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  return to_hex(h);
}

std::string_view to_string(FeatureKind kind) noexcept { return kind == FeatureKind::Counts ? "bow" : "tfidf"; }

namespace {

// Sorted (id, count) pairs for one document.
std::vector<std::pair<std::int32_t, double>> count_ids(std::span<const std::string> tokens,
                                                       const Vocabulary& vocab, OovMode oov) {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto id = vocab.id(t);
    if (id == Vocabulary::kUnkId && oov == OovMode::Drop) continue;
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  std::vector<std::pair<std::int32_t, double>> out;
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    out.emplace_back(ids[i], static_cast<double>(j - i));
    i = j;
  }
  return out;
}

std::string bow_representation(const Vocabulary& vocab, OovMode oov) {
  return "bow:" + vocab.fingerprint() + (oov == OovMode::UnkColumn ? ":oov=unk" : ":oov=drop");
}

}  // namespace

SparseVector bow(std::span<const std::string> tokens, const Vocabulary& vocab, OovMode oov) {
  SparseVector v(static_cast<Eigen::Index>(vocab.size()));
  const auto counts = count_ids(tokens, vocab, oov);
  v.reserve(static_cast<Eigen::Index>(counts.size()));
  for (const auto& [id, c] : counts) v.insertBack(id) = c;
  return v;
}

FeatureMatrix bow_matrix(std::span<const TokenizedDoc> docs, const Vocabulary& vocab, OovMode oov) {
  FeatureMatrix m;
  m.kind = FeatureKind::Counts;
  m.representation = bow_representation(vocab, oov);
  m.values.resize(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(vocab.size()));
  std::vector<std::vector<std::pair<std::int32_t, double>>> rows(docs.size());
  Eigen::VectorXi nnz(static_cast<Eigen::Index>(docs.size()));
  for (std::size_t r = 0; r < docs.size(); ++r) {
    rows[r] = count_ids(docs[r], vocab, oov);
    nnz[static_cast<Eigen::Index>(r)] = static_cast<int>(rows[r].size());
  }
  m.values.reserve(nnz);
  for (std::size_t r = 0; r < docs.size(); ++r) {
    for (const auto& [id, c] : rows[r]) m.values.insert(static_cast<Eigen::Index>(r), id) = c;
  }
  m.values.makeCompressed();
  return m;
}

std::string TfidfWeights::fingerprint() const {
  std::uint64_t h = fnv1a64("idf/v1:" + std::to_string(documents));
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(idf.data()),
                               static_cast<std::size_t>(idf.size()) * sizeof(double)),
              h);
  return to_hex(h);
}

TfidfWeights tfidf_fit(const FeatureMatrix& train_counts) {
  if (train_counts.kind != FeatureKind::Counts) {
    throw Error(ErrorKind::RepresentationMismatch, "tf-idf must be fitted on raw counts");
  }
  const auto& X = train_counts.values;
  Eigen::VectorXd df = Eigen::VectorXd::Zero(X.cols());
  for (Eigen::Index r = 0; r < X.outerSize(); ++r) {
    for (SparseRowMatrix::InnerIterator it(X, r); it; ++it) {
      if (it.value() != 0.0) df[it.col()] += 1.0;
    }
  }
  TfidfWeights w;
  w.documents = static_cast<std::size_t>(X.rows());
  const double n = static_cast<double>(X.rows());
  w.idf = ((1.0 + n) / (1.0 + df.array())).log() + 1.0;
  return w;
}

FeatureMatrix tfidf_transform(const FeatureMatrix& counts, const TfidfWeights& weights) {
  if (counts.kind != FeatureKind::Counts) {
    throw Error(ErrorKind::RepresentationMismatch, "tf-idf transform expects raw counts");
  }
  if (counts.cols() != weights.idf.size()) {
    throw Error(ErrorKind::ShapeMismatch, "idf length does not match the vocabulary");
  }
  FeatureMatrix out;
  out.kind = FeatureKind::Tfidf;
  out.representation = "tfidf:" + counts.representation + ":" + weights.fingerprint();
  out.values = counts.values;
  for (Eigen::Index r = 0; r < out.values.outerSize(); ++r) {
    double norm2 = 0.0;
    for (SparseRowMatrix::InnerIterator it(out.values, r); it; ++it) {
      it.valueRef() *= weights.idf[it.col()];
      norm2 += it.value() * it.value();
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (SparseRowMatrix::InnerIterator it(out.values, r); it; ++it) it.valueRef() *= inv;
    }
  }
  return out;
}

std::vector<std::int32_t> encode_sequence(std::span<const std::string> tokens, const Vocabulary& vocab,
                                          std::size_t max_len) {
  std::vector<std::int32_t> ids;
  ids.reserve(std::min(tokens.size(), max_len));
  for (const auto& t : tokens) {
    if (ids.size() == max_len) break;
    ids.push_back(vocab.id(t));
  }
  return pad_truncate(ids, max_len, Vocabulary::kPadId);
}

SequenceBatch encode_sequences(std::span<const TokenizedDoc> docs, const Vocabulary& vocab, std::size_t max_len) {
  SequenceBatch batch;
  batch.representation = "seq:" + vocab.fingerprint() + ":len=" + std::to_string(max_len);
  batch.vocabulary_size = vocab.size();
  batch.ids.resize(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(max_len));
  for (std::size_t r = 0; r < docs.size(); ++r) {
    const auto ids = encode_sequence(docs[r], vocab, max_len);
    batch.ids.row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::Matrix<std::int32_t, 1, Eigen::Dynamic>>(ids.data(), static_cast<Eigen::Index>(max_len));
  }
  return batch;
}

void write_coo(std::ostream& out, const FeatureMatrix& matrix) {
  char buf[64];
  for (Eigen::Index r = 0; r < matrix.values.outerSize(); ++r) {
    for (SparseRowMatrix::InnerIterator it(matrix.values, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << r << ' ' << it.col() << ' ' << buf << '\n';
    }
  }
}

double vocabulary_overlap(const Vocabulary& a, const Vocabulary& b) {
  if (a.size() <= 2) return 0.0;
  std::size_t shared = 0;
  for (std::size_t i = 2; i < a.size(); ++i) shared += b.contains(a.tokens()[i]);
  return static_cast<double>(shared) / static_cast<double>(a.size() - 2);
}

}  // namespace fnd
