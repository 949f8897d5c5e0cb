#pragma once

#include <span>
#include <vector>

#include "fnd/models/nn.hpp"
#include "fnd/vectorize.hpp"

namespace fnd::nn {

struct CnnShape {
  std::size_t vocabulary_size = 0;
  std::size_t max_len = 0;
  std::size_t embedding_dim = 50;
  std::size_t filters = 16;
  std::size_t kernel_size = 10;
  std::size_t dense_units = 12;
};

/// Embedding -> valid 1-D convolution (ReLU) -> global max pool -> dense
/// (ReLU) -> logit.
///
/// The convolution kernel is stored as embedding_dim x (kernel_size * filters);
/// column block k holds tap k for every filter. Padding positions embed to
/// the zero vector.
template <class ScalarT>
class TextCnn {
 public:
  using Scalar = ScalarT;
  enum : std::size_t { kEmbedding, kConv, kConvBias, kDense, kDenseBias, kOut, kOutBias };

  TextCnn() = default;

  /// `fixed_embedding`, when given, must be vocabulary_size x embedding_dim and is frozen.
  TextCnn(const CnnShape& shape, double kernel_penalty, std::uint64_t seed,
          const Mat<Scalar>* fixed_embedding = nullptr)
      : shape_(shape), kr_(kernel_penalty) {
    if (shape.filters == 0 || shape.kernel_size == 0 || shape.dense_units == 0 || shape.embedding_dim == 0) {
      throw Error(ErrorKind::InvalidArgument, "cnn dimensions must be positive");
    }
    if (shape.kernel_size > shape.max_len) {
      throw Error(ErrorKind::ShapeMismatch, "kernel size " + std::to_string(shape.kernel_size) +
                                                " exceeds sequence length " + std::to_string(shape.max_len));
    }
    Rng rng(seed);
    const auto v = static_cast<Eigen::Index>(shape.vocabulary_size);
    const auto d = static_cast<Eigen::Index>(shape.embedding_dim);
    const auto f = static_cast<Eigen::Index>(shape.filters);
    const auto ks = static_cast<Eigen::Index>(shape.kernel_size);
    const auto u = static_cast<Eigen::Index>(shape.dense_units);
    if (fixed_embedding) {
      if (fixed_embedding->rows() != v || fixed_embedding->cols() != d) {
        throw Error(ErrorKind::ShapeMismatch, "fixed embedding table shape does not match vocabulary/dimension");
      }
      params_.emplace_back("embedding", *fixed_embedding, false);
    } else {
      params_.emplace_back("embedding", uniform_matrix<Scalar>(v, d, rng, 0.05));
    }
    if (v > 0) params_[kEmbedding].value.row(Vocabulary::kPadId).setZero();
    params_.emplace_back("conv", scaled_uniform<Scalar>(d, ks * f, rng, static_cast<double>(d * ks)));
    params_.emplace_back("conv_bias", Mat<Scalar>::Zero(1, f));
    params_.emplace_back("dense", scaled_uniform<Scalar>(f, u, rng, static_cast<double>(f)));
    params_.emplace_back("dense_bias", Mat<Scalar>::Zero(1, u));
    params_.emplace_back("out", scaled_uniform<Scalar>(u, 1, rng, static_cast<double>(u)));
    params_.emplace_back("out_bias", Mat<Scalar>::Zero(1, 1));
  }

  std::vector<Param<Scalar>>& parameters() { return params_; }
  const std::vector<Param<Scalar>>& parameters() const { return params_; }
  const CnnShape& shape() const { return shape_; }
  double kernel_penalty() const { return kr_; }
  std::size_t conv_output_length() const { return shape_.max_len - shape_.kernel_size + 1; }

  Scalar loss(const IdMatrix& x, std::span<const std::size_t> rows, const Eigen::VectorXd& y) const {
    Batch batch;
    forward(x, rows, batch);
    return data_loss(batch.logits, rows, y) + penalty();
  }

  Scalar loss_and_gradient(const IdMatrix& x, std::span<const std::size_t> rows, const Eigen::VectorXd& y,
                           Rng* /*dropout*/) {
    Batch batch;
    forward(x, rows, batch);
    const auto b = static_cast<Eigen::Index>(rows.size());
    Vec<Scalar> dz(b);
    for (Eigen::Index i = 0; i < b; ++i) {
      dz[i] = (sigmoid(batch.logits[i]) - static_cast<Scalar>(y[static_cast<Eigen::Index>(rows[i])])) /
              static_cast<Scalar>(b);
    }
    params_[kOut].grad.noalias() += batch.hidden.transpose() * dz;
    params_[kOutBias].grad(0, 0) += dz.sum();
    Mat<Scalar> dh = dz * params_[kOut].value.transpose();
    dh.array() *= (batch.hidden.array() > Scalar(0)).template cast<Scalar>();
    params_[kDense].grad.noalias() += batch.pooled.transpose() * dh;
    params_[kDenseBias].grad += dh.colwise().sum();
    params_[kDense].grad += Scalar(2 * kr_) * params_[kDense].value;
    Mat<Scalar> dpool = dh * params_[kDense].value.transpose();
    dpool.array() *= (batch.pooled.array() > Scalar(0)).template cast<Scalar>();

    const auto f = static_cast<Eigen::Index>(shape_.filters);
    const auto ks = static_cast<Eigen::Index>(shape_.kernel_size);
    const auto& conv = params_[kConv].value;
    auto& dconv = params_[kConv].grad;
    auto& demb = params_[kEmbedding].grad;
    const bool train_embedding = params_[kEmbedding].trainable;
    Mat<Scalar> xs;
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto row = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
      embed(x, row, xs);
      for (Eigen::Index j = 0; j < f; ++j) {
        const Scalar g = dpool(i, j);
        if (g == Scalar(0)) continue;
        const Eigen::Index t = batch.argmax(i, j);
        params_[kConvBias].grad(0, j) += g;
        for (Eigen::Index k = 0; k < ks; ++k) {
          dconv.col(k * f + j) += g * xs.row(t + k).transpose();
          if (train_embedding) {
            const auto id = x(row, t + k);
            if (id != Vocabulary::kPadId) demb.row(id) += g * conv.col(k * f + j).transpose();
          }
        }
      }
    }
    return data_loss(batch.logits, rows, y) + penalty();
  }

  Vec<Scalar> scores(const IdMatrix& x) const {
    Vec<Scalar> out(x.rows());
    constexpr Eigen::Index kChunk = 256;
    for (Eigen::Index start = 0; start < x.rows(); start += kChunk) {
      const Eigen::Index count = std::min(kChunk, x.rows() - start);
      std::vector<std::size_t> rows(static_cast<std::size_t>(count));
      for (Eigen::Index i = 0; i < count; ++i) rows[static_cast<std::size_t>(i)] = static_cast<std::size_t>(start + i);
      Batch batch;
      forward(x, rows, batch);
      for (Eigen::Index i = 0; i < count; ++i) out[start + i] = sigmoid(batch.logits[i]);
    }
    return out;
  }

 private:
  struct Batch {
    Mat<Scalar> pooled;  // B x F, post-ReLU
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> argmax;
    Mat<Scalar> hidden;  // B x U, post-ReLU
    Vec<Scalar> logits;
  };

  void check_input(const IdMatrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != shape_.max_len) {
      throw Error(ErrorKind::ShapeMismatch, "sequence length " + std::to_string(x.cols()) + " differs from model " +
                                                std::to_string(shape_.max_len));
    }
  }

  void embed(const IdMatrix& x, Eigen::Index row, Mat<Scalar>& xs) const {
    const auto& e = params_[kEmbedding].value;
    xs.resize(x.cols(), e.cols());
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
      const auto id = x(row, t);
      if (id < 0 || id >= e.rows()) throw Error(ErrorKind::ShapeMismatch, "token id outside the vocabulary");
      if (id == Vocabulary::kPadId) {
        xs.row(t).setZero();
      } else {
        xs.row(t) = e.row(id);
      }
    }
  }

  void forward(const IdMatrix& x, std::span<const std::size_t> rows, Batch& batch) const {
    check_input(x);
    const auto b = static_cast<Eigen::Index>(rows.size());
    const auto f = static_cast<Eigen::Index>(shape_.filters);
    const auto ks = static_cast<Eigen::Index>(shape_.kernel_size);
    const auto len = static_cast<Eigen::Index>(conv_output_length());
    batch.pooled.resize(b, f);
    batch.argmax.resize(b, f);
    Mat<Scalar> xs;
    Mat<Scalar> taps;
    for (Eigen::Index i = 0; i < b; ++i) {
      embed(x, static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]), xs);
      taps.noalias() = xs * params_[kConv].value;  // L x (KS*F)
      for (Eigen::Index j = 0; j < f; ++j) {
        Scalar best = 0;
        Eigen::Index best_t = 0;
        for (Eigen::Index t = 0; t < len; ++t) {
          Scalar s = params_[kConvBias].value(0, j);
          for (Eigen::Index k = 0; k < ks; ++k) s += taps(t + k, k * f + j);
          if (t == 0 || s > best) {
            best = s;
            best_t = t;
          }
        }
        batch.pooled(i, j) = std::max(best, Scalar(0));
        batch.argmax(i, j) = best_t;
      }
    }
    batch.hidden = batch.pooled * params_[kDense].value;
    batch.hidden.rowwise() += params_[kDenseBias].value.row(0);
    batch.hidden = batch.hidden.cwiseMax(Scalar(0));
    batch.logits = (batch.hidden * params_[kOut].value).col(0);
    batch.logits.array() += params_[kOutBias].value(0, 0);
  }

  Scalar data_loss(const Vec<Scalar>& logits, std::span<const std::size_t> rows, const Eigen::VectorXd& y) const {
    Scalar total = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      total += bce_with_logit(logits[static_cast<Eigen::Index>(i)],
                              static_cast<Scalar>(y[static_cast<Eigen::Index>(rows[i])]));
    }
    return total / static_cast<Scalar>(rows.size());
  }

  Scalar penalty() const { return static_cast<Scalar>(kr_) * params_[kDense].value.squaredNorm(); }

  CnnShape shape_;
  double kr_ = 0.0;
  std::vector<Param<Scalar>> params_;
};

}  // namespace fnd::nn
