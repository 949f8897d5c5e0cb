#pragma once

#include <Eigen/SparseCore>

#include <span>
#include <vector>

#include "fnd/models/nn.hpp"
#include "fnd/vectorize.hpp"

namespace fnd::nn {

/// Feed-forward classifier over sparse rows: ReLU hidden layers, one logit.
template <class ScalarT>
class Mlp {
 public:
  using Scalar = ScalarT;
  using SparseBatch = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, std::int32_t>;

  Mlp() = default;

  Mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed, double l2 = 0.0) : l2_(l2) {
    Rng rng(seed);
    std::size_t fan_in = input_dim;
    std::vector<std::size_t> widths(hidden.begin(), hidden.end());
    widths.push_back(1);
    for (std::size_t k = 0; k < widths.size(); ++k) {
      const auto in = static_cast<Eigen::Index>(fan_in);
      const auto out = static_cast<Eigen::Index>(widths[k]);
      params_.emplace_back("W" + std::to_string(k),
                           scaled_uniform<Scalar>(in, out, rng, static_cast<double>(in)));
      params_.emplace_back("b" + std::to_string(k), Mat<Scalar>::Zero(1, out));
      fan_in = widths[k];
    }
  }

  std::vector<Param<Scalar>>& parameters() { return params_; }
  const std::vector<Param<Scalar>>& parameters() const { return params_; }
  std::size_t layers() const { return params_.size() / 2; }
  std::size_t input_dim() const { return params_.empty() ? 0 : static_cast<std::size_t>(params_[0].value.rows()); }
  double l2() const { return l2_; }
  void set_l2(double l2) { l2_ = l2; }

  Scalar loss(const SparseRowMatrix& x, std::span<const std::size_t> rows, const Eigen::VectorXd& y) const {
    Cache cache;
    forward(gather(x, rows), cache);
    return data_loss(cache.logits, rows, y) + penalty();
  }

  Scalar loss_and_gradient(const SparseRowMatrix& x, std::span<const std::size_t> rows, const Eigen::VectorXd& y,
                           Rng* /*dropout*/) {
    const SparseBatch xb = gather(x, rows);
    Cache cache;
    forward(xb, cache);
    const auto b = static_cast<Eigen::Index>(rows.size());
    Mat<Scalar> delta(b, 1);
    for (Eigen::Index i = 0; i < b; ++i) {
      delta(i, 0) = (sigmoid(cache.logits(i)) - static_cast<Scalar>(y[static_cast<Eigen::Index>(rows[i])])) /
                    static_cast<Scalar>(b);
    }
    for (std::size_t k = layers(); k-- > 0;) {
      auto& w = params_[2 * k];
      auto& bias = params_[2 * k + 1];
      if (k == 0) {
        w.grad.noalias() += xb.transpose() * delta;
      } else {
        w.grad.noalias() += cache.activations[k - 1].transpose() * delta;
      }
      bias.grad += delta.colwise().sum();
      if (k > 0) {
        Mat<Scalar> back = delta * w.value.transpose();
        delta = back.cwiseProduct((cache.activations[k - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
      }
    }
    if (l2_ > 0) {
      for (std::size_t k = 0; k < layers(); ++k) params_[2 * k].grad += Scalar(2 * l2_) * params_[2 * k].value;
    }
    return data_loss(cache.logits, rows, y) + penalty();
  }

  /// P(FAKE) per row.
  Vec<Scalar> scores(const SparseRowMatrix& x) const {
    Vec<Scalar> out(x.rows());
    constexpr Eigen::Index kChunk = 512;
    for (Eigen::Index start = 0; start < x.rows(); start += kChunk) {
      const Eigen::Index count = std::min(kChunk, x.rows() - start);
      std::vector<std::size_t> rows(static_cast<std::size_t>(count));
      for (Eigen::Index i = 0; i < count; ++i) rows[static_cast<std::size_t>(i)] = static_cast<std::size_t>(start + i);
      Cache cache;
      forward(gather(x, rows), cache);
      for (Eigen::Index i = 0; i < count; ++i) out[start + i] = sigmoid(cache.logits(i));
    }
    return out;
  }

 private:
  struct Cache {
    std::vector<Mat<Scalar>> activations;
    Vec<Scalar> logits;
  };

  SparseBatch gather(const SparseRowMatrix& x, std::span<const std::size_t> rows) const {
    if (static_cast<std::size_t>(x.cols()) != input_dim()) {
      throw Error(ErrorKind::ShapeMismatch, "input has " + std::to_string(x.cols()) + " columns, network expects " +
                                                std::to_string(input_dim()));
    }
    std::vector<Eigen::Triplet<Scalar, std::int32_t>> triplets;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (SparseRowMatrix::InnerIterator it(x, static_cast<Eigen::Index>(rows[i])); it; ++it) {
        triplets.emplace_back(static_cast<std::int32_t>(i), static_cast<std::int32_t>(it.col()),
                              static_cast<Scalar>(it.value()));
      }
    }
    SparseBatch xb(static_cast<Eigen::Index>(rows.size()), x.cols());
    xb.setFromTriplets(triplets.begin(), triplets.end());
    return xb;
  }

  void forward(const SparseBatch& xb, Cache& cache) const {
    Mat<Scalar> a;
    for (std::size_t k = 0; k < layers(); ++k) {
      const auto& w = params_[2 * k].value;
      const auto& bias = params_[2 * k + 1].value;
      Mat<Scalar> z = (k == 0) ? Mat<Scalar>(xb * w) : Mat<Scalar>(a * w);
      z.rowwise() += bias.row(0);
      if (k + 1 == layers()) {
        cache.logits = z.col(0);
      } else {
        a = z.cwiseMax(Scalar(0));
        cache.activations.push_back(a);
      }
    }
  }

  Scalar data_loss(const Vec<Scalar>& logits, std::span<const std::size_t> rows, const Eigen::VectorXd& y) const {
    Scalar total = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      total += bce_with_logit(logits[static_cast<Eigen::Index>(i)],
                              static_cast<Scalar>(y[static_cast<Eigen::Index>(rows[i])]));
    }
    return total / static_cast<Scalar>(rows.size());
  }

  Scalar penalty() const {
    if (l2_ <= 0) return Scalar(0);
    Scalar total = 0;
    for (std::size_t k = 0; k < layers(); ++k) total += params_[2 * k].value.squaredNorm();
    return static_cast<Scalar>(l2_) * total;
  }

  std::vector<Param<Scalar>> params_;
  double l2_ = 0.0;
};

}  // namespace fnd::nn
