#pragma once

#include <span>
#include <vector>

#include "fnd/models/nn.hpp"
#include "fnd/vectorize.hpp"

namespace fnd::nn {

struct LstmShape {
  std::size_t vocabulary_size = 0;
  std::size_t max_len = 0;
  std::size_t embedding_dim = 50;
  std::size_t units = 8;
};

struct LstmRegularization {
  double kernel = 0.0;     // L2 on the input kernel
  double recurrent = 0.0;  // L2 on the recurrent kernel
  double dropout = 0.0;    // on the embedded inputs, train time only
};

/// Embedding -> single LSTM layer -> final hidden state -> logit.
///
/// Gate blocks are ordered i, f, g, o along the 4*units axis. Padding ids are
/// skipped, so the recurrence runs over the real tokens only; an all-padding
/// row yields a zero final state.
template <class ScalarT>
class TextLstm {
 public:
  using Scalar = ScalarT;
  enum : std::size_t { kEmbedding, kKernel, kRecurrent, kBias, kOut, kOutBias };

  TextLstm() = default;

  TextLstm(const LstmShape& shape, LstmRegularization reg, std::uint64_t seed,
           const Mat<Scalar>* fixed_embedding = nullptr)
      : shape_(shape), reg_(reg) {
    if (shape.units == 0 || shape.embedding_dim == 0) throw Error(ErrorKind::InvalidArgument, "lstm dimensions must be positive");
    if (reg.dropout < 0 || reg.dropout >= 1) throw Error(ErrorKind::InvalidArgument, "dropout must lie in [0, 1)");
    Rng rng(seed);
    const auto v = static_cast<Eigen::Index>(shape.vocabulary_size);
    const auto d = static_cast<Eigen::Index>(shape.embedding_dim);
    const auto h = static_cast<Eigen::Index>(shape.units);
    if (fixed_embedding) {
      if (fixed_embedding->rows() != v || fixed_embedding->cols() != d) {
        throw Error(ErrorKind::ShapeMismatch, "fixed embedding table shape does not match vocabulary/dimension");
      }
      params_.emplace_back("embedding", *fixed_embedding, false);
    } else {
      params_.emplace_back("embedding", uniform_matrix<Scalar>(v, d, rng, 0.05));
    }
    if (v > 0) params_[kEmbedding].value.row(Vocabulary::kPadId).setZero();
    params_.emplace_back("kernel", scaled_uniform<Scalar>(d, 4 * h, rng, static_cast<double>(d)));
    params_.emplace_back("recurrent", scaled_uniform<Scalar>(h, 4 * h, rng, static_cast<double>(h)));
    Mat<Scalar> bias = Mat<Scalar>::Zero(1, 4 * h);
    bias.block(0, h, 1, h).setOnes();
    params_.emplace_back("bias", bias);
    params_.emplace_back("out", scaled_uniform<Scalar>(h, 1, rng, static_cast<double>(h)));
    params_.emplace_back("out_bias", Mat<Scalar>::Zero(1, 1));
  }

  std::vector<Param<Scalar>>& parameters() { return params_; }
  const std::vector<Param<Scalar>>& parameters() const { return params_; }
  const LstmShape& shape() const { return shape_; }
  const LstmRegularization& regularization() const { return reg_; }

  Scalar loss(const IdMatrix& x, std::span<const std::size_t> rows, const Eigen::VectorXd& y) const {
    Scalar total = 0;
    Trace trace;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Scalar z = run(x, static_cast<Eigen::Index>(rows[i]), nullptr, trace);
      total += bce_with_logit(z, static_cast<Scalar>(y[static_cast<Eigen::Index>(rows[i])]));
    }
    return total / static_cast<Scalar>(rows.size()) + penalty();
  }

  Scalar loss_and_gradient(const IdMatrix& x, std::span<const std::size_t> rows, const Eigen::VectorXd& y,
                           Rng* dropout_rng) {
    const auto h = static_cast<Eigen::Index>(shape_.units);
    const auto d = static_cast<Eigen::Index>(shape_.embedding_dim);
    const Scalar inv_b = Scalar(1) / static_cast<Scalar>(rows.size());
    Scalar total = 0;
    Trace tr;
    RowVec<Scalar> mask;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(rows[i]);
      const RowVec<Scalar>* mask_ptr = nullptr;
      if (reg_.dropout > 0 && dropout_rng) {
        mask.resize(d);
        const auto keep = static_cast<Scalar>(1.0 / (1.0 - reg_.dropout));
        for (Eigen::Index k = 0; k < d; ++k) mask[k] = dropout_rng->uniform() < reg_.dropout ? Scalar(0) : keep;
        mask_ptr = &mask;
      }
      const Scalar z = run(x, row, mask_ptr, tr);
      const Scalar target = static_cast<Scalar>(y[row]);
      total += bce_with_logit(z, target);
      const Scalar dz = (sigmoid(z) - target) * inv_b;

      const Eigen::Index steps = tr.inputs.rows();
      const RowVec<Scalar> h_last = steps > 0 ? RowVec<Scalar>(tr.h.row(steps - 1)) : RowVec<Scalar>::Zero(h);
      params_[kOut].grad += dz * h_last.transpose();
      params_[kOutBias].grad(0, 0) += dz;
      if (steps == 0) continue;

      RowVec<Scalar> dh = dz * params_[kOut].value.transpose();
      RowVec<Scalar> dc = RowVec<Scalar>::Zero(h);
      Mat<Scalar> da(steps, 4 * h);
      for (Eigen::Index t = steps - 1; t >= 0; --t) {
        const auto ig = tr.gates.row(t).segment(0, h);
        const auto fg = tr.gates.row(t).segment(h, h);
        const auto gg = tr.gates.row(t).segment(2 * h, h);
        const auto og = tr.gates.row(t).segment(3 * h, h);
        const auto tc = tr.tanh_c.row(t);
        dc.array() += dh.array() * og.array() * (Scalar(1) - tc.array().square());
        const RowVec<Scalar> c_prev = t > 0 ? RowVec<Scalar>(tr.c.row(t - 1)) : RowVec<Scalar>::Zero(h);
        da.row(t).segment(0, h) = (dc.array() * gg.array() * ig.array() * (Scalar(1) - ig.array())).matrix();
        da.row(t).segment(h, h) = (dc.array() * c_prev.array() * fg.array() * (Scalar(1) - fg.array())).matrix();
        da.row(t).segment(2 * h, h) = (dc.array() * ig.array() * (Scalar(1) - gg.array().square())).matrix();
        da.row(t).segment(3 * h, h) = (dh.array() * tc.array() * og.array() * (Scalar(1) - og.array())).matrix();
        dc = (dc.array() * fg.array()).matrix();
        if (t > 0) {
          params_[kRecurrent].grad.noalias() += tr.h.row(t - 1).transpose() * da.row(t);
          dh.noalias() = da.row(t) * params_[kRecurrent].value.transpose();
        }
      }
      params_[kKernel].grad.noalias() += tr.inputs.transpose() * da;
      params_[kBias].grad += da.colwise().sum();
      if (params_[kEmbedding].trainable) {
        Mat<Scalar> dx = da * params_[kKernel].value.transpose();
        if (mask_ptr) dx.array().rowwise() *= mask_ptr->array();
        for (Eigen::Index t = 0; t < steps; ++t) params_[kEmbedding].grad.row(tr.ids[static_cast<std::size_t>(t)]) += dx.row(t);
      }
    }
    params_[kKernel].grad += Scalar(2 * reg_.kernel) * params_[kKernel].value;
    params_[kRecurrent].grad += Scalar(2 * reg_.recurrent) * params_[kRecurrent].value;
    return total * inv_b + penalty();
  }

  Vec<Scalar> scores(const IdMatrix& x) const {
    Vec<Scalar> out(x.rows());
    Trace trace;
    for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] = sigmoid(run(x, r, nullptr, trace));
    return out;
  }

 private:
  struct Trace {
    std::vector<std::int32_t> ids;
    Mat<Scalar> inputs;  // T x d, after dropout
    Mat<Scalar> gates;   // T x 4h, activated
    Mat<Scalar> c;       // T x h
    Mat<Scalar> tanh_c;  // T x h
    Mat<Scalar> h;       // T x h
  };

  /// Forward pass over one row; returns the logit and fills the trace.
  Scalar run(const IdMatrix& x, Eigen::Index row, const RowVec<Scalar>* mask, Trace& tr) const {
    if (static_cast<std::size_t>(x.cols()) != shape_.max_len) {
      throw Error(ErrorKind::ShapeMismatch, "sequence length " + std::to_string(x.cols()) + " differs from model " +
                                                std::to_string(shape_.max_len));
    }
    const auto& e = params_[kEmbedding].value;
    const auto h = static_cast<Eigen::Index>(shape_.units);
    tr.ids.clear();
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
      const auto id = x(row, t);
      if (id < 0 || id >= e.rows()) throw Error(ErrorKind::ShapeMismatch, "token id outside the vocabulary");
      if (id != Vocabulary::kPadId) tr.ids.push_back(id);
    }
    const auto steps = static_cast<Eigen::Index>(tr.ids.size());
    tr.inputs.resize(steps, e.cols());
    for (Eigen::Index t = 0; t < steps; ++t) tr.inputs.row(t) = e.row(tr.ids[static_cast<std::size_t>(t)]);
    if (mask) tr.inputs.array().rowwise() *= mask->array();
    tr.gates.noalias() = tr.inputs * params_[kKernel].value;
    tr.gates.rowwise() += params_[kBias].value.row(0);
    tr.c.resize(steps, h);
    tr.tanh_c.resize(steps, h);
    tr.h.resize(steps, h);
    RowVec<Scalar> h_prev = RowVec<Scalar>::Zero(h);
    RowVec<Scalar> c_prev = RowVec<Scalar>::Zero(h);
    for (Eigen::Index t = 0; t < steps; ++t) {
      auto a = tr.gates.row(t);
      a.noalias() += h_prev * params_[kRecurrent].value;
      for (Eigen::Index k = 0; k < h; ++k) {
        a[k] = sigmoid(a[k]);
        a[h + k] = sigmoid(a[h + k]);
        a[2 * h + k] = std::tanh(a[2 * h + k]);
        a[3 * h + k] = sigmoid(a[3 * h + k]);
      }
      c_prev = (a.segment(h, h).array() * c_prev.array() + a.segment(0, h).array() * a.segment(2 * h, h).array()).matrix();
      tr.c.row(t) = c_prev;
      tr.tanh_c.row(t) = c_prev.array().tanh().matrix();
      h_prev = (a.segment(3 * h, h).array() * tr.tanh_c.row(t).array()).matrix();
      tr.h.row(t) = h_prev;
    }
    return (h_prev * params_[kOut].value)(0, 0) + params_[kOutBias].value(0, 0);
  }

  Scalar penalty() const {
    return static_cast<Scalar>(reg_.kernel) * params_[kKernel].value.squaredNorm() +
           static_cast<Scalar>(reg_.recurrent) * params_[kRecurrent].value.squaredNorm();
  }

  LstmShape shape_;
  LstmRegularization reg_;
  std::vector<Param<Scalar>> params_;
};

}  // namespace fnd::nn
