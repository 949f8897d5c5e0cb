#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fnd/error.hpp"
#include "fnd/models/common.hpp"
#include "fnd/rng.hpp"

namespace fnd::nn {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// A named parameter block with its gradient accumulator.
template <class Scalar>
struct Param {
  std::string name;
  Mat<Scalar> value;
  Mat<Scalar> grad;
  bool trainable = true;

  Param() = default;
  Param(std::string n, Mat<Scalar> v, bool train = true)
      : name(std::move(n)), value(std::move(v)), grad(Mat<Scalar>::Zero(value.rows(), value.cols())), trainable(train) {}
};

template <class Scalar>
void zero_grads(std::vector<Param<Scalar>>& params) {
  for (auto& p : params) p.grad.setZero();
}

template <class Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// Binary cross-entropy on a logit, numerically stable for large |z|.
template <class Scalar>
Scalar bce_with_logit(Scalar z, Scalar target) {
  return std::max(z, Scalar(0)) - z * target + std::log1p(std::exp(-std::abs(z)));
}

/// Scaled uniform initialisation on fan-in: U(-a, a), a = sqrt(6 / fan_in).
template <class Scalar>
Mat<Scalar> scaled_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng, double fan_in) {
  const double a = std::sqrt(6.0 / std::max(fan_in, 1.0));
  Mat<Scalar> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = static_cast<Scalar>(rng.uniform(-a, a));
  }
  return m;
}

template <class Scalar>
Mat<Scalar> uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double a) {
  Mat<Scalar> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = static_cast<Scalar>(rng.uniform(-a, a));
  }
  return m;
}

/// Adaptive moment estimation with bias correction.
template <class Scalar>
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam(const std::vector<Param<Scalar>>& params, Options options) : options_(options) {
    for (const auto& p : params) {
      m_.push_back(Mat<Scalar>::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Mat<Scalar>::Zero(p.value.rows(), p.value.cols()));
    }
  }

  void step(std::vector<Param<Scalar>>& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
    const auto b1 = static_cast<Scalar>(options_.beta1);
    const auto b2 = static_cast<Scalar>(options_.beta2);
    const auto rate = static_cast<Scalar>(options_.learning_rate * std::sqrt(c2) / c1);
    const auto eps = static_cast<Scalar>(options_.epsilon * std::sqrt(c2));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto& p = params[k];
      if (!p.trainable) continue;
      m_[k] = b1 * m_[k] + (Scalar(1) - b1) * p.grad;
      v_[k] = b2 * v_[k] + (Scalar(1) - b2) * p.grad.cwiseProduct(p.grad);
      p.value.array() -= rate * m_[k].array() / (v_[k].array().sqrt() + eps);
    }
  }

 private:
  Options options_;
  std::vector<Mat<Scalar>> m_;
  std::vector<Mat<Scalar>> v_;
  long t_ = 0;
};

struct FitOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::optional<EarlyStopping> early_stopping;
};

/// Dev data for monitoring; `x` must be the same input type as training.
template <class Input>
struct DevData {
  const Input* x = nullptr;
  std::span<const Label> y;
};

template <class Scalar>
double accuracy_of(const Vec<Scalar>& scores, std::span<const Label> truth) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    correct += label_from_score(static_cast<double>(scores[static_cast<Eigen::Index>(i)])) == truth[i];
  }
  return truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
}

/// Mini-batch training loop shared by the neural models.
///
/// Net must provide parameters(), loss(x, rows, y), loss_and_gradient(x, rows,
/// y, Rng*) and scores(x). Batches are drawn from a per-epoch shuffle seeded
/// by the fit seed.
template <class Net, class Input>
TrainingHistory fit(Net& net, const Input& x, const Eigen::VectorXd& y, const FitOptions& options,
                    const DevData<Input>* dev = nullptr) {
  using Scalar = typename Net::Scalar;
  const auto n = static_cast<std::size_t>(y.size());
  if (n == 0) throw Error(ErrorKind::EmptyInput, "no training samples");
  if (options.batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch size must be positive");
  if (options.early_stopping && (!dev || dev->y.empty())) {
    throw Error(ErrorKind::InvalidArgument, "early stopping needs a non-empty dev set");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  TrainingHistory history;
  history.initial_loss = static_cast<double>(net.loss(x, order, y));

  Adam<Scalar> adam(net.parameters(), {.learning_rate = options.learning_rate});
  Rng shuffle_rng(derive_seed(options.seed, 0x5eed));
  Rng dropout_rng(derive_seed(options.seed, 0xd0d0));

  double best = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<Mat<Scalar>> snapshot;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t count = std::min(options.batch_size, n - start);
      const std::span<const std::size_t> rows(order.data() + start, count);
      zero_grads(net.parameters());
      const double batch_loss = static_cast<double>(net.loss_and_gradient(x, rows, y, &dropout_rng));
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::DivergedLoss, "non-finite loss in epoch " + std::to_string(epoch));
      }
      epoch_loss += batch_loss * static_cast<double>(count);
      adam.step(net.parameters());
    }
    history.loss.push_back(epoch_loss / static_cast<double>(n));

    if (!dev || dev->y.empty()) continue;
    const double acc = accuracy_of<Scalar>(net.scores(*dev->x), dev->y);
    history.dev_accuracy.push_back(acc);
    if (!options.early_stopping) continue;

    const auto& es = *options.early_stopping;
    if (acc > best + es.tolerance) {
      best = acc;
      since_best = 0;
      history.best_epoch = epoch;
      history.best_dev_accuracy = acc;
      snapshot.clear();
      for (const auto& p : net.parameters()) snapshot.push_back(p.value);
    } else if (++since_best >= es.patience) {
      history.stopped_early = true;
      break;
    }
  }
  if (options.early_stopping && options.early_stopping->restore_best && !snapshot.empty()) {
    auto& params = net.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) params[k].value = snapshot[k];
  }
  return history;
}

}  // namespace fnd::nn
