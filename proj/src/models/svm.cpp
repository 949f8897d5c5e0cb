#include "fnd/models/svm.hpp"

#include <cmath>
#include <numeric>

#include "fnd/error.hpp"
#include "fnd/models/nn.hpp"

namespace fnd {

std::string_view to_string(Kernel kernel) noexcept { return kernel == Kernel::Linear ? "linear" : "rbf"; }

Kernel parse_kernel(std::string_view text) {
  if (text == "linear") return Kernel::Linear;
  if (text == "rbf") return Kernel::Rbf;
  throw Error(ErrorKind::InvalidArgument, "unknown kernel '" + std::string(text) + "'");
}

void SvmConfig::validate() const {
  if (!(C > 0)) throw Error(ErrorKind::InvalidArgument, "C must be positive");
  if (!(gamma > 0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  if (!(learning_rate > 0)) throw Error(ErrorKind::InvalidArgument, "learning_rate must be positive");
  if (epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be at least 1");
  if (kernel == Kernel::Rbf && (rff_features == 0 || rff_features % 2 != 0)) {
    throw Error(ErrorKind::InvalidArgument, "rff_features must be a positive even number");
  }
}

RandomFourierMap::RandomFourierMap(std::size_t input_dim, std::size_t features, double gamma, std::uint64_t seed)
    : input_dim_(input_dim), features_(features), gamma_(gamma), seed_(seed) {
  if (features == 0 || features % 2 != 0) throw Error(ErrorKind::InvalidArgument, "rff_features must be a positive even number");
  if (!(gamma > 0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  const auto half = static_cast<Eigen::Index>(features / 2);
  const double sigma = std::sqrt(2.0 * gamma);
  frequencies_.resize(static_cast<Eigen::Index>(input_dim), half);
  for (Eigen::Index r = 0; r < frequencies_.rows(); ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    for (Eigen::Index c = 0; c < half; ++c) frequencies_(r, c) = static_cast<float>(sigma * rng.normal());
  }
}

namespace {

void finish_features(const Eigen::VectorXd& projection, double scale, Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index half = projection.size();
  for (Eigen::Index c = 0; c < half; ++c) {
    out[c] = scale * std::cos(projection[c]);
    out[half + c] = scale * std::sin(projection[c]);
  }
}

}  // namespace

Eigen::MatrixXd RandomFourierMap::transform(const SparseRowMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "input width differs from the feature map width");
  }
  const auto half = frequencies_.cols();
  const double scale = std::sqrt(2.0 / static_cast<double>(features_));
  // Rows are laid out as columns so each sample's features are contiguous.
  Eigen::MatrixXd out(static_cast<Eigen::Index>(features_), x.rows());
  Eigen::VectorXd projection(half);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    projection.setZero();
    for (SparseRowMatrix::InnerIterator it(x, r); it; ++it) {
      projection += it.value() * frequencies_.row(it.col()).transpose().cast<double>();
    }
    finish_features(projection, scale, out.col(r));
  }
  return out.transpose();
}

Eigen::VectorXd RandomFourierMap::transform(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "input width differs from the feature map width");
  }
  const Eigen::VectorXd projection = frequencies_.cast<double>().transpose() * x;
  Eigen::VectorXd out(static_cast<Eigen::Index>(features_));
  finish_features(projection, std::sqrt(2.0 / static_cast<double>(features_)), out);
  return out;
}

namespace {

struct SparseRows {
  const SparseRowMatrix& x;
  double dot(const Eigen::VectorXd& v, Eigen::Index i) const {
    double s = 0;
    for (SparseRowMatrix::InnerIterator it(x, i); it; ++it) s += v[it.col()] * it.value();
    return s;
  }
  void axpy(Eigen::VectorXd& v, Eigen::Index i, double a) const {
    for (SparseRowMatrix::InnerIterator it(x, i); it; ++it) v[it.col()] += a * it.value();
  }
  double squared_norm(Eigen::Index i) const { return x.row(i).squaredNorm(); }
  Eigen::Index cols() const { return x.cols(); }
};

/// Samples stored as columns.
struct DenseRows {
  const Eigen::MatrixXd& z;
  double dot(const Eigen::VectorXd& v, Eigen::Index i) const { return v.dot(z.col(i)); }
  void axpy(Eigen::VectorXd& v, Eigen::Index i, double a) const { v += a * z.col(i); }
  double squared_norm(Eigen::Index i) const { return z.col(i).squaredNorm(); }
  Eigen::Index cols() const { return z.rows(); }
};

/// Pegasos with projection onto the ball of radius 1 / sqrt(lambda). The
/// iterate is kept as scale * v so the shrink step is O(1).
template <class Rows>
void pegasos(const Rows& rows, const Eigen::VectorXd& y, const SvmConfig& config, Eigen::VectorXd& w, double& bias) {
  const auto n = static_cast<std::size_t>(y.size());
  const double lambda = 1.0 / (config.C * static_cast<double>(n));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(rows.cols());
  double vb = 0.0;
  double scale = 1.0;
  double norm2 = 0.0;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(derive_seed(config.seed, 0x57));
  double t = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (const auto i : order) {
      t += 1;
      const double eta = config.learning_rate / (lambda * t);
      double dot = rows.dot(v, i) + vb;
      const double margin = y[i] * scale * dot;
      const double shrink = 1.0 - eta * lambda;
      if (shrink <= 0) {
        v.setZero();
        vb = 0;
        scale = 1;
        norm2 = 0;
        dot = 0;
      } else {
        scale *= shrink;
      }
      if (margin < 1) {
        const double a = eta * y[i] / scale;
        rows.axpy(v, i, a);
        vb += a;
        norm2 += 2 * a * dot + a * a * (rows.squared_norm(i) + 1.0);
      }
      const double wn = scale * scale * norm2;
      if (wn * lambda > 1.0) scale *= std::sqrt(1.0 / (lambda * wn));
      if (scale < 1e-9) {
        v *= scale;
        vb *= scale;
        norm2 *= scale * scale;
        scale = 1;
      }
    }
  }
  w = scale * v;
  bias = scale * vb;
}

}  // namespace

LinearSvm LinearSvm::fit(const SparseRowMatrix& x, std::span<const Label> y, const SvmConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(ErrorKind::LengthMismatch, "rows and labels differ in count");
  require_two_classes(y);
  Eigen::VectorXd signs(x.rows());
  for (std::size_t i = 0; i < y.size(); ++i) signs[static_cast<Eigen::Index>(i)] = y[i] == Label::Fake ? 1.0 : -1.0;

  Eigen::VectorXd w;
  double bias = 0;
  const auto dim = static_cast<std::size_t>(x.cols());
  if (config.kernel == Kernel::Linear) {
    pegasos(SparseRows{x}, signs, config, w, bias);
    return LinearSvm(std::move(w), bias, dim, std::nullopt);
  }
  RandomFourierMap map(dim, config.rff_features, config.gamma, config.seed);
  const Eigen::MatrixXd z = map.transform(x).transpose();
  pegasos(DenseRows{z}, signs, config, w, bias);
  return LinearSvm(std::move(w), bias, dim, std::move(map));
}

Eigen::VectorXd LinearSvm::margins(const SparseRowMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "input width differs from the training width");
  }
  if (map_) return (map_->transform(x) * weights_).array() + bias_;
  return (x * weights_).array() + bias_;
}

Eigen::VectorXd LinearSvm::scores(const SparseRowMatrix& x) const {
  return margins(x).unaryExpr([](double m) { return nn::sigmoid(m); });
}

}  // namespace fnd
