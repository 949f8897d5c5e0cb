#include "fnd/eval/metrics.hpp"

#include <cmath>

#include "fnd/error.hpp"

namespace fnd {

namespace {

void check(std::span<const Label> pred, std::span<const Label> truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorKind::LengthMismatch, "predictions (" + std::to_string(pred.size()) + ") and truth (" +
                                               std::to_string(truth.size()) + ") differ in length");
  }
  if (truth.empty()) throw Error(ErrorKind::Empty, "no labels to score");
}

int axis(Label l) { return l == Label::Fake ? 0 : 1; }

}  // namespace

double accuracy(std::span<const Label> pred, std::span<const Label> truth) {
  check(pred, truth);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += pred[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

Eigen::Matrix2d confusion(std::span<const Label> pred, std::span<const Label> truth, bool normalize) {
  check(pred, truth);
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < truth.size(); ++i) m(axis(truth[i]), axis(pred[i])) += 1.0;
  return normalize ? normalize_rows(m) : m;
}

Eigen::Matrix2d normalize_rows(const Eigen::Matrix2d& counts) {
  Eigen::Matrix2d m = counts;
  for (int r = 0; r < 2; ++r) {
    const double total = m.row(r).sum();
    if (total > 0) m.row(r) /= total;
  }
  return m;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::Empty, "no values to aggregate");
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

}  // namespace fnd
