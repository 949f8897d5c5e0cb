#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "fnd/corpus.hpp"

namespace fnd {

/// Fraction of positions where pred equals truth. Throws LengthMismatch or Empty.
double accuracy(std::span<const Label> pred, std::span<const Label> truth);

/// 2x2 matrix, rows = true class, columns = predicted class, both ordered
/// (FAKE, TRUE). Normalized rows are fractions of their true class; a row
/// whose class is absent stays zero.
Eigen::Matrix2d confusion(std::span<const Label> pred, std::span<const Label> truth, bool normalize);

/// Row-normalizes a count matrix.
Eigen::Matrix2d normalize_rows(const Eigen::Matrix2d& counts);

struct MeanStd {
  double mean = 0.0;
  /// Population standard deviation (divides by n).
  double std = 0.0;
};

MeanStd mean_std(std::span<const double> values);

}  // namespace fnd
