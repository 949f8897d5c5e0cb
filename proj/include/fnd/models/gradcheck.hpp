#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "fnd/models/nn.hpp"

namespace fnd::nn {

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_row = 0;
  Eigen::Index worst_col = 0;
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
/// gradient is ~0 from dividing round-off by round-off.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares analytic gradients of every trainable parameter against central
/// finite differences of net.loss at the given step.
template <class Net, class Input>
GradientCheckResult gradient_check(Net& net, const Input& x, std::span<const std::size_t> rows,
                                   const Eigen::VectorXd& y, double step = 1e-5) {
  auto& params = net.parameters();
  zero_grads(params);
  net.loss_and_gradient(x, rows, y, nullptr);
  GradientCheckResult result;
  for (auto& p : params) {
    if (!p.trainable) continue;
    for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
      for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
        const auto saved = p.value(r, c);
        p.value(r, c) = saved + step;
        const double up = static_cast<double>(net.loss(x, rows, y));
        p.value(r, c) = saved - step;
        const double down = static_cast<double>(net.loss(x, rows, y));
        p.value(r, c) = saved;
        const double numeric = (up - down) / (2 * step);
        const double err = relative_error(static_cast<double>(p.grad(r, c)), numeric);
        if (err > result.max_relative_error) result = {err, p.name, r, c};
      }
    }
  }
  return result;
}

}  // namespace fnd::nn
