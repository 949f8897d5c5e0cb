#include "fnd/models/common.hpp"

#include "fnd/error.hpp"

namespace fnd {

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::Svm: return "svm";
    case Algorithm::RandomForest: return "rf";
    case Algorithm::Gbt: return "gbt";
    case Algorithm::Mlp: return "mlp";
    case Algorithm::Cnn: return "cnn";
    case Algorithm::Lstm: return "lstm";
    case Algorithm::Constant: return "constant";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  for (auto a : {Algorithm::Svm, Algorithm::RandomForest, Algorithm::Gbt, Algorithm::Mlp, Algorithm::Cnn, Algorithm::Lstm,
                 Algorithm::Constant}) {
    if (text == to_string(a)) return a;
  }
  if (text == "random_forest") return Algorithm::RandomForest;
  throw Error(ErrorKind::InvalidArgument, "unknown algorithm '" + std::string(text) + "'");
}

Prediction prediction_from_scores(Eigen::VectorXd scores) {
  Prediction p;
  p.labels.reserve(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) p.labels.push_back(label_from_score(scores[i]));
  p.scores = std::move(scores);
  return p;
}

Eigen::VectorXd to_targets(std::span<const Label> labels) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) t[static_cast<Eigen::Index>(i)] = labels[i] == Label::Fake ? 1.0 : 0.0;
  return t;
}

void require_two_classes(std::span<const Label> labels) {
  bool fake = false;
  bool real = false;
  for (auto l : labels) (l == Label::Fake ? fake : real) = true;
  if (!fake || !real) throw Error(ErrorKind::SingleClassInput, "training labels contain a single class");
}

}  // namespace fnd
