#include "fnd/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fnd/error.hpp"

namespace fnd {

double gini_impurity(double weight_true, double weight_fake) {
  const double w = weight_true + weight_fake;
  if (w <= 0) return 0.0;
  const double p = weight_fake / w;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

TreeData::TreeData(const SparseRowMatrix& x) : rows_(&x), cols_(x) { cols_.makeCompressed(); }

namespace {

double coeff(const SparseRowMatrix& x, Eigen::Index row, std::int32_t feature) {
  const auto* outer = x.outerIndexPtr();
  const auto* inner = x.innerIndexPtr();
  const std::int32_t begin = outer[row];
  const std::int32_t end = x.isCompressed() ? outer[row + 1] : begin + x.innerNonZeroPtr()[row];
  const auto* it = std::lower_bound(inner + begin, inner + end, feature);
  if (it == inner + end || *it != feature) return 0.0;
  return x.valuePtr()[it - inner];
}

struct Stats {
  double w = 0.0;
  double s = 0.0;

  void add(double weight, double target) {
    w += weight;
    s += weight * target;
  }
};

/// Split-quality proxy: a larger sum over the children means a larger
/// impurity decrease (Gini: sum_c w_c^2 / W; squared error: S^2 / W).
double proxy(const Stats& st, SplitCriterion criterion) {
  if (st.w <= 0) return 0.0;
  if (criterion == SplitCriterion::Gini) {
    const double w0 = st.w - st.s;
    return (w0 * w0 + st.s * st.s) / st.w;
  }
  return st.s * st.s / st.w;
}

struct Entry {
  double value;
  std::int32_t sample;
};

struct Candidate {
  bool found = false;
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
};

class Grower {
 public:
  Grower(const TreeData& data, std::span<const double> targets, std::span<const double> weights,
         const TreeGrowth& growth, Rng& rng)
      : x_(data.rows()), cols_(data.cols()), t_(targets), w_(weights), g_(growth), rng_(rng) {
    const auto n = static_cast<std::size_t>(x_.rows());
    if (targets.size() != n || weights.size() != n) {
      throw Error(ErrorKind::LengthMismatch, "targets/weights do not match the number of rows");
    }
    features_ = static_cast<std::size_t>(x_.cols());
    mtry_ = (g_.max_features == 0 || g_.max_features > features_) ? features_ : g_.max_features;
    mark_.assign(n, 0);
    perm_.resize(features_);
    std::iota(perm_.begin(), perm_.end(), 0);
    nnz_total_ = static_cast<double>(x_.nonZeros());
    for (std::size_t f = 0; f < features_; ++f) nonempty_features_ += cols_.outerIndexPtr()[f + 1] > cols_.outerIndexPtr()[f];
  }

  std::vector<TreeNode> run() {
    std::vector<std::int32_t> samples;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (w_[i] > 0) samples.push_back(static_cast<std::int32_t>(i));
    }
    std::vector<TreeNode> nodes(1);
    if (samples.empty()) return nodes;

    struct Work {
      std::int32_t node;
      std::size_t begin, end, depth;
    };
    std::vector<Work> stack{{0, 0, samples.size(), 0}};
    while (!stack.empty()) {
      const Work work = stack.back();
      stack.pop_back();
      const std::span<std::int32_t> node_samples(samples.data() + work.begin, work.end - work.begin);
      Stats parent;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (auto i : node_samples) {
        parent.add(w_[i], t_[i]);
        lo = std::min(lo, t_[i]);
        hi = std::max(hi, t_[i]);
      }
      nodes[work.node].value = parent.s / parent.w;
      const bool depth_reached = g_.max_depth && work.depth >= *g_.max_depth;
      if (depth_reached || lo == hi || parent.w < 2 * g_.min_samples_leaf) continue;

      const Candidate best = find_split(node_samples, parent);
      if (!best.found) continue;

      const auto mid = std::partition(node_samples.begin(), node_samples.end(), [&](std::int32_t i) {
        return coeff(x_, i, best.feature) <= best.threshold;
      });
      const std::size_t split = work.begin + static_cast<std::size_t>(mid - node_samples.begin());
      const auto left = static_cast<std::int32_t>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      nodes[work.node].feature = best.feature;
      nodes[work.node].threshold = best.threshold;
      nodes[work.node].left = left;
      nodes[work.node].right = left + 1;
      stack.push_back({left + 1, split, work.end, work.depth + 1});
      stack.push_back({left, work.begin, split, work.depth + 1});
    }
    return nodes;
  }

 private:
  Candidate find_split(std::span<std::int32_t> node_samples, const Stats& parent) {
    double node_nnz = 0;
    for (auto i : node_samples) node_nnz += static_cast<double>(x_.outerIndexPtr()[i + 1] - x_.outerIndexPtr()[i]);
    const double seen = std::max(1.0, std::min(static_cast<double>(nonempty_features_), node_nnz));
    // Expected work: column scans visit ~mtry * nonempty / |U| columns of
    // average length nnz / nonempty; gathering sorts the node's entries.
    const double column_cost = static_cast<double>(mtry_) * nnz_total_ / seen;
    const double gather_cost = node_nnz * (1.0 + std::log2(node_nnz + 1.0));
    return column_cost <= gather_cost ? split_by_columns(node_samples, parent) : split_by_gather(node_samples, parent);
  }

  Candidate split_by_columns(std::span<std::int32_t> node_samples, const Stats& parent) {
    ++stamp_;
    for (auto i : node_samples) mark_[i] = stamp_;
    Candidate best;
    std::size_t evaluated = 0;
    for (std::size_t k = 0; k < features_ && evaluated < mtry_; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng_.below(features_ - k));
      std::swap(perm_[k], perm_[j]);
      const auto f = perm_[k];
      entries_.clear();
      for (SparseColMatrix::InnerIterator it(cols_, f); it; ++it) {
        if (mark_[it.row()] == stamp_) entries_.push_back({it.value(), static_cast<std::int32_t>(it.row())});
      }
      if (entries_.empty()) continue;
      std::sort(entries_.begin(), entries_.end(),
                [](const Entry& a, const Entry& b) { return a.value < b.value || (a.value == b.value && a.sample < b.sample); });
      if (evaluate(static_cast<std::int32_t>(f), entries_, node_samples.size(), parent, best)) ++evaluated;
    }
    return best;
  }

  Candidate split_by_gather(std::span<std::int32_t> node_samples, const Stats& parent) {
    struct Keyed {
      std::int32_t feature;
      Entry entry;
    };
    std::vector<Keyed> all;
    for (auto i : node_samples) {
      for (SparseRowMatrix::InnerIterator it(x_, i); it; ++it) all.push_back({static_cast<std::int32_t>(it.col()), {it.value(), i}});
    }
    std::sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
      if (a.feature != b.feature) return a.feature < b.feature;
      if (a.entry.value != b.entry.value) return a.entry.value < b.entry.value;
      return a.entry.sample < b.entry.sample;
    });
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t a = 0; a < all.size();) {
      std::size_t b = a;
      while (b < all.size() && all[b].feature == all[a].feature) ++b;
      spans.emplace_back(a, b);
      a = b;
    }
    Candidate best;
    std::size_t evaluated = 0;
    for (std::size_t k = 0; k < spans.size() && evaluated < mtry_; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng_.below(spans.size() - k));
      std::swap(spans[k], spans[j]);
      entries_.clear();
      for (std::size_t e = spans[k].first; e < spans[k].second; ++e) entries_.push_back(all[e].entry);
      if (evaluate(all[spans[k].first].feature, entries_, node_samples.size(), parent, best)) ++evaluated;
    }
    return best;
  }

  /// Sweeps the sorted non-zero entries of one feature with the implicit
  /// zero block in place. Returns false when the feature is constant.
  bool evaluate(std::int32_t feature, const std::vector<Entry>& entries, std::size_t node_count, const Stats& parent,
                Candidate& best) const {
    Stats nonzero;
    for (const auto& e : entries) nonzero.add(w_[e.sample], t_[e.sample]);
    const bool has_zero = entries.size() < node_count;
    const Stats zero{parent.w - nonzero.w, parent.s - nonzero.s};
    if (!has_zero && entries.front().value == entries.back().value) return false;

    const double base = proxy(parent, g_.criterion);
    Stats left;
    bool zero_done = !has_zero;
    double prev = 0.0;
    bool have_prev = false;
    auto boundary = [&](double next) {
      if (!have_prev || next == prev) return;
      const Stats right{parent.w - left.w, parent.s - left.s};
      if (left.w < g_.min_samples_leaf || right.w < g_.min_samples_leaf) return;
      const double gain = proxy(left, g_.criterion) + proxy(right, g_.criterion) - base;
      if (gain > best.gain) {
        double thr = prev + (next - prev) / 2;
        if (thr >= next) thr = prev;
        best = {true, feature, thr, gain};
      }
    };
    auto push_zero = [&] {
      boundary(0.0);
      left.w += zero.w;
      left.s += zero.s;
      prev = 0.0;
      have_prev = true;
      zero_done = true;
    };
    for (const auto& e : entries) {
      if (!zero_done && e.value > 0) push_zero();
      boundary(e.value);
      left.add(w_[e.sample], t_[e.sample]);
      prev = e.value;
      have_prev = true;
    }
    if (!zero_done) push_zero();
    return true;
  }

  const SparseRowMatrix& x_;
  const SparseColMatrix& cols_;
  std::span<const double> t_;
  std::span<const double> w_;
  const TreeGrowth& g_;
  Rng& rng_;
  std::size_t features_ = 0;
  std::size_t mtry_ = 0;
  std::size_t nonempty_features_ = 0;
  double nnz_total_ = 0;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<std::int32_t> perm_;
  std::vector<Entry> entries_;
};

}  // namespace

DecisionTree DecisionTree::grow(const TreeData& data, std::span<const double> targets, std::span<const double> weights,
                                const TreeGrowth& growth, Rng& rng) {
  return DecisionTree(Grower(data, targets, weights, growth, rng).run());
}

double DecisionTree::predict(const SparseRowMatrix& x, Eigen::Index row) const {
  std::size_t k = 0;
  while (nodes_[k].feature >= 0) {
    const auto& node = nodes_[k];
    if (node.feature >= x.cols()) throw Error(ErrorKind::ShapeMismatch, "feature index outside the input width");
    k = static_cast<std::size_t>(coeff(x, row, node.feature) <= node.threshold ? node.left : node.right);
  }
  return nodes_[k].value;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    deepest = std::max(deepest, d[k]);
    if (nodes_[k].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[k].left)] = d[k] + 1;
      d[static_cast<std::size_t>(nodes_[k].right)] = d[k] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

}  // namespace fnd
