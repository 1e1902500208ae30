#include "wcetrange/numerics/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wcetrange/parallel.hpp"

namespace wcetrange::numerics {

namespace {

double gini(double positives, double total) {
  if (total <= 0) return 0.0;
  const double p = positives / total;
  return 2.0 * p * (1.0 - p);
}

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& x, const std::vector<int>& y, std::size_t mtry, std::size_t max_depth, Rng& rng)
      : x_(x), y_(y), mtry_(mtry), max_depth_(max_depth), rng_(rng), importance_(static_cast<std::size_t>(x.cols()), 0.0) {}

  std::vector<double> grow(std::vector<std::size_t> sample) {
    split(sample, 0);
    return std::move(importance_);
  }

 private:
  void split(std::vector<std::size_t>& idx, std::size_t depth) {
    const double n = static_cast<double>(idx.size());
    double positives = 0;
    for (auto i : idx) positives += y_[i];
    if (positives == 0 || positives == n || idx.size() < 2) return;
    if (max_depth_ != 0 && depth >= max_depth_) return;

    const std::size_t n_features = static_cast<std::size_t>(x_.cols());
    std::vector<std::size_t> features(n_features);
    std::iota(features.begin(), features.end(), 0);
    for (std::size_t i = 0; i < mtry_; ++i) {
      auto j = static_cast<std::size_t>(
          uniform_int(rng_, static_cast<std::int64_t>(i), static_cast<std::int64_t>(n_features - 1)));
      std::swap(features[i], features[j]);
    }

    const double parent = n * gini(positives, n);
    double best_decrease = 0.0;
    std::size_t best_feature = n_features;
    double best_threshold = 0.0;
    std::vector<std::size_t> order(idx);
    for (std::size_t f = 0; f < mtry_; ++f) {
      const auto col = static_cast<Eigen::Index>(features[f]);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x_(a, col) < x_(b, col); });
      double left_pos = 0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left_pos += y_[order[i]];
        const double lv = x_(order[i], col);
        const double rv = x_(order[i + 1], col);
        if (!(lv < rv)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double decrease = parent - nl * gini(left_pos, nl) - nr * gini(positives - left_pos, nr);
        if (decrease > best_decrease) {
          best_decrease = decrease;
          best_feature = features[f];
          best_threshold = lv + (rv - lv) / 2.0;
        }
      }
    }
    if (best_feature == n_features) return;

    importance_[best_feature] += best_decrease;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    const auto col = static_cast<Eigen::Index>(best_feature);
    for (auto i : idx) (x_(i, col) <= best_threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    split(left, depth + 1);
    split(right, depth + 1);
  }

  const Eigen::MatrixXd& x_;
  const std::vector<int>& y_;
  std::size_t mtry_;
  std::size_t max_depth_;
  Rng& rng_;
  std::vector<double> importance_;
};

}  // namespace

std::vector<double> forest_importance(const Eigen::MatrixXd& x, const std::vector<int>& y, const ForestConfig& cfg,
                                      Rng& rng) {
  const auto n_rows = static_cast<std::size_t>(x.rows());
  const auto n_features = static_cast<std::size_t>(x.cols());
  if (y.size() != n_rows) throw std::invalid_argument("label count differs from row count");
  if (n_features == 0) throw std::invalid_argument("forest needs at least one feature");
  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == n_rows)
    throw std::invalid_argument("forest needs both classes");

  std::size_t mtry = cfg.max_features;
  if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
  mtry = std::min(mtry, n_features);

  const std::uint64_t base = rng();
  std::vector<std::vector<double>> per_tree(cfg.n_trees);
  parallel_for(cfg.n_trees, cfg.workers, [&](std::size_t t) {
    auto tree_rng = make_stream(base, {t});
    std::vector<std::size_t> sample(n_rows);
    for (auto& s : sample) s = static_cast<std::size_t>(uniform_int(tree_rng, 0, static_cast<std::int64_t>(n_rows - 1)));
    per_tree[t] = TreeGrower(x, y, mtry, cfg.max_depth, tree_rng).grow(std::move(sample));
  });

  std::vector<double> importance(n_features, 0.0);
  for (const auto& tree : per_tree)
    for (std::size_t f = 0; f < n_features; ++f) importance[f] += tree[f];
  const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (total > 0.0)
    for (auto& v : importance) v /= total;
  return importance;
}

}  // namespace wcetrange::numerics
