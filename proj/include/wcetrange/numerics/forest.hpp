#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "wcetrange/random.hpp"

namespace wcetrange::numerics {

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_features = 0;  // candidate features per split; 0 means ceil(sqrt(|F|))
  std::size_t max_depth = 0;     // 0 means unlimited
  unsigned workers = 1;
};

/// Mean-decrease-in-impurity importance of each feature (column of `x`) for
/// the binary labels `y` (0/1), from bootstrap-bagged Gini trees. The result
/// sums to 1 unless no split was ever possible, in which case it is all zero.
/// Requires both classes to be present.
std::vector<double> forest_importance(const Eigen::MatrixXd& x, const std::vector<int>& y, const ForestConfig& cfg,
                                      Rng& rng);

}  // namespace wcetrange::numerics
