#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace wcetrange::numerics {

struct SimplexConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double tol = 1e-8;  // on the simplex diameter
  std::size_t max_iter = 2000;
  double initial_step = 0.05;  // relative; absolute 0.00025 for zero coordinates
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t iterations = 0;
  bool converged = false;  // false when max_iter ended the search
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free minimization of f starting from the simplex around x0.
SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, const SimplexConfig& cfg = {});

}  // namespace wcetrange::numerics
