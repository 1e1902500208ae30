#pragma once

#include <cstddef>
#include <span>

namespace wcetrange::numerics {

/// Akaike information criterion: 2k - 2 logLik.
inline double aic(double log_likelihood, std::size_t k) { return 2.0 * static_cast<double>(k) - 2.0 * log_likelihood; }

enum class Alternative {
  two_sided,
  less,     // a tends to be smaller than b
  greater,  // a tends to be larger than b
};

struct RankSumResult {
  double u = 0.0;  // U of sample a: #(a_i > b_j) + #(a_i == b_j) / 2
  double p_value = 1.0;
  bool exact = false;
};

/// Mann-Whitney U test with midranks for ties. Exact null distribution of the
/// rank sum when either sample has fewer than 8 values, otherwise the
/// tie-corrected normal approximation with continuity correction.
RankSumResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                             Alternative alternative = Alternative::two_sided);

}  // namespace wcetrange::numerics
