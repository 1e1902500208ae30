#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wcetrange/learn/rsm.hpp"
#include "wcetrange/random.hpp"

namespace wcetrange::learn {

inline constexpr double kProbabilityFloor = 1e-9;
inline constexpr double kProbabilityCap = 0.999999;
inline constexpr double kProbabilityTolerance = 1e-6;

/// Iso-probability contour of a miss model. Points whose predicted miss
/// probability is at most p are classified safe.
struct SafeBorder {
  RsmModel model;
  double p = 0.5;

  bool is_safe(std::span<const double> raw) const;
  bool is_safe(const LabelledRow& row) const;
};

/// Unsafe rows that `border` classifies safe.
std::size_t count_false_safe(const SafeBorder& border, std::span<const LabelledRow> rows);

/// Largest p (bisection to kProbabilityTolerance, within [floor, cap]) for
/// which no unsafe row of `rows` is classified safe.
double select_probability(const RsmModel& m, std::span<const LabelledRow> rows);
double select_probability(const RsmModel& m, const ReducedDataset& d);

/// Running totals over every select_probability call in this process, so
/// callers can assert the no-false-safe guarantee held everywhere.
struct ProbabilityAudit {
  std::size_t calls = 0;
  std::size_t violations = 0;  // calls that left an unsafe row in the safe region
};
ProbabilityAudit probability_audit();
void reset_probability_audit();

struct ImbalanceConfig {
  /// Values the other columns are held at when intersecting the contour with
  /// one axis; defaults to each column's lower bound.
  std::optional<std::vector<double>> slice;
};

struct ImbalanceResult {
  ReducedDataset dataset;
  double p_u = kProbabilityCap;
};

/// Finds the smallest p_u classifying every safe row safe, moves each column's
/// upper bound down to where the p_u contour crosses that axis, and drops
/// rows outside the shrunk box. Bounds never grow.
ImbalanceResult handle_imbalance(const ReducedDataset& d, const RsmModel& m, const ImbalanceConfig& cfg = {});

/// Smallest t in (0, t_max] where a*t^2 + b*t + c changes sign from <= 0 to
/// > 0, given c <= 0; t = 0 when c == 0 and the value rises. Empty if none.
std::optional<double> first_crossing(double a, double b, double c, double t_max);

/// |logit(q(x)) - logit(p)| / |grad logit(q)(x)|: first-order distance in
/// ticks from x to the border.
double contour_distance(const SafeBorder& border, std::span<const double> raw);

/// Euclidean distance in ticks to the nearest border point, by penalized
/// Nelder-Mead. Slow; used to check contour_distance.
double contour_distance_exact(const SafeBorder& border, std::span<const double> raw);

/// Closest-to-border candidate among r uniform integer draws inside `bounds`.
std::vector<Time> distance_sample(const SafeBorder& border, const std::vector<Bounds>& bounds, std::size_t r,
                                  Rng& rng);

/// Point on the border (or on the box face when the border lies outside the
/// box) maximizing prod(w_j - lo_j). Rays from the lower corner are searched
/// with multi-start Nelder-Mead over their direction. Throws std::domain_error
/// if the lower corner itself is unsafe.
std::vector<double> best_size_point(const SafeBorder& border, const std::vector<Bounds>& bounds);

/// prod(w_j - lo_j).
double hyperbox_volume(std::span<const double> point, const std::vector<Bounds>& bounds);

}  // namespace wcetrange::learn
