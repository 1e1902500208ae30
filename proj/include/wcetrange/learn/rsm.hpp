#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "wcetrange/dataset.hpp"
#include "wcetrange/task_model.hpp"

namespace wcetrange::learn {

/// Closed interval of WCET values in ticks.
struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Bounds&) const = default;
};

/// scaled = (raw - offset) / scale; maps a task's original WCET range to [0, 1].
struct ColumnScaling {
  double offset = 0.0;
  double scale = 1.0;
  bool operator==(const ColumnScaling&) const = default;
};

/// Dataset restricted to the WCET columns that matter, together with the
/// current search box.
struct ReducedDataset {
  std::vector<std::size_t> columns;     // retained task indices
  std::vector<ColumnScaling> scaling;   // from the original WCET ranges; fixed
  std::vector<Bounds> bounds;           // lo = wmin; hi shrinks during imbalance handling
  std::vector<LabelledRow> rows;        // wcets aligned with `columns`
  std::vector<double> importance;       // per original column; empty when reduction was bypassed

  std::size_t count(Label l) const;
};

/// Projects `d` onto `keep` (positions into d.columns) with full original bounds.
ReducedDataset project(const LabelledDataset& d, const TaskSet& ts, const std::vector<std::size_t>& keep);

enum class TermKind { intercept, linear, quadratic, interaction };

struct Term {
  TermKind kind = TermKind::intercept;
  std::size_t i = 0;  // column position within the model
  std::size_t j = 0;  // second column for interactions (i < j)
  auto operator<=>(const Term&) const = default;
};

/// Intercept, then linear, quadratic and pairwise interaction terms.
std::vector<Term> full_term_pool(std::size_t columns);

/// Second-order response-surface logistic model of the deadline-miss
/// probability. Coefficients act on scaled column values.
struct RsmModel {
  std::vector<std::size_t> columns;
  std::vector<ColumnScaling> scaling;
  std::vector<Term> terms;
  std::vector<double> coefficients;
  bool stabilized = false;  // ridge fallback was needed (separation or singular fit)
  double log_likelihood = 0.0;

  std::vector<double> to_scaled(std::span<const double> raw) const;
  double logit_scaled(std::span<const double> scaled) const;
  /// log(q / (1 - q)) for a raw WCET vector in ticks.
  double logit(std::span<const double> raw) const;
  double miss_probability(std::span<const double> raw) const;
  /// Gradient of logit() with respect to raw ticks.
  std::vector<double> logit_gradient(std::span<const double> raw) const;
};

/// Maximum-likelihood fit of `terms` on rows (label unsafe = 1). Falls back to
/// a ridge penalty of 1e-6 and sets `stabilized` when the plain fit is
/// singular, does not converge or separates the data completely.
/// Throws std::invalid_argument without both labels or with |rows| <= |terms|.
RsmModel fit_logistic(const std::vector<std::size_t>& columns, const std::vector<ColumnScaling>& scaling,
                      std::vector<Term> terms, std::span<const LabelledRow> rows);
RsmModel fit_logistic(const ReducedDataset& d, std::vector<Term> terms);

/// Bidirectional stepwise AIC search over the full term pool, starting from
/// the intercept-only model.
RsmModel stepwise_select(const ReducedDataset& d);

}  // namespace wcetrange::learn
