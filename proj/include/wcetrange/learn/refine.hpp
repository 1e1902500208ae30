#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wcetrange/dataset.hpp"
#include "wcetrange/learn/border.hpp"
#include "wcetrange/learn/rsm.hpp"
#include "wcetrange/numerics/forest.hpp"
#include "wcetrange/task_model.hpp"

namespace wcetrange::learn {

enum class SamplingMode { distance, uniform };

struct RefineConfig {
  std::size_t ns = 100;  // WCET samples per solution per refinement
  std::size_t nl = 100;  // maximum refinements
  double pt = 0.99;      // stop once cross-validated precision exceeds this
  std::size_t k_folds = 10;
  std::size_t r_candidates = 100;
  std::uint64_t seed = 0;
  SamplingMode sampling = SamplingMode::distance;
  bool restepwise = false;  // re-run term selection on every refinement
  unsigned workers = 1;
};

/// Throws std::invalid_argument on out-of-range settings.
void validate(const RefineConfig& cfg);

/// Confusion counts with safe as the positive class.
struct CrossValidation {
  std::size_t tp = 0;
  std::size_t fp = 0;  // unsafe rows classified safe
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 1.0;
  bool no_positives = false;  // nothing classified safe; precision set to 1 by convention

  double recall() const;
};

/// Shuffled k-way split. Each fold is classified by a model with `terms`
/// fitted on the other folds and thresholded by select_probability on them.
/// A training split that cannot be fitted (one label only) classifies its
/// held-out fold unsafe. Requires k >= 2 and |rows| >= k.
CrossValidation kfold_precision(const std::vector<Term>& terms, const ReducedDataset& d, std::size_t k, Rng& rng);
/// Same with an explicit fold index per row (values in [0, k)).
CrossValidation kfold_precision(const std::vector<Term>& terms, const ReducedDataset& d,
                                const std::vector<std::size_t>& fold_of, std::size_t k);

/// Positions whose importance exceeds the mean importance 1/|F|.
std::vector<std::size_t> select_important(std::span<const double> importance);

/// Random-forest reduction to the columns with above-average importance. A
/// single-column dataset is passed through untouched; if no column clears the
/// threshold every column is kept. Throws std::invalid_argument on a
/// single-label dataset.
ReducedDataset reduce_dimension(const LabelledDataset& d, const TaskSet& ts, const numerics::ForestConfig& cfg,
                                Rng& rng);

struct RefinementRecord {
  std::size_t refinement;  // 1-based
  std::size_t dataset_size;
  double p;
  double precision;
  std::size_t false_safe;  // training rows; always 0 unless the audit fails
};

enum class StopReason { precision_reached, budget_exhausted, no_refinement };

struct RefineResult {
  SafeBorder border;
  ReducedDataset dataset;
  std::vector<RefinementRecord> history;
  StopReason stop = StopReason::no_refinement;
  std::optional<CrossValidation> last_cv;
};

/// Adds ns samples per solution of `population` per refinement, refits the
/// model on the current term set, reselects p and stops once the k-fold
/// precision exceeds pt. Uncertain tasks outside d.columns are drawn
/// uniformly from their original ranges for each simulation. Bounds are never
/// changed.
RefineResult refine(const ReducedDataset& d, const SafeBorder& initial, std::span<const ArrivalSequence> population,
                    const TaskSet& ts, const RefineConfig& cfg);

}  // namespace wcetrange::learn
