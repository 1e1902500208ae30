#include "wcetrange/learn/refine.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "wcetrange/parallel.hpp"
#include "wcetrange/scheduler.hpp"

namespace wcetrange::learn {

void validate(const RefineConfig& cfg) {
  if (cfg.ns < 1) throw std::invalid_argument("ns must be >= 1");
  if (cfg.k_folds < 2) throw std::invalid_argument("k_folds must be >= 2");
  if (cfg.r_candidates < 1) throw std::invalid_argument("r_candidates must be >= 1");
  if (!(cfg.pt > 0.0 && cfg.pt < 1.0)) throw std::invalid_argument("pt must lie in (0, 1)");
}

double CrossValidation::recall() const {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

CrossValidation kfold_precision(const std::vector<Term>& terms, const ReducedDataset& d,
                                const std::vector<std::size_t>& fold_of, std::size_t k) {
  if (fold_of.size() != d.rows.size()) throw std::invalid_argument("fold assignment does not cover the dataset");
  CrossValidation cv;
  std::vector<LabelledRow> train;
  for (std::size_t f = 0; f < k; ++f) {
    train.clear();
    for (std::size_t i = 0; i < d.rows.size(); ++i)
      if (fold_of[i] != f) train.push_back(d.rows[i]);

    std::optional<SafeBorder> border;
    try {
      auto m = fit_logistic(d.columns, d.scaling, terms, train);
      const double p = select_probability(m, train);
      border = SafeBorder{std::move(m), p};
    } catch (const std::invalid_argument&) {
      // one label or too few rows in the training split
    }
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
      if (fold_of[i] != f) continue;
      const auto& row = d.rows[i];
      const bool predicted_safe = border && border->is_safe(row);
      const bool actual_safe = row.label == Label::safe;
      if (predicted_safe) {
        ++(actual_safe ? cv.tp : cv.fp);
      } else {
        ++(actual_safe ? cv.fn : cv.tn);
      }
    }
  }
  if (cv.tp + cv.fp == 0) {
    cv.no_positives = true;
    cv.precision = 1.0;
  } else {
    cv.precision = static_cast<double>(cv.tp) / static_cast<double>(cv.tp + cv.fp);
  }
  return cv;
}

CrossValidation kfold_precision(const std::vector<Term>& terms, const ReducedDataset& d, std::size_t k, Rng& rng) {
  if (k < 2) throw std::invalid_argument("k-fold cross-validation needs k >= 2");
  if (d.rows.size() < k) throw std::invalid_argument("fewer rows than folds");
  std::vector<std::size_t> order(d.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of(d.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = i % k;
  return kfold_precision(terms, d, fold_of, k);
}

std::vector<std::size_t> select_important(std::span<const double> importance) {
  std::vector<std::size_t> keep;
  if (importance.empty()) return keep;
  const double mean = 1.0 / static_cast<double>(importance.size());
  for (std::size_t i = 0; i < importance.size(); ++i)
    if (importance[i] > mean) keep.push_back(i);
  return keep;
}

ReducedDataset reduce_dimension(const LabelledDataset& d, const TaskSet& ts, const numerics::ForestConfig& cfg,
                                Rng& rng) {
  const auto unsafe = d.count(Label::unsafe);
  if (unsafe == 0 || unsafe == d.rows.size())
    throw std::invalid_argument("feature reduction needs both safe and unsafe rows");
  const std::size_t cols = d.columns.size();
  std::vector<std::size_t> all(cols);
  std::iota(all.begin(), all.end(), 0);
  if (cols <= 1) return project(d, ts, all);

  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.rows.size()), static_cast<Eigen::Index>(cols));
  std::vector<int> y(d.rows.size());
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = static_cast<double>(d.rows[r].wcets[c].ticks());
    y[r] = d.rows[r].label == Label::unsafe ? 1 : 0;
  }
  const auto importance = numerics::forest_importance(x, y, cfg, rng);
  auto keep = select_important(importance);
  if (keep.empty()) keep = all;
  auto out = project(d, ts, keep);
  out.importance = importance;
  return out;
}

RefineResult refine(const ReducedDataset& d, const SafeBorder& initial, std::span<const ArrivalSequence> population,
                    const TaskSet& ts, const RefineConfig& cfg) {
  validate(cfg);
  RefineResult out;
  out.border = initial;
  out.dataset = d;
  if (cfg.nl == 0) return out;
  if (population.empty()) throw std::invalid_argument("refinement needs at least one arrival sequence");

  const auto uncertain = ts.uncertain_tasks();
  std::vector<bool> retained(ts.tasks.size(), false);
  for (auto c : d.columns) retained[c] = true;
  const std::size_t r = cfg.sampling == SamplingMode::uniform ? 1 : cfg.r_candidates;
  const std::size_t per_round = cfg.ns * population.size();
  auto& data = out.dataset;

  out.stop = StopReason::budget_exhausted;
  for (std::size_t it = 1; it <= cfg.nl; ++it) {
    std::vector<LabelledRow> fresh(per_round);
    const SafeBorder& border = out.border;
    parallel_for(per_round, cfg.workers, [&](std::size_t idx) {
      const std::size_t a = idx / cfg.ns;
      const std::size_t s = idx % cfg.ns;
      auto rng = make_stream(cfg.seed, {it, a, s});
      const auto v = distance_sample(border, data.bounds, r, rng);
      WcetAssignment w;
      w.values.reserve(ts.tasks.size());
      for (const auto& t : ts.tasks) w.values.push_back(t.wcet_min);
      for (std::size_t c = 0; c < d.columns.size(); ++c) w.values[d.columns[c]] = v[c];
      for (auto u : uncertain)
        if (!retained[u])
          w.values[u] = Time{uniform_int(rng, ts.tasks[u].wcet_min.ticks(), ts.tasks[u].wcet_max.ticks())};
      const auto sc = simulate(ts, population[a], w);
      fresh[idx] = LabelledRow{v, label(sc, ts)};
    });
    data.rows.insert(data.rows.end(), fresh.begin(), fresh.end());

    try {
      out.border.model = cfg.restepwise ? stepwise_select(data) : fit_logistic(data, out.border.model.terms);
    } catch (const std::invalid_argument&) {
      // still a single label inside the box; keep the previous model
    }
    out.border.p = select_probability(out.border.model, data);

    auto cv_rng = make_stream(cfg.seed, {it});
    const auto cv = kfold_precision(out.border.model.terms, data, cfg.k_folds, cv_rng);
    out.last_cv = cv;
    out.history.push_back({it, data.rows.size(), out.border.p, cv.precision, count_false_safe(out.border, data.rows)});
    if (cv.precision > cfg.pt) {
      out.stop = StopReason::precision_reached;
      break;
    }
  }
  return out;
}

}  // namespace wcetrange::learn
