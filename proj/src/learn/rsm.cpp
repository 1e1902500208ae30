#include "wcetrange/learn/rsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wcetrange/numerics/logistic.hpp"
#include "wcetrange/numerics/stats.hpp"

namespace wcetrange::learn {

std::size_t ReducedDataset::count(Label l) const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [l](const LabelledRow& r) { return r.label == l; }));
}

ReducedDataset project(const LabelledDataset& d, const TaskSet& ts, const std::vector<std::size_t>& keep) {
  ReducedDataset out;
  for (auto pos : keep) {
    const auto task = d.columns.at(pos);
    const auto& t = ts.tasks.at(task);
    out.columns.push_back(task);
    const double lo = static_cast<double>(t.wcet_min.ticks());
    const double hi = static_cast<double>(t.wcet_max.ticks());
    out.scaling.push_back({lo, hi > lo ? hi - lo : 1.0});
    out.bounds.push_back({lo, hi});
  }
  out.rows.reserve(d.rows.size());
  for (const auto& row : d.rows) {
    LabelledRow r;
    r.label = row.label;
    for (auto pos : keep) r.wcets.push_back(row.wcets.at(pos));
    out.rows.push_back(std::move(r));
  }
  return out;
}

std::vector<Term> full_term_pool(std::size_t columns) {
  std::vector<Term> pool{{TermKind::intercept, 0, 0}};
  for (std::size_t i = 0; i < columns; ++i) pool.push_back({TermKind::linear, i, 0});
  for (std::size_t i = 0; i < columns; ++i) pool.push_back({TermKind::quadratic, i, 0});
  for (std::size_t i = 0; i < columns; ++i)
    for (std::size_t j = i + 1; j < columns; ++j) pool.push_back({TermKind::interaction, i, j});
  return pool;
}

namespace {

double term_value(const Term& t, std::span<const double> s) {
  switch (t.kind) {
    case TermKind::intercept: return 1.0;
    case TermKind::linear: return s[t.i];
    case TermKind::quadratic: return s[t.i] * s[t.i];
    case TermKind::interaction: return s[t.i] * s[t.j];
  }
  return 0.0;
}

}  // namespace

std::vector<double> RsmModel::to_scaled(std::span<const double> raw) const {
  std::vector<double> s(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) s[i] = (raw[i] - scaling[i].offset) / scaling[i].scale;
  return s;
}

double RsmModel::logit_scaled(std::span<const double> scaled) const {
  double eta = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) eta += coefficients[t] * term_value(terms[t], scaled);
  return eta;
}

double RsmModel::logit(std::span<const double> raw) const {
  const auto s = to_scaled(raw);
  return logit_scaled(s);
}

double RsmModel::miss_probability(std::span<const double> raw) const { return numerics::sigmoid(logit(raw)); }

std::vector<double> RsmModel::logit_gradient(std::span<const double> raw) const {
  const auto s = to_scaled(raw);
  std::vector<double> g(s.size(), 0.0);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const double c = coefficients[t];
    const auto& term = terms[t];
    switch (term.kind) {
      case TermKind::intercept: break;
      case TermKind::linear: g[term.i] += c; break;
      case TermKind::quadratic: g[term.i] += 2.0 * c * s[term.i]; break;
      case TermKind::interaction:
        g[term.i] += c * s[term.j];
        g[term.j] += c * s[term.i];
        break;
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) g[i] /= scaling[i].scale;
  return g;
}

RsmModel fit_logistic(const std::vector<std::size_t>& columns, const std::vector<ColumnScaling>& scaling,
                      std::vector<Term> terms, std::span<const LabelledRow> rows) {
  if (rows.size() <= terms.size())
    throw std::invalid_argument("logistic fit needs more rows (" + std::to_string(rows.size()) + ") than terms (" +
                                std::to_string(terms.size()) + ")");
  std::size_t unsafe = 0;
  for (const auto& r : rows) unsafe += r.label == Label::unsafe;
  if (unsafe == 0 || unsafe == rows.size()) throw std::invalid_argument("logistic fit needs both safe and unsafe rows");

  RsmModel model;
  model.columns = columns;
  model.scaling = scaling;
  model.terms = std::move(terms);

  numerics::DesignMatrix dm;
  dm.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(model.terms.size()));
  dm.y.resize(static_cast<Eigen::Index>(rows.size()));
  std::vector<double> raw(columns.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) raw[c] = static_cast<double>(rows[r].wcets[c].ticks());
    const auto s = model.to_scaled(raw);
    for (std::size_t t = 0; t < model.terms.size(); ++t)
      dm.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = term_value(model.terms[t], s);
    dm.y[static_cast<Eigen::Index>(r)] = rows[r].label == Label::unsafe ? 1.0 : 0.0;
  }

  auto separated = [&](const numerics::LogisticFit& fit) {
    const Eigen::VectorXd eta = dm.x * fit.coefficients;
    double min_margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eta.size(); ++i) min_margin = std::min(min_margin, (2.0 * dm.y[i] - 1.0) * eta[i]);
    return min_margin > 8.0;
  };

  numerics::LogisticFit fit;
  bool need_ridge = false;
  try {
    fit = numerics::irls_fit(dm, 0.0);
    need_ridge = !fit.converged || !fit.coefficients.allFinite() || separated(fit);
  } catch (const numerics::SingularSystem&) {
    need_ridge = true;
  }
  if (need_ridge) {
    fit = numerics::irls_fit(dm, 1e-6);
    model.stabilized = true;
  }
  model.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
  model.log_likelihood = fit.log_likelihood;
  return model;
}

RsmModel fit_logistic(const ReducedDataset& d, std::vector<Term> terms) {
  return fit_logistic(d.columns, d.scaling, std::move(terms), d.rows);
}

RsmModel stepwise_select(const ReducedDataset& d) {
  const auto pool = full_term_pool(d.columns.size());
  std::vector<Term> current{pool.front()};
  RsmModel best = fit_logistic(d, current);
  double best_aic = numerics::aic(best.log_likelihood, current.size());

  auto try_terms = [&](std::vector<Term> terms, RsmModel& out, double& out_aic) {
    std::sort(terms.begin(), terms.end(), [&](const Term& a, const Term& b) {
      return std::find(pool.begin(), pool.end(), a) < std::find(pool.begin(), pool.end(), b);
    });
    try {
      out = fit_logistic(d, terms);
    } catch (const std::invalid_argument&) {
      return false;
    }
    out_aic = numerics::aic(out.log_likelihood, terms.size());
    return true;
  };

  for (std::size_t step = 0; step < 4 * pool.size(); ++step) {
    RsmModel step_best;
    double step_aic = best_aic;
    bool improved = false;
    for (const auto& term : pool) {
      const bool present = std::find(current.begin(), current.end(), term) != current.end();
      if (term.kind == TermKind::intercept && present) continue;
      std::vector<Term> candidate = current;
      if (present) {
        candidate.erase(std::find(candidate.begin(), candidate.end(), term));
      } else {
        candidate.push_back(term);
      }
      RsmModel m;
      double a = 0.0;
      if (try_terms(candidate, m, a) && a < step_aic) {
        step_aic = a;
        step_best = std::move(m);
        improved = true;
      }
    }
    if (!improved) break;
    best = std::move(step_best);
    best_aic = step_aic;
    current = best.terms;
  }
  return best;
}

}  // namespace wcetrange::learn
