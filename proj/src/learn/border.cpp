#include "wcetrange/learn/border.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wcetrange/numerics/logistic.hpp"
#include "wcetrange/numerics/nelder_mead.hpp"

namespace wcetrange::learn {

namespace {

std::atomic<std::size_t> g_select_calls{0};
std::atomic<std::size_t> g_select_violations{0};

std::vector<double> raw_of(const LabelledRow& row) {
  std::vector<double> x(row.wcets.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(row.wcets[i].ticks());
  return x;
}

struct Quadratic {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// Exact coefficients of t -> logit_scaled(origin + t * dir).
Quadratic along(const RsmModel& m, std::span<const double> origin, std::span<const double> dir) {
  Quadratic q;
  for (std::size_t t = 0; t < m.terms.size(); ++t) {
    const double k = m.coefficients[t];
    const auto& term = m.terms[t];
    switch (term.kind) {
      case TermKind::intercept: q.c += k; break;
      case TermKind::linear:
        q.c += k * origin[term.i];
        q.b += k * dir[term.i];
        break;
      case TermKind::quadratic:
        q.c += k * origin[term.i] * origin[term.i];
        q.b += k * 2.0 * origin[term.i] * dir[term.i];
        q.a += k * dir[term.i] * dir[term.i];
        break;
      case TermKind::interaction:
        q.c += k * origin[term.i] * origin[term.j];
        q.b += k * (origin[term.i] * dir[term.j] + dir[term.i] * origin[term.j]);
        q.a += k * dir[term.i] * dir[term.j];
        break;
    }
  }
  return q;
}

// Real roots of a t^2 + b t + c in ascending order.
std::vector<double> roots(double a, double b, double c) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return {};
  if (std::abs(a) <= 1e-14 * scale) {
    if (b == 0.0) return {};
    return {-c / b};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
  std::vector<double> r;
  if (q != 0.0) {
    r = {q / a, c / q};
  } else {
    r = {-b / (2.0 * a)};
  }
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

bool SafeBorder::is_safe(std::span<const double> raw) const {
  return model.logit(raw) <= numerics::logit(p);
}

bool SafeBorder::is_safe(const LabelledRow& row) const { return is_safe(raw_of(row)); }

std::size_t count_false_safe(const SafeBorder& border, std::span<const LabelledRow> rows) {
  std::size_t n = 0;
  for (const auto& r : rows)
    if (r.label == Label::unsafe && border.is_safe(r)) ++n;
  return n;
}

double select_probability(const RsmModel& m, std::span<const LabelledRow> rows) {
  double min_unsafe_logit = std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (r.label == Label::unsafe) min_unsafe_logit = std::min(min_unsafe_logit, m.logit(raw_of(r)));
  auto feasible = [&](double p) { return numerics::logit(p) < min_unsafe_logit; };

  double p = kProbabilityCap;
  if (!feasible(kProbabilityCap)) {
    double lo = kProbabilityFloor;
    double hi = kProbabilityCap;
    if (feasible(lo)) {
      while (hi - lo > kProbabilityTolerance) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
      }
    }
    p = lo;
  }
  ++g_select_calls;
  if (!feasible(p)) ++g_select_violations;
  return p;
}

double select_probability(const RsmModel& m, const ReducedDataset& d) { return select_probability(m, d.rows); }

ProbabilityAudit probability_audit() { return {g_select_calls.load(), g_select_violations.load()}; }

void reset_probability_audit() {
  g_select_calls = 0;
  g_select_violations = 0;
}

std::optional<double> first_crossing(double a, double b, double c, double t_max) {
  if (c > 0.0) return std::nullopt;
  if (c == 0.0 && (b > 0.0 || (b == 0.0 && a > 0.0))) return 0.0;
  std::optional<double> hit;
  const auto r = roots(a, b, c);
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (std::abs(a) <= 1e-14 * scale) {
    if (b > 0.0 && !r.empty()) hit = r.front();
  } else if (r.size() == 2) {
    hit = a > 0.0 ? r[1] : r[0];
    if (a < 0.0 && *hit <= 0.0) hit.reset();
  }
  if (hit && *hit >= 0.0 && *hit <= t_max) return hit;
  return std::nullopt;
}

ImbalanceResult handle_imbalance(const ReducedDataset& d, const RsmModel& m, const ImbalanceConfig& cfg) {
  ImbalanceResult out;
  out.dataset = d;

  double max_safe_logit = -std::numeric_limits<double>::infinity();
  for (const auto& r : d.rows)
    if (r.label == Label::safe) max_safe_logit = std::max(max_safe_logit, m.logit(raw_of(r)));
  auto feasible = [&](double p) { return numerics::logit(p) >= max_safe_logit; };
  double p_u = kProbabilityFloor;
  if (!feasible(kProbabilityFloor)) {
    double lo = kProbabilityFloor;
    double hi = kProbabilityCap;
    if (feasible(hi)) {
      while (hi - lo > kProbabilityTolerance) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
      }
    }
    p_u = hi;
  }
  out.p_u = p_u;
  const double level = numerics::logit(p_u);

  const std::size_t dims = d.columns.size();
  std::vector<double> slice(dims);
  for (std::size_t j = 0; j < dims; ++j) slice[j] = cfg.slice ? cfg.slice->at(j) : d.bounds[j].lo;
  const auto origin = m.to_scaled(slice);

  auto& bounds = out.dataset.bounds;
  for (std::size_t j = 0; j < dims; ++j) {
    std::vector<double> dir(dims, 0.0);
    dir[j] = 1.0;
    const auto q = along(m, origin, dir);
    const double t_max = 1.0 - origin[j];
    if (t_max <= 0.0) continue;
    const auto t = first_crossing(q.a, q.b, q.c - level, t_max);
    if (!t) continue;
    const auto& sc = d.scaling[j];
    const double wmax = sc.offset + sc.scale;
    const double intercept = std::clamp(sc.offset + (origin[j] + *t) * sc.scale, bounds[j].lo, wmax);
    bounds[j].hi = std::min(bounds[j].hi, intercept);
  }

  auto& rows = out.dataset.rows;
  rows.erase(std::remove_if(rows.begin(), rows.end(),
                            [&](const LabelledRow& r) {
                              for (std::size_t j = 0; j < dims; ++j) {
                                const double v = static_cast<double>(r.wcets[j].ticks());
                                const double slack = 1e-9 * d.scaling[j].scale;
                                if (v < bounds[j].lo - slack || v > bounds[j].hi + slack) return true;
                              }
                              return false;
                            }),
             rows.end());
  return out;
}

double contour_distance(const SafeBorder& border, std::span<const double> raw) {
  const double gap = std::abs(border.model.logit(raw) - numerics::logit(border.p));
  if (gap == 0.0) return 0.0;
  const auto g = border.model.logit_gradient(raw);
  double norm = 0.0;
  for (double v : g) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) return std::numeric_limits<double>::infinity();
  return gap / norm;
}

double contour_distance_exact(const SafeBorder& border, std::span<const double> raw) {
  const auto& m = border.model;
  const double level = numerics::logit(border.p);
  const std::size_t dims = raw.size();
  const auto origin = m.to_scaled(raw);

  // Nearest positive root of the contour along the unit raw-space direction v.
  auto hit = [&](std::span<const double> v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return std::numeric_limits<double>::infinity();
    std::vector<double> dir(dims);
    for (std::size_t i = 0; i < dims; ++i) dir[i] = v[i] / norm / m.scaling[i].scale;
    const auto q = along(m, origin, dir);
    double best = std::numeric_limits<double>::infinity();
    for (double r : roots(q.a, q.b, q.c - level))
      if (r >= 0.0) best = std::min(best, r);
    return best;
  };

  if (m.logit(raw) == level) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> starts;
  auto g = m.logit_gradient(raw);
  starts.push_back(g);
  for (auto& v : g) v = -v;
  starts.push_back(g);
  for (std::size_t i = 0; i < dims; ++i) {
    std::vector<double> e(dims, 0.0);
    e[i] = 1.0;
    starts.push_back(e);
    e[i] = -1.0;
    starts.push_back(e);
  }
  numerics::SimplexConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iter = 5000;
  for (const auto& s : starts) {
    const double f0 = hit(s);
    if (dims == 1) {
      best = std::min(best, f0);
      continue;
    }
    auto res = numerics::nelder_mead([&](std::span<const double> v) { return hit(v); }, s, cfg);
    best = std::min({best, f0, res.f});
  }
  return best;
}

std::vector<Time> distance_sample(const SafeBorder& border, const std::vector<Bounds>& bounds, std::size_t r,
                                  Rng& rng) {
  if (r < 1) throw std::invalid_argument("distance_sample needs at least one candidate");
  const std::size_t dims = bounds.size();
  std::vector<Time> best;
  double best_distance = std::numeric_limits<double>::infinity();
  std::vector<double> raw(dims);
  for (std::size_t c = 0; c < r; ++c) {
    std::vector<Time> candidate(dims);
    for (std::size_t j = 0; j < dims; ++j) {
      const auto lo = static_cast<std::int64_t>(std::ceil(bounds[j].lo));
      const auto hi = static_cast<std::int64_t>(std::floor(bounds[j].hi));
      candidate[j] = Time{hi >= lo ? uniform_int(rng, lo, hi) : lo};
      raw[j] = static_cast<double>(candidate[j].ticks());
    }
    if (r == 1) return candidate;
    const double dist = contour_distance(border, raw);
    if (best.empty() || dist < best_distance) {
      best_distance = dist;
      best = std::move(candidate);
    }
  }
  return best;
}

double hyperbox_volume(std::span<const double> point, const std::vector<Bounds>& bounds) {
  double v = 1.0;
  for (std::size_t j = 0; j < bounds.size(); ++j) v *= point[j] - bounds[j].lo;
  return v;
}

std::vector<double> best_size_point(const SafeBorder& border, const std::vector<Bounds>& bounds) {
  const auto& m = border.model;
  const std::size_t dims = bounds.size();
  const double level = numerics::logit(border.p);
  std::vector<double> lo(dims);
  std::vector<double> hi(dims);
  for (std::size_t j = 0; j < dims; ++j) {
    lo[j] = bounds[j].lo;
    hi[j] = bounds[j].hi;
  }
  if (m.logit(lo) > level) throw std::domain_error("safe region is empty: the lower WCET corner is unsafe");
  const auto origin = m.to_scaled(lo);
  const auto top = m.to_scaled(hi);

  // Direction on the positive simplex from unconstrained parameters.
  auto direction = [&](std::span<const double> theta) {
    std::vector<double> u(dims);
    double mx = 0.0;
    for (double t : theta) mx = std::max(mx, t);
    double sum = 0.0;
    for (std::size_t j = 0; j < dims; ++j) {
      u[j] = std::exp((j + 1 < dims ? theta[j] : 0.0) - mx);
      sum += u[j];
    }
    for (auto& x : u) x /= sum;
    return u;
  };
  auto ray_end = [&](const std::vector<double>& u) {
    double t_box = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < dims; ++j)
      if (u[j] > 0.0) t_box = std::min(t_box, (top[j] - origin[j]) / u[j]);
    const auto q = along(m, origin, u);
    const auto t = first_crossing(q.a, q.b, q.c - level, t_box);
    return t ? *t : t_box;
  };
  auto scaled_volume = [&](std::span<const double> theta) {
    const auto u = direction(theta);
    const double t = ray_end(u);
    double v = 1.0;
    for (double x : u) v *= t * x;
    return v;
  };

  std::vector<double> best_theta(dims > 0 ? dims - 1 : 0, 0.0);
  if (dims > 1) {
    double best_volume = scaled_volume(best_theta);
    numerics::SimplexConfig cfg;
    cfg.initial_step = 0.5;
    auto rng = make_stream(0x6e656c646572ULL);
    std::normal_distribution<double> spread(0.0, 1.5);
    for (int start = 0; start < 20; ++start) {
      std::vector<double> theta0(dims - 1, 0.0);
      if (start > 0)
        for (auto& t : theta0) t = spread(rng);
      auto res = numerics::nelder_mead([&](std::span<const double> th) { return -scaled_volume(th); }, theta0, cfg);
      if (-res.f > best_volume) {
        best_volume = -res.f;
        best_theta = res.x;
      }
    }
  }
  const auto u = direction(best_theta);
  const double t = ray_end(u);
  std::vector<double> point(dims);
  for (std::size_t j = 0; j < dims; ++j) point[j] = m.scaling[j].offset + (origin[j] + t * u[j]) * m.scaling[j].scale;
  return point;
}

}  // namespace wcetrange::learn
