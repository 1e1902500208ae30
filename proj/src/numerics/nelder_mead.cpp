#include "wcetrange/numerics/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wcetrange::numerics {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, const SimplexConfig& cfg) {
  const std::size_t n = x0.size();
  auto eval = [&](const std::vector<double>& x) { return f(std::span<const double>(x)); };

  SimplexResult result;
  if (n == 0) {
    result.x = x0;
    result.f = eval(x0);
    result.converged = true;
    return result;
  }

  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  simplex.push_back({x0, eval(x0)});
  for (std::size_t i = 0; i < n; ++i) {
    auto x = x0;
    x[i] = x[i] != 0.0 ? x[i] * (1.0 + cfg.initial_step) : 0.00025;
    simplex.push_back({x, eval(x)});
  }
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };

  auto point = [&](const std::vector<double>& centroid, const std::vector<double>& worst, double coef) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + coef * (centroid[i] - worst[i]);
    return x;
  };

  for (result.iterations = 0; result.iterations < cfg.max_iter; ++result.iterations) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    double diameter = 0.0;
    for (std::size_t v = 1; v <= n; ++v) diameter = std::max(diameter, distance(simplex[v].x, simplex[0].x));
    if (diameter < cfg.tol) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].x[i] / static_cast<double>(n);

    Vertex& worst = simplex[n];
    const Vertex reflected{point(centroid, worst.x, cfg.reflection), 0.0};
    const double fr = eval(reflected.x);

    if (fr < simplex[0].f) {
      auto xe = point(centroid, worst.x, cfg.reflection * cfg.expansion);
      const double fe = eval(xe);
      worst = fe < fr ? Vertex{std::move(xe), fe} : Vertex{reflected.x, fr};
      continue;
    }
    if (fr < simplex[n - 1].f) {
      worst = Vertex{reflected.x, fr};
      continue;
    }
    if (fr < worst.f) {
      auto xc = point(centroid, worst.x, cfg.reflection * cfg.contraction);
      const double fc = eval(xc);
      if (fc <= fr) {
        worst = Vertex{std::move(xc), fc};
        continue;
      }
    } else {
      auto xcc = point(centroid, worst.x, -cfg.contraction);
      const double fcc = eval(xcc);
      if (fcc < worst.f) {
        worst = Vertex{std::move(xcc), fcc};
        continue;
      }
    }
    for (std::size_t v = 1; v <= n; ++v) {
      for (std::size_t i = 0; i < n; ++i)
        simplex[v].x[i] = simplex[0].x[i] + cfg.shrink * (simplex[v].x[i] - simplex[0].x[i]);
      simplex[v].f = eval(simplex[v].x);
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), by_value);
  result.x = simplex[0].x;
  result.f = simplex[0].f;
  return result;
}

}  // namespace wcetrange::numerics
