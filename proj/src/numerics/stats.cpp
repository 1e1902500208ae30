#include "wcetrange/numerics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace wcetrange::numerics {

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Exact P(R_a <= obs) and P(R_a >= obs) for doubled midrank sums.
std::pair<double, double> exact_tails(const std::vector<long>& doubled_ranks, const std::vector<bool>& in_a,
                                      std::size_t na) {
  const std::size_t n = doubled_ranks.size();
  const std::size_t nb = n - na;
  // Enumerate the smaller group; translate to a's sum if needed.
  const bool pick_a = na <= nb;
  const std::size_t m = pick_a ? na : nb;
  const long total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0L);
  std::vector<long> sorted(doubled_ranks);
  std::sort(sorted.rbegin(), sorted.rend());
  const long max_sum = std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m), 0L);
  std::vector<std::vector<double>> ways(m + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const long r = doubled_ranks[i];
    for (std::size_t c = std::min(m, i + 1); c >= 1; --c) {
      auto& dst = ways[c];
      const auto& src = ways[c - 1];
      for (long s = max_sum; s >= r; --s) dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - r)];
    }
  }
  long observed_a = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (in_a[i]) observed_a += doubled_ranks[i];

  double all = 0.0, le = 0.0, ge = 0.0;
  for (long s = 0; s <= max_sum; ++s) {
    const double w = ways[m][static_cast<std::size_t>(s)];
    if (w == 0.0) continue;
    const long sum_a = pick_a ? s : total - s;
    all += w;
    if (sum_a <= observed_a) le += w;
    if (sum_a >= observed_a) ge += w;
  }
  return {le / all, ge / all};
}

}  // namespace

RankSumResult mann_whitney_u(std::span<const double> a, std::span<const double> b, Alternative alternative) {
  if (a.empty() || b.empty()) throw std::invalid_argument("Mann-Whitney U needs non-empty samples");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;

  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(n);
  for (double v : a) pooled.emplace_back(v, true);
  for (double v : b) pooled.emplace_back(v, false);
  std::stable_sort(pooled.begin(), pooled.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  std::vector<long> doubled(n);
  std::vector<bool> in_a(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const long doubled_midrank = static_cast<long>(i + 1 + j);  // 2 * (i+1 + j)/2
    for (std::size_t t = i; t < j; ++t) {
      doubled[t] = doubled_midrank;
      in_a[t] = pooled[t].second;
    }
    const double tied = static_cast<double>(j - i);
    tie_term += tied * tied * tied - tied;
    i = j;
  }

  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (in_a[i]) rank_sum_a += static_cast<double>(doubled[i]) / 2.0;

  RankSumResult res;
  const double dna = static_cast<double>(na);
  const double dnb = static_cast<double>(nb);
  res.u = rank_sum_a - dna * (dna + 1.0) / 2.0;

  if (na < 8 || nb < 8) {
    res.exact = true;
    auto [p_le, p_ge] = exact_tails(doubled, in_a, na);
    switch (alternative) {
      case Alternative::less: res.p_value = p_le; break;
      case Alternative::greater: res.p_value = p_ge; break;
      case Alternative::two_sided: res.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge)); break;
    }
    return res;
  }

  const double dn = static_cast<double>(n);
  const double mean = dna * dnb / 2.0;
  const double var = dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double sd = std::sqrt(var);
  switch (alternative) {
    case Alternative::greater: res.p_value = normal_sf((res.u - mean - 0.5) / sd); break;
    case Alternative::less: res.p_value = 1.0 - normal_sf((res.u - mean + 0.5) / sd); break;
    case Alternative::two_sided: {
      const double z = std::max(0.0, std::abs(res.u - mean) - 0.5) / sd;
      res.p_value = std::min(1.0, 2.0 * normal_sf(z));
      break;
    }
  }
  return res;
}

}  // namespace wcetrange::numerics
