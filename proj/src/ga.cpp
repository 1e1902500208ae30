#include "wcetrange/ga.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "wcetrange/parallel.hpp"
#include "wcetrange/scheduler.hpp"

namespace wcetrange {

std::size_t LabelledDataset::count(Label l) const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [l](const LabelledRow& r) { return r.label == l; }));
}

LabelledRow make_row(const WcetAssignment& w, const std::vector<std::size_t>& columns, Label l) {
  LabelledRow row;
  row.label = l;
  row.wcets.reserve(columns.size());
  for (auto c : columns) row.wcets.push_back(w.values[c]);
  return row;
}

void validate(const GaConfig& cfg) {
  if (cfg.population_size < 1) throw std::invalid_argument("population_size must be >= 1");
  if (cfg.runs_per_fitness < 1) throw std::invalid_argument("runs_per_fitness must be >= 1");
  if (cfg.tournament_size < 1) throw std::invalid_argument("tournament_size must be >= 1");
  if (cfg.crossover_rate < 0.0 || cfg.crossover_rate > 1.0) throw std::invalid_argument("crossover_rate not in [0,1]");
  if (cfg.mutation_rate < 0.0 || cfg.mutation_rate > 1.0) throw std::invalid_argument("mutation_rate not in [0,1]");
}

namespace {

Distance empty_run_sentinel(const TaskSet& ts) {
  Time max_dl{0};
  for (auto t : ts.targets) max_dl = std::max(max_dl, ts.tasks[t].deadline);
  return -max_dl.ticks();
}

}  // namespace

FitnessResult fitness(const TaskSet& ts, const ArrivalSequence& seq, std::size_t n, Rng& rng, unsigned workers) {
  if (n < 1) throw std::invalid_argument("fitness needs at least one simulation run");
  const std::uint64_t base = rng();
  const auto columns = ts.uncertain_tasks();
  const Distance sentinel = empty_run_sentinel(ts);

  std::vector<Distance> worst(n);
  std::vector<LabelledRow> rows(n);
  parallel_for(n, workers, [&](std::size_t i) {
    auto run_rng = make_stream(base, {i});
    const auto w = sample_uniform(ts, run_rng);
    const auto sc = simulate(ts, seq, w);
    worst[i] = worst_target_distance(sc, ts).value_or(sentinel);
    rows[i] = make_row(w, columns, label(sc, ts));
  });

  FitnessResult out;
  double sum = 0.0;
  for (auto d : worst) sum += static_cast<double>(d);
  out.value = sum / static_cast<double>(n);
  out.rows = std::move(rows);
  return out;
}

std::size_t tournament_select(std::span<const Individual> pop, Rng& rng, std::size_t size) {
  if (size < 1 || pop.size() < size) throw std::invalid_argument("tournament larger than population");
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    auto j = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(i),
                                                  static_cast<std::int64_t>(idx.size() - 1)));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::size_t> best;
  double best_f = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const auto& ind = pop[idx[i]];
    if (!ind.fitness) throw std::invalid_argument("tournament over unevaluated individual");
    if (best.empty() || *ind.fitness > best_f) {
      best = {idx[i]};
      best_f = *ind.fitness;
    } else if (*ind.fitness == best_f) {
      best.push_back(idx[i]);
    }
  }
  if (best.size() == 1) return best.front();
  return best[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(best.size() - 1)))];
}

std::pair<Individual, Individual> crossover_at(const Individual& a, const Individual& b, std::size_t cut_task) {
  Individual c1{a.seq, std::nullopt};
  Individual c2{b.seq, std::nullopt};
  for (std::size_t i = 0; i <= cut_task && i < c1.seq.arrivals.size(); ++i)
    std::swap(c1.seq.arrivals[i], c2.seq.arrivals[i]);
  return {std::move(c1), std::move(c2)};
}

std::pair<Individual, Individual> safe_crossover(const Individual& a, const Individual& b, const TaskSet& ts,
                                                 Rng& rng) {
  const auto aperiodic = ts.aperiodic_tasks();
  if (aperiodic.empty()) return {Individual{a.seq, std::nullopt}, Individual{b.seq, std::nullopt}};
  const auto pick = uniform_int(rng, 0, static_cast<std::int64_t>(aperiodic.size() - 1));
  return crossover_at(a, b, aperiodic[static_cast<std::size_t>(pick)]);
}

void mutate_arrival(ArrivalSequence& seq, const TaskSet& ts, std::size_t task, std::size_t k, Time value, Rng& rng) {
  const auto& t = ts.tasks.at(task);
  const auto& a = t.aperiodic();
  auto& arr = seq.arrivals.at(task);
  const Time old = arr.at(k);
  arr[k] = value;
  if (k + 1 < arr.size()) {
    const Time succ = arr[k + 1];
    if (succ >= value + a.pmin && succ <= value + a.pmax) return;
    const Time shift = value - old;
    for (std::size_t i = k + 1; i < arr.size(); ++i) arr[i] += shift;
    arr.erase(std::find_if(arr.begin() + static_cast<std::ptrdiff_t>(k) + 1, arr.end(),
                           [&](Time x) { return x >= ts.horizon; }),
              arr.end());
  }
  extend_aperiodic_arrivals(arr, t, ts.horizon, rng);
}

Individual safe_mutation(const Individual& ind, const TaskSet& ts, double rate, Rng& rng) {
  Individual out{ind.seq, std::nullopt};
  if (rate <= 0.0) {
    out.fitness = ind.fitness;
    return out;
  }
  const Time last_allowed = ts.horizon - Time{1};
  for (auto task : ts.aperiodic_tasks()) {
    const auto& a = ts.tasks[task].aperiodic();
    auto& arr = out.seq.arrivals[task];
    for (std::size_t k = 0; k < arr.size(); ++k) {
      if (!bernoulli(rng, rate)) continue;
      const Time prev = k == 0 ? Time{0} : arr[k - 1];
      const Time lo = prev + a.pmin;
      const Time hi = std::min(prev + a.pmax, last_allowed);
      if (lo > hi) continue;
      mutate_arrival(out.seq, ts, task, k, Time{uniform_int(rng, lo.ticks(), hi.ticks())}, rng);
    }
  }
  return out;
}

namespace {

FitnessHistoryEntry summarize(std::size_t iteration, const std::vector<Individual>& pop) {
  double best = *pop.front().fitness;
  double sum = 0.0;
  for (const auto& ind : pop) {
    best = std::max(best, *ind.fitness);
    sum += *ind.fitness;
  }
  return {iteration, best, sum / static_cast<double>(pop.size())};
}

class Evaluator {
 public:
  Evaluator(const TaskSet& ts, const GaConfig& cfg, LabelledDataset& dataset, std::size_t& counter)
      : ts_(ts), cfg_(cfg), dataset_(dataset), counter_(counter) {}

  double operator()(const ArrivalSequence& seq) {
    auto rng = make_stream(cfg_.seed, {1, counter_++});
    auto res = fitness(ts_, seq, cfg_.runs_per_fitness, rng, cfg_.workers);
    dataset_.rows.insert(dataset_.rows.end(), std::make_move_iterator(res.rows.begin()),
                         std::make_move_iterator(res.rows.end()));
    return res.value;
  }

 private:
  const TaskSet& ts_;
  const GaConfig& cfg_;
  LabelledDataset& dataset_;
  std::size_t& counter_;
};

void insert_if_fitter(std::vector<Individual>& pop, Individual child) {
  auto worst = std::min_element(pop.begin(), pop.end(),
                                [](const Individual& a, const Individual& b) { return *a.fitness < *b.fitness; });
  if (*child.fitness > *worst->fitness) *worst = std::move(child);
}

}  // namespace

Phase1Result run_phase1(const TaskSet& ts, const GaConfig& cfg) {
  validate(cfg);
  Phase1Result result;
  result.dataset.columns = ts.uncertain_tasks();
  Evaluator evaluate(ts, cfg, result.dataset, result.evaluations);
  auto rng = make_stream(cfg.seed, {0});

  if (ts.aperiodic_tasks().empty()) {
    result.search_skipped = true;
    Individual only{deterministic_arrival_sequence(ts), std::nullopt};
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.population_size; ++i) sum += evaluate(only.seq);
    only.fitness = sum / static_cast<double>(cfg.population_size);
    result.population.push_back(std::move(only));
    result.history.push_back(summarize(0, result.population));
    return result;
  }

  auto& pop = result.population;
  pop.reserve(cfg.population_size);
  for (std::size_t i = 0; i < cfg.population_size; ++i) {
    Individual ind{random_arrival_sequence(ts, rng), std::nullopt};
    ind.fitness = evaluate(ind.seq);
    pop.push_back(std::move(ind));
  }
  result.history.push_back(summarize(0, pop));

  const std::size_t tournament = std::min(cfg.tournament_size, pop.size());
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    Individual c1;
    Individual c2;
    if (cfg.mode == SearchMode::random) {
      c1.seq = random_arrival_sequence(ts, rng);
      c2.seq = random_arrival_sequence(ts, rng);
    } else {
      const auto& p1 = pop[tournament_select(pop, rng, tournament)];
      const auto& p2 = pop[tournament_select(pop, rng, tournament)];
      if (bernoulli(rng, cfg.crossover_rate)) {
        std::tie(c1, c2) = safe_crossover(p1, p2, ts, rng);
      } else {
        c1.seq = p1.seq;
        c2.seq = p2.seq;
      }
      c1 = safe_mutation(c1, ts, cfg.mutation_rate, rng);
      c2 = safe_mutation(c2, ts, cfg.mutation_rate, rng);
    }
    c1.fitness = evaluate(c1.seq);
    c2.fitness = evaluate(c2.seq);
    insert_if_fitter(pop, std::move(c1));
    insert_if_fitter(pop, std::move(c2));
    result.history.push_back(summarize(it, pop));
  }
  return result;
}

}  // namespace wcetrange
