#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wcetrange/dataset.hpp"
#include "wcetrange/random.hpp"
#include "wcetrange/task_model.hpp"

namespace wcetrange {

struct Individual {
  ArrivalSequence seq;
  std::optional<double> fitness;
};

enum class SearchMode {
  genetic,
  random,  // baseline: every iteration evaluates two fresh random sequences
};

struct GaConfig {
  std::size_t population_size = 10;
  double crossover_rate = 0.7;
  double mutation_rate = 0.2;
  std::size_t iterations = 1000;
  std::size_t runs_per_fitness = 20;
  std::size_t tournament_size = 2;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  SearchMode mode = SearchMode::genetic;
};

/// Throws std::invalid_argument on out-of-range settings.
void validate(const GaConfig& cfg);

struct FitnessResult {
  double value = 0.0;
  std::vector<LabelledRow> rows;  // one per simulation, columns = uncertain tasks
};

/// Mean over n simulations (independent uniform WCET draws) of the worst
/// target deadline distance. A run without any target completion or expired
/// truncation contributes -max(target deadline).
FitnessResult fitness(const TaskSet& ts, const ArrivalSequence& seq, std::size_t n, Rng& rng, unsigned workers = 1);

/// Tournament among `size` distinct members drawn uniformly; ties between the
/// best are broken uniformly. Requires |pop| >= size >= 1 and evaluated members.
std::size_t tournament_select(std::span<const Individual> pop, Rng& rng, std::size_t size = 2);

/// Swaps the arrival lists of tasks 0..r (inclusive) where r is the task
/// index of a uniformly chosen aperiodic task.
std::pair<Individual, Individual> safe_crossover(const Individual& a, const Individual& b, const TaskSet& ts,
                                                 Rng& rng);
/// Same, with the cut task index given explicitly.
std::pair<Individual, Individual> crossover_at(const Individual& a, const Individual& b, std::size_t cut_task);

/// Sets arrival k (0-based) of aperiodic task `task` to `value`. If the next
/// arrival no longer fits [value + pmin, value + pmax], all later arrivals are
/// shifted by (value - old), arrivals at or past the horizon are dropped and
/// new legal arrivals are appended while possible.
void mutate_arrival(ArrivalSequence& seq, const TaskSet& ts, std::size_t task, std::size_t k, Time value, Rng& rng);

/// Each aperiodic arrival is redrawn with probability `rate` uniformly in its
/// legal window given the preceding arrival, then repaired by mutate_arrival.
Individual safe_mutation(const Individual& ind, const TaskSet& ts, double rate, Rng& rng);

struct FitnessHistoryEntry {
  std::size_t iteration;
  double best;
  double mean;
};

struct Phase1Result {
  std::vector<Individual> population;
  LabelledDataset dataset;
  std::vector<FitnessHistoryEntry> history;  // entry 0 describes the initial population
  std::size_t evaluations = 0;
  bool search_skipped = false;  // task set without aperiodic tasks
};

/// Steady-state search: per iteration two tournament parents, crossover with
/// crossover_rate, both children mutated and evaluated; each child replaces
/// the current worst member when strictly fitter. Every evaluation appends its
/// rows to the dataset.
///
/// With no aperiodic task the sequence is fixed: the population is that one
/// sequence and the dataset holds population_size evaluations of it.
Phase1Result run_phase1(const TaskSet& ts, const GaConfig& cfg);

}  // namespace wcetrange
