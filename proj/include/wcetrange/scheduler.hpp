#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "wcetrange/random.hpp"
#include "wcetrange/task_model.hpp"

namespace wcetrange {

/// One execution time per task, indexed like TaskSet::tasks.
struct WcetAssignment {
  std::vector<Time> values;
  bool operator==(const WcetAssignment&) const = default;
};

/// Throws std::invalid_argument if `w` misses a task or leaves its range.
void check_assignment(const WcetAssignment& w, const TaskSet& ts);

struct Completion {
  std::size_t task;
  std::size_t k;  // 1-based arrival index within the task
  Time arrival;
  Time end;
  bool operator==(const Completion&) const = default;
};

/// An instance still unfinished when the horizon was reached.
struct Truncation {
  std::size_t task;
  std::size_t k;
  Time arrival;
  Time executed;
  bool operator==(const Truncation&) const = default;
};

/// Contiguous processor time given to one instance.
struct ExecutionSlice {
  std::size_t task;
  std::size_t k;
  Time start;
  Time end;
  bool operator==(const ExecutionSlice&) const = default;
};

struct ScheduleScenario {
  std::vector<Completion> completions;  // in completion order
  std::vector<Truncation> truncated;
  WcetAssignment assignment;
  std::vector<ExecutionSlice> trace;  // filled only when requested

  std::size_t truncated_count(std::size_t task) const;
  /// Throws std::out_of_range if (task, k) did not complete.
  const Completion& completion(std::size_t task, std::size_t k) const;

  bool operator==(const ScheduleScenario&) const = default;
};

struct SimulationOptions {
  bool record_trace = false;
};

/// Preemptive fixed-priority scheduling of every arrival in `seq` over
/// [0, horizon]. Ready instances are ordered by priority (higher first), then
/// arrival time, then task position, then arrival index; the head of that
/// order always runs. Same-task instances therefore queue FIFO and an
/// equal-priority arrival never preempts.
ScheduleScenario simulate(const TaskSet& ts, const ArrivalSequence& seq, const WcetAssignment& w,
                          const SimulationOptions& options = {});

/// et - (at + dl); positive means the instance missed its deadline.
Distance distance(const ScheduleScenario& sc, const TaskSet& ts, std::size_t task, std::size_t k);

enum class Label { safe, unsafe };

/// Unsafe iff a target completion misses its deadline or a target instance
/// was cut off at the horizon after its deadline had already passed.
Label label(const ScheduleScenario& sc, const TaskSet& ts);

/// Largest deadline distance over target completions and expired target
/// truncations (the latter clipped at the horizon). Empty when neither exist.
std::optional<Distance> worst_target_distance(const ScheduleScenario& sc, const TaskSet& ts);

/// Independent uniform draw over the integer ticks of each task's range.
WcetAssignment sample_uniform(const TaskSet& ts, Rng& rng);

}  // namespace wcetrange
