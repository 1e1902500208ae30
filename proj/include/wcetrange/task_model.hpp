#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wcetrange/random.hpp"
#include "wcetrange/time.hpp"

namespace wcetrange {

struct Periodic {
  Time period;
  Time offset;
  bool operator==(const Periodic&) const = default;
};

struct Aperiodic {
  Time pmin;
  Time pmax;
  bool operator==(const Aperiodic&) const = default;
};

enum class DeadlineKind { hard, soft };

struct Task {
  std::string id;
  std::string name;
  int priority = 0;  // larger runs first
  Time deadline;     // relative to arrival
  std::variant<Periodic, Aperiodic> kind;
  Time wcet_min;
  Time wcet_max;
  DeadlineKind deadline_kind = DeadlineKind::hard;

  bool is_periodic() const { return std::holds_alternative<Periodic>(kind); }
  bool is_uncertain() const { return wcet_max > wcet_min; }
  const Periodic& periodic() const { return std::get<Periodic>(kind); }
  const Aperiodic& aperiodic() const { return std::get<Aperiodic>(kind); }

  bool operator==(const Task&) const = default;
};

/// Problem with a task-set description; names the offending task and field
/// whenever there is one.
class TaskSetError : public std::runtime_error {
 public:
  TaskSetError(std::string task_id, std::string field, const std::string& message);

  const std::string& task_id() const { return task_id_; }
  const std::string& field() const { return field_; }

 private:
  std::string task_id_;
  std::string field_;
};

struct TaskSet {
  std::vector<Task> tasks;  // order is significant (crossover, dataset columns)
  Time horizon;
  TickScale scale;
  std::vector<std::size_t> targets;  // ascending task indices

  /// Throws std::out_of_range for unknown ids.
  std::size_t index_of(std::string_view id) const;
  bool is_target(std::size_t task) const;
  std::vector<std::size_t> uncertain_tasks() const;
  std::vector<std::size_t> aperiodic_tasks() const;

  bool operator==(const TaskSet&) const = default;
};

/// Checks every Task and TaskSet invariant. Throws TaskSetError.
void validate_task_set(const TaskSet& ts);

/// Reads the key/value task-set document (see docs in README). Throws
/// TaskSetError with the task id and field on any problem.
TaskSet parse_task_set(std::string_view text);
std::string serialize_task_set(const TaskSet& ts);

/// Arrival times of every task over [0, horizon], indexed like TaskSet::tasks.
struct ArrivalSequence {
  std::vector<std::vector<Time>> arrivals;

  std::size_t size() const;  // total number of arrivals
  bool operator==(const ArrivalSequence&) const = default;
};

/// offset + (k-1) * period for every k with the value <= horizon.
std::vector<Time> periodic_arrivals(const Task& task, Time horizon);

struct ArrivalViolation {
  std::string task_id;
  std::size_t index;  // 1-based arrival index; 0 when the whole list is wrong
  std::string reason;
};

/// Empty result means the sequence is valid for ts.
std::vector<ArrivalViolation> validate_arrivals(const ArrivalSequence& seq, const TaskSet& ts);

/// Random maximal sequence for one aperiodic task: first arrival in
/// [pmin, pmax], each gap in [pmin, pmax], appended while last + pmin < horizon.
std::vector<Time> random_aperiodic_arrivals(const Task& task, Time horizon, Rng& rng);

/// Appends legal arrivals to `arrivals` while last + pmin < horizon.
void extend_aperiodic_arrivals(std::vector<Time>& arrivals, const Task& task, Time horizon, Rng& rng);

/// Periodic tasks get their fixed arrivals; aperiodic ones a random maximal
/// sequence.
ArrivalSequence random_arrival_sequence(const TaskSet& ts, Rng& rng);

/// The unique sequence of a task set without aperiodic tasks. Throws
/// std::logic_error if an aperiodic task exists.
ArrivalSequence deterministic_arrival_sequence(const TaskSet& ts);

}  // namespace wcetrange
