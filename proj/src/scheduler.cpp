#include "wcetrange/scheduler.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace wcetrange {

void check_assignment(const WcetAssignment& w, const TaskSet& ts) {
  if (w.values.size() != ts.tasks.size())
    throw std::invalid_argument("assignment covers " + std::to_string(w.values.size()) + " tasks, expected " +
                                std::to_string(ts.tasks.size()));
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    const auto& t = ts.tasks[i];
    if (w.values[i] < t.wcet_min || w.values[i] > t.wcet_max)
      throw std::invalid_argument("execution time of task '" + t.id + "' outside its WCET range");
  }
}

std::size_t ScheduleScenario::truncated_count(std::size_t task) const {
  return static_cast<std::size_t>(
      std::count_if(truncated.begin(), truncated.end(), [&](const Truncation& t) { return t.task == task; }));
}

const Completion& ScheduleScenario::completion(std::size_t task, std::size_t k) const {
  for (const auto& c : completions)
    if (c.task == task && c.k == k) return c;
  throw std::out_of_range("arrival " + std::to_string(k) + " of task #" + std::to_string(task) +
                          " did not complete");
}

namespace {

struct Job {
  int priority;
  Time arrival;
  std::size_t task;
  std::size_t k;
  Time remaining;
};

// True if a should run before b.
bool runs_before(const Job& a, const Job& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  if (a.arrival != b.arrival) return a.arrival < b.arrival;
  if (a.task != b.task) return a.task < b.task;
  return a.k < b.k;
}

struct ReadyOrder {
  bool operator()(const Job& a, const Job& b) const { return runs_before(b, a); }
};

}  // namespace

ScheduleScenario simulate(const TaskSet& ts, const ArrivalSequence& seq, const WcetAssignment& w,
                          const SimulationOptions& options) {
  ScheduleScenario sc;
  sc.assignment = w;

  std::vector<Job> releases;
  releases.reserve(seq.size());
  for (std::size_t i = 0; i < seq.arrivals.size(); ++i) {
    for (std::size_t k = 0; k < seq.arrivals[i].size(); ++k)
      releases.push_back(Job{ts.tasks[i].priority, seq.arrivals[i][k], i, k + 1, w.values[i]});
  }
  std::sort(releases.begin(), releases.end(), [](const Job& a, const Job& b) {
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    if (a.task != b.task) return a.task < b.task;
    return a.k < b.k;
  });

  std::priority_queue<Job, std::vector<Job>, ReadyOrder> ready;
  const Time horizon = ts.horizon;
  Time now{0};
  std::size_t next = 0;

  while (now < horizon) {
    while (next < releases.size() && releases[next].arrival <= now) ready.push(releases[next++]);
    if (ready.empty()) {
      if (next == releases.size()) break;
      now = releases[next].arrival;
      continue;
    }
    Job job = ready.top();
    ready.pop();
    Time limit = horizon;
    if (next < releases.size()) limit = std::min(limit, releases[next].arrival);
    const Time run = std::min(job.remaining, limit - now);
    if (options.record_trace && run > Time{0}) {
      if (!sc.trace.empty() && sc.trace.back().task == job.task && sc.trace.back().k == job.k &&
          sc.trace.back().end == now) {
        sc.trace.back().end = now + run;
      } else {
        sc.trace.push_back(ExecutionSlice{job.task, job.k, now, now + run});
      }
    }
    now += run;
    job.remaining -= run;
    if (job.remaining == Time{0}) {
      sc.completions.push_back(Completion{job.task, job.k, job.arrival, now});
    } else {
      ready.push(job);
    }
  }

  while (next < releases.size() && releases[next].arrival <= horizon) ready.push(releases[next++]);
  std::vector<Job> pending;
  while (!ready.empty()) {
    pending.push_back(ready.top());
    ready.pop();
  }
  std::sort(pending.begin(), pending.end(), [](const Job& a, const Job& b) {
    return a.task != b.task ? a.task < b.task : a.k < b.k;
  });
  for (const auto& j : pending)
    sc.truncated.push_back(Truncation{j.task, j.k, j.arrival, w.values[j.task] - j.remaining});
  return sc;
}

Distance distance(const ScheduleScenario& sc, const TaskSet& ts, std::size_t task, std::size_t k) {
  const auto& c = sc.completion(task, k);
  return (c.end - (c.arrival + ts.tasks[task].deadline)).ticks();
}

Label label(const ScheduleScenario& sc, const TaskSet& ts) {
  for (const auto& c : sc.completions) {
    if (ts.is_target(c.task) && c.end > c.arrival + ts.tasks[c.task].deadline) return Label::unsafe;
  }
  for (const auto& t : sc.truncated) {
    if (ts.is_target(t.task) && ts.horizon > t.arrival + ts.tasks[t.task].deadline) return Label::unsafe;
  }
  return Label::safe;
}

std::optional<Distance> worst_target_distance(const ScheduleScenario& sc, const TaskSet& ts) {
  std::optional<Distance> worst;
  auto consider = [&](Distance d) {
    if (!worst || d > *worst) worst = d;
  };
  for (const auto& c : sc.completions) {
    if (ts.is_target(c.task)) consider((c.end - (c.arrival + ts.tasks[c.task].deadline)).ticks());
  }
  for (const auto& t : sc.truncated) {
    if (!ts.is_target(t.task)) continue;
    const Distance clipped = (ts.horizon - (t.arrival + ts.tasks[t.task].deadline)).ticks();
    if (clipped > 0) consider(clipped);
  }
  return worst;
}

WcetAssignment sample_uniform(const TaskSet& ts, Rng& rng) {
  WcetAssignment w;
  w.values.reserve(ts.tasks.size());
  for (const auto& t : ts.tasks) {
    w.values.push_back(t.is_uncertain() ? Time{uniform_int(rng, t.wcet_min.ticks(), t.wcet_max.ticks())}
                                        : t.wcet_min);
  }
  return w;
}

}  // namespace wcetrange
