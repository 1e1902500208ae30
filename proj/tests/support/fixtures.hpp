#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "wcetrange/scheduler.hpp"
#include "wcetrange/task_model.hpp"

namespace fixtures {

using namespace wcetrange;

inline Task periodic(std::string id, int prio, std::int64_t dl, std::int64_t period, std::int64_t offset,
                     std::int64_t wmin, std::int64_t wmax) {
  Task t;
  t.id = id;
  t.name = id;
  t.priority = prio;
  t.deadline = Time{dl};
  t.kind = Periodic{Time{period}, Time{offset}};
  t.wcet_min = Time{wmin};
  t.wcet_max = Time{wmax};
  return t;
}

inline Task aperiodic(std::string id, int prio, std::int64_t dl, std::int64_t pmin, std::int64_t pmax,
                      std::int64_t wmin, std::int64_t wmax) {
  Task t;
  t.id = id;
  t.name = id;
  t.priority = prio;
  t.deadline = Time{dl};
  t.kind = Aperiodic{Time{pmin}, Time{pmax}};
  t.wcet_min = Time{wmin};
  t.wcet_max = Time{wmax};
  return t;
}

/// The three-task illustration: j1 aperiodic (w 2), j2 periodic with WCET in
/// [j2_min, j2_max], j3 aperiodic (w 1). One tick per unit, horizon 23.
inline TaskSet illustration(std::int64_t j2_min = 1, std::int64_t j2_max = 3, std::vector<std::size_t> targets = {2},
                    std::int64_t scale = 1) {
  TaskSet ts;
  ts.scale = TickScale{1'000'000 / scale};
  ts.tasks = {aperiodic("j1", 3, 4 * scale, 5 * scale, 10 * scale, 2 * scale, 2 * scale),
              periodic("j2", 2, 6 * scale, 8 * scale, 0, j2_min, j2_max),
              aperiodic("j3", 1, 3 * scale, 3 * scale, 20 * scale, 1 * scale, 1 * scale)};
  ts.horizon = Time{23 * scale};
  ts.targets = std::move(targets);
  return ts;
}

inline std::vector<Time> times(std::initializer_list<std::int64_t> v) {
  std::vector<Time> out;
  for (auto x : v) out.push_back(Time{x});
  return out;
}

/// Arrivals drawn in the illustration. j1's second arrival sits at 11, the
/// only placement consistent with the drawn end times.
inline ArrivalSequence illustration_arrivals(std::int64_t scale = 1) {
  ArrivalSequence seq;
  seq.arrivals = {times({5 * scale, 11 * scale, 20 * scale}), times({0, 8 * scale, 16 * scale}),
                  times({9 * scale, 14 * scale})};
  return seq;
}

inline WcetAssignment assignment(std::initializer_list<std::int64_t> v) {
  WcetAssignment w;
  w.values = times(v);
  return w;
}

/// Independent per-tick reference: at each tick the ready instance that is
/// first by (priority desc, arrival, task, k) runs for one tick.
struct ReferenceResult {
  std::vector<Completion> completions;  // sorted by (task, k)
  std::vector<std::int64_t> remaining;  // per unfinished instance, sorted by (task, k)
  std::vector<std::vector<std::int64_t>> running;  // running[tick] = {task, k} or empty
};

inline ReferenceResult reference_simulate(const TaskSet& ts, const ArrivalSequence& seq, const WcetAssignment& w) {
  struct Inst {
    std::size_t task, k;
    std::int64_t at, left;
  };
  std::vector<Inst> all;
  for (std::size_t t = 0; t < seq.arrivals.size(); ++t)
    for (std::size_t k = 0; k < seq.arrivals[t].size(); ++k)
      all.push_back({t, k + 1, seq.arrivals[t][k].ticks(), w.values[t].ticks()});
  ReferenceResult r;
  const auto horizon = ts.horizon.ticks();
  for (std::int64_t tick = 0; tick < horizon; ++tick) {
    Inst* best = nullptr;
    for (auto& in : all) {
      if (in.at > tick || in.left == 0) continue;
      if (!best) {
        best = &in;
        continue;
      }
      const int pa = ts.tasks[in.task].priority, pb = ts.tasks[best->task].priority;
      bool better = false;
      if (pa != pb) {
        better = pa > pb;
      } else if (in.at != best->at) {
        better = in.at < best->at;
      } else if (in.task != best->task) {
        better = in.task < best->task;
      } else {
        better = in.k < best->k;
      }
      if (better) best = &in;
    }
    if (!best) {
      r.running.push_back({});
      continue;
    }
    r.running.push_back({static_cast<std::int64_t>(best->task), static_cast<std::int64_t>(best->k)});
    if (--best->left == 0) r.completions.push_back({best->task, best->k, Time{best->at}, Time{tick + 1}});
  }
  std::sort(r.completions.begin(), r.completions.end(),
            [](const Completion& a, const Completion& b) { return a.task != b.task ? a.task < b.task : a.k < b.k; });
  for (const auto& in : all)
    if (in.left > 0 && in.at <= horizon) r.remaining.push_back(in.left);
  return r;
}

/// 1 to 3 tasks, horizon <= 100 ticks, every task a target; equal priorities are frequent.
inline TaskSet random_small_set(Rng& rng) {
  TaskSet ts;
  ts.horizon = Time{uniform_int(rng, 10, 100)};
  const auto n = uniform_int(rng, 1, 3);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto wmin = uniform_int(rng, 1, 6);
    const auto wmax = wmin + uniform_int(rng, 0, 6);
    const int prio = static_cast<int>(uniform_int(rng, 0, 3));  // ties are common on purpose
    const std::string id = "t" + std::to_string(i);
    if (bernoulli(rng, 0.5)) {
      const auto period = uniform_int(rng, 2, 30);
      const auto offset = uniform_int(rng, 0, std::min<std::int64_t>(10, ts.horizon.ticks() - period));
      ts.tasks.push_back(periodic(id, prio, uniform_int(rng, 1, 30), period, std::max<std::int64_t>(0, offset),
                                            wmin, wmax));
    } else {
      const auto pmin = uniform_int(rng, 1, 15);
      ts.tasks.push_back(aperiodic(id, prio, uniform_int(rng, 1, 30), pmin, pmin + uniform_int(rng, 0, 20),
                                             wmin, wmax));
    }
    ts.targets.push_back(static_cast<std::size_t>(i));
  }
  return ts;
}

}  // namespace fixtures
