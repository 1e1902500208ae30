#include "wcetrange/task_model.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace wcetrange {

TaskSetError::TaskSetError(std::string task_id, std::string field, const std::string& message)
    : std::runtime_error(task_id.empty() ? message
                                         : "task '" + task_id + "'" + (field.empty() ? "" : ", field '" + field + "'") +
                                               ": " + message),
      task_id_(std::move(task_id)),
      field_(std::move(field)) {}

std::size_t TaskSet::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (tasks[i].id == id) return i;
  throw std::out_of_range("unknown task id '" + std::string(id) + "'");
}

bool TaskSet::is_target(std::size_t task) const {
  return std::binary_search(targets.begin(), targets.end(), task);
}

std::vector<std::size_t> TaskSet::uncertain_tasks() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (tasks[i].is_uncertain()) out.push_back(i);
  return out;
}

std::vector<std::size_t> TaskSet::aperiodic_tasks() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (!tasks[i].is_periodic()) out.push_back(i);
  return out;
}

std::size_t ArrivalSequence::size() const {
  std::size_t n = 0;
  for (const auto& a : arrivals) n += a.size();
  return n;
}

void validate_task_set(const TaskSet& ts) {
  if (ts.tasks.empty()) throw TaskSetError("", "", "task set has no tasks");
  if (ts.horizon < Time{1}) throw TaskSetError("", "horizon_ms", "horizon must be at least one tick");
  std::set<std::string> ids;
  for (const auto& t : ts.tasks) {
    if (t.id.empty()) throw TaskSetError("", "id", "task without id");
    if (!ids.insert(t.id).second) throw TaskSetError(t.id, "id", "duplicate task id");
    if (t.deadline < Time{1}) throw TaskSetError(t.id, "deadline_ms", "deadline must be at least one tick");
    if (t.wcet_min < Time{1}) throw TaskSetError(t.id, "wcet_min_ms", "wcet_min must be at least one tick");
    if (t.wcet_max < t.wcet_min) throw TaskSetError(t.id, "wcet_max_ms", "wcet_max is below wcet_min");
    if (t.is_periodic()) {
      const auto& p = t.periodic();
      if (p.period < Time{1}) throw TaskSetError(t.id, "period_ms", "period must be at least one tick");
      if (p.offset < Time{0}) throw TaskSetError(t.id, "offset_ms", "offset must be non-negative");
      if (ts.horizon < p.offset + p.period)
        throw TaskSetError(t.id, "horizon_ms", "horizon is shorter than offset + period");
    } else {
      const auto& a = t.aperiodic();
      if (a.pmin < Time{1}) throw TaskSetError(t.id, "pmin_ms", "pmin must be at least one tick");
      if (a.pmax < a.pmin) throw TaskSetError(t.id, "pmax_ms", "pmin exceeds pmax");
    }
  }
  for (std::size_t i = 0; i < ts.targets.size(); ++i) {
    if (ts.targets[i] >= ts.tasks.size()) throw TaskSetError("", "target", "target index out of range");
    if (i > 0 && ts.targets[i] <= ts.targets[i - 1]) throw TaskSetError("", "target", "targets must be ascending");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Record {
  std::string section;
  std::size_t line = 0;
  std::map<std::string, std::string, std::less<>> fields;
};

std::vector<Record> split_records(std::string_view text) {
  std::vector<Record> records;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw TaskSetError("", "", "line " + std::to_string(line_no) + ": malformed section header");
      records.push_back(Record{std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw TaskSetError("", "", "line " + std::to_string(line_no) + ": expected 'key = value'");
    if (records.empty()) throw TaskSetError("", "", "line " + std::to_string(line_no) + ": field outside a record");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (!records.back().fields.emplace(key, value).second)
      throw TaskSetError("", key, "line " + std::to_string(line_no) + ": duplicate field");
  }
  return records;
}

class FieldReader {
 public:
  FieldReader(const Record& rec, std::string task_id, const TickScale& scale)
      : rec_(rec), task_id_(std::move(task_id)), scale_(scale) {}

  bool has(std::string_view key) const { return rec_.fields.find(key) != rec_.fields.end(); }

  std::string text(std::string_view key) {
    auto it = rec_.fields.find(key);
    if (it == rec_.fields.end()) throw TaskSetError(task_id_, std::string(key), "missing field");
    used_.insert(std::string(key));
    return it->second;
  }

  std::string text_or(std::string_view key, std::string fallback) { return has(key) ? text(key) : fallback; }

  Time time(std::string_view key) {
    auto value = text(key);
    try {
      return scale_.parse_ms(value);
    } catch (const std::invalid_argument& e) {
      throw TaskSetError(task_id_, std::string(key), e.what());
    }
  }

  int integer(std::string_view key) {
    auto value = text(key);
    int out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
      throw TaskSetError(task_id_, std::string(key), "expected an integer, got '" + value + "'");
    return out;
  }

  bool boolean_or(std::string_view key, bool fallback) {
    if (!has(key)) return fallback;
    auto value = text(key);
    if (value == "true" || value == "yes" || value == "1") return true;
    if (value == "false" || value == "no" || value == "0") return false;
    throw TaskSetError(task_id_, std::string(key), "expected true or false, got '" + value + "'");
  }

  void reject_unknown() const {
    for (const auto& [key, value] : rec_.fields)
      if (!used_.count(key)) throw TaskSetError(task_id_, key, "unknown field");
  }

 private:
  const Record& rec_;
  std::string task_id_;
  const TickScale& scale_;
  std::set<std::string> used_;
};

}  // namespace

TaskSet parse_task_set(std::string_view text) {
  auto records = split_records(text);
  const Record* header = nullptr;
  for (const auto& rec : records) {
    if (rec.section == "taskset") {
      if (header) throw TaskSetError("", "", "more than one [taskset] record");
      header = &rec;
    } else if (rec.section != "task") {
      throw TaskSetError("", "", "line " + std::to_string(rec.line) + ": unknown record [" + rec.section + "]");
    }
  }
  if (!header) throw TaskSetError("", "", "missing [taskset] record");

  TaskSet ts;
  TickScale bootstrap;
  {
    FieldReader hr(*header, "", bootstrap);
    auto tick = hr.text_or("tick_ms", "0.1");
    try {
      ts.scale = TickScale::from_ms(tick);
    } catch (const std::invalid_argument& e) {
      throw TaskSetError("", "tick_ms", e.what());
    }
    FieldReader hr2(*header, "", ts.scale);
    hr2.text_or("tick_ms", "");
    ts.horizon = hr2.time("horizon_ms");
    hr2.reject_unknown();
  }

  for (const auto& rec : records) {
    if (rec.section != "task") continue;
    auto id_it = rec.fields.find("id");
    if (id_it == rec.fields.end() || id_it->second.empty())
      throw TaskSetError("", "id", "line " + std::to_string(rec.line) + ": task record without id");
    FieldReader r(rec, id_it->second, ts.scale);
    Task t;
    t.id = r.text("id");
    t.name = r.text_or("name", t.id);
    t.priority = r.integer("priority");
    t.deadline = r.time("deadline_ms");
    auto kind = r.text("kind");
    if (kind == "periodic") {
      Periodic p;
      p.period = r.time("period_ms");
      p.offset = r.has("offset_ms") ? r.time("offset_ms") : Time{0};
      t.kind = p;
    } else if (kind == "aperiodic") {
      t.kind = Aperiodic{r.time("pmin_ms"), r.time("pmax_ms")};
    } else {
      throw TaskSetError(t.id, "kind", "expected periodic or aperiodic, got '" + kind + "'");
    }
    t.wcet_min = r.time("wcet_min_ms");
    t.wcet_max = r.time("wcet_max_ms");
    auto dk = r.text_or("deadline_kind", "hard");
    if (dk == "hard") {
      t.deadline_kind = DeadlineKind::hard;
    } else if (dk == "soft") {
      t.deadline_kind = DeadlineKind::soft;
    } else {
      throw TaskSetError(t.id, "deadline_kind", "expected hard or soft, got '" + dk + "'");
    }
    if (r.boolean_or("target", false)) ts.targets.push_back(ts.tasks.size());
    r.reject_unknown();
    ts.tasks.push_back(std::move(t));
  }
  validate_task_set(ts);
  return ts;
}

std::string serialize_task_set(const TaskSet& ts) {
  std::ostringstream out;
  out << "[taskset]\n";
  out << "horizon_ms = " << ts.scale.format_ms(ts.horizon) << "\n";
  out << "tick_ms = " << ts.scale.tick_ms() << "\n";
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    const auto& t = ts.tasks[i];
    out << "\n[task]\n";
    out << "id = " << t.id << "\n";
    out << "name = " << t.name << "\n";
    out << "priority = " << t.priority << "\n";
    out << "deadline_ms = " << ts.scale.format_ms(t.deadline) << "\n";
    if (t.is_periodic()) {
      out << "kind = periodic\n";
      out << "period_ms = " << ts.scale.format_ms(t.periodic().period) << "\n";
      out << "offset_ms = " << ts.scale.format_ms(t.periodic().offset) << "\n";
    } else {
      out << "kind = aperiodic\n";
      out << "pmin_ms = " << ts.scale.format_ms(t.aperiodic().pmin) << "\n";
      out << "pmax_ms = " << ts.scale.format_ms(t.aperiodic().pmax) << "\n";
    }
    out << "wcet_min_ms = " << ts.scale.format_ms(t.wcet_min) << "\n";
    out << "wcet_max_ms = " << ts.scale.format_ms(t.wcet_max) << "\n";
    out << "deadline_kind = " << (t.deadline_kind == DeadlineKind::hard ? "hard" : "soft") << "\n";
    out << "target = " << (ts.is_target(i) ? "true" : "false") << "\n";
  }
  return out.str();
}

std::vector<Time> periodic_arrivals(const Task& task, Time horizon) {
  const auto& p = task.periodic();
  std::vector<Time> out;
  for (Time at = p.offset; at <= horizon; at += p.period) out.push_back(at);
  return out;
}

std::vector<ArrivalViolation> validate_arrivals(const ArrivalSequence& seq, const TaskSet& ts) {
  std::vector<ArrivalViolation> out;
  if (seq.arrivals.size() != ts.tasks.size()) {
    out.push_back({"", 0, "sequence covers " + std::to_string(seq.arrivals.size()) + " tasks, task set has " +
                              std::to_string(ts.tasks.size())});
    return out;
  }
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    const auto& task = ts.tasks[i];
    const auto& arr = seq.arrivals[i];
    if (task.is_periodic()) {
      auto expected = periodic_arrivals(task, ts.horizon);
      if (arr != expected) {
        std::size_t k = 0;
        while (k < arr.size() && k < expected.size() && arr[k] == expected[k]) ++k;
        out.push_back({task.id, k + 1, "periodic arrivals differ from offset + (k-1)*period"});
      }
      continue;
    }
    const auto& a = task.aperiodic();
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const Time prev = k == 0 ? Time{0} : arr[k - 1];
      const Time gap = arr[k] - prev;
      if (gap < a.pmin) {
        out.push_back({task.id, k + 1,
                       (k == 0 ? "first arrival before pmin" : "inter-arrival gap below pmin") +
                           std::string(" (") + std::to_string(gap.ticks()) + " < " +
                           std::to_string(a.pmin.ticks()) + " ticks)"});
      } else if (gap > a.pmax) {
        out.push_back({task.id, k + 1,
                       (k == 0 ? "first arrival after pmax" : "inter-arrival gap above pmax") +
                           std::string(" (") + std::to_string(gap.ticks()) + " > " +
                           std::to_string(a.pmax.ticks()) + " ticks)"});
      }
      if (arr[k] >= ts.horizon) out.push_back({task.id, k + 1, "arrival at or after the horizon"});
    }
  }
  return out;
}

void extend_aperiodic_arrivals(std::vector<Time>& arrivals, const Task& task, Time horizon, Rng& rng) {
  const auto& a = task.aperiodic();
  const Time last_allowed = horizon - Time{1};
  Time last = arrivals.empty() ? Time{0} : arrivals.back();
  while (last + a.pmin <= last_allowed) {
    const Time hi = std::min(last + a.pmax, last_allowed);
    last = Time{uniform_int(rng, (last + a.pmin).ticks(), hi.ticks())};
    arrivals.push_back(last);
  }
}

std::vector<Time> random_aperiodic_arrivals(const Task& task, Time horizon, Rng& rng) {
  std::vector<Time> out;
  extend_aperiodic_arrivals(out, task, horizon, rng);
  return out;
}

ArrivalSequence random_arrival_sequence(const TaskSet& ts, Rng& rng) {
  ArrivalSequence seq;
  seq.arrivals.reserve(ts.tasks.size());
  for (const auto& t : ts.tasks) {
    seq.arrivals.push_back(t.is_periodic() ? periodic_arrivals(t, ts.horizon)
                                           : random_aperiodic_arrivals(t, ts.horizon, rng));
  }
  return seq;
}

ArrivalSequence deterministic_arrival_sequence(const TaskSet& ts) {
  ArrivalSequence seq;
  for (const auto& t : ts.tasks) {
    if (!t.is_periodic()) throw std::logic_error("task '" + t.id + "' is aperiodic");
    seq.arrivals.push_back(periodic_arrivals(t, ts.horizon));
  }
  return seq;
}

}  // namespace wcetrange
