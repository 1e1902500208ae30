#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wcetrange/dataset.hpp"
#include "wcetrange/ga.hpp"
#include "wcetrange/learn/border.hpp"
#include "wcetrange/learn/refine.hpp"
#include "wcetrange/scheduler.hpp"
#include "wcetrange/task_model.hpp"

namespace wcetrange::io {

/// Malformed file content; `what()` names the file kind and line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that reads back to the same double.
std::string format_real(double v);
double parse_real(std::string_view text);

/// A file that cannot be opened, read or written.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for batch use: truncates then writes the whole text.
void write_file(const std::filesystem::path& path, std::string_view text);

// Population: one "[solution]" block per individual with an optional
// "fitness = x" line and one "task_id = t1 t2 ..." line (milliseconds) per task.
std::string format_population(const std::vector<Individual>& pop, const TaskSet& ts);
std::vector<Individual> parse_population(std::string_view text, const TaskSet& ts);

// Labelled CSV: header of task ids then "label"; values in milliseconds.
std::string format_dataset(const LabelledDataset& d, const TaskSet& ts);
LabelledDataset parse_dataset(std::string_view text, const TaskSet& ts);

// iteration,best,mean
std::string format_fitness_history(const std::vector<FitnessHistoryEntry>& h);
std::vector<FitnessHistoryEntry> parse_fitness_history(std::string_view text);

// refinement,dataset_size,p,precision
std::string format_refinement_history(const std::vector<learn::RefinementRecord>& h);
std::vector<learn::RefinementRecord> parse_refinement_history(std::string_view text);

// task_id,k,at_ticks,et_ticks,dist_ticks for every completion.
std::string format_trace(const ScheduleScenario& sc, const TaskSet& ts);

struct TraceRecord {
  std::string task_id;
  std::size_t k;
  std::int64_t at;
  std::int64_t et;
  std::int64_t dist;
  bool operator==(const TraceRecord&) const = default;
};
std::vector<TraceRecord> parse_trace(std::string_view text);

/// Everything needed to reuse a learned border: the model, the selected p,
/// the imbalance threshold and the pruned bounds.
struct ModelFile {
  learn::SafeBorder border;
  double p_u = learn::kProbabilityCap;
  std::vector<learn::Bounds> bounds;  // ticks
  std::optional<std::vector<double>> best_size_point;  // ticks
};

std::string format_model(const ModelFile& m, const TaskSet& ts);
ModelFile parse_model(std::string_view text, const TaskSet& ts);

/// Grid over the two retained columns' original ranges with the predicted
/// miss probability at each node. Requires exactly two model columns.
std::string format_border_grid(const learn::RsmModel& m, const TaskSet& ts, std::size_t steps = 51);

}  // namespace wcetrange::io
