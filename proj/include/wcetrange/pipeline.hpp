#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wcetrange/ga.hpp"
#include "wcetrange/io.hpp"
#include "wcetrange/learn/refine.hpp"
#include "wcetrange/numerics/forest.hpp"

namespace wcetrange {

/// Failure that the command line reports as an error record, e.g. a dataset
/// with one label only.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string kind, const std::string& message) : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct RunConfig {
  std::filesystem::path task_set;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;  // every component seed is derived from this
  unsigned workers = 1;
  GaConfig ga;
  learn::RefineConfig refine;
  numerics::ForestConfig forest;
  std::size_t testset_size = 1000;
  std::size_t grid_steps = 51;
};

/// Component seeds and worker counts filled in from the master settings.
struct ResolvedSeeds {
  std::uint64_t ga;
  std::uint64_t forest;
  std::uint64_t refine;
  std::uint64_t testset;
  std::uint64_t simulate;
};
ResolvedSeeds resolve_seeds(std::uint64_t master);

struct EvaluationReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::optional<double> precision;  // empty when nothing was classified safe
  std::optional<double> recall;     // empty when there is no safe row
};
EvaluationReport make_report(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

struct Phase2Result {
  learn::ReducedDataset reduced;
  learn::SafeBorder initial;
  learn::ImbalanceResult imbalance;
  learn::RefineResult refined;
  std::optional<std::vector<double>> best_size_point;
  std::string best_size_error;  // set when the safe region is empty
};

TaskSet load_task_set(const std::filesystem::path& path);

/// Reduction, term selection, probability selection, imbalance pruning,
/// refinement and the best-size point. Throws PipelineError on a dataset with
/// a single label.
Phase2Result run_phase2(const TaskSet& ts, const LabelledDataset& d, const std::vector<Individual>& population,
                        const RunConfig& cfg);

/// Uniform draws inside the model's bounds (other uncertain tasks inside their
/// full ranges), each simulated against population[i mod |P|].
LabelledDataset make_testset(const TaskSet& ts, const std::vector<Individual>& population, const io::ModelFile& model,
                             std::size_t size, std::uint64_t seed, unsigned workers = 1);

/// Classifies every test row with the border; safe is the positive class.
/// Throws PipelineError if the test columns differ from the model columns.
EvaluationReport evaluate(const io::ModelFile& model, const LabelledDataset& testset);

// Commands: each reads and writes files below cfg.out_dir.
Phase1Result cmd_phase1(const RunConfig& cfg);
Phase2Result cmd_phase2(const RunConfig& cfg, const std::filesystem::path& phase1_dir);

struct SimulateRequest {
  std::optional<std::filesystem::path> population;  // random sequence when absent
  std::size_t solution = 0;
  std::string wcet = "max";                                   // min | max | sample
  std::vector<std::pair<std::string, std::string>> overrides;  // task id, ms
};
ScheduleScenario cmd_simulate(const RunConfig& cfg, const SimulateRequest& req);

LabelledDataset cmd_make_testset(const RunConfig& cfg, const std::filesystem::path& population,
                                 const std::filesystem::path& model, std::size_t size);
EvaluationReport cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& model,
                              const std::filesystem::path& testset);
void cmd_full(const RunConfig& cfg);

}  // namespace wcetrange
