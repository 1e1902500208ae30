// Command-line front end: phase1, phase2, simulate, make-testset, evaluate, full.
#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <map>

#include "wcetrange/io.hpp"
#include "wcetrange/pipeline.hpp"

using namespace wcetrange;
namespace fs = std::filesystem;

namespace {

int emit_error(const std::string& kind, const std::string& message, const std::string& task_id = {},
               const std::string& field = {}, int code = 1) {
  nlohmann::json rec = {{"status", "error"}, {"kind", kind}, {"message", message}};
  if (!task_id.empty()) rec["task_id"] = task_id;
  if (!field.empty()) rec["field"] = field;
  std::cerr << rec.dump() << "\n";
  return code;
}

void add_common(CLI::App* app, RunConfig& cfg, bool needs_tasks = true) {
  auto* opt = app->add_option("--tasks", cfg.task_set, "Task-set document");
  if (needs_tasks) opt->required();
  app->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  app->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  app->add_option("--workers", cfg.workers, "Worker threads (results do not depend on it)")->capture_default_str();
}

void add_ga(CLI::App* app, RunConfig& cfg) {
  auto& g = cfg.ga;
  app->add_option("--population-size", g.population_size)->capture_default_str();
  app->add_option("--crossover-rate", g.crossover_rate)->capture_default_str();
  app->add_option("--mutation-rate", g.mutation_rate)->capture_default_str();
  app->add_option("--iterations", g.iterations)->capture_default_str();
  app->add_option("--runs-per-fitness", g.runs_per_fitness, "Simulations per fitness evaluation")->capture_default_str();
  app->add_option("--tournament-size", g.tournament_size)->capture_default_str();
  app->add_option("--search", g.mode, "genetic or random (baseline)")
      ->transform(CLI::CheckedTransformer(std::map<std::string, SearchMode>{{"genetic", SearchMode::genetic},
                                                                             {"random", SearchMode::random}}));
}

void add_learn(CLI::App* app, RunConfig& cfg) {
  auto& r = cfg.refine;
  app->add_option("--ns", r.ns, "WCET samples per solution per refinement")->capture_default_str();
  app->add_option("--nl", r.nl, "Maximum refinements")->capture_default_str();
  app->add_option("--pt", r.pt, "Precision threshold")->capture_default_str();
  app->add_option("--k-folds", r.k_folds)->capture_default_str();
  app->add_option("--r-candidates", r.r_candidates, "Candidates per distance-based draw")->capture_default_str();
  app->add_flag("--restepwise", r.restepwise, "Re-run term selection at every refinement");
  app->add_option_function<std::string>(
         "--sampling",
         [&r](const std::string& v) {
           r.sampling = v == "uniform" ? learn::SamplingMode::uniform : learn::SamplingMode::distance;
         },
         "Refinement sampling: distance or uniform")
      ->check(CLI::IsMember({"distance", "uniform"}));
  app->add_option("--n-trees", cfg.forest.n_trees)->capture_default_str();
  app->add_option("--max-features", cfg.forest.max_features, "0 means ceil(sqrt(columns))")->capture_default_str();
  app->add_option("--max-depth", cfg.forest.max_depth, "0 means unlimited")->capture_default_str();
  app->add_option("--grid-steps", cfg.grid_steps, "Border grid nodes per axis")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WCET range inference by stress search and logistic refinement"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* phase1 = app.add_subcommand("phase1", "Search arrival sequences and collect the labelled dataset");
  add_common(phase1, cfg);
  add_ga(phase1, cfg);

  fs::path phase1_dir;
  auto* phase2 = app.add_subcommand("phase2", "Learn and refine the safe border from phase1 output");
  add_common(phase2, cfg);
  add_learn(phase2, cfg);
  phase2->add_option("--phase1-dir", phase1_dir, "Directory with population.txt and dataset.csv (default: --out)");

  SimulateRequest sim;
  std::vector<std::string> overrides;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one scenario and write its trace");
  add_common(simulate_cmd, cfg);
  simulate_cmd->add_option("--population", sim.population, "Population file; a random sequence is drawn otherwise");
  simulate_cmd->add_option("--solution", sim.solution, "Index into the population")->capture_default_str();
  simulate_cmd->add_option("--wcet", sim.wcet, "min, max or sample")->capture_default_str();
  simulate_cmd->add_option("--set", overrides, "Override one WCET, e.g. --set j2=3");

  fs::path population, model, testset;
  std::size_t size = 1000;
  auto* make_testset_cmd = app.add_subcommand("make-testset", "Sample and label a test set inside the model bounds");
  add_common(make_testset_cmd, cfg);
  make_testset_cmd->add_option("--population", population)->required();
  make_testset_cmd->add_option("--model", model)->required();
  make_testset_cmd->add_option("--size", size)->capture_default_str();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Precision and recall of a model on a test set");
  add_common(evaluate_cmd, cfg);
  evaluate_cmd->add_option("--model", model)->required();
  evaluate_cmd->add_option("--testset", testset)->required();

  auto* full = app.add_subcommand("full", "phase1, phase2, make-testset and evaluate in one output directory");
  add_common(full, cfg);
  add_ga(full, cfg);
  add_learn(full, cfg);
  full->add_option("--testset-size", cfg.testset_size)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what(), {}, {}, 2);
  }

  try {
    validate(cfg.ga);
    learn::validate(cfg.refine);
    nlohmann::json ok = {{"status", "ok"}, {"out", cfg.out_dir.string()}};
    if (*phase1) {
      const auto r = cmd_phase1(cfg);
      ok["evaluations"] = r.evaluations;
      ok["rows"] = r.dataset.rows.size();
      ok["search_skipped"] = r.search_skipped;
    } else if (*phase2) {
      const auto r = cmd_phase2(cfg, phase1_dir.empty() ? cfg.out_dir : phase1_dir);
      ok["p"] = r.refined.border.p;
      ok["refinements"] = r.refined.history.size();
    } else if (*simulate_cmd) {
      for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) return emit_error("usage", "--set expects task=ms, got '" + o + "'", {}, {}, 2);
        sim.overrides.emplace_back(o.substr(0, eq), o.substr(eq + 1));
      }
      const auto sc = cmd_simulate(cfg, sim);
      ok["completions"] = sc.completions.size();
    } else if (*make_testset_cmd) {
      ok["rows"] = cmd_make_testset(cfg, population, model, size).rows.size();
    } else if (*evaluate_cmd) {
      const auto r = cmd_evaluate(cfg, model, testset);
      ok["tp"] = r.tp;
      ok["fp"] = r.fp;
    } else if (*full) {
      cmd_full(cfg);
    }
    std::cout << ok.dump() << "\n";
  } catch (const TaskSetError& e) {
    return emit_error("task_set", e.what(), e.task_id(), e.field());
  } catch (const PipelineError& e) {
    return emit_error(e.kind(), e.what());
  } catch (const io::FormatError& e) {
    return emit_error("format", e.what());
  } catch (const io::FileError& e) {
    return emit_error("file", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return emit_error("file", e.what());
  } catch (const std::invalid_argument& e) {
    return emit_error("invalid_argument", e.what());
  } catch (const std::exception& e) {
    return emit_error("runtime", e.what());
  }
  return 0;
}
