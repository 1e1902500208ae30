#include "wcetrange/pipeline.hpp"

#include <cmath>
#include <json.hpp>

#include "wcetrange/parallel.hpp"

namespace wcetrange {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* sampling_name(learn::SamplingMode m) { return m == learn::SamplingMode::distance ? "distance" : "uniform"; }

const char* stop_name(learn::StopReason r) {
  switch (r) {
    case learn::StopReason::precision_reached: return "precision_reached";
    case learn::StopReason::budget_exhausted: return "budget_exhausted";
    case learn::StopReason::no_refinement: return "no_refinement";
  }
  return "";
}

json optional_real(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json report_json(const EvaluationReport& r) {
  return {{"tp", r.tp},
          {"fp", r.fp},
          {"fn", r.fn},
          {"tn", r.tn},
          {"precision", optional_real(r.precision)},
          {"recall", optional_real(r.recall)}};
}

json bounds_json(const std::vector<learn::Bounds>& b, const std::vector<std::size_t>& cols, const TaskSet& ts) {
  json out = json::array();
  for (std::size_t c = 0; c < cols.size(); ++c)
    out.push_back({{"column", ts.tasks[cols[c]].id}, {"lo_ms", ts.scale.to_ms(b[c].lo)}, {"hi_ms", ts.scale.to_ms(b[c].hi)}});
  return out;
}

std::vector<ArrivalSequence> sequences_of(const std::vector<Individual>& pop) {
  std::vector<ArrivalSequence> out;
  out.reserve(pop.size());
  for (const auto& ind : pop) out.push_back(ind.seq);
  return out;
}

learn::RefineConfig resolved_refine(const RunConfig& cfg) {
  auto r = cfg.refine;
  r.seed = resolve_seeds(cfg.seed).refine;
  r.workers = cfg.workers;
  return r;
}

io::ModelFile model_file(const Phase2Result& r) {
  return {r.refined.border, r.imbalance.p_u, r.imbalance.dataset.bounds, r.best_size_point};
}

}  // namespace

ResolvedSeeds resolve_seeds(std::uint64_t master) {
  return {derive_seed(master, {1}), derive_seed(master, {2}), derive_seed(master, {3}), derive_seed(master, {4}),
          derive_seed(master, {5})};
}

EvaluationReport make_report(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  EvaluationReport r{tp, fp, fn, tn, std::nullopt, std::nullopt};
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return r;
}

TaskSet load_task_set(const fs::path& path) { return parse_task_set(io::read_file(path)); }

Phase2Result run_phase2(const TaskSet& ts, const LabelledDataset& d, const std::vector<Individual>& population,
                        const RunConfig& cfg) {
  const auto unsafe = d.count(Label::unsafe);
  if (d.rows.empty() || unsafe == 0 || unsafe == d.rows.size()) {
    const std::string which = unsafe == 0 ? "safe" : "unsafe";
    throw PipelineError("degenerate_dataset",
                        "the dataset holds only " + which +
                            " rows, so no border can be learned; widen the WCET ranges, run more search "
                            "iterations or pick different target tasks");
  }
  if (d.columns.empty()) throw PipelineError("degenerate_dataset", "the task set has no uncertain WCET");

  const auto seeds = resolve_seeds(cfg.seed);
  Phase2Result out;
  auto forest = cfg.forest;
  forest.workers = cfg.workers;
  auto forest_rng = make_stream(seeds.forest);
  out.reduced = learn::reduce_dimension(d, ts, forest, forest_rng);

  auto model = learn::stepwise_select(out.reduced);
  const double p = learn::select_probability(model, out.reduced);
  out.initial = {std::move(model), p};
  out.imbalance = learn::handle_imbalance(out.reduced, out.initial.model);

  const auto seqs = sequences_of(population);
  out.refined = learn::refine(out.imbalance.dataset, out.initial, seqs, ts, resolved_refine(cfg));
  try {
    out.best_size_point = learn::best_size_point(out.refined.border, out.imbalance.dataset.bounds);
  } catch (const std::domain_error& e) {
    out.best_size_error = e.what();
  }
  return out;
}

LabelledDataset make_testset(const TaskSet& ts, const std::vector<Individual>& population, const io::ModelFile& model,
                             std::size_t size, std::uint64_t seed, unsigned workers) {
  const auto& cols = model.border.model.columns;
  LabelledDataset out;
  out.columns = cols;
  if (size == 0) return out;
  if (population.empty()) throw PipelineError("empty_population", "a test set needs at least one arrival sequence");

  std::vector<bool> retained(ts.tasks.size(), false);
  for (auto c : cols) retained[c] = true;
  const auto uncertain = ts.uncertain_tasks();
  out.rows.resize(size);
  parallel_for(size, workers, [&](std::size_t i) {
    auto rng = make_stream(seed, {i});
    WcetAssignment w;
    for (const auto& t : ts.tasks) w.values.push_back(t.wcet_min);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto lo = static_cast<std::int64_t>(std::ceil(model.bounds[c].lo));
      const auto hi = std::max(lo, static_cast<std::int64_t>(std::floor(model.bounds[c].hi)));
      w.values[cols[c]] = Time{uniform_int(rng, lo, hi)};
    }
    for (auto u : uncertain)
      if (!retained[u]) w.values[u] = Time{uniform_int(rng, ts.tasks[u].wcet_min.ticks(), ts.tasks[u].wcet_max.ticks())};
    const auto sc = simulate(ts, population[i % population.size()].seq, w);
    out.rows[i] = make_row(w, cols, label(sc, ts));
  });
  return out;
}

EvaluationReport evaluate(const io::ModelFile& model, const LabelledDataset& testset) {
  if (testset.columns != model.border.model.columns)
    throw PipelineError("column_mismatch", "test set columns differ from the model columns");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& row : testset.rows) {
    const bool predicted_safe = model.border.is_safe(row);
    const bool actual_safe = row.label == Label::safe;
    if (predicted_safe) {
      ++(actual_safe ? tp : fp);
    } else {
      ++(actual_safe ? fn : tn);
    }
  }
  return make_report(tp, fp, fn, tn);
}

Phase1Result cmd_phase1(const RunConfig& cfg) {
  const auto ts = load_task_set(cfg.task_set);
  auto ga = cfg.ga;
  ga.seed = resolve_seeds(cfg.seed).ga;
  ga.workers = cfg.workers;
  auto result = run_phase1(ts, ga);
  io::write_file(cfg.out_dir / "population.txt", io::format_population(result.population, ts));
  io::write_file(cfg.out_dir / "dataset.csv", io::format_dataset(result.dataset, ts));
  io::write_file(cfg.out_dir / "fitness_history.csv", io::format_fitness_history(result.history));
  return result;
}

Phase2Result cmd_phase2(const RunConfig& cfg, const fs::path& phase1_dir) {
  const auto ts = load_task_set(cfg.task_set);
  const auto population = io::parse_population(io::read_file(phase1_dir / "population.txt"), ts);
  const auto dataset = io::parse_dataset(io::read_file(phase1_dir / "dataset.csv"), ts);
  auto r = run_phase2(ts, dataset, population, cfg);

  const auto mf = model_file(r);
  io::write_file(cfg.out_dir / "model.json", io::format_model(mf, ts));
  if (r.refined.border.model.columns.size() == 2)
    io::write_file(cfg.out_dir / "border_grid.csv", io::format_border_grid(r.refined.border.model, ts, cfg.grid_steps));
  io::write_file(cfg.out_dir / "refinement_history.csv", io::format_refinement_history(r.refined.history));

  std::optional<learn::CrossValidation> cv = r.refined.last_cv;
  const auto rcfg = resolved_refine(cfg);
  if (!cv && r.refined.dataset.rows.size() >= rcfg.k_folds) {
    auto rng = make_stream(rcfg.seed, {0});
    cv = learn::kfold_precision(r.refined.border.model.terms, r.refined.dataset, rcfg.k_folds, rng);
  }

  const auto seeds = resolve_seeds(cfg.seed);
  json rep;
  rep["seed"] = cfg.seed;
  rep["streams"] = {{"ga", seeds.ga}, {"forest", seeds.forest}, {"refine", seeds.refine}, {"testset", seeds.testset},
                    {"simulate", seeds.simulate}};
  rep["sampling"] = sampling_name(cfg.refine.sampling);
  rep["config"] = {{"ns", cfg.refine.ns},         {"nl", cfg.refine.nl},
                   {"pt", cfg.refine.pt},         {"k_folds", cfg.refine.k_folds},
                   {"r_candidates", cfg.refine.r_candidates}, {"restepwise", cfg.refine.restepwise},
                   {"n_trees", cfg.forest.n_trees}};
  json importance = json::object();
  for (std::size_t c = 0; c < r.reduced.importance.size(); ++c)
    importance[ts.tasks[dataset.columns[c]].id] = r.reduced.importance[c];
  rep["importance"] = importance;
  json retained = json::array();
  for (auto c : r.reduced.columns) retained.push_back(ts.tasks[c].id);
  rep["retained_columns"] = retained;
  rep["initial_p"] = r.initial.p;
  rep["p"] = r.refined.border.p;
  rep["p_u"] = r.imbalance.p_u;
  rep["stabilized"] = r.refined.border.model.stabilized;
  rep["stop_reason"] = stop_name(r.refined.stop);
  rep["dataset_size"] = r.refined.dataset.rows.size();
  rep["bounds"] = bounds_json(r.imbalance.dataset.bounds, r.reduced.columns, ts);
  if (r.best_size_point) {
    json pt = json::object();
    for (std::size_t c = 0; c < r.reduced.columns.size(); ++c)
      pt[ts.tasks[r.reduced.columns[c]].id] = ts.scale.to_ms((*r.best_size_point)[c]);
    rep["best_size_point_ms"] = pt;
  } else {
    rep["best_size_point_ms"] = nullptr;
    rep["best_size_error"] = r.best_size_error;
  }
  if (cv) {
    auto cross = report_json(make_report(cv->tp, cv->fp, cv->fn, cv->tn));
    cross["k_folds"] = rcfg.k_folds;
    cross["no_positives"] = cv->no_positives;
    rep["cross_validation"] = cross;
  } else {
    rep["cross_validation"] = nullptr;
  }
  json hist = json::array();
  for (const auto& h : r.refined.history)
    hist.push_back({{"refinement", h.refinement}, {"dataset_size", h.dataset_size}, {"p", h.p}, {"precision", h.precision}});
  rep["history"] = hist;
  io::write_file(cfg.out_dir / "report.json", rep.dump(2) + "\n");
  return r;
}

ScheduleScenario cmd_simulate(const RunConfig& cfg, const SimulateRequest& req) {
  const auto ts = load_task_set(cfg.task_set);
  auto rng = make_stream(resolve_seeds(cfg.seed).simulate);
  ArrivalSequence seq;
  if (req.population) {
    const auto pop = io::parse_population(io::read_file(*req.population), ts);
    if (req.solution >= pop.size())
      throw PipelineError("bad_solution", "solution index " + std::to_string(req.solution) + " out of range (population has " +
                                              std::to_string(pop.size()) + ")");
    seq = pop[req.solution].seq;
  } else {
    seq = random_arrival_sequence(ts, rng);
  }
  if (auto v = validate_arrivals(seq, ts); !v.empty())
    throw PipelineError("invalid_arrivals", "task " + v.front().task_id + " arrival " + std::to_string(v.front().index) +
                                                ": " + v.front().reason);

  WcetAssignment w;
  if (req.wcet == "sample") {
    w = sample_uniform(ts, rng);
  } else if (req.wcet == "min" || req.wcet == "max") {
    for (const auto& t : ts.tasks) w.values.push_back(req.wcet == "min" ? t.wcet_min : t.wcet_max);
  } else {
    throw PipelineError("bad_option", "wcet must be min, max or sample, got '" + req.wcet + "'");
  }
  for (const auto& [id, ms] : req.overrides) {
    std::size_t t = 0;
    try {
      t = ts.index_of(id);
    } catch (const std::out_of_range&) {
      throw PipelineError("bad_option", "unknown task '" + id + "' in WCET override");
    }
    w.values[t] = ts.scale.parse_ms(ms);
  }
  try {
    check_assignment(w, ts);
  } catch (const std::invalid_argument& e) {
    throw PipelineError("bad_option", e.what());
  }

  auto sc = simulate(ts, seq, w);
  io::write_file(cfg.out_dir / "trace.csv", io::format_trace(sc, ts));
  json truncated = json::array();
  for (const auto& t : sc.truncated)
    truncated.push_back({{"task_id", ts.tasks[t.task].id}, {"k", t.k}, {"at_ticks", t.arrival.ticks()}, {"executed_ticks", t.executed.ticks()}});
  const auto worst = worst_target_distance(sc, ts);
  json summary = {{"label", label(sc, ts) == Label::safe ? "safe" : "unsafe"},
                  {"worst_target_distance_ticks", worst ? json(*worst) : json(nullptr)},
                  {"completions", sc.completions.size()},
                  {"truncated", truncated}};
  io::write_file(cfg.out_dir / "scenario.json", summary.dump(2) + "\n");
  return sc;
}

LabelledDataset cmd_make_testset(const RunConfig& cfg, const fs::path& population, const fs::path& model,
                                 std::size_t size) {
  const auto ts = load_task_set(cfg.task_set);
  const auto pop = io::parse_population(io::read_file(population), ts);
  const auto mf = io::parse_model(io::read_file(model), ts);
  auto d = make_testset(ts, pop, mf, size, resolve_seeds(cfg.seed).testset, cfg.workers);
  io::write_file(cfg.out_dir / "testset.csv", io::format_dataset(d, ts));
  return d;
}

EvaluationReport cmd_evaluate(const RunConfig& cfg, const fs::path& model, const fs::path& testset) {
  const auto ts = load_task_set(cfg.task_set);
  const auto mf = io::parse_model(io::read_file(model), ts);
  const auto d = io::parse_dataset(io::read_file(testset), ts);
  const auto r = evaluate(mf, d);
  auto j = report_json(r);
  j["rows"] = d.rows.size();
  j["p"] = mf.border.p;
  j["bounds"] = bounds_json(mf.bounds, mf.border.model.columns, ts);
  io::write_file(cfg.out_dir / "evaluation.json", j.dump(2) + "\n");
  return r;
}

void cmd_full(const RunConfig& cfg) {
  cmd_phase1(cfg);
  cmd_phase2(cfg, cfg.out_dir);
  cmd_make_testset(cfg, cfg.out_dir / "population.txt", cfg.out_dir / "model.json", cfg.testset_size);
  cmd_evaluate(cfg, cfg.out_dir / "model.json", cfg.out_dir / "testset.csv");
}

}  // namespace wcetrange
