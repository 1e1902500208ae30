#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>

#include "support/fixtures.hpp"
#include "wcetrange/ga.hpp"
#include "wcetrange/io.hpp"
#include "wcetrange/pipeline.hpp"
#include "wcetrange/scheduler.hpp"

using namespace wcetrange;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("wcetrange_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const fs::path kData{WCETRANGE_DATA_DIR};

// One column (j2, range [1, 3]); logit = -5 + 10 s, so p = 0.5 is safe up to 2 ms.
io::ModelFile j2_model(double p = 0.5) {
  io::ModelFile m;
  m.border.model.columns = {1};
  m.border.model.scaling = {{1, 2}};
  m.border.model.terms = {{learn::TermKind::intercept, 0, 0}, {learn::TermKind::linear, 0, 0}};
  m.border.model.coefficients = {-5, 10};
  m.border.p = p;
  m.p_u = 0.9;
  m.bounds = {{1, 3}};
  return m;
}

LabelledRow r(std::int64_t v, Label l) { return {{Time{v}}, l}; }

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = io::read_file(e.path());
  return out;
}

RunConfig small_run(const fs::path& out) {
  RunConfig cfg;
  cfg.task_set = kData / "mini_adcs.tasks";
  cfg.out_dir = out;
  cfg.seed = 3;
  cfg.ga.iterations = 30;
  cfg.ga.runs_per_fitness = 20;
  cfg.refine.nl = 2;
  cfg.refine.ns = 10;
  cfg.testset_size = 200;
  return cfg;
}

}  // namespace

TEST_CASE("real formatting round-trips") {
  auto rng = make_stream(51);
  for (int i = 0; i < 2000; ++i) {
    const double v = uniform_real(rng, -1e6, 1e6) * std::pow(10.0, uniform_int(rng, -20, 5));
    CHECK(io::parse_real(io::format_real(v)) == v);
  }
  CHECK(io::format_real(0.5) == "0.5");
  CHECK(io::format_real(-3.0) == "-3");
  CHECK_THROWS_AS(io::parse_real("1.5x"), io::FormatError);
}

TEST_CASE("population round-trip") {
  const auto ts = fixtures::illustration();
  auto rng = make_stream(52);
  std::vector<Individual> pop;
  for (int i = 0; i < 5; ++i) {
    Individual ind{random_arrival_sequence(ts, rng), std::nullopt};
    if (i % 2 == 0) ind.fitness = uniform_real(rng, -5, 5);
    pop.push_back(ind);
  }
  const auto back = io::parse_population(io::format_population(pop, ts), ts);
  REQUIRE(back.size() == pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(back[i].seq == pop[i].seq);
    CHECK(back[i].fitness == pop[i].fitness);
  }
  CHECK_THROWS_AS(io::parse_population("[solution]\nj9 = 1 2\n", ts), io::FormatError);
}

TEST_CASE("dataset round-trip with sub-millisecond ticks") {
  auto ts = fixtures::illustration(10, 30, {2}, 10);
  LabelledDataset d;
  d.columns = {1};
  for (std::int64_t v = 10; v <= 30; v += 3) d.rows.push_back(r(v, v > 20 ? Label::unsafe : Label::safe));
  const auto text = io::format_dataset(d, ts);
  CHECK(text.rfind("j2,label\n", 0) == 0);
  CHECK(text.find("1.3,") != std::string::npos);
  CHECK(io::parse_dataset(text, ts) == d);
  CHECK_THROWS_AS(io::parse_dataset("j2,label\n1.05,safe\n", ts), io::FormatError);
  CHECK_THROWS_AS(io::parse_dataset("j2,label\n1,maybe\n", ts), io::FormatError);
}

TEST_CASE("history round-trips") {
  std::vector<FitnessHistoryEntry> h{{0, -1.5, -2.25}, {1, 0.125, -1}};
  const auto hb = io::parse_fitness_history(io::format_fitness_history(h));
  REQUIRE(hb.size() == 2);
  CHECK(hb[1].iteration == 1);
  CHECK(hb[1].best == 0.125);
  CHECK(hb[0].mean == -2.25);

  std::vector<learn::RefinementRecord> rh{{1, 120, 0.25, 0.9, 0}, {2, 140, 0.3, 1.0, 0}};
  const auto rb = io::parse_refinement_history(io::format_refinement_history(rh));
  REQUIRE(rb.size() == 2);
  CHECK(rb[0].dataset_size == 120);
  CHECK(rb[0].p == 0.25);
  CHECK(rb[1].precision == 1.0);
}

TEST_CASE("trace lists every completion with its distance") {
  const auto ts = fixtures::illustration();
  const auto sc = simulate(ts, fixtures::illustration_arrivals(), fixtures::assignment({2, 3, 1}));
  const auto recs = io::parse_trace(io::format_trace(sc, ts));
  REQUIRE(recs.size() == sc.completions.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& c = sc.completions[i];
    CHECK(recs[i].task_id == ts.tasks[c.task].id);
    CHECK(recs[i].k == c.k);
    CHECK(recs[i].at == c.arrival.ticks());
    CHECK(recs[i].et == c.end.ticks());
    CHECK(recs[i].dist == c.end.ticks() - (c.arrival + ts.tasks[c.task].deadline).ticks());
  }
}

TEST_CASE("model file round-trip") {
  const auto ts = fixtures::illustration();
  auto m = j2_model(0.37);
  m.best_size_point = std::vector<double>{2.25};
  const auto text = io::format_model(m, ts);
  const auto back = io::parse_model(text, ts);
  CHECK(back.border.model.columns == m.border.model.columns);
  CHECK(back.border.model.terms == m.border.model.terms);
  CHECK(back.border.model.coefficients == m.border.model.coefficients);
  CHECK(back.border.p == m.border.p);
  CHECK(back.p_u == m.p_u);
  CHECK(back.bounds == m.bounds);
  CHECK(back.best_size_point == m.best_size_point);
  CHECK(io::format_model(back, ts) == text);
  CHECK_THROWS_AS(io::parse_model("{\"columns\": [\"j9\"]}", ts), io::FormatError);
}

TEST_CASE("border grid") {
  auto ts = fixtures::illustration(1, 3, {2});
  ts.tasks[0].wcet_max = Time{4};
  auto model = j2_model().border.model;
  model.columns = {0, 1};
  model.scaling = {{2, 2}, {1, 2}};
  model.terms.push_back({learn::TermKind::linear, 1, 0});
  model.coefficients.push_back(1);
  const auto grid = io::format_border_grid(model, ts, 5);
  std::size_t lines = 0;
  for (char c : grid) lines += c == '\n';
  CHECK(lines == 1 + 25);
  CHECK(grid.rfind("j1_ms,j2_ms,miss_probability\n", 0) == 0);
  CHECK_THROWS(io::format_border_grid(j2_model().border.model, ts, 5));
}

TEST_CASE("evaluate on a hand-built test set") {
  const auto m = j2_model();
  LabelledDataset t;
  t.columns = {1};
  // predicted safe iff v <= 2
  t.rows = {r(1, Label::safe), r(1, Label::unsafe), r(2, Label::safe), r(3, Label::safe), r(3, Label::unsafe),
            r(2, Label::unsafe)};
  const auto rep = evaluate(m, t);
  CHECK(rep.tp == 2);
  CHECK(rep.fp == 2);
  CHECK(rep.fn == 1);
  CHECK(rep.tn == 1);
  CHECK(*rep.precision == doctest::Approx(0.5));
  CHECK(*rep.recall == doctest::Approx(2.0 / 3.0));

  t.rows.clear();
  const auto empty = evaluate(m, t);
  CHECK_FALSE(empty.precision.has_value());
  CHECK_FALSE(empty.recall.has_value());

  t.columns = {0};
  try {
    evaluate(m, t);
    FAIL("expected column mismatch");
  } catch (const PipelineError& e) {
    CHECK(e.kind() == "column_mismatch");
  }
}

TEST_CASE("make_testset") {
  const auto ts = fixtures::illustration();
  std::vector<Individual> pop{{fixtures::illustration_arrivals(), std::nullopt}};
  const auto m = j2_model();
  CHECK(make_testset(ts, pop, m, 0, 7).rows.empty());
  const auto a = make_testset(ts, pop, m, 60, 7);
  CHECK(a.columns == std::vector<std::size_t>{1});
  CHECK(a.rows.size() == 60);
  for (const auto& row : a.rows) CHECK((row.wcets[0] >= Time{1} && row.wcets[0] <= Time{3}));
  CHECK(make_testset(ts, pop, m, 60, 7, 3) == a);
  CHECK_THROWS_AS(make_testset(ts, {}, m, 5, 7), PipelineError);
}

TEST_CASE("single-label dataset is reported, not fitted") {
  const auto ts = fixtures::illustration();
  LabelledDataset d;
  d.columns = {1};
  d.rows = {r(1, Label::safe), r(2, Label::safe)};
  RunConfig cfg;
  try {
    run_phase2(ts, d, {{fixtures::illustration_arrivals(), std::nullopt}}, cfg);
    FAIL("expected degenerate dataset");
  } catch (const PipelineError& e) {
    CHECK(e.kind() == "degenerate_dataset");
  }
}

TEST_CASE("phase 1 without aperiodic tasks skips the search") {
  const auto dir = scratch("periodic_only");
  const auto path = dir / "p.tasks";
  std::ofstream(path) << "[taskset]\nhorizon_ms = 40\ntick_ms = 1\n\n"
                         "[task]\nid = a\npriority = 2\ndeadline_ms = 5\nkind = periodic\nperiod_ms = 5\n"
                         "offset_ms = 0\nwcet_min_ms = 1\nwcet_max_ms = 4\ntarget = true\n\n"
                         "[task]\nid = b\npriority = 1\ndeadline_ms = 10\nkind = periodic\nperiod_ms = 10\n"
                         "offset_ms = 0\nwcet_min_ms = 1\nwcet_max_ms = 6\n";
  RunConfig cfg;
  cfg.task_set = path;
  cfg.out_dir = dir / "out";
  cfg.ga.iterations = 50;
  cfg.ga.runs_per_fitness = 5;
  const auto res = cmd_phase1(cfg);
  CHECK(res.search_skipped);
  CHECK(res.dataset.rows.size() == cfg.ga.population_size * cfg.ga.runs_per_fitness);
  CHECK(fs::exists(cfg.out_dir / "dataset.csv"));
}

TEST_CASE("full run is reproducible and independent of the worker count") {
  const auto a = scratch("full_a"), b = scratch("full_b"), c = scratch("full_c");
  cmd_full(small_run(a));
  cmd_full(small_run(b));
  auto cfg = small_run(c);
  cfg.workers = 3;
  cmd_full(cfg);
  const auto ta = read_tree(a), tb = read_tree(b), tc = read_tree(c);
  CHECK(ta.size() >= 8);
  CHECK(ta == tb);
  CHECK(ta == tc);
  for (const char* f : {"population.txt", "dataset.csv", "model.json", "testset.csv", "evaluation.json", "report.json"})
    CHECK(ta.count(f) == 1);
}

TEST_CASE("simulate command") {
  const auto dir = scratch("simulate");
  RunConfig cfg;
  cfg.task_set = kData / "illustration.tasks";
  cfg.out_dir = dir;
  SimulateRequest req;
  req.overrides = {{"j2", "3"}};
  const auto sc = cmd_simulate(cfg, req);
  CHECK(sc.assignment.values[1] == Time{3});
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "scenario.json"));
  req.overrides = {{"j9", "3"}};
  CHECK_THROWS_AS(cmd_simulate(cfg, req), PipelineError);
  req.overrides = {{"j2", "9"}};
  CHECK_THROWS(cmd_simulate(cfg, req));
}
