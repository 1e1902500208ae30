#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "support/fixtures.hpp"
#include "wcetrange/ga.hpp"

using namespace wcetrange;
using fixtures::times;

namespace {

Individual with_fitness(ArrivalSequence seq, double f) { return Individual{std::move(seq), f}; }

TaskSet three_aperiodic() {
  TaskSet ts;
  ts.horizon = Time{60};
  ts.tasks = {fixtures::aperiodic("a", 3, 4, 5, 10, 1, 2), fixtures::periodic("p", 2, 8, 8, 0, 1, 3),
              fixtures::aperiodic("b", 1, 6, 3, 20, 1, 2), fixtures::aperiodic("c", 0, 9, 7, 9, 1, 1)};
  ts.targets = {2, 3};
  return ts;
}

}  // namespace

TEST_CASE("fitness on the illustration with fixed WCETs") {
  auto rng = make_stream(1);
  const auto seq = fixtures::illustration_arrivals();
  auto a = fitness(fixtures::illustration(3, 3, {0, 1, 2}), seq, 1, rng);
  CHECK(a.value == doctest::Approx(2.0));
  auto b = fitness(fixtures::illustration(2, 2, {0, 1, 2}), seq, 1, rng);
  CHECK(b.value == doctest::Approx(-1.0));
  // degenerate ranges: n does not matter
  CHECK(fitness(fixtures::illustration(3, 3, {0, 1, 2}), seq, 7, rng).value == doctest::Approx(2.0));
  CHECK(a.rows.size() == 1);
  CHECK(fitness(fixtures::illustration(3, 3, {0, 1, 2}), seq, 7, rng).rows.size() == 7);
  CHECK(a.rows[0].label == Label::unsafe);
  CHECK(b.rows[0].label == Label::safe);
}

TEST_CASE("fitness of a run without target instances is the sentinel") {
  TaskSet ts = fixtures::illustration(1, 3, {2});
  ArrivalSequence seq = fixtures::illustration_arrivals();
  seq.arrivals[2].clear();
  auto rng = make_stream(2);
  CHECK(fitness(ts, seq, 3, rng).value == doctest::Approx(-3.0));
  CHECK_THROWS_AS(fitness(ts, seq, 0, rng), std::invalid_argument);
}

TEST_CASE("fitness does not depend on the worker count") {
  const auto ts = three_aperiodic();
  auto gen = make_stream(3);
  const auto seq = random_arrival_sequence(ts, gen);
  auto r1 = make_stream(9);
  auto r4 = make_stream(9);
  const auto a = fitness(ts, seq, 40, r1, 1);
  const auto b = fitness(ts, seq, 40, r4, 4);
  CHECK(a.value == b.value);
  CHECK(a.rows == b.rows);
}

TEST_CASE("tournament selection") {
  auto rng = make_stream(4);
  ArrivalSequence s;
  SUBCASE("max of two") {
    std::vector<Individual> pop{with_fitness(s, 5), with_fitness(s, 3)};
    for (int i = 0; i < 50; ++i) CHECK(tournament_select(pop, rng) == 0);
  }
  SUBCASE("ties are uniform") {
    std::vector<Individual> pop{with_fitness(s, 1), with_fitness(s, 1)};
    int first = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) first += tournament_select(pop, rng) == 0;
    CHECK(std::abs(first - n / 2) < 5 * std::sqrt(n * 0.25));
  }
  SUBCASE("selection probability follows rank") {
    // size-2 tournament over distinct values: P(rank r of N) = 2(r-1)/(N(N-1)), r = 1 worst
    std::vector<Individual> pop;
    for (int i = 0; i < 5; ++i) pop.push_back(with_fitness(s, i));
    std::vector<int> counts(5, 0);
    const int n = 50000;
    for (int i = 0; i < n; ++i) ++counts[tournament_select(pop, rng)];
    for (int r = 0; r < 5; ++r) {
      const double p = 2.0 * r / 20.0;
      CHECK(std::abs(counts[r] - n * p) <= 5 * std::sqrt(n * p * (1 - p)) + 1);
    }
    for (int r = 1; r < 5; ++r) CHECK(counts[r] > counts[r - 1]);
  }
  SUBCASE("preconditions") {
    std::vector<Individual> pop{with_fitness(s, 1)};
    CHECK_THROWS_AS(tournament_select(pop, rng, 2), std::invalid_argument);
    std::vector<Individual> unevaluated{Individual{s, std::nullopt}, Individual{s, std::nullopt}};
    CHECK_THROWS_AS(tournament_select(unevaluated, rng), std::invalid_argument);
  }
}

TEST_CASE("crossover") {
  const auto ts = three_aperiodic();
  auto rng = make_stream(5);
  const Individual a{random_arrival_sequence(ts, rng), 1.0};
  const Individual b{random_arrival_sequence(ts, rng), 2.0};

  SUBCASE("cut at the last aperiodic task swaps every aperiodic list") {
    auto [c1, c2] = crossover_at(a, b, ts.aperiodic_tasks().back());
    for (auto t : ts.aperiodic_tasks()) {
      CHECK(c1.seq.arrivals[t] == b.seq.arrivals[t]);
      CHECK(c2.seq.arrivals[t] == a.seq.arrivals[t]);
    }
    CHECK_FALSE(c1.fitness.has_value());
  }
  SUBCASE("identical parents give identical children") {
    auto [c1, c2] = safe_crossover(a, a, ts, rng);
    CHECK(c1.seq == a.seq);
    CHECK(c2.seq == a.seq);
  }
  SUBCASE("arrival counts move with the swapped lists; children stay valid") {
    for (int i = 0; i < 2000; ++i) {
      const Individual p{random_arrival_sequence(ts, rng), std::nullopt};
      const Individual q{random_arrival_sequence(ts, rng), std::nullopt};
      auto [c1, c2] = safe_crossover(p, q, ts, rng);
      CHECK(validate_arrivals(c1.seq, ts).empty());
      CHECK(validate_arrivals(c2.seq, ts).empty());
      CHECK(c1.seq.size() + c2.seq.size() == p.seq.size() + q.seq.size());
      for (std::size_t t = 0; t < ts.tasks.size(); ++t) {
        const bool swapped = c1.seq.arrivals[t] == q.seq.arrivals[t] && c2.seq.arrivals[t] == p.seq.arrivals[t];
        const bool kept = c1.seq.arrivals[t] == p.seq.arrivals[t] && c2.seq.arrivals[t] == q.seq.arrivals[t];
        CHECK((swapped || kept));
      }
    }
  }
}

TEST_CASE("mutation") {
  const auto ts = fixtures::illustration();
  auto rng = make_stream(6);
  SUBCASE("rate 0 is the identity") {
    const Individual ind{fixtures::illustration_arrivals(), 4.0};
    const auto out = safe_mutation(ind, ts, 0.0, rng);
    CHECK(out.seq == ind.seq);
    CHECK(out.fitness == 4.0);
  }
  SUBCASE("shift rule on j1 = [5, 13, 20] with the first arrival moved to 9") {
    ArrivalSequence seq = fixtures::illustration_arrivals();
    seq.arrivals[0] = times({5, 13, 20});
    mutate_arrival(seq, ts, 0, 0, Time{9}, rng);
    // 13 is outside [14, 19]: shift by 4 to [9, 17, 24], drop 24, then 22 still fits
    CHECK(seq.arrivals[0] == times({9, 17, 22}));
    CHECK(validate_arrivals(seq, ts).empty());
  }
  SUBCASE("a still-valid successor is left alone") {
    ArrivalSequence seq = fixtures::illustration_arrivals();
    seq.arrivals[0] = times({5, 13, 20});
    mutate_arrival(seq, ts, 0, 0, Time{7}, rng);
    CHECK(seq.arrivals[0] == times({7, 13, 20}));
  }
  SUBCASE("10^4 random mutations stay valid") {
    const auto big = three_aperiodic();
    for (int i = 0; i < 10000; ++i) {
      const Individual ind{random_arrival_sequence(big, rng), std::nullopt};
      const auto out = safe_mutation(ind, big, 0.3, rng);
      CHECK(validate_arrivals(out.seq, big).empty());
    }
  }
}

TEST_CASE("phase 1 without iterations") {
  const auto ts = three_aperiodic();
  GaConfig cfg;
  cfg.iterations = 0;
  cfg.runs_per_fitness = 5;
  cfg.seed = 8;
  const auto r = run_phase1(ts, cfg);
  CHECK(r.population.size() == cfg.population_size);
  CHECK(r.dataset.rows.size() == cfg.population_size * cfg.runs_per_fitness);
  CHECK(r.dataset.columns == ts.uncertain_tasks());
  CHECK(r.history.size() == 1);
}

TEST_CASE("phase 1 invariants") {
  const auto ts = three_aperiodic();
  GaConfig cfg;
  cfg.iterations = 60;
  cfg.runs_per_fitness = 4;
  cfg.seed = 10;
  const auto r = run_phase1(ts, cfg);
  CHECK(r.dataset.rows.size() == r.evaluations * cfg.runs_per_fitness);
  CHECK(r.evaluations == cfg.population_size + 2 * cfg.iterations);
  for (const auto& ind : r.population) {
    CHECK(validate_arrivals(ind.seq, ts).empty());
    REQUIRE(ind.fitness.has_value());
  }
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i].best >= r.history[i - 1].best);
  for (const auto& row : r.dataset.rows)
    for (std::size_t c = 0; c < row.wcets.size(); ++c) {
      const auto& t = ts.tasks[r.dataset.columns[c]];
      CHECK(row.wcets[c] >= t.wcet_min);
      CHECK(row.wcets[c] <= t.wcet_max);
    }

  auto again = run_phase1(ts, cfg);
  CHECK(again.dataset == r.dataset);
  cfg.workers = 3;
  CHECK(run_phase1(ts, cfg).dataset == r.dataset);
}

TEST_CASE("all-degenerate WCETs give one label per sequence") {
  auto ts = three_aperiodic();
  for (auto& t : ts.tasks) t.wcet_max = t.wcet_min;
  GaConfig cfg;
  cfg.iterations = 0;
  cfg.runs_per_fitness = 6;
  const auto r = run_phase1(ts, cfg);
  CHECK(r.dataset.columns.empty());
  for (std::size_t e = 0; e < r.evaluations; ++e) {
    std::set<int> labels;
    for (std::size_t i = 0; i < cfg.runs_per_fitness; ++i)
      labels.insert(static_cast<int>(r.dataset.rows[e * cfg.runs_per_fitness + i].label));
    CHECK(labels.size() == 1);
  }
}

TEST_CASE("phase 1 is skipped without aperiodic tasks") {
  TaskSet ts;
  ts.horizon = Time{40};
  ts.tasks = {fixtures::periodic("a", 2, 5, 5, 0, 1, 3), fixtures::periodic("b", 1, 10, 10, 0, 2, 6)};
  ts.targets = {1};
  GaConfig cfg;
  cfg.iterations = 25;
  cfg.runs_per_fitness = 3;
  const auto r = run_phase1(ts, cfg);
  CHECK(r.search_skipped);
  REQUIRE(r.population.size() == 1);
  CHECK(r.population[0].seq == deterministic_arrival_sequence(ts));
  CHECK(r.dataset.rows.size() == cfg.population_size * cfg.runs_per_fitness);
}

TEST_CASE("random search baseline keeps the same budget") {
  const auto ts = three_aperiodic();
  GaConfig cfg;
  cfg.iterations = 20;
  cfg.runs_per_fitness = 2;
  cfg.mode = SearchMode::random;
  const auto r = run_phase1(ts, cfg);
  CHECK(r.evaluations == cfg.population_size + 2 * cfg.iterations);
  for (const auto& ind : r.population) CHECK(validate_arrivals(ind.seq, ts).empty());
}

TEST_CASE("config validation") {
  GaConfig cfg;
  cfg.crossover_rate = 1.5;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.population_size = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}
