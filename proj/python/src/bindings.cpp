#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wcetrange/io.hpp"
#include "wcetrange/numerics/stats.hpp"
#include "wcetrange/pipeline.hpp"
#include "wcetrange/scheduler.hpp"

namespace py = pybind11;
using namespace wcetrange;

namespace {

Time to_ticks(const TaskSet& ts, double ms) { return ts.scale.parse_ms(io::format_real(ms)); }

ArrivalSequence arrivals_from(const TaskSet& ts, const std::map<std::string, std::vector<double>>& ms) {
  ArrivalSequence seq;
  seq.arrivals.resize(ts.tasks.size());
  for (std::size_t t = 0; t < ts.tasks.size(); ++t)
    if (ts.tasks[t].is_periodic()) seq.arrivals[t] = periodic_arrivals(ts.tasks[t], ts.horizon);
  for (const auto& [id, values] : ms) {
    auto& arr = seq.arrivals[ts.index_of(id)];
    arr.clear();
    for (double v : values) arr.push_back(to_ticks(ts, v));
  }
  return seq;
}

py::dict simulate_py(const TaskSet& ts, const std::map<std::string, std::vector<double>>& arrivals,
                     const std::map<std::string, double>& wcets) {
  WcetAssignment w;
  for (const auto& task : ts.tasks) w.values.push_back(task.wcet_max);
  for (const auto& [id, v] : wcets) w.values[ts.index_of(id)] = to_ticks(ts, v);
  const auto seq = arrivals_from(ts, arrivals);
  if (const auto v = validate_arrivals(seq, ts); !v.empty())
    throw std::invalid_argument("task " + v.front().task_id + " arrival " + std::to_string(v.front().index) + ": " +
                                v.front().reason);
  const auto sc = simulate(ts, seq, w);
  py::list completions;
  for (const auto& c : sc.completions) {
    const double dist = ts.scale.to_ms(double((c.end - (c.arrival + ts.tasks[c.task].deadline)).ticks()));
    completions.append(py::make_tuple(ts.tasks[c.task].id, c.k, ts.scale.to_ms(double(c.arrival.ticks())),
                                      ts.scale.to_ms(double(c.end.ticks())), dist));
  }
  py::dict out;
  out["completions"] = completions;
  out["unsafe"] = label(sc, ts) == Label::unsafe;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the wcetrange scheduler, learned border files and pipeline commands";

  py::register_exception<TaskSetError>(m, "TaskSetError", PyExc_ValueError);
  py::register_exception<io::FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<io::FileError>(m, "FileError", PyExc_OSError);
  static py::exception<PipelineError> pipeline_error(m, "PipelineError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const PipelineError& e) {
      py::set_error(pipeline_error, (e.kind() + ": " + e.what()).c_str());
    }
  });

  py::class_<TaskSet>(m, "TaskSet")
      .def_property_readonly("ids",
                             [](const TaskSet& ts) {
                               std::vector<std::string> ids;
                               for (const auto& t : ts.tasks) ids.push_back(t.id);
                               return ids;
                             })
      .def_property_readonly("targets",
                             [](const TaskSet& ts) {
                               std::vector<std::string> ids;
                               for (auto t : ts.targets) ids.push_back(ts.tasks[t].id);
                               return ids;
                             })
      .def_property_readonly("horizon_ms", [](const TaskSet& ts) { return ts.scale.to_ms(double(ts.horizon.ticks())); })
      .def_property_readonly("tick_ms", [](const TaskSet& ts) { return ts.scale.tick_ms(); })
      .def("wcet_range_ms",
           [](const TaskSet& ts, const std::string& id) {
             const auto& t = ts.tasks[ts.index_of(id)];
             return py::make_tuple(ts.scale.to_ms(double(t.wcet_min.ticks())), ts.scale.to_ms(double(t.wcet_max.ticks())));
           })
      .def("serialize", &serialize_task_set);

  m.def("load_task_set", [](const std::filesystem::path& p) { return load_task_set(p); }, py::arg("path"));
  m.def("parse_task_set", [](const std::string& text) { return parse_task_set(text); }, py::arg("text"));

  m.def("simulate", &simulate_py, py::arg("task_set"), py::arg("arrivals") = std::map<std::string, std::vector<double>>{},
        py::arg("wcets") = std::map<std::string, double>{},
        "Simulates one scenario. Periodic arrivals are generated; aperiodic ones come from `arrivals` (ms). "
        "WCETs default to each task's maximum. Returns completions as (id, k, arrival_ms, end_ms, distance_ms).");

  py::class_<io::ModelFile>(m, "Border")
      .def_property_readonly("p", [](const io::ModelFile& f) { return f.border.p; })
      .def_property_readonly("p_u", [](const io::ModelFile& f) { return f.p_u; })
      .def_property_readonly("best_size_point", [](const io::ModelFile& f) { return f.best_size_point; });

  m.def(
      "load_border",
      [](const std::filesystem::path& p, const TaskSet& ts) { return io::parse_model(io::read_file(p), ts); },
      py::arg("path"), py::arg("task_set"));

  m.def(
      "miss_probability",
      [](const io::ModelFile& f, const TaskSet& ts, const std::map<std::string, double>& wcets_ms) {
        std::vector<double> raw;
        for (auto c : f.border.model.columns) {
          const auto it = wcets_ms.find(ts.tasks[c].id);
          if (it == wcets_ms.end()) throw std::invalid_argument("missing WCET for " + ts.tasks[c].id);
          raw.push_back(double(to_ticks(ts, it->second).ticks()));
        }
        return f.border.model.miss_probability(raw);
      },
      py::arg("border"), py::arg("task_set"), py::arg("wcets_ms"));

  m.def(
      "run_full",
      [](const std::filesystem::path& tasks, const std::filesystem::path& out, std::uint64_t seed, std::size_t iterations,
         std::size_t refinements, std::size_t samples, const std::string& sampling, unsigned workers) {
        RunConfig cfg;
        cfg.task_set = tasks;
        cfg.out_dir = out;
        cfg.seed = seed;
        cfg.workers = workers;
        cfg.ga.iterations = iterations;
        cfg.refine.nl = refinements;
        cfg.refine.ns = samples;
        if (sampling == "uniform") {
          cfg.refine.sampling = learn::SamplingMode::uniform;
        } else if (sampling != "distance") {
          throw std::invalid_argument("sampling must be distance or uniform");
        }
        py::gil_scoped_release release;
        cmd_full(cfg);
      },
      py::arg("tasks"), py::arg("out"), py::arg("seed") = 0, py::arg("iterations") = 1000, py::arg("refinements") = 100,
      py::arg("samples") = 100, py::arg("sampling") = "distance", py::arg("workers") = 1,
      "Runs phase 1, phase 2, test-set generation and evaluation into `out`.");

  m.def(
      "mann_whitney_u",
      [](const std::vector<double>& a, const std::vector<double>& b, const std::string& alternative) {
        auto alt = numerics::Alternative::two_sided;
        if (alternative == "less") {
          alt = numerics::Alternative::less;
        } else if (alternative == "greater") {
          alt = numerics::Alternative::greater;
        } else if (alternative != "two-sided") {
          throw std::invalid_argument("alternative must be less, greater or two-sided");
        }
        const auto r = numerics::mann_whitney_u(a, b, alt);
        return py::make_tuple(r.u, r.p_value);
      },
      py::arg("a"), py::arg("b"), py::arg("alternative") = "two-sided");
}
