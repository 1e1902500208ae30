#include "wcetrange/io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace wcetrange::io {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string_view> lines(std::string_view text) {
  auto out = split(text, '\n');
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto w : split(s, ' '))
    if (!w.empty()) out.push_back(w);
  return out;
}

template <class T>
T parse_int(std::string_view s, const char* what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw FormatError(std::string(what) + ": bad integer '" + std::string(s) + "'");
  return v;
}

void check_header(std::string_view got, std::string_view want, const char* what) {
  if (got != want)
    throw FormatError(std::string(what) + ": expected header '" + std::string(want) + "', got '" + std::string(got) + "'");
}

void check_id(const std::string& id) {
  if (id.find_first_of(",\n ") != std::string::npos)
    throw FormatError("task id '" + id + "' cannot be written to CSV (contains a separator)");
}

Time parse_time(const TaskSet& ts, std::string_view ms, const std::string& where) {
  try {
    return ts.scale.parse_ms(ms);
  } catch (const std::invalid_argument& e) {
    throw FormatError(where + ": " + e.what());
  }
}

const char* term_kind_name(learn::TermKind k) {
  switch (k) {
    case learn::TermKind::intercept: return "intercept";
    case learn::TermKind::linear: return "linear";
    case learn::TermKind::quadratic: return "quadratic";
    case learn::TermKind::interaction: return "interaction";
  }
  return "";
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_real(std::string_view text) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size())
    throw FormatError("bad real number '" + std::string(text) + "'");
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw FileError("write failed for " + path.string());
}

std::string format_population(const std::vector<Individual>& pop, const TaskSet& ts) {
  std::string out = "# arrival sequences in ms, one [solution] block per individual\n";
  for (const auto& ind : pop) {
    out += "\n[solution]\n";
    if (ind.fitness) out += "fitness = " + format_real(*ind.fitness) + "\n";
    for (std::size_t t = 0; t < ts.tasks.size(); ++t) {
      out += ts.tasks[t].id + " =";
      for (auto a : ind.seq.arrivals[t]) out += " " + ts.scale.format_ms(a);
      out += "\n";
    }
  }
  return out;
}

std::vector<Individual> parse_population(std::string_view text, const TaskSet& ts) {
  std::vector<Individual> pop;
  std::vector<bool> seen;
  auto finish = [&] {
    if (pop.empty()) return;
    for (std::size_t t = 0; t < seen.size(); ++t)
      if (!seen[t]) throw FormatError("population: solution " + std::to_string(pop.size()) + " lacks task " + ts.tasks[t].id);
  };
  std::size_t line_no = 0;
  for (auto line : lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto where = "population line " + std::to_string(line_no);
    if (line == "[solution]") {
      finish();
      pop.emplace_back();
      pop.back().seq.arrivals.assign(ts.tasks.size(), {});
      seen.assign(ts.tasks.size(), false);
      continue;
    }
    if (pop.empty()) throw FormatError(where + ": entry outside a [solution] block");
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "fitness") {
      pop.back().fitness = parse_real(value);
      continue;
    }
    std::size_t t = 0;
    try {
      t = ts.index_of(key);
    } catch (const std::out_of_range&) {
      throw FormatError(where + ": unknown task '" + std::string(key) + "'");
    }
    seen[t] = true;
    auto& arr = pop.back().seq.arrivals[t];
    for (auto w : words(value)) arr.push_back(parse_time(ts, w, where));
  }
  finish();
  return pop;
}

std::string format_dataset(const LabelledDataset& d, const TaskSet& ts) {
  std::string out;
  for (auto c : d.columns) {
    check_id(ts.tasks[c].id);
    out += ts.tasks[c].id + ",";
  }
  out += "label\n";
  for (const auto& row : d.rows) {
    for (auto w : row.wcets) out += ts.scale.format_ms(w) + ",";
    out += row.label == Label::safe ? "safe\n" : "unsafe\n";
  }
  return out;
}

LabelledDataset parse_dataset(std::string_view text, const TaskSet& ts) {
  const auto ls = lines(text);
  if (ls.empty()) throw FormatError("dataset: missing header");
  const auto header = split(ls.front(), ',');
  if (header.empty() || header.back() != "label") throw FormatError("dataset: last header column must be 'label'");
  LabelledDataset d;
  for (std::size_t i = 0; i + 1 < header.size(); ++i) {
    try {
      d.columns.push_back(ts.index_of(header[i]));
    } catch (const std::out_of_range&) {
      throw FormatError("dataset: unknown task column '" + std::string(header[i]) + "'");
    }
  }
  for (std::size_t l = 1; l < ls.size(); ++l) {
    const auto cells = split(ls[l], ',');
    if (cells.size() != header.size())
      throw FormatError("dataset line " + std::to_string(l + 1) + ": expected " + std::to_string(header.size()) +
                        " cells");
    LabelledRow row;
    for (std::size_t i = 0; i + 1 < cells.size(); ++i)
      row.wcets.push_back(parse_time(ts, cells[i], "dataset line " + std::to_string(l + 1)));
    if (cells.back() == "safe") {
      row.label = Label::safe;
    } else if (cells.back() == "unsafe") {
      row.label = Label::unsafe;
    } else {
      throw FormatError("dataset line " + std::to_string(l + 1) + ": label must be safe or unsafe");
    }
    d.rows.push_back(std::move(row));
  }
  return d;
}

std::string format_fitness_history(const std::vector<FitnessHistoryEntry>& h) {
  std::string out = "iteration,best,mean\n";
  for (const auto& e : h) out += std::to_string(e.iteration) + "," + format_real(e.best) + "," + format_real(e.mean) + "\n";
  return out;
}

std::vector<FitnessHistoryEntry> parse_fitness_history(std::string_view text) {
  const auto ls = lines(text);
  if (ls.empty()) throw FormatError("fitness history: missing header");
  check_header(ls.front(), "iteration,best,mean", "fitness history");
  std::vector<FitnessHistoryEntry> h;
  for (std::size_t l = 1; l < ls.size(); ++l) {
    const auto c = split(ls[l], ',');
    if (c.size() != 3) throw FormatError("fitness history line " + std::to_string(l + 1) + ": expected 3 cells");
    h.push_back({parse_int<std::size_t>(c[0], "fitness history"), parse_real(c[1]), parse_real(c[2])});
  }
  return h;
}

std::string format_refinement_history(const std::vector<learn::RefinementRecord>& h) {
  std::string out = "refinement,dataset_size,p,precision\n";
  for (const auto& r : h)
    out += std::to_string(r.refinement) + "," + std::to_string(r.dataset_size) + "," + format_real(r.p) + "," +
           format_real(r.precision) + "\n";
  return out;
}

std::vector<learn::RefinementRecord> parse_refinement_history(std::string_view text) {
  const auto ls = lines(text);
  if (ls.empty()) throw FormatError("refinement history: missing header");
  check_header(ls.front(), "refinement,dataset_size,p,precision", "refinement history");
  std::vector<learn::RefinementRecord> h;
  for (std::size_t l = 1; l < ls.size(); ++l) {
    const auto c = split(ls[l], ',');
    if (c.size() != 4) throw FormatError("refinement history line " + std::to_string(l + 1) + ": expected 4 cells");
    h.push_back({parse_int<std::size_t>(c[0], "refinement history"), parse_int<std::size_t>(c[1], "refinement history"),
                 parse_real(c[2]), parse_real(c[3]), 0});
  }
  return h;
}

std::string format_trace(const ScheduleScenario& sc, const TaskSet& ts) {
  std::string out = "task_id,k,at_ticks,et_ticks,dist_ticks\n";
  for (const auto& c : sc.completions) {
    check_id(ts.tasks[c.task].id);
    out += ts.tasks[c.task].id + "," + std::to_string(c.k) + "," + std::to_string(c.arrival.ticks()) + "," +
           std::to_string(c.end.ticks()) + "," + std::to_string(distance(sc, ts, c.task, c.k)) + "\n";
  }
  return out;
}

std::vector<TraceRecord> parse_trace(std::string_view text) {
  const auto ls = lines(text);
  if (ls.empty()) throw FormatError("trace: missing header");
  check_header(ls.front(), "task_id,k,at_ticks,et_ticks,dist_ticks", "trace");
  std::vector<TraceRecord> out;
  for (std::size_t l = 1; l < ls.size(); ++l) {
    const auto c = split(ls[l], ',');
    if (c.size() != 5) throw FormatError("trace line " + std::to_string(l + 1) + ": expected 5 cells");
    out.push_back({std::string(c[0]), parse_int<std::size_t>(c[1], "trace"), parse_int<std::int64_t>(c[2], "trace"),
                   parse_int<std::int64_t>(c[3], "trace"), parse_int<std::int64_t>(c[4], "trace")});
  }
  return out;
}

std::string format_model(const ModelFile& mf, const TaskSet& ts) {
  const auto& m = mf.border.model;
  json j;
  j["tick_ms"] = ts.scale.tick_ms();
  json cols = json::array();
  for (auto c : m.columns) cols.push_back(ts.tasks.at(c).id);
  j["columns"] = cols;
  json scaling = json::array();
  for (const auto& s : m.scaling) scaling.push_back({{"offset_ticks", s.offset}, {"scale_ticks", s.scale}});
  j["scaling"] = scaling;
  json terms = json::array();
  for (std::size_t t = 0; t < m.terms.size(); ++t) {
    const auto& term = m.terms[t];
    json tc = json::array();
    if (term.kind != learn::TermKind::intercept) tc.push_back(ts.tasks[m.columns[term.i]].id);
    if (term.kind == learn::TermKind::interaction) tc.push_back(ts.tasks[m.columns[term.j]].id);
    terms.push_back({{"kind", term_kind_name(term.kind)}, {"columns", tc}, {"coefficient", m.coefficients[t]}});
  }
  j["terms"] = terms;
  j["stabilized"] = m.stabilized;
  j["log_likelihood"] = m.log_likelihood;
  j["p"] = mf.border.p;
  j["p_u"] = mf.p_u;
  json bounds = json::array();
  for (const auto& b : mf.bounds)
    bounds.push_back({{"lo_ticks", b.lo}, {"hi_ticks", b.hi}, {"lo_ms", ts.scale.to_ms(b.lo)}, {"hi_ms", ts.scale.to_ms(b.hi)}});
  j["bounds"] = bounds;
  if (mf.best_size_point) {
    json pt = json::array();
    for (std::size_t c = 0; c < m.columns.size(); ++c)
      pt.push_back({{"column", ts.tasks[m.columns[c]].id},
                    {"ticks", (*mf.best_size_point)[c]},
                    {"ms", ts.scale.to_ms((*mf.best_size_point)[c])}});
    j["best_size_point"] = pt;
  } else {
    j["best_size_point"] = nullptr;
  }
  return j.dump(2) + "\n";
}

ModelFile parse_model(std::string_view text, const TaskSet& ts) {
  ModelFile mf;
  try {
    const auto j = json::parse(text);
    auto& m = mf.border.model;
    std::vector<std::string> ids;
    for (const auto& c : j.at("columns")) {
      ids.push_back(c.get<std::string>());
      m.columns.push_back(ts.index_of(ids.back()));
    }
    auto pos = [&](const std::string& id) {
      auto it = std::find(ids.begin(), ids.end(), id);
      if (it == ids.end()) throw FormatError("model: term references unknown column '" + id + "'");
      return static_cast<std::size_t>(it - ids.begin());
    };
    for (const auto& s : j.at("scaling"))
      m.scaling.push_back({s.at("offset_ticks").get<double>(), s.at("scale_ticks").get<double>()});
    for (const auto& t : j.at("terms")) {
      const auto kind = t.at("kind").get<std::string>();
      const auto& tc = t.at("columns");
      learn::Term term;
      if (kind == "intercept") {
        term.kind = learn::TermKind::intercept;
      } else if (kind == "linear") {
        term = {learn::TermKind::linear, pos(tc.at(0).get<std::string>()), 0};
      } else if (kind == "quadratic") {
        term = {learn::TermKind::quadratic, pos(tc.at(0).get<std::string>()), 0};
      } else if (kind == "interaction") {
        term = {learn::TermKind::interaction, pos(tc.at(0).get<std::string>()), pos(tc.at(1).get<std::string>())};
      } else {
        throw FormatError("model: unknown term kind '" + kind + "'");
      }
      m.terms.push_back(term);
      m.coefficients.push_back(t.at("coefficient").get<double>());
    }
    m.stabilized = j.at("stabilized").get<bool>();
    m.log_likelihood = j.at("log_likelihood").get<double>();
    mf.border.p = j.at("p").get<double>();
    mf.p_u = j.at("p_u").get<double>();
    for (const auto& b : j.at("bounds")) mf.bounds.push_back({b.at("lo_ticks").get<double>(), b.at("hi_ticks").get<double>()});
    if (!j.at("best_size_point").is_null()) {
      std::vector<double> pt;
      for (const auto& v : j.at("best_size_point")) pt.push_back(v.at("ticks").get<double>());
      mf.best_size_point = pt;
    }
    if (m.scaling.size() != m.columns.size() || mf.bounds.size() != m.columns.size())
      throw FormatError("model: scaling and bounds must have one entry per column");
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw FormatError(std::string("model: unknown column: ") + e.what());
  }
  return mf;
}

std::string format_border_grid(const learn::RsmModel& m, const TaskSet& ts, std::size_t steps) {
  if (m.columns.size() != 2) throw std::invalid_argument("border grid needs exactly two model columns");
  if (steps < 2) throw std::invalid_argument("border grid needs at least two steps per axis");
  std::string out = ts.tasks[m.columns[0]].id + "_ms," + ts.tasks[m.columns[1]].id + "_ms,miss_probability\n";
  std::vector<double> raw(2);
  for (std::size_t a = 0; a < steps; ++a) {
    for (std::size_t b = 0; b < steps; ++b) {
      const double fa = static_cast<double>(a) / static_cast<double>(steps - 1);
      const double fb = static_cast<double>(b) / static_cast<double>(steps - 1);
      raw[0] = m.scaling[0].offset + fa * m.scaling[0].scale;
      raw[1] = m.scaling[1].offset + fb * m.scaling[1].scale;
      out += format_real(ts.scale.to_ms(raw[0])) + "," + format_real(ts.scale.to_ms(raw[1])) + "," +
             format_real(m.miss_probability(raw)) + "\n";
    }
  }
  return out;
}

}  // namespace wcetrange::io
