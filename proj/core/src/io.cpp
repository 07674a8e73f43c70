#include "vinestress/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include "vinestress/errors.hpp"

namespace vinestress::io {

using nlohmann::json;

std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line, const std::string& where) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw InputError(where + ": unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

bool valid_month(const std::string& s) {
  if (s.size() != 7 || s[4] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u})
    if (s[i] < '0' || s[i] > '9') return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  return month >= 1 && month <= 12;
}

struct Table {
  std::vector<std::string> dates;
  std::vector<std::string> labels;
  Columns columns;
};

Table parse_table(const std::string& text, const std::string& source) {
  std::vector<std::string> lines;
  {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      pos = end + 1;
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw InputError(source + ": empty file");
  if (lines[0].size() >= 3 && lines[0].compare(0, 3, "\xEF\xBB\xBF") == 0) lines[0].erase(0, 3);

  Table t;
  const auto header = split_csv_line(lines[0], source + ":1");
  if (header.empty() || header[0] != "date") throw InputError(source + ":1: first header field must be 'date'");
  if (header.size() < 2) throw InputError(source + ":1: no sector columns");
  t.labels.assign(header.begin() + 1, header.end());
  std::set<std::string> seen;
  for (const auto& l : t.labels) {
    if (l.empty()) throw InputError(source + ":1: empty column name");
    if (!seen.insert(l).second) throw InputError(source + ":1: duplicate column '" + l + "'");
  }
  t.columns.assign(t.labels.size(), Column{});

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string where = source + ":" + std::to_string(li + 1);
    if (lines[li].empty()) throw InputError(where + ": empty row");
    const auto fields = split_csv_line(lines[li], where);
    if (fields.size() > header.size())
      throw InputError(where + ": " + std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    if (!valid_month(fields[0])) throw InputError(where + ", column 'date': '" + fields[0] + "' is not YYYY-MM");
    t.dates.push_back(fields[0]);
    for (std::size_t j = 0; j < t.labels.size(); ++j) {
      if (j + 1 >= fields.size() || fields[j + 1].empty())
        throw InputError(where + ", column '" + t.labels[j] + "': missing value");
      const std::string& f = fields[j + 1];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
        throw InputError(where + ", column '" + t.labels[j] + "': cannot parse '" + f + "' as a finite number");
      t.columns[j].push_back(v);
    }
  }
  return t;
}

void check_json(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

const json& field(const json& j, const char* name, const std::string& ctx) {
  check_json(j.is_object(), ctx + ": expected a JSON object");
  const auto it = j.find(name);
  check_json(it != j.end(), ctx + ": missing field '" + name + "'");
  return *it;
}

double number_field(const json& j, const char* name, const std::string& ctx) {
  const json& v = field(j, name, ctx);
  check_json(v.is_number(), ctx + ": field '" + name + "' must be a number");
  return v.get<double>();
}

std::vector<double> number_list(const json& v, const std::string& ctx) {
  if (v.is_number()) return {v.get<double>()};
  check_json(v.is_array(), ctx + " must be a number or an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    check_json(e.is_number(), ctx + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::string> string_list(const json& v, const std::string& ctx) {
  check_json(v.is_array(), ctx + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    check_json(e.is_string(), ctx + " must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::size_t count_field(const json& v, const std::string& ctx) {
  check_json(v.is_number_integer() && v.get<long long>() >= 0, ctx + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

}  // namespace

std::string format_panel(const std::vector<std::string>& dates, const std::vector<std::string>& labels,
                         const Columns& columns) {
  std::string out = "date";
  for (const auto& l : labels) out += "," + quote_field(l);
  out += "\n";
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  if (dates.size() != n) throw InputError("panel has " + std::to_string(dates.size()) + " dates for " + std::to_string(n) + " rows");
  for (std::size_t t = 0; t < n; ++t) {
    out += dates[t];
    for (const auto& col : columns) out += "," + format_number(col.at(t));
    out += "\n";
  }
  return out;
}

RawPanel parse_panel(const std::string& text, const std::string& source) {
  Table t = parse_table(text, source);
  RawPanel p{std::move(t.dates), std::move(t.labels), std::move(t.columns)};
  try {
    p.validate();
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
  return p;
}

RawPanel read_panel(const std::filesystem::path& path) { return parse_panel(read_file(path), path.string()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

void write_panel(const std::filesystem::path& path, const RawPanel& panel) {
  write_text(path, format_panel(panel.dates, panel.labels, panel.columns));
}

void write_diff(const std::filesystem::path& path, const DiffPanel& panel) {
  write_text(path, format_panel(panel.dates, panel.labels, panel.columns));
}

DiffPanel read_diff(const std::filesystem::path& path) {
  Table t = parse_table(read_file(path), path.string());
  if (t.dates.size() < 2) throw InputError(path.string() + ": differenced panel needs at least 2 rows");
  DiffPanel d;
  d.source_length = t.dates.size() + 1;
  d.dates = std::move(t.dates);
  d.labels = std::move(t.labels);
  d.columns = std::move(t.columns);
  return d;
}

void write_pseudo(const std::filesystem::path& path, const PseudoPanel& panel) {
  write_text(path, format_panel(panel.dates, panel.labels, panel.columns));
}

PseudoPanel read_pseudo(const std::filesystem::path& path) {
  Table t = parse_table(read_file(path), path.string());
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    for (std::size_t i = 0; i < t.columns[j].size(); ++i)
      if (!(t.columns[j][i] > 0.0 && t.columns[j][i] < 1.0))
        throw InputError(path.string() + ":" + std::to_string(i + 2) + ", column '" + t.labels[j] +
                         "': pseudo-observation " + format_number(t.columns[j][i]) + " not inside (0,1)");
  PseudoPanel p;
  p.dates = std::move(t.dates);
  p.labels = std::move(t.labels);
  p.columns = std::move(t.columns);
  return p;
}

void attach_marginals(PseudoPanel& pseudo, const DiffPanel& diff) {
  pseudo.marginals.clear();
  for (const auto& label : pseudo.labels) {
    const auto it = std::find(diff.labels.begin(), diff.labels.end(), label);
    if (it == diff.labels.end()) throw InputError("differenced panel has no column '" + label + "'");
    const auto& col = diff.columns[static_cast<std::size_t>(it - diff.labels.begin())];
    if (col.size() != pseudo.rows())
      throw InputError("differenced column '" + label + "' has " + std::to_string(col.size()) +
                       " rows, pseudo panel has " + std::to_string(pseudo.rows()));
    pseudo.marginals.emplace_back(col);
  }
}

// ---------------------------------------------------------------------------

json to_json(const BivariateCopula& c) {
  json j;
  j["family"] = std::string(family_name(c.family()));
  j["rotation"] = rotation_degrees(c.rotation());
  j["parameter"] = c.family() == Family::Independence ? json(nullptr) : json(c.parameter());
  j["loglik"] = c.fitted_loglik();
  j["n"] = c.fitted_n();
  return j;
}

BivariateCopula copula_from_json(const json& j) {
  const std::string ctx = "pair copula";
  const json& fam = field(j, "family", ctx);
  check_json(fam.is_string(), ctx + ": field 'family' must be a string");
  const Family family = family_from_name(fam.get<std::string>());
  int rot = 0;
  if (const auto it = j.find("rotation"); it != j.end()) {
    check_json(it->is_number_integer(), ctx + ": field 'rotation' must be an integer");
    rot = it->get<int>();
  }
  double parameter = 0.0;
  if (family != Family::Independence) parameter = number_field(j, "parameter", ctx);
  double loglik = 0.0;
  std::size_t n = 0;
  if (const auto it = j.find("loglik"); it != j.end() && !it->is_null()) {
    check_json(it->is_number(), ctx + ": field 'loglik' must be a number");
    loglik = it->get<double>();
  }
  if (const auto it = j.find("n"); it != j.end()) n = count_field(*it, ctx + ": field 'n'");
  return BivariateCopula(family, rotation_from_degrees(rot), parameter).with_fit(loglik, n);
}

json to_json(const DVineModel& model) {
  json j;
  j["order"] = model.order();
  json pairs = json::array();
  for (const auto& tree : model.trees()) {
    json row = json::array();
    for (const auto& c : tree) row.push_back(to_json(c));
    pairs.push_back(std::move(row));
  }
  j["pairs"] = std::move(pairs);
  json trace = json::array();
  for (const auto& s : model.trace)
    trace.push_back({{"candidate", s.candidate}, {"position", s.position}, {"cll", s.cll}, {"aic", s.aic}});
  j["trace"] = std::move(trace);
  j["conditional_loglik"] = model.conditional_loglik;
  j["n"] = model.n;
  j["no_covariate_selected"] = model.no_covariate_selected;
  return j;
}

DVineModel model_from_json(const json& j) {
  const std::string ctx = "model";
  auto order = string_list(field(j, "order", ctx), ctx + ": field 'order'");
  const json& pairs = field(j, "pairs", ctx);
  check_json(pairs.is_array(), ctx + ": field 'pairs' must be an array of trees");
  std::vector<std::vector<BivariateCopula>> trees;
  for (const auto& tree : pairs) {
    check_json(tree.is_array(), ctx + ": each tree must be an array");
    std::vector<BivariateCopula> row;
    for (const auto& c : tree) row.push_back(copula_from_json(c));
    trees.push_back(std::move(row));
  }
  DVineModel model(std::move(order), std::move(trees));
  if (const auto it = j.find("trace"); it != j.end()) {
    check_json(it->is_array(), ctx + ": field 'trace' must be an array");
    for (const auto& s : *it) {
      SelectionStep step;
      const json& cand = field(s, "candidate", ctx + " trace");
      check_json(cand.is_string(), ctx + " trace: 'candidate' must be a string");
      step.candidate = cand.get<std::string>();
      step.position = count_field(field(s, "position", ctx + " trace"), ctx + " trace: 'position'");
      step.cll = number_field(s, "cll", ctx + " trace");
      step.aic = number_field(s, "aic", ctx + " trace");
      model.trace.push_back(std::move(step));
    }
  }
  if (const auto it = j.find("conditional_loglik"); it != j.end() && it->is_number())
    model.conditional_loglik = it->get<double>();
  if (const auto it = j.find("n"); it != j.end()) model.n = count_field(*it, ctx + ": field 'n'");
  if (const auto it = j.find("no_covariate_selected"); it != j.end() && it->is_boolean())
    model.no_covariate_selected = it->get<bool>();
  return model;
}

void write_model(const std::filesystem::path& path, const DVineModel& model) { write_json(path, to_json(model)); }

DVineModel read_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_json(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

json to_json(const StressScenario& s) {
  return {{"stressed", s.stressed}, {"kappa", s.kappas}, {"alpha_grid", s.alpha_grid}, {"lag", s.lag}};
}

StressScenario scenario_from_json(const json& j) {
  const std::string ctx = "scenario";
  StressScenario s;
  s.stressed = string_list(field(j, "stressed", ctx), ctx + ": field 'stressed'");
  s.kappas = number_list(field(j, "kappa", ctx), ctx + ": field 'kappa'");
  for (double k : s.kappas)
    check_json(k > 0.0 && k < 1.0,
               ctx + ": field 'kappa': " + format_number(k) + " is outside the (0,1) domain");
  if (const auto it = j.find("alpha_grid"); it != j.end()) {
    s.alpha_grid = number_list(*it, ctx + ": field 'alpha_grid'");
    for (double a : s.alpha_grid)
      check_json(a > 0.0 && a < 1.0,
                 ctx + ": field 'alpha_grid': " + format_number(a) + " is outside the (0,1) domain");
  }
  if (const auto it = j.find("lag"); it != j.end()) s.lag = count_field(*it, ctx + ": field 'lag'");
  s.validate();
  return s;
}

StressScenario read_scenario(const std::filesystem::path& path) {
  try {
    return scenario_from_json(read_json(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

json to_json(const GroundTruthSpec& spec) {
  json j;
  j["labels"] = spec.labels;
  if (spec.correlation) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < spec.correlation->rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < spec.correlation->cols(); ++k) row.push_back((*spec.correlation)(i, k));
      rows.push_back(std::move(row));
    }
    j["correlation"] = std::move(rows);
  }
  if (spec.vine) j["vine"] = to_json(*spec.vine);
  json m{{"base_level", spec.marginal.base_level},
         {"volatility", spec.marginal.volatility},
         {"tail_dof", spec.marginal.tail_dof}};
  if (const auto& w = spec.marginal.crisis) m["crisis"] = {{"start", w->start}, {"end", w->end}, {"height", w->height}};
  j["marginal"] = std::move(m);
  j["rows"] = spec.rows;
  j["seed"] = spec.seed ? json(*spec.seed) : json(nullptr);
  j["start_date"] = spec.start_date;
  return j;
}

GroundTruthSpec spec_from_json(const json& j) {
  const std::string ctx = "spec";
  GroundTruthSpec spec;
  spec.labels = string_list(field(j, "labels", ctx), ctx + ": field 'labels'");
  if (const auto it = j.find("correlation"); it != j.end()) {
    check_json(it->is_array(), ctx + ": field 'correlation' must be an array of rows");
    const auto d = static_cast<Eigen::Index>(it->size());
    Eigen::MatrixXd R(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto row = number_list((*it)[static_cast<std::size_t>(i)], ctx + ": correlation row");
      check_json(static_cast<Eigen::Index>(row.size()) == d, ctx + ": correlation matrix must be square");
      for (Eigen::Index k = 0; k < d; ++k) R(i, k) = row[static_cast<std::size_t>(k)];
    }
    spec.correlation = std::move(R);
  }
  if (const auto it = j.find("vine"); it != j.end()) spec.vine = model_from_json(*it);
  if (const auto it = j.find("marginal"); it != j.end()) {
    const std::string mctx = ctx + " marginal";
    check_json(it->is_object(), mctx + ": expected a JSON object");
    if (it->contains("base_level")) spec.marginal.base_level = number_field(*it, "base_level", mctx);
    if (it->contains("volatility")) spec.marginal.volatility = number_field(*it, "volatility", mctx);
    if (it->contains("tail_dof")) {
      const json& k = (*it)["tail_dof"];
      check_json(k.is_number_integer(), mctx + ": field 'tail_dof' must be an integer");
      spec.marginal.tail_dof = k.get<int>();
    }
    if (const auto c = it->find("crisis"); c != it->end() && !c->is_null()) {
      CrisisWindow w;
      w.start = count_field(field(*c, "start", mctx + " crisis"), mctx + " crisis: 'start'");
      w.end = count_field(field(*c, "end", mctx + " crisis"), mctx + " crisis: 'end'");
      if (c->contains("height")) w.height = number_field(*c, "height", mctx + " crisis");
      spec.marginal.crisis = w;
    }
  }
  if (const auto it = j.find("rows"); it != j.end()) spec.rows = count_field(*it, ctx + ": field 'rows'");
  if (const auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    check_json(it->is_number_unsigned(), ctx + ": field 'seed' must be a nonnegative integer");
    spec.seed = it->get<std::uint64_t>();
  }
  if (const auto it = j.find("start_date"); it != j.end()) {
    check_json(it->is_string(), ctx + ": field 'start_date' must be a string");
    spec.start_date = it->get<std::string>();
  }
  spec.validate();
  return spec;
}

GroundTruthSpec read_spec(const std::filesystem::path& path) {
  try {
    return spec_from_json(read_json(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace vinestress::io
