#include "acps/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace acps {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::ifstream open_input(const std::string &path) {
  if (!std::filesystem::exists(path))
    throw InputError("cannot open '" + path + "': no such file");
  if (std::filesystem::is_directory(path))
    throw InputError("cannot open '" + path + "': is a directory");
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open '" + path + "' for reading");
  return in;
}

std::vector<std::string> split_csv_line(const std::string &line, const std::string &path, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      out.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += ch;
    }
  }
  if (quoted)
    throw InputError(path, lineno, "unterminated quoted field");
  out.push_back(was_quoted ? cur : trim(cur));
  return out;
}

std::string csv_escape(const std::string &s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string field_text(const Field &f) {
  return std::visit(
      [](const auto &v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>)
          return "";
        else if constexpr (std::is_same_v<T, std::string>)
          return v;
        else if constexpr (std::is_same_v<T, double>)
          return format_number(v);
        else if constexpr (std::is_same_v<T, long long>)
          return std::to_string(v);
        else
          return v ? "true" : "false";
      },
      f);
}

nlohmann::ordered_json field_json(const Field &f) {
  return std::visit(
      [](const auto &v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>)
          return nullptr;
        else if constexpr (std::is_same_v<T, double>)
          return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(format_number(v));
        else
          return v;
      },
      f);
}

Field optional_number(double x) {
  if (std::isnan(x))
    return std::monostate{};
  return x;
}

std::vector<double> parse_value_lines(std::istream &in, const std::string &path) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty())
      continue;
    if (t.find(',') != std::string::npos)
      throw InputError(path, lineno, "expected a single column, found '" + t + "'");
    double x = 0.0;
    if (!parse_number(t, x)) {
      if (out.empty())
        throw InputError(path, lineno,
                         "'" + t + "' is not a finite number (single-column files must not have a header row)");
      throw InputError(path, lineno, "'" + t + "' is not a finite number");
    }
    out.push_back(x);
  }
  if (out.empty())
    throw InputError("'" + path + "' contains no values");
  return out;
}

} // namespace

InputError::InputError(const std::string &path, std::size_t line, const std::string &message)
    : DomainError(path + ":" + std::to_string(line) + ": " + message) {}

std::string format_number(double x) {
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

bool parse_number(std::string_view text, double &out) {
  const std::string t = trim(text);
  if (t.empty())
    return false;
  const char *b = t.data();
  const char *e = t.data() + t.size();
  if (*b == '+')
    ++b;
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

std::size_t CsvTable::column(const std::string &name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw InputError("'" + path + "' has no column '" + name + "'");
  return it - header.begin();
}

CsvTable read_csv_table(const std::string &path) {
  auto in = open_input(path);
  CsvTable table;
  table.path = path;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    auto fields = split_csv_line(line, path, lineno);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      throw InputError(path, lineno,
                       "expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.lines.push_back(lineno);
  }
  if (table.header.empty())
    throw InputError("'" + path + "' is empty");
  return table;
}

std::vector<double> read_values(const std::string &path) {
  auto in = open_input(path);
  return parse_value_lines(in, path);
}

Series read_series(const std::string &path) {
  const CsvTable t = read_csv_table(path);
  if (t.header.size() != 2)
    throw InputError(path, 1, "expected a two-column header (timestamp,value), found " +
                                  std::to_string(t.header.size()) + " columns");
  double probe = 0.0;
  if (parse_number(t.header[1], probe))
    throw InputError(path, 1, "missing header row (timestamp,value)");
  Series s;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i][0].empty())
      throw InputError(path, t.lines[i], "empty timestamp");
    double x = 0.0;
    if (!parse_number(t.rows[i][1], x))
      throw InputError(path, t.lines[i], "'" + t.rows[i][1] + "' is not a finite number");
    s.timestamps.push_back(t.rows[i][0]);
    s.values.push_back(x);
  }
  if (s.values.empty())
    throw InputError("'" + path + "' contains no observations");
  return s;
}

Series read_realizations(const std::string &path) {
  std::string first;
  {
    auto in = open_input(path);
    std::string line;
    while (std::getline(in, line))
      if (!trim(line).empty()) {
        first = line;
        break;
      }
  }
  if (first.find(',') != std::string::npos)
    return read_series(path);
  Series s;
  s.values = read_values(path);
  for (std::size_t i = 0; i < s.values.size(); ++i)
    s.timestamps.push_back(std::to_string(i));
  return s;
}

std::vector<std::vector<double>> read_draw_directory(const std::string &path) {
  if (!std::filesystem::is_directory(path))
    throw InputError("'" + path + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::directory_iterator(path))
    if (entry.is_regular_file())
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw InputError("'" + path + "' contains no draw files");
  std::vector<std::vector<double>> out;
  for (const auto &f : files)
    out.push_back(read_values(f.string()));
  return out;
}

void write_values(const std::string &path, const std::vector<double> &values) {
  std::ofstream out(path);
  if (!out)
    throw InputError("cannot open '" + path + "' for writing");
  for (double v : values)
    out << format_number(v) << '\n';
}

OutputFormat parse_output_format(const std::string &text) {
  if (text == "csv")
    return OutputFormat::Csv;
  if (text == "json")
    return OutputFormat::Json;
  throw DomainError("unknown output format '" + text + "' (expected csv or json)");
}

std::string extension(OutputFormat format) { return format == OutputFormat::Csv ? ".csv" : ".json"; }

void RecordTable::add(std::vector<Field> row) {
  if (row.size() != columns.size())
    throw DomainError("record has " + std::to_string(row.size()) + " fields, table has " +
                      std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

void write_csv(std::ostream &os, const RecordTable &table) {
  for (std::size_t j = 0; j < table.columns.size(); ++j)
    os << (j ? "," : "") << csv_escape(table.columns[j]);
  os << '\n';
  for (const auto &row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j)
      os << (j ? "," : "") << csv_escape(field_text(row[j]));
    os << '\n';
  }
}

void write_json(std::ostream &os, const RecordTable &table) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto &row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < row.size(); ++j)
      obj[table.columns[j]] = field_json(row[j]);
    arr.push_back(std::move(obj));
  }
  os << arr.dump(2) << '\n';
}

void write_records(std::ostream &os, const RecordTable &table, OutputFormat format) {
  if (format == OutputFormat::Csv)
    write_csv(os, table);
  else
    write_json(os, table);
}

CsvTable read_records(const std::string &path) {
  if (std::filesystem::path(path).extension() != ".json")
    return read_csv_table(path);
  auto in = open_input(path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error &e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_array())
    throw InputError("'" + path + "' must hold a JSON array of records");
  CsvTable t;
  t.path = path;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto &rec = j[i];
    if (!rec.is_object())
      throw InputError("'" + path + "' record " + std::to_string(i) + " is not an object");
    if (t.header.empty())
      for (const auto &[k, v] : rec.items())
        t.header.push_back(k);
    std::vector<std::string> row;
    for (const auto &name : t.header) {
      if (!rec.contains(name))
        throw InputError("'" + path + "' record " + std::to_string(i) + " lacks field '" + name + "'");
      const auto &v = rec.at(name);
      if (v.is_null())
        row.emplace_back();
      else if (v.is_string())
        row.push_back(v.get<std::string>());
      else if (v.is_number_float())
        row.push_back(format_number(v.get<double>()));
      else
        row.push_back(v.dump());
    }
    t.rows.push_back(std::move(row));
    t.lines.push_back(i);
  }
  return t;
}

std::vector<Field> spec_fields(const ScoreSpec &spec) {
  return {to_string(spec.family),
          spec.family == ScoreFamily::Acps ? Field(spec.c) : Field(std::monostate{}),
          to_string(spec.weighting), to_string(spec.scheme)};
}

RecordTable vintage_table_records(const VintageTable &table) {
  RecordTable out;
  out.columns = {"horizon", "vintage", "timestamp", "model_id", "realized", "score_family", "c", "weighting",
                 "scheme", "u_min", "u_max", "N", "value", "orientation", "truncation_warning", "status", "error"};
  for (const auto &r : table.records) {
    for (std::size_t k = 0; k < table.score_specs.size(); ++k) {
      const auto &spec = table.score_specs[k];
      std::vector<Field> row = {static_cast<long long>(r.horizon), static_cast<long long>(r.vintage),
                                r.target_timestamp, r.model_id, r.realized};
      for (auto &f : spec_fields(spec))
        row.push_back(std::move(f));
      row.push_back(r.grid.u_min);
      row.push_back(r.grid.u_max);
      row.push_back(static_cast<long long>(r.grid.nodes_per_side));
      if (r.failed) {
        row.push_back(std::monostate{});
        row.push_back(to_string(spec.orientation()));
        row.push_back(std::monostate{});
        row.push_back(std::string("failed"));
        row.push_back(r.error);
      } else {
        row.push_back(r.scores[k].value);
        row.push_back(to_string(r.scores[k].orientation));
        row.push_back(r.scores[k].truncated);
        row.push_back(std::string("ok"));
        row.push_back(std::monostate{});
      }
      out.add(std::move(row));
    }
  }
  return out;
}

RecordTable ranking_report_records(const RankingReport &report) {
  RecordTable out;
  out.columns = {"horizon", "score"};
  for (const auto &id : report.model_ids)
    out.columns.push_back(id);
  for (const auto &row : report.rows) {
    std::vector<Field> rec = {static_cast<long long>(row.horizon), row.spec.label()};
    for (const auto &m : row.models)
      rec.push_back(m.rank > 0 ? Field(std::to_string(m.rank) + m.stars) : Field(std::monostate{}));
    out.add(std::move(rec));
  }
  return out;
}

RecordTable ranking_detail_records(const RankingReport &report) {
  RecordTable out;
  out.columns = {"horizon", "score", "score_family", "c", "weighting", "scheme", "model_1", "model_2",
                 "average", "n_scored", "rank", "dm_status", "T", "mean_diff", "lrv", "bandwidth",
                 "statistic", "p_value", "stars"};
  for (const auto &row : report.rows) {
    for (const auto &m : row.models) {
      std::vector<Field> rec = {static_cast<long long>(row.horizon), row.spec.label()};
      for (auto &f : spec_fields(row.spec))
        rec.push_back(std::move(f));
      rec.push_back(m.model_id);
      rec.push_back(report.benchmark);
      rec.push_back(optional_number(m.average));
      rec.push_back(static_cast<long long>(m.n_scored));
      rec.push_back(m.rank > 0 ? Field(static_cast<long long>(m.rank)) : Field(std::monostate{}));
      rec.push_back(to_string(m.dm_status));
      if (m.dm_status == DmStatus::Computed) {
        rec.push_back(static_cast<long long>(m.dm.t));
        rec.push_back(m.dm.mean_diff);
        rec.push_back(m.dm.lrv);
        rec.push_back(static_cast<long long>(m.dm.bandwidth));
        rec.push_back(m.dm.statistic);
        rec.push_back(m.dm.p_value);
        rec.push_back(m.stars);
      } else {
        for (int k = 0; k < 7; ++k)
          rec.push_back(std::monostate{});
      }
      out.add(std::move(rec));
    }
  }
  return out;
}

RecordTable best_model_trace_records(const VintageTable &table) {
  RecordTable out;
  out.columns = {"horizon", "score", "vintage", "timestamp", "model_id"};
  for (int h : table.horizons)
    for (std::size_t k = 0; k < table.score_specs.size(); ++k)
      for (const auto &e : best_model_trace(table, h, k))
        out.add({static_cast<long long>(h), table.score_specs[k].label(), static_cast<long long>(e.vintage),
                 e.target_timestamp, e.model_id});
  return out;
}

RecordTable best_model_frequency_records(const VintageTable &table) {
  RecordTable out;
  out.columns = {"horizon", "score", "model_id", "frequency"};
  for (int h : table.horizons)
    for (std::size_t k = 0; k < table.score_specs.size(); ++k) {
      const auto trace = best_model_trace(table, h, k);
      if (trace.empty())
        continue;
      for (const auto &[id, f] : best_model_frequency(trace, table.model_ids))
        out.add({static_cast<long long>(h), table.score_specs[k].label(), id, f});
    }
  return out;
}

} // namespace acps
