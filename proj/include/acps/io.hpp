#pragma once

#include "acps/backtest.hpp"
#include "acps/errors.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace acps {

/// Unreadable or malformed input file. The message names the path and, for
/// content errors, the 1-based line.
class InputError : public DomainError {
public:
  InputError(const std::string &path, std::size_t line, const std::string &message);
  explicit InputError(const std::string &message) : DomainError(message) {}
};

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

/// Parses a finite decimal number; surrounding spaces are allowed.
bool parse_number(std::string_view text, double &out);

/// A comma-separated file with a header row.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row.
  std::vector<std::size_t> lines;

  /// Column index by name; throws InputError when absent.
  std::size_t column(const std::string &name) const;
};

CsvTable read_csv_table(const std::string &path);

/// Single-column numeric file without a header, e.g. predictive draws.
std::vector<double> read_values(const std::string &path);

/// Two-column (timestamp, value) file with a header row.
Series read_series(const std::string &path);

/// Realizations: either a two-column series with a header or a single
/// column of values without one (timestamps become 0-based indices).
Series read_realizations(const std::string &path);

/// Regular files of a directory sorted by name, each read as a draw file.
std::vector<std::vector<double>> read_draw_directory(const std::string &path);

void write_values(const std::string &path, const std::vector<double> &values);

enum class OutputFormat { Csv, Json };

OutputFormat parse_output_format(const std::string &text);
std::string extension(OutputFormat format);

/// Empty cells are std::monostate.
using Field = std::variant<std::monostate, std::string, double, long long, bool>;

/// Flat records with named columns, written as CSV or as a JSON array of
/// objects.
struct RecordTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Field>> rows;

  void add(std::vector<Field> row);
};

void write_csv(std::ostream &os, const RecordTable &table);
void write_json(std::ostream &os, const RecordTable &table);
void write_records(std::ostream &os, const RecordTable &table, OutputFormat format);

/// Reads records written by write_records back into string cells; the
/// format is chosen by the .json extension.
CsvTable read_records(const std::string &path);

/// Column values shared by score record outputs.
std::vector<Field> spec_fields(const ScoreSpec &spec);

/// One row per (horizon, vintage, model, score spec) with grid, status and error.
RecordTable vintage_table_records(const VintageTable &table);
/// Row per (horizon, score), one rank-and-stars column per model.
RecordTable ranking_report_records(const RankingReport &report);
/// Row per (horizon, score, model) with averages and DM fields.
RecordTable ranking_detail_records(const RankingReport &report);
RecordTable best_model_trace_records(const VintageTable &table);
RecordTable best_model_frequency_records(const VintageTable &table);

} // namespace acps
