#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace scream {

inline constexpr int kResultSchemaVersion = 1;

/// One (scenario, algorithm, alpha, seed) cell of a benchmark.
struct ResultRow {
  std::string scenario;
  std::string algorithm;
  long seed = 0;
  double alpha = 0.0;
  double overall_loss = 0.0;
  double cumulative_loss = 0.0;
  double switching_cost = 0.0;
  double dynamic_regret = 0.0;
  double path_length = 0.0;
  double wall_time_ms = 0.0;
};

/// Nine significant digits, "%.9g".
std::string format_double(double value);

/// Sorts by (scenario, algorithm, alpha, seed).
void sort_rows(std::vector<ResultRow>& rows);

std::string result_csv_header();
std::string emit_csv_string(std::vector<ResultRow> rows, int schema_version = kResultSchemaVersion);
void emit_csv(const std::vector<ResultRow>& rows, int schema_version,
              const std::filesystem::path& path);

std::vector<ResultRow> parse_csv_string(const std::string& text);
std::vector<ResultRow> parse_csv(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories. Errors carry the path.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace scream
