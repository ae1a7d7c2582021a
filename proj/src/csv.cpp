#include "scream/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "scream/types.hpp"

namespace scream {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.scenario, a.algorithm, a.alpha, a.seed) <
           std::tie(b.scenario, b.algorithm, b.alpha, b.seed);
  });
}

std::string result_csv_header() {
  return "scenario,algorithm,seed,alpha,overall_loss,cumulative_loss,switching_cost,"
         "dynamic_regret,path_length,wall_time_ms";
}

std::string emit_csv_string(std::vector<ResultRow> rows, int schema_version) {
  SCREAM_REQUIRE(schema_version == kResultSchemaVersion, "unsupported schema version");
  sort_rows(rows);
  std::string out = result_csv_header() + "\n";
  for (const ResultRow& r : rows) {
    SCREAM_REQUIRE(r.scenario.find_first_of(",\n\"") == std::string::npos &&
                       r.algorithm.find_first_of(",\n\"") == std::string::npos,
                   "names may not contain commas, quotes or newlines");
    out += r.scenario + "," + r.algorithm + "," + std::to_string(r.seed) + "," +
           format_double(r.alpha) + "," + format_double(r.overall_loss) + "," +
           format_double(r.cumulative_loss) + "," + format_double(r.switching_cost) + "," +
           format_double(r.dynamic_regret) + "," + format_double(r.path_length) + "," +
           format_double(r.wall_time_ms) + "\n";
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error(path.string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_csv(const std::vector<ResultRow>& rows, int schema_version,
              const std::filesystem::path& path) {
  write_text_file(path, emit_csv_string(rows, schema_version));
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<ResultRow> parse_csv_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != result_csv_header()) {
    throw std::runtime_error("parse_csv: missing or unexpected header");
  }
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 10) {
      throw std::runtime_error("parse_csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(f.size()) + " fields");
    }
    ResultRow r;
    r.scenario = f[0];
    r.algorithm = f[1];
    r.seed = std::stol(f[2]);
    r.alpha = std::stod(f[3]);
    r.overall_loss = std::stod(f[4]);
    r.cumulative_loss = std::stod(f[5]);
    r.switching_cost = std::stod(f[6]);
    r.dynamic_regret = std::stod(f[7]);
    r.path_length = std::stod(f[8]);
    r.wall_time_ms = std::stod(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> parse_csv(const std::filesystem::path& path) {
  try {
    return parse_csv_string(read_text_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace scream
