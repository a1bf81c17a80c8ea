#include "ebma/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ebma/errors.hpp"

namespace ebma {

std::string format_g17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

int DataTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string()
                                               : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, int line_no, const std::string& path) {
  if (cell == "nan") return std::nan("");
  if (cell == "inf") return HUGE_VAL;
  if (cell == "-inf") return -HUGE_VAL;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw ParseError(path + ": line " + std::to_string(line_no) +
                     ": cannot parse numeric cell '" + cell + "'");
  }
  return v;
}

}  // namespace

DataTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");

  DataTable table;
  std::string line;
  int line_no = 0;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (table.columns.empty()) {
      table.columns = cells;
      if (table.columns.empty()) {
        throw ParseError(path + ": line " + std::to_string(line_no) + ": empty header");
      }
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.columns.size()) + " cells, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, line_no, path));
    rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw ParseError(path + ": no header row");

  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return table;
}

NamedDataset load_dataset_csv(const std::string& path, const std::string& response_col,
                              bool log_response) {
  const DataTable table = read_csv_table(path);
  const int y_col = table.column_index(response_col);
  if (y_col < 0) {
    throw InvalidInputError(path + ": no column named '" + response_col + "'");
  }
  const Eigen::Index n = table.values.rows();
  const Eigen::Index p = table.values.cols() - 1;
  if (p < 1) throw InvalidInputError(path + ": need at least one predictor column");

  VectorXd y = table.values.col(y_col);
  if (log_response) {
    if ((y.array() <= 0.0).any()) {
      throw InvalidInputError(path + ": log transform needs a positive response");
    }
    y = y.array().log();
  }

  MatrixXd x(n, p);
  std::vector<std::string> predictors;
  Eigen::Index j_out = 0;
  for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
    if (j == y_col) continue;
    x.col(j_out++) = table.values.col(j);
    predictors.push_back(table.columns[static_cast<std::size_t>(j)]);
  }
  return {Dataset(std::move(y), std::move(x)), std::move(predictors), response_col};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace ebma
