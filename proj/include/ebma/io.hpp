#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ebma/dataset.hpp"

namespace ebma {

/// 17 significant digits; the printed value parses back to the same double.
std::string format_g17(double v);

std::uint64_t fnv1a64(std::string_view s);

/// Numeric table read from CSV: header row, comma-separated numeric cells.
/// Lines starting with '#' are skipped. Parse failures name the line.
struct DataTable {
  std::vector<std::string> columns;
  MatrixXd values;

  int column_index(const std::string& name) const;  // -1 when absent
};

DataTable read_csv_table(const std::string& path);

struct NamedDataset {
  Dataset data;
  std::vector<std::string> predictors;
  std::string response;
};

/// Dataset from a CSV table: the named response column, every other
/// column a candidate predictor in file order.
NamedDataset load_dataset_csv(const std::string& path, const std::string& response_col,
                              bool log_response = false);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ebma
