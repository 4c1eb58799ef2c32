#pragma once

// Header-row delimited numeric text: the CLI's input and `simulate` output.

#include <iosfwd>
#include <string>
#include <vector>

#include "ssvb/core_math.hpp"

namespace ssvb {

struct Table {
  std::vector<std::string> header;
  MatrixXd values;  // rows x header.size()
};

/// Parses a header row followed by numeric rows. Blank lines are skipped;
/// fields may be wrapped in double quotes. Throws DataError on ragged rows,
/// duplicate column names or non-numeric cells.
Table read_table(std::istream& in, char delimiter = ',');

/// `response` becomes y; every other column becomes X in file order. With
/// `add_intercept` a leading column of ones named "(intercept)" is prepended.
struct DesignColumns {
  Dataset data;
  std::vector<std::string> names;
};

DesignColumns table_to_dataset(const Table& table, const std::string& response, ResponseKind kind,
                               bool add_intercept = false);

/// Writes values with 17 significant digits so they read back bit-exactly.
void write_table(std::ostream& out, const Table& table, char delimiter = ',');

}  // namespace ssvb
