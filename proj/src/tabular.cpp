#include "ssvb/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

namespace ssvb {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  std::string t = s.substr(first, last - first + 1);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return t;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    if (ch == delimiter && !quoted) {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  }
  return v;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

Table read_table(std::istream& in, char delimiter) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) break;
  }
  if (line_no == 0 || blank(line)) throw DataError("input has no header row");
  table.header = split(line, delimiter);
  std::set<std::string> seen;
  for (const auto& name : table.header) {
    if (name.empty()) throw DataError("header contains an empty column name");
    if (!seen.insert(name).second) throw DataError("duplicate column name '" + name + "'");
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split(line, delimiter);
    if (fields.size() != table.header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("input has no data rows");

  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return table;
}

DesignColumns table_to_dataset(const Table& table, const std::string& response, ResponseKind kind,
                               bool add_intercept) {
  const auto it = std::find(table.header.begin(), table.header.end(), response);
  if (it == table.header.end()) throw DataError("response column '" + response + "' not found");
  const auto resp = static_cast<Eigen::Index>(it - table.header.begin());

  std::vector<std::string> names;
  if (add_intercept) names.emplace_back("(intercept)");
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(table.header.size()); ++j) {
    if (j != resp) names.push_back(table.header[static_cast<std::size_t>(j)]);
  }
  if (names.empty()) throw DataError("no predictor columns besides the response");

  const Eigen::Index n = table.values.rows();
  MatrixXd x(n, static_cast<Eigen::Index>(names.size()));
  Eigen::Index col = 0;
  if (add_intercept) x.col(col++).setOnes();
  for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
    if (j != resp) x.col(col++) = table.values.col(j);
  }
  VectorXd y = table.values.col(resp);
  return DesignColumns{validate_dataset(std::move(x), std::move(y), kind), std::move(names)};
}

void write_table(std::ostream& out, const Table& table, char delimiter) {
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j > 0) out << delimiter;
    out << table.header[j];
  }
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
      if (j > 0) out << delimiter;
      std::snprintf(buf, sizeof buf, "%.17g", table.values(i, j));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace ssvb
