#include "css/results.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "css/types.hpp"

namespace css {

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

Cell parse_cell(const std::string& s) {
  if (s.empty()) return s;
  std::int64_t i = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ec == std::errc() && p == s.data() + s.size()) return i;
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (end == s.c_str() + s.size()) return d;
  return s;
}

nlohmann::json cell_json(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isfinite(*d)) return *d;
    return format_real(*d);
  }
  return std::get<std::string>(c);
}

Cell json_cell(const nlohmann::json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "-inf" || s == "nan") return std::strtod(s.c_str(), nullptr);
    return s;
  }
  throw DimensionMismatch("unsupported JSON cell");
}

}  // namespace

bool is_timing_column(std::string_view name) { return name.size() >= 2 && name.substr(name.size() - 2) == "_s"; }

ResultTable::ResultTable(std::vector<std::string> columns, nlohmann::json spec)
    : columns_(std::move(columns)), spec_(std::move(spec)) {}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw DimensionMismatch("row has " + std::to_string(row.size()) + " cells, header has " +
                            std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
}

void ResultTable::append(const ResultTable& other) {
  if (columns_.empty()) columns_ = other.columns_;
  if (other.columns_ != columns_) throw DimensionMismatch("cannot append tables with different headers");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

bool ResultTable::has_column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c == name) return true;
  }
  return false;
}

std::size_t ResultTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw DimensionMismatch("no column '" + std::string(name) + "'");
}

const Cell& ResultTable::at(std::size_t row, std::string_view column) const {
  return rows_.at(row).at(column_index(column));
}

double ResultTable::number(std::size_t row, std::string_view column) const {
  const Cell& c = at(row, column);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&c)) return *d;
  throw DimensionMismatch("column '" + std::string(column) + "' is not numeric");
}

std::string ResultTable::text(std::size_t row, std::string_view column) const {
  const Cell& c = at(row, column);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return format_cell(c);
}

void ResultTable::write_csv(std::ostream& out, bool with_timing) const {
  std::vector<bool> keep(columns_.size());
  for (std::size_t i = 0; i < columns_.size(); ++i) keep[i] = with_timing || !is_timing_column(columns_[i]);
  auto emit = [&](auto&& cell_text) {
    bool first = true;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (!keep[i]) continue;
      if (!first) out << ',';
      out << cell_text(i);
      first = false;
    }
    out << '\n';
  };
  emit([&](std::size_t i) { return columns_[i]; });
  for (const auto& row : rows_) emit([&](std::size_t i) { return format_cell(row[i]); });
}

std::string ResultTable::csv(bool with_timing) const {
  std::ostringstream s;
  write_csv(s, with_timing);
  return s.str();
}

ResultTable ResultTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw ConfigError("results file is empty");
  ResultTable t(split_csv_line(line), nlohmann::json::object());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_cell(f));
    t.add_row(std::move(row));
  }
  return t;
}

nlohmann::json ResultTable::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : rows_) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    rows.push_back(std::move(r));
  }
  return {{"format_version", kFormatVersion}, {"spec", spec_}, {"columns", columns_}, {"rows", std::move(rows)}};
}

ResultTable ResultTable::from_json(const nlohmann::json& j) {
  if (!j.contains("columns") || !j.contains("rows")) throw ConfigError("results JSON lacks columns/rows");
  ResultTable t(j.at("columns").get<std::vector<std::string>>(), j.value("spec", nlohmann::json::object()));
  for (const auto& r : j.at("rows")) {
    std::vector<Cell> row;
    for (const auto& c : r) row.push_back(json_cell(c));
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace css
