#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace css {

using Cell = std::variant<std::int64_t, double, std::string>;

/// Rows of typed cells under a fixed header, plus the experiment spec that
/// produced them. Columns whose name ends in "_s" hold wall-clock seconds and
/// are the only ones allowed to differ between two runs of the same spec.
class ResultTable {
 public:
  static constexpr int kFormatVersion = 1;

  ResultTable() = default;
  ResultTable(std::vector<std::string> columns, nlohmann::json spec);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  const nlohmann::json& spec() const noexcept { return spec_; }
  void set_spec(nlohmann::json spec) { spec_ = std::move(spec); }

  /// Throws DimensionMismatch when the row width differs from the header.
  void add_row(std::vector<Cell> row);
  void append(const ResultTable& other);

  bool has_column(std::string_view name) const;
  std::size_t column_index(std::string_view name) const;
  const Cell& at(std::size_t row, std::string_view column) const;
  /// Integer or real cell as double.
  double number(std::size_t row, std::string_view column) const;
  std::string text(std::size_t row, std::string_view column) const;

  /// Header plus one line per row. Reals use 17 significant digits so the
  /// file round-trips exactly. `with_timing = false` drops "_s" columns.
  void write_csv(std::ostream& out, bool with_timing = true) const;
  std::string csv(bool with_timing = true) const;
  static ResultTable read_csv(std::istream& in);

  /// {"format_version", "spec", "columns", "rows"}.
  nlohmann::json to_json() const;
  static ResultTable from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
  nlohmann::json spec_ = nlohmann::json::object();
};

bool is_timing_column(std::string_view name);

}  // namespace css
