#pragma once

#include "randhyp/core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace randhyp::io {

/// %.17g: enough digits to round-trip any double.
std::string format_double(double x);

using Cell = std::variant<std::int64_t, double, std::string>;

/// Plot-ready table. Rows are rendered in insertion order with fixed
/// formatting so identical runs give identical bytes.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<Cell> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Sixteen lowercase hex digits.
std::string hex64(std::uint64_t value);

/// Write through a temporary sibling and rename, so readers never see a
/// half-written file.
void write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

} // namespace randhyp::io
