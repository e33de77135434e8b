#include "randhyp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace randhyp::io {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<Cell> cells) {
  if (cells.size() != header_.size()) throw ConfigError("CsvTable: row width does not match the header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const auto& items, auto render) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ',';
      out += render(items[i]);
    }
    out += '\n';
  };
  line(header_, [](const std::string& s) { return s; });
  for (const auto& row : rows_)
    line(row, [](const Cell& c) {
      if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
      if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
      return std::get<std::string>(c);
    });
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw ConfigError("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace randhyp::io
