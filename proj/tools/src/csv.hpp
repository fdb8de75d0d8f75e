#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gbpf::cli {

// Shortest text that is at most 17 significant digits and reads back to the
// same double.
std::string format_double(double v);

// RFC-4180 writer: CRLF line ends, fields quoted only when needed.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& add(double v);
  CsvWriter& add(std::int64_t v);
  CsvWriter& add(std::uint64_t v);
  CsvWriter& add(std::string_view v);
  CsvWriter& empty();
  void end_row();

  std::size_t rows() const noexcept { return rows_; }
  const std::string& text() const noexcept { return buffer_; }
  void save(const std::filesystem::path& path) const;

 private:
  void separator();

  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::size_t rows_ = 0;
  std::string buffer_;
};

struct CsvTable {
  std::vector<std::string> header;
  // Row-major numeric cells; empty fields read as NaN.
  std::vector<double> cells;
  std::size_t rows = 0;

  // Index of a named column, or -1.
  std::ptrdiff_t column(std::string_view name) const;
  double at(std::size_t row, std::size_t col) const { return cells[row * header.size() + col]; }
};

// Reads a numeric CSV with a header row. Throws SchemaError on ragged rows or
// non-numeric cells.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gbpf::cli
