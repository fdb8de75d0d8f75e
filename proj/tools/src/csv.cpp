#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace gbpf::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

bool needs_quotes(std::string_view v) { return v.find_first_of(",\"\r\n") != std::string_view::npos; }

std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(std::move(field));
  return out;
}

double parse_cell(const std::string& s, std::size_t row, std::size_t col) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw SchemaError("non-numeric cell '" + s + "' at row " + std::to_string(row + 1) + ", column " +
                      std::to_string(col + 1));
  }
  return v;
}

}  // namespace

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (const auto& h : header) add(std::string_view(h));
  end_row();
  rows_ = 0;
}

void CsvWriter::separator() {
  if (in_row_ > 0) buffer_ += ',';
  ++in_row_;
}

CsvWriter& CsvWriter::add(double v) {
  separator();
  buffer_ += format_double(v);
  return *this;
}

CsvWriter& CsvWriter::add(std::int64_t v) {
  separator();
  buffer_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::add(std::uint64_t v) {
  separator();
  buffer_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::add(std::string_view v) {
  separator();
  if (!needs_quotes(v)) {
    buffer_ += v;
    return *this;
  }
  buffer_ += '"';
  for (const char ch : v) {
    if (ch == '"') buffer_ += '"';
    buffer_ += ch;
  }
  buffer_ += '"';
  return *this;
}

CsvWriter& CsvWriter::empty() {
  separator();
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw Error("CSV row has " + std::to_string(in_row_) + " fields, expected " +
                                       std::to_string(columns_));
  buffer_ += "\r\n";
  in_row_ = 0;
  ++rows_;
}

void CsvWriter::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out) throw Error("write failed for " + path.string());
}

std::ptrdiff_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_record(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw SchemaError(path.string() + ": row " + std::to_string(table.rows + 1) + " has " +
                        std::to_string(fields.size()) + " fields, header has " + std::to_string(table.header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) table.cells.push_back(parse_cell(fields[c], table.rows, c));
    ++table.rows;
  }
  if (first) throw SchemaError(path.string() + " is empty");
  return table;
}

}  // namespace gbpf::cli
