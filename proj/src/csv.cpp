#include "dsplit/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dsplit {

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_int(long long v) { return std::to_string(v); }

namespace {

std::string escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header)
    : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("csv: empty header");
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw std::invalid_argument("csv: row width mismatch");
  rows_.push_back(std::move(cells));
}

void CsvTable::resize_rows(std::size_t n) { rows_.resize(n); }

void CsvTable::set_row(std::size_t index, std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw std::invalid_argument("csv: row width mismatch");
  rows_.at(index) = std::move(cells);
}

std::string CsvTable::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += escape(header_[i]);
  }
  out += '\n';
  for (const auto& row : rows_) {
    if (row.size() != header_.size())
      throw std::logic_error("csv: unfilled row slot");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += escape(row[i]);
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open " + path);
  f << to_string();
  if (!f) throw std::runtime_error("csv: write failed for " + path);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  throw std::invalid_argument("csv: no column named " + name);
}

const std::string& CsvTable::cell(std::size_t row,
                                  const std::string& name) const {
  return rows_.at(row).at(column(name));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

}  // namespace

CsvTable csv_read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvTable t(split_csv_line(line));
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    t.add_row(split_csv_line(line));
  }
  return t;
}

CsvTable csv_read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open " + path);
  return csv_read(f);
}

}  // namespace dsplit
