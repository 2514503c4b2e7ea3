#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dsplit {

// numeric cell at 12 significant digits (all times are abstract units)
std::string csv_num(double v);
std::string csv_int(long long v);

// Fixed-width table with slot addressing so concurrent producers can fill
// rows by index and the emitted byte stream is order-independent.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void resize_rows(std::size_t n);
  void set_row(std::size_t index, std::vector<std::string> cells);

  std::size_t n_rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::string>& row(std::size_t i) const { return rows_.at(i); }

  std::string to_string() const;
  void write_file(const std::string& path) const;

  // header-addressed access; throws on unknown column
  std::size_t column(const std::string& name) const;
  const std::string& cell(std::size_t row, const std::string& name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

CsvTable csv_read(std::istream& in);
CsvTable csv_read_file(const std::string& path);

}  // namespace dsplit
