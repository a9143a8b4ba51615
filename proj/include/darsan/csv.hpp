#pragma once

#include <string>
#include <vector>

#include "darsan/types.hpp"

namespace darsan {
namespace csv {

// Minimal comma-separated output for numeric experiment data. No quoting: the
// emitted schemas never contain commas inside values.
class Writer {
 public:
  explicit Writer(const std::string& path);
  ~Writer();

  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

 private:
  struct Impl;
  Impl* impl_;
};

std::string format_double(double value);  // round-trip precision

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

// Reads a whole CSV file (header + rows); throws Error(Io) / Error(Corrupt).
Table read_file(const std::string& path);

}  // namespace csv
}  // namespace darsan
