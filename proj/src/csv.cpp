#include "darsan/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace darsan {
namespace csv {

struct Writer::Impl {
  std::ofstream out;
  std::size_t width = 0;
};

Writer::Writer(const std::string& path) : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out) {
    delete impl_;
    fail(ErrorCode::Io, "cannot open " + path + " for writing");
  }
}

Writer::~Writer() { delete impl_; }

void Writer::header(const std::vector<std::string>& columns) {
  impl_->width = columns.size();
  row(columns);
}

void Writer::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << cells[i];
  }
  impl_->out << '\n';
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);

  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(pos));
        break;
      }
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (first) {
      table.columns = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.columns.size())
        fail(ErrorCode::Corrupt, path + ": row width differs from header");
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) fail(ErrorCode::Corrupt, path + ": empty file");
  return table;
}

}  // namespace csv
}  // namespace darsan
