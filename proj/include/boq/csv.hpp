#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace boq::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line on which the record starts
};

// RFC-4180 reader. Quoted fields may contain commas, doubled quotes and line
// breaks; CRLF and LF line endings are both accepted.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::vector<Row> read_all(std::istream& in);

std::string quote(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace boq::csv
