#include "boq/csv.hpp"

#include "boq/error.hpp"

namespace boq::csv {

std::optional<Row> Reader::next() {
  if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;

  Row row;
  row.line = line_;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;

  for (;;) {
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (in_quotes) throw ParseError(row.line, "unterminated quoted field");
      row.fields.push_back(std::move(field));
      return row;
    }
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || field_was_quoted)
          throw ParseError(line_, "quote inside unquoted field");
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        row.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        break;
      case '\r':
        if (in_.peek() == '\n') in_.get();
        [[fallthrough]];
      case '\n':
        ++line_;
        row.fields.push_back(std::move(field));
        return row;
      default:
        if (field_was_quoted) throw ParseError(line_, "text after closing quote");
        field.push_back(ch);
    }
  }
}

std::vector<Row> read_all(std::istream& in) {
  Reader reader(in);
  std::vector<Row> rows;
  while (auto row = reader.next()) rows.push_back(std::move(*row));
  return rows;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

}  // namespace boq::csv
