#include "automsc/csv.hpp"

#include "automsc/error.hpp"

namespace automsc::csv {

namespace {

[[noreturn]] void syntax_error(std::size_t line, std::size_t column, const std::string& what) {
  throw Error(ErrorKind::CsvSyntax,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

}  // namespace

bool Reader::next(Record& out) {
  out.fields.clear();
  out.line = line_;

  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool row_has_content = false;
  std::size_t column = 0;

  auto finish_field = [&] {
    out.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };

  for (;;) {
    const int c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (in_quotes) syntax_error(out.line, column, "unterminated quoted field");
      if (!row_has_content) return false;
      finish_field();
      return true;
    }
    ++column;
    const char ch = static_cast<char>(c);

    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          ++column;
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') {
          ++line_;
          column = 0;
        }
        field.push_back(ch);
      }
      continue;
    }

    switch (ch) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          syntax_error(line_, column, "quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        row_has_content = true;
        break;
      case ',':
        row_has_content = true;
        finish_field();
        break;
      case '\r':
        if (in_.peek() != '\n') syntax_error(line_, column, "bare carriage return");
        break;
      case '\n':
        ++line_;
        if (!row_has_content) {
          // blank line
          out.line = line_;
          column = 0;
          break;
        }
        finish_field();
        return true;
      default:
        if (field_was_quoted) syntax_error(line_, column, "text after closing quote");
        field.push_back(ch);
        row_has_content = true;
        break;
    }
  }
}

std::vector<Record> read_all(std::istream& in) {
  Reader reader(in);
  std::vector<Record> rows;
  Record rec;
  while (reader.next(rec)) rows.push_back(rec);
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.put(',');
    out << escape(row[i]);
  }
  out.put('\n');
}

}  // namespace automsc::csv
