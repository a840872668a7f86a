#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace automsc::csv {

using Row = std::vector<std::string>;

/// A parsed row plus the 1-based line on which it started.
struct Record {
  std::size_t line = 0;
  Row fields;
};

/// Streaming reader for comma-separated text with double-quote quoting.
/// Quoted fields may contain commas, doubled quotes and line breaks.
/// Both LF and CRLF line endings are accepted. Blank lines are skipped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Returns false at end of input. Throws Error(CsvSyntax) with the
  /// line and column of the offending character.
  bool next(Record& out);

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::vector<Record> read_all(std::istream& in);

/// Quotes the field if it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace automsc::csv
