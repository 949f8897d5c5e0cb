#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace fnd {

/// Minimal RFC 4180 reader: quoted fields may contain the delimiter, doubled
/// quotes and line breaks. Accepts LF and CRLF record terminators.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in, char delimiter = ',') : in_(in), delimiter_(delimiter) {}

  /// Next record, or nullopt at end of input. Throws fnd::Error(Parse) on an
  /// unterminated quoted field.
  std::optional<std::vector<std::string>> next();

  /// 1-based physical line where the last returned record started.
  std::size_t record_line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  char delimiter_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  bool first_ = true;
};

}  // namespace fnd
