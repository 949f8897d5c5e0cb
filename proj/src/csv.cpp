#include "fnd/csv.hpp"

#include "fnd/error.hpp"

namespace fnd {

std::optional<std::vector<std::string>> CsvReader::next() {
  if (first_) {
    first_ = false;
    // UTF-8 byte order mark
    if (in_.peek() == 0xEF) {
      char bom[3];
      in_.read(bom, 3);
      if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF)) {
        in_.clear();
        in_.seekg(0);
      }
    }
  }
  if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;

  record_line_ = line_;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  int c;
  while ((c = in_.get()) != std::char_traits<char>::eof()) {
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else if (ch == delimiter_) {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (ch == '\n') {
      ++line_;
      break;
    } else if (ch == '\r' && in_.peek() == '\n') {
      continue;
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) {
    throw Error(ErrorKind::Parse,
                "unterminated quoted field starting at line " + std::to_string(record_line_));
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace fnd
