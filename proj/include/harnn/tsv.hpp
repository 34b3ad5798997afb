#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace harnn {

// Errors carrying a machine-parseable category; the CLI maps these to
// distinct exit codes.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
        line_number(line) {}
  int line_number;
};

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

// Reads a whole file; throws IoError if unreadable.
std::string read_file(const std::string& path);

// Writes bytes atomically enough for our purposes (truncate + write).
void write_file(const std::string& path, const std::string& content);

// Splits one line on tabs. No quoting rules; fields may be empty.
std::vector<std::string> split_tabs(const std::string& line);

// Parses a TSV file into rows of fields, skipping blank lines.
// `expected_fields` > 0 enforces a fixed column count per row.
std::vector<std::vector<std::string>> read_tsv(const std::string& path,
                                               int expected_fields = 0);

// As read_tsv, but each row keeps its 1-based physical line number.
struct TsvRow {
  int line = 0;
  std::vector<std::string> fields;
};
std::vector<TsvRow> read_tsv_rows(const std::string& path,
                                  int expected_fields = 0);

std::int64_t parse_int64(const std::string& s, const std::string& file,
                         int line);
double parse_double(const std::string& s, const std::string& file, int line);

}  // namespace harnn
