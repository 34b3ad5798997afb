#include "harnn/tsv.hpp"

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace harnn {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write file: " + path);
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("short write: " + path);
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<TsvRow> read_tsv_rows(const std::string& path,
                                  int expected_fields) {
  const std::string content = read_file(path);
  std::vector<TsvRow> rows;
  std::size_t start = 0;
  int line_no = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    ++line_no;
    std::string line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    start = end + 1;
    if (line.empty()) {
      if (start > content.size()) break;
      continue;
    }
    auto fields = split_tabs(line);
    if (expected_fields > 0 &&
        fields.size() != static_cast<std::size_t>(expected_fields)) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(expected_fields) +
                           " tab-separated fields, got " +
                           std::to_string(fields.size()));
    }
    rows.push_back({line_no, std::move(fields)});
    if (end == content.size()) break;
  }
  return rows;
}

std::vector<std::vector<std::string>> read_tsv(const std::string& path,
                                               int expected_fields) {
  std::vector<std::vector<std::string>> rows;
  for (auto& row : read_tsv_rows(path, expected_fields)) {
    rows.push_back(std::move(row.fields));
  }
  return rows;
}

std::int64_t parse_int64(const std::string& s, const std::string& file,
                         int line) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(file, line, "not an integer: '" + s + "'");
  }
  return value;
}

double parse_double(const std::string& s, const std::string& file, int line) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size() || s.empty()) {
    throw ParseError(file, line, "not a number: '" + s + "'");
  }
  return value;
}

}  // namespace harnn
