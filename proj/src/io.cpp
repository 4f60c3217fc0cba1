#include "damh/io.hpp"

#include <cstdio>

#include "damh/errors.hpp"

namespace damh::io {

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header_comments,
                     const std::vector<std::string>& columns)
    : out_(path) {
  if (!out_) throw DomainError("CsvWriter: cannot open " + path);
  for (const auto& c : header_comments) out_ << "# " << c << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

std::string command_line(int argc, const char* const* argv) {
  std::string cmd;
  for (int i = 0; i < argc; ++i) {
    if (i) cmd += ' ';
    cmd += argv[i];
  }
  return cmd;
}

}  // namespace damh::io
