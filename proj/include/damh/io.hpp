#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace damh::io {

/// CSV emitter with a reproducibility header: every file starts with comment
/// lines carrying the exact command line (and seed), so re-running the header
/// command regenerates the file byte for byte.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header_comments,
            const std::vector<std::string>& columns);

  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);

 private:
  std::ofstream out_;
};

std::string format_double(double v, int precision = 10);

/// Reconstructs a canonical command string from argv for the file headers.
std::string command_line(int argc, const char* const* argv);

}  // namespace damh::io
