#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hdflow::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;  // throws InvalidArgument if missing
  std::vector<double> col(const std::string& name) const;
};

// Round-trip formatting (%.17g); inf/nan are written as inf, -inf, nan.
std::string fmt(double v);

void write(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
           const std::vector<std::string>& comments = {});
void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows, const std::vector<std::string>& comments = {});

// Lines starting with '#' are skipped. The first other line is the header.
Table read(std::istream& is);
Table read(const std::filesystem::path& path);

}  // namespace hdflow::csv
