#include "hdflow/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hdflow/errors.hpp"

namespace hdflow::csv {

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw InvalidArgument("csv: no column '" + name + "'");
}

std::vector<double> Table::col(const std::string& name) const {
  int c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
           const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << "# " << c << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw InvalidArgument("csv: row width does not match header");
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
    os << '\n';
  }
}

void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows, const std::vector<std::string>& comments) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw InvalidArgument("csv: cannot open " + path.string() + " for writing");
  write(os, header, rows, comments);
  if (!os) throw InvalidArgument("csv: write failed for " + path.string());
}

namespace {
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r"), e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}
}  // namespace

Table read(std::istream& is) {
  Table t;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    if (cells.size() != t.header.size())
      throw InvalidArgument("csv line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                            " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t pos = 0;
        double v = std::stod(c, &pos);
        if (pos != c.size()) throw std::invalid_argument(c);
        row.push_back(v);
      } catch (const std::exception&) {
        throw InvalidArgument("csv line " + std::to_string(lineno) + ": not a number '" + c + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw InvalidArgument("csv: no header");
  return t;
}

Table read(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("csv: cannot open " + path.string());
  return read(is);
}

}  // namespace hdflow::csv
