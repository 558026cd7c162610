#include "gselc/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gselc::csv {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

void require_header(const std::vector<std::string>& header,
                    const std::vector<std::string>& expected, const std::string& path) {
  if (header != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + expected[i];
    std::string got;
    for (std::size_t i = 0; i < header.size(); ++i) got += (i ? "," : "") + header[i];
    throw std::invalid_argument(path + ": expected header '" + want + "', got '" + got + "'");
  }
}

Point parse_point_row(const std::vector<std::string>& row, const DesignSpace& space,
                      const std::string& path, std::size_t line_no) {
  Point p(space.dims());
  for (int j = 0; j < space.dims(); ++j)
    p[j] = parse_double(row[static_cast<std::size_t>(j)]);
  if (space.index_of(p) < 0)
    throw std::invalid_argument(path + ": row " + std::to_string(line_no) +
                                " is not a point of the candidate library");
  return p;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw std::invalid_argument("parse_double: empty cell");
  if (t == "nan" || t == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw std::invalid_argument("parse_double: bad number '" + t + "'");
  return v;
}

std::vector<std::vector<std::string>> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_table: cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(split_line(line));
  while (!rows.empty() && (rows.back().empty() || (rows.back().size() == 1 && rows.back()[0].empty())))
    rows.pop_back();
  if (rows.empty()) throw std::invalid_argument("read_table: " + path + " is empty");
  return rows;
}

std::vector<Point> read_points_csv(const std::string& path, const DesignSpace& space) {
  const auto rows = read_table(path);
  require_header(rows[0], space.factor_names(), path);
  std::vector<Point> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(space.dims()))
      throw std::invalid_argument(path + ": row " + std::to_string(r + 1) + " has " +
                                  std::to_string(rows[r].size()) + " cells");
    out.push_back(parse_point_row(rows[r], space, path, r + 1));
  }
  return out;
}

void write_points_csv(const std::string& path, const std::vector<Point>& points,
                      const DesignSpace& space) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_points_csv: cannot open " + path);
  const auto& names = space.factor_names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << "\n";
  for (const auto& p : points) {
    for (Eigen::Index j = 0; j < p.size(); ++j) out << (j ? "," : "") << format_double(p[j]);
    out << "\n";
  }
  if (!out) throw std::invalid_argument("write_points_csv: write failed for " + path);
}

std::vector<Observation> read_results_csv(const std::string& path, const DesignSpace& space) {
  const auto rows = read_table(path);
  std::vector<std::string> expected = space.factor_names();
  expected.push_back("y");
  require_header(rows[0], expected, path);
  std::vector<Observation> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != expected.size())
      throw std::invalid_argument(path + ": row " + std::to_string(r + 1) + " has " +
                                  std::to_string(rows[r].size()) + " cells");
    Observation obs;
    obs.point = parse_point_row(rows[r], space, path, r + 1);
    obs.y = parse_double(rows[r].back());
    out.push_back(std::move(obs));
  }
  return out;
}

void write_proposal_csv(const std::string& path, const BatchProposal& proposal,
                        const DesignSpace& space) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_proposal_csv: cannot open " + path);
  const auto& names = space.factor_names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << ",origin,y_hat,s2,ei\n";
  for (const auto& pp : proposal.points) {
    for (Eigen::Index j = 0; j < pp.point.size(); ++j)
      out << (j ? "," : "") << format_double(pp.point[j]);
    out << "," << to_string(pp.origin) << "," << format_double(pp.y_hat) << ","
        << format_double(pp.s2) << "," << format_double(pp.ei) << "\n";
  }
  if (!out) throw std::invalid_argument("write_proposal_csv: write failed for " + path);
}

}  // namespace gselc::csv
