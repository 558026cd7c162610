#pragma once

#include <string>
#include <vector>

#include "gselc/design_space.hpp"
#include "gselc/orchestrator.hpp"

namespace gselc::csv {

// Shortest decimal text that parses back to the same double ("nan" for NaN).
std::string format_double(double v);

// Strict parse: the whole trimmed token must be a number (or "nan").
double parse_double(const std::string& text);

// Whole-file reader: comma-separated cells, no quoting, CRLF tolerated,
// trailing blank lines ignored.
std::vector<std::vector<std::string>> read_table(const std::string& path);

// Points file: header = factor names in declaration order, one candidate per
// row. Every row must be a library point.
std::vector<Point> read_points_csv(const std::string& path, const DesignSpace& space);
void write_points_csv(const std::string& path, const std::vector<Point>& points,
                      const DesignSpace& space);

// Results file: header = factor names + "y".
std::vector<Observation> read_results_csv(const std::string& path, const DesignSpace& space);

// Proposal file: factor columns, then origin,y_hat,s2,ei.
void write_proposal_csv(const std::string& path, const BatchProposal& proposal,
                        const DesignSpace& space);

}  // namespace gselc::csv
