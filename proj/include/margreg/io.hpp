#pragma once

// CSV ingestion and locale-independent number formatting.

#include <istream>
#include <string>
#include <vector>

#include "margreg/linalg.hpp"

namespace margreg {

/// Plain numeric grid, comma separated, rows = observations. Blank lines are
/// skipped. Parse errors name the source, line and column.
Matrix read_matrix_csv(std::istream& in, const std::string& source = "<input>");
Matrix load_matrix_csv(const std::string& path);

/// A single column or a single row.
Vector read_vector_csv(std::istream& in, const std::string& source = "<input>");
Vector load_vector_csv(const std::string& path);

/// "0,3,5" or "0 3 5".
std::vector<Index> parse_index_list(const std::string& text);

/// Shortest round-trip representation with '.' as the decimal point.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace margreg
