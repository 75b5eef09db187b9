#include "margreg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "margreg/errors.hpp"

namespace margreg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line, std::size_t column,
                              const std::string& what) {
  throw Error(ErrorCode::Parse, source + ": line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ": " + what);
}

double parse_cell(std::string_view cell, const std::string& source, std::size_t line,
                  std::size_t column) {
  cell = trim(cell);
  if (cell.empty()) parse_error(source, line, column, "empty field");
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    parse_error(source, line, column, "cannot parse '" + std::string(cell) + "' as a number");
  }
  if (!std::isfinite(v)) parse_error(source, line, column, "non-finite value");
  return v;
}

std::vector<std::vector<double>> read_rows(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view view = trim(text);
    if (line == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (view.empty()) continue;
    std::vector<double> row;
    std::size_t column = 1;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = view.find(',', start);
      const std::string_view cell =
          view.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                             : comma - start);
      row.push_back(parse_cell(cell, source, line, column));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
      ++column;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_error(source, line, row.size(),
                  "row has " + std::to_string(row.size()) + " fields, expected " +
                      std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::Parse, source + ": no data rows");
  return rows;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

}  // namespace

Matrix read_matrix_csv(std::istream& in, const std::string& source) {
  const auto rows = read_rows(in, source);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Matrix load_matrix_csv(const std::string& path) {
  auto in = open_input(path);
  return read_matrix_csv(in, path);
}

Vector read_vector_csv(std::istream& in, const std::string& source) {
  const Matrix m = read_matrix_csv(in, source);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw Error(ErrorCode::Parse, source + ": expected a single row or column, got " +
                                    std::to_string(m.rows()) + " x " + std::to_string(m.cols()));
}

Vector load_vector_csv(const std::string& path) {
  auto in = open_input(path);
  return read_vector_csv(in, path);
}

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ',' || text[pos] == ' ' || text[pos] == '\t')) ++pos;
    if (pos >= text.size()) break;
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v);
    if (ec != std::errc()) {
      throw Error(ErrorCode::Parse, "bad index list '" + text + "' at offset " +
                                        std::to_string(pos));
    }
    out.push_back(v);
    pos = static_cast<std::size_t>(ptr - text.data());
    if (pos < text.size() && text[pos] != ',' && text[pos] != ' ' && text[pos] != '\t') {
      throw Error(ErrorCode::Parse, "bad index list '" + text + "' at offset " +
                                        std::to_string(pos));
    }
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_text_file(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace margreg
