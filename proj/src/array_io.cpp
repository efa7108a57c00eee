#include "inhomlp/array_io.hpp"

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "inhomlp/errors.hpp"

namespace inhomlp {

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc())
    throw IoError("cannot format value");
  return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

double parse_double(std::string_view text, const std::filesystem::path &path, std::size_t line_no) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed number '" + std::string(text) + "'");
  return value;
}

std::vector<std::vector<double>> read_rows(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(parse_double(std::string_view(line).substr(start, comma - start), path, line_no));
      if (comma == std::string::npos)
        break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw IoError(path.string() + ": no data");
  return rows;
}

} // namespace

void write_signal_csv(const std::filesystem::path &path, const Signal &signal) {
  auto out = open_out(path);
  const auto &shape = signal.shape();
  if (!shape.is_2d()) {
    for (std::size_t i = 0; i < signal.size(); ++i)
      out << format_double(signal(i)) << '\n';
  } else {
    for (std::size_t r = 0; r < shape.rows(); ++r) {
      for (std::size_t c = 0; c < shape.cols(); ++c) {
        if (c)
          out << ',';
        out << format_double(signal.at(r, c));
      }
      out << '\n';
    }
  }
  if (!out)
    throw IoError("failed writing " + path.string());
}

Signal read_signal_csv(const std::filesystem::path &path) {
  const auto rows = read_rows(path);
  const std::size_t cols = rows.front().size();
  for (const auto &row : rows)
    if (row.size() != cols)
      throw IoError(path.string() + ": ragged rows");
  if (cols == 1) {
    Vector v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = rows[i][0];
    return Signal(Shape::line(rows.size()), std::move(v));
  }
  Vector v(static_cast<Eigen::Index>(rows.size() * cols));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c)
      v[static_cast<Eigen::Index>(r * cols + c)] = rows[r][c];
  return Signal(Shape::grid(rows.size(), cols), std::move(v));
}

void write_vector_csv(const std::filesystem::path &path, const Vector &values) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < values.size(); ++i)
    out << format_double(values[i]) << '\n';
  if (!out)
    throw IoError("failed writing " + path.string());
}

Vector read_vector_csv(const std::filesystem::path &path) {
  const auto rows = read_rows(path);
  std::vector<double> flat;
  for (const auto &row : rows)
    flat.insert(flat.end(), row.begin(), row.end());
  return Eigen::Map<const Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

} // namespace inhomlp
