#include "csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ikd/error.hpp"

namespace ikd::cli {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kData, "cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kData, "cannot open '" + path.string() + "' for reading");
  return in;
}

[[noreturn]] void bad_line(const std::filesystem::path& path, std::size_t line,
                           const std::string& what) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << what;
  throw Error(ErrorKind::kData, os.str());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out = open_for_write(path);
  std::string line;
  for (Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw Error(ErrorKind::kData, "write to '" + path.string() + "' failed");
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    Index count = 0;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view field = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        bad_line(path, line_no, "cannot parse '" + std::string(field) + "' as a number");
      }
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      std::ostringstream os;
      os << "row has " << count << " fields, expected " << cols;
      bad_line(path, line_no, os.str());
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::kData, "'" + path.string() + "' contains no rows");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view field = trim(line);
    if (field.empty()) continue;
    int v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
      bad_line(path, line_no, "cannot parse '" + std::string(field) + "' as an integer label");
    }
    labels.push_back(v);
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::ofstream out = open_for_write(path);
  for (int v : labels) out << v << '\n';
  if (!out) throw Error(ErrorKind::kData, "write to '" + path.string() + "' failed");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_for_write(path);
  out << text;
  if (!out) throw Error(ErrorKind::kData, "write to '" + path.string() + "' failed");
}

}  // namespace ikd::cli
