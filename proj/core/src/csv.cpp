#include "trustfs/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "trustfs/error.hpp"

namespace trustfs::csv {

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw Error(ErrorKind::kInvalidArgument, "cannot format value");
  return std::string(buffer, ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

double parse_double(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw Error(ErrorKind::kParse, "non-numeric cell '" + std::string(cell) + "'");
  }
  return value;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = view.find(',', start);
      cells.emplace_back(trim(view.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

Matrix read_matrix(const std::filesystem::path& path) {
  auto rows = read_rows(path);
  if (rows.empty()) return Matrix(0, 0);
  const auto cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorKind::kShapeMismatch,
                  path.filename().string() + ": ragged row " + std::to_string(i + 1));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      try {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(rows[i][j]);
      } catch (const Error& e) {
        throw Error(ErrorKind::kParse, path.filename().string() + ": " + e.what());
      }
    }
  }
  return m;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_text(path, out);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace trustfs::csv
