#include "l2ot/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <vector>

#include "l2ot/errors.hpp"

namespace l2ot {

namespace {

// Split a CSV line into trimmed cells; empty line -> empty vector.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(',', start);
    if (end == std::string::npos) end = line.size();
    std::string cell = line.substr(start, end - start);
    const auto from = cell.find_first_not_of(" \t\r");
    const auto to = cell.find_last_not_of(" \t\r");
    cells.push_back(from == std::string::npos ? std::string() : cell.substr(from, to - from + 1));
    if (end == line.size()) break;
    start = end + 1;
  }
  if (cells.size() == 1 && cells[0].empty()) cells.clear();
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

// Parses a numeric CSV into rows; a non-numeric first line is skipped as a
// header. Throws ParseError with line numbers on ragged or malformed rows.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  bool header_allowed = true;
  std::size_t width = 0;

  while (std::getline(is, line)) {
    ++line_no;
    const auto cells = split_csv(line);
    if (cells.empty()) continue;

    std::vector<double> row(cells.size());
    bool ok = true;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_double(cells[c], row[c])) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      if (header_allowed) {  // header line
        header_allowed = false;
        continue;
      }
      throw ParseError("'" + path + "': non-numeric value", line_no);
    }
    header_allowed = false;
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw ParseError("'" + path + "': expected " + std::to_string(width) + " columns, got " +
                           std::to_string(row.size()),
                       line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("'" + path + "': no data rows");
  return rows;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

PointCloud read_cloud_csv(const std::string& path) {
  return PointCloud(to_matrix(read_numeric_csv(path)));
}

void write_cloud_csv(const std::string& path, const PointCloud& cloud) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < cloud.dim(); ++c) {
      if (c) os << ',';
      os << fmt17(cloud.points(i, c));
    }
    os << '\n';
  }
}

CorrespondenceSet read_correspondences_csv(const std::string& path) {
  const Eigen::MatrixXd m = to_matrix(read_numeric_csv(path));
  if (m.cols() % 2 != 0) {
    throw ParseError("'" + path + "': correspondence file needs an even column count " +
                     "(target then source)");
  }
  const Eigen::Index d = m.cols() / 2;
  return CorrespondenceSet(m.leftCols(d), m.rightCols(d));
}

void write_correspondences_csv(const std::string& path, const CorrespondenceSet& pairs) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < pairs.size(); ++i) {
    for (int c = 0; c < pairs.dim(); ++c) {
      if (c) os << ',';
      os << fmt17(pairs.target(i, c));
    }
    for (int c = 0; c < pairs.dim(); ++c) os << ',' << fmt17(pairs.source(i, c));
    os << '\n';
  }
}

std::string fnv1a_file_hex(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open '" + path + "' for hashing");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    const std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace l2ot
