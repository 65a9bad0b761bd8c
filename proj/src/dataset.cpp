#include "forestkernel/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fk {

void Dataset::validate() const {
  if (n_rows == 0) throw std::invalid_argument("dataset: empty (n=0)");
  if (n_cols == 0) throw std::invalid_argument("dataset: no feature columns");
  if (features.size() != n_rows * n_cols)
    throw std::invalid_argument("dataset: feature storage does not match n_rows*n_cols");
  if (!responses.empty() && responses.size() != n_rows)
    throw std::invalid_argument("dataset: response length does not match row count");
  for (double v : features)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature value");
  for (double v : responses)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite response value");
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void write_csv(const Dataset& data, const std::string& path) {
  data.validate();
  if (data.responses.empty())
    throw std::invalid_argument("write_csv: dataset has no responses");
  std::string out;
  out.reserve(data.n_rows * data.n_cols * 12);
  for (std::size_t j = 0; j < data.n_cols; ++j) {
    out += "x" + std::to_string(j + 1) + ",";
  }
  out += "y\n";
  for (std::size_t i = 0; i < data.n_rows; ++i) {
    auto r = data.row(i);
    for (double v : r) {
      append_double(out, v);
      out += ',';
    }
    append_double(out, data.responses[i]);
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write_csv: write failed for " + path);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("read_csv: bad numeric value '" + s + "' on line " +
                             std::to_string(line_no));
  return v;
}

}  // namespace

Dataset read_csv(const std::string& path, const std::string& target) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("read_csv: empty file " + path);
  auto header = split_line(line);
  std::ptrdiff_t target_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == target) target_col = static_cast<std::ptrdiff_t>(j);

  Dataset data;
  data.n_cols = header.size() - (target_col >= 0 ? 1 : 0);
  if (data.n_cols == 0) throw std::runtime_error("read_csv: no feature columns in " + path);

  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("read_csv: line " + std::to_string(line_no) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(header.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = parse_double(cells[j], line_no);
      if (static_cast<std::ptrdiff_t>(j) == target_col)
        data.responses.push_back(v);
      else
        data.features.push_back(v);
    }
    ++data.n_rows;
  }
  if (data.n_rows == 0) throw std::runtime_error("read_csv: no data rows in " + path);
  data.informative_count = data.n_cols;
  data.validate();
  return data;
}

}  // namespace fk
