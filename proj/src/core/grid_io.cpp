/*
 * Copyright 2026 The RML Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "core/grid_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/lang.hpp"

namespace rml::grid_io {

namespace {

// std::stod raises out_of_range on subnormal underflow; strtod rounds.
double parse_double(const std::string& text) {
  char* end = nullptr;
  double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str()) fail(ErrorCode::Io, "bad number '" + text + "'");
  return value;
}

}  // namespace

std::string to_csv(const geo::GridSpec& grid, std::span<const double> values,
                   const std::string& name, double timestamp) {
  std::ostringstream out;
  out << "# " << name << " cols=" << grid.cols << " rows=" << grid.rows
      << " origin_lat=" << lang::format_double(grid.origin_lat)
      << " origin_lon=" << lang::format_double(grid.origin_lon)
      << " width_m=" << lang::format_double(grid.width_m)
      << " height_m=" << lang::format_double(grid.height_m)
      << " t=" << lang::format_double(timestamp) << "\n";
  for (int row = 0; row < grid.rows; ++row) {
    for (int col = 0; col < grid.cols; ++col) {
      if (col) out << ",";
      out << lang::format_double(values[size_t(row) * grid.cols + col]);
    }
    out << "\n";
  }
  return out.str();
}

void write_csv(const std::string& path, const geo::GridSpec& grid,
               std::span<const double> values, const std::string& name,
               double timestamp) {
  write_text_file(path, to_csv(grid, values, name, timestamp));
}

CsvGrid parse_csv(const std::string& text) {
  CsvGrid out;
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || header.empty() || header[0] != '#') {
    fail(ErrorCode::Io, "missing grid CSV header");
  }
  std::istringstream hs(header.substr(1));
  hs >> out.name;
  std::string kv;
  while (hs >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    std::string key = kv.substr(0, eq);
    double value = parse_double(kv.substr(eq + 1));
    if (key == "cols") out.grid.cols = int(value);
    else if (key == "rows") out.grid.rows = int(value);
    else if (key == "origin_lat") out.grid.origin_lat = value;
    else if (key == "origin_lon") out.grid.origin_lon = value;
    else if (key == "width_m") out.grid.width_m = value;
    else if (key == "height_m") out.grid.height_m = value;
    else if (key == "t") out.timestamp = value;
  }
  out.values.reserve(out.grid.cells());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string itemtext;
    while (std::getline(ls, itemtext, ',')) {
      out.values.push_back(parse_double(itemtext));
    }
  }
  if (out.values.size() != out.grid.cells()) {
    fail(ErrorCode::Io, "grid CSV cell count mismatch");
  }
  return out;
}

CsvGrid read_csv(const std::string& path) {
  return parse_csv(read_text_file(path));
}

void write_pgm(const std::string& path, const geo::GridSpec& grid,
               std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) fail(ErrorCode::Io, "cannot write " + path);
  out << "P5\n" << grid.cols << " " << grid.rows << "\n65535\n";
  // Top row of the image is the northernmost grid row.
  for (int row = grid.rows - 1; row >= 0; --row) {
    for (int col = 0; col < grid.cols; ++col) {
      double p = std::clamp(values[size_t(row) * grid.cols + col], 0.0, 1.0);
      auto v = uint16_t(std::lround(p * 65535.0));
      out.put(char(v >> 8));
      out.put(char(v & 0xff));
    }
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) fail(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out.good()) fail(ErrorCode::Io, "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace rml::grid_io
