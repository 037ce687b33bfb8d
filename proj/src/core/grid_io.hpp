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

// Grid snapshot serialization: lossless CSV and 16-bit PGM for viewing.

#ifndef RML_CORE_GRID_IO_HPP
#define RML_CORE_GRID_IO_HPP

#include <span>
#include <string>
#include <vector>

#include "core/geo.hpp"

namespace rml::grid_io {

/// Row-major CSV with a '#' header carrying the grid spec; doubles are
/// written with round-trip precision so files parse back losslessly.
std::string to_csv(const geo::GridSpec& grid, std::span<const double> values,
                   const std::string& name, double timestamp);
void write_csv(const std::string& path, const geo::GridSpec& grid,
               std::span<const double> values, const std::string& name,
               double timestamp);

struct CsvGrid {
  geo::GridSpec grid;
  std::string name;
  double timestamp = 0.0;
  std::vector<double> values;
};

CsvGrid read_csv(const std::string& path);
CsvGrid parse_csv(const std::string& text);

/// Binary 16-bit PGM; value = round(p * 65535) with p clamped to [0, 1].
void write_pgm(const std::string& path, const geo::GridSpec& grid,
               std::span<const double> values);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace rml::grid_io

#endif  // RML_CORE_GRID_IO_HPP
