/*
 * Copyright 2026 The gpmotion Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "gpmotion/splat.hpp"
#include "gpmotion/types.hpp"

namespace gpmotion {

// Shortest decimal form that parses back to the identical double. Locale
// independent; infinities and NaN come out as "inf" / "-inf" / "nan".
std::string format_double(double value);

// Binary PPM (P6), 8 bits per channel. Colors are clamped to [0, 1]; row 0 of
// the render is the top raster row.
void write_ppm(const std::string& path, const RenderOutput& image);

// Binary PGM (P5) with 16-bit samples, most significant byte first. The map
// is normalized by its maximum value, which is recorded in a sidecar JSON at
// path + ".json" so absolute values stay recoverable. Negative entries are
// rejected.
void write_pgm16(const std::string& path, const MatX& map);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Quotes a field when it contains a comma, quote, or line break.
std::string csv_field(const std::string& raw);

// Comma-separated rows terminated by CRLF. The header row is written on
// construction.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void write_row(const std::vector<std::string>& fields);
  void write_row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t num_columns_ = 0;
};

}  // namespace gpmotion
