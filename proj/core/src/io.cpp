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

#include "gpmotion/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <json.hpp>

#include "gpmotion/errors.hpp"

namespace gpmotion {

namespace {

std::ofstream open_binary(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  return out;
}

unsigned char quantize8(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(clamped * 255.0));
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_ppm(const std::string& path, const RenderOutput& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.color.size() !=
          static_cast<std::size_t>(image.width) * image.height) {
    throw ConfigError("malformed render output");
  }
  std::ofstream out = open_binary(path);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  for (const Vec3& c : image.color) {
    const unsigned char rgb[3] = {quantize8(c.x()), quantize8(c.y()),
                                  quantize8(c.z())};
    out.write(reinterpret_cast<const char*>(rgb), 3);
  }
  if (!out) throw ConfigError("write failed: " + path);
}

void write_pgm16(const std::string& path, const MatX& map) {
  if (map.rows() < 1 || map.cols() < 1) throw ConfigError("empty map");
  if ((map.array() < 0.0).any() || !map.allFinite()) {
    throw ConfigError("map values must be finite and non-negative");
  }
  const double max_value = map.maxCoeff();
  std::ofstream out = open_binary(path);
  out << "P5\n" << map.cols() << ' ' << map.rows() << "\n65535\n";
  for (Eigen::Index r = 0; r < map.rows(); ++r) {
    for (Eigen::Index c = 0; c < map.cols(); ++c) {
      const double normalized = max_value > 0.0 ? map(r, c) / max_value : 0.0;
      const auto sample =
          static_cast<std::uint16_t>(std::lround(normalized * 65535.0));
      const unsigned char bytes[2] = {
          static_cast<unsigned char>(sample >> 8),
          static_cast<unsigned char>(sample & 0xff)};
      out.write(reinterpret_cast<const char*>(bytes), 2);
    }
  }
  if (!out) throw ConfigError("write failed: " + path);

  nlohmann::ordered_json sidecar;
  sidecar["format"] = "pgm16";
  sidecar["max_value"] = max_value;
  write_text_file(path + ".json", sidecar.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_binary(path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : out_(open_binary(path)), num_columns_(header.size()) {
  if (header.empty()) throw ConfigError("csv needs at least one column");
  write_row(header);
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  if (fields.size() != num_columns_) {
    throw ConfigError("csv row width mismatch");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
  if (!out_) throw ConfigError("csv write failed");
}

void CsvWriter::write_row(const std::vector<double>& values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(format_double(v));
  write_row(fields);
}

}  // namespace gpmotion
