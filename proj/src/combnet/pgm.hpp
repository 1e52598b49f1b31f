/*
 * Copyright 2026 The CombNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace combnet {

// Single-channel 16-bit image, row-major.
struct Image16 {
  int h = 0;
  int w = 0;
  std::vector<std::uint16_t> pixels;

  Image16() = default;
  Image16(int height, int width, std::uint16_t fill = 0)
      : h(height), w(width), pixels(static_cast<std::size_t>(height) * width, fill) {}

  std::uint16_t at(int y, int x) const noexcept {
    return pixels[static_cast<std::size_t>(y) * w + x];
  }
  std::uint16_t& at(int y, int x) noexcept { return pixels[static_cast<std::size_t>(y) * w + x]; }
  bool empty() const noexcept { return pixels.empty(); }
  friend bool operator==(const Image16&, const Image16&) = default;
};

// Binary P5. maxval up to 65535; two-byte samples are big-endian as the
// format requires. Errors: MissingInput when the file cannot be opened,
// Format for anything malformed.
Image16 read_pgm(const std::string& path);
Image16 parse_pgm(const std::string& bytes);
void write_pgm(const Image16& img, const std::string& path, int maxval = 65535);
std::string encode_pgm(const Image16& img, int maxval = 65535);

}  // namespace combnet
