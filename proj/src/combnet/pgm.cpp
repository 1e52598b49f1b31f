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

#include "combnet/pgm.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "combnet/error.hpp"

namespace combnet {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(const std::string& s, std::size_t& pos) {
  for (;;) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  require(pos > start, ErrorCode::Format, "pgm: truncated header");
  return s.substr(start, pos - start);
}

int header_int(const std::string& s, std::size_t& pos, const char* what) {
  const std::string tok = header_token(s, pos);
  for (char c : tok)
    require(std::isdigit(static_cast<unsigned char>(c)), ErrorCode::Format,
            std::string("pgm: bad ") + what);
  require(tok.size() <= 9, ErrorCode::Format, std::string("pgm: ") + what + " too large");
  return std::stoi(tok);
}

}  // namespace

Image16 parse_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  require(header_token(bytes, pos) == "P5", ErrorCode::Format, "pgm: expected P5 magic");
  const int w = header_int(bytes, pos, "width");
  const int h = header_int(bytes, pos, "height");
  const int maxval = header_int(bytes, pos, "maxval");
  require(w >= 1 && h >= 1, ErrorCode::Format, "pgm: empty image");
  require(maxval >= 1 && maxval <= 65535, ErrorCode::Format, "pgm: maxval out of range");
  require(pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos])),
          ErrorCode::Format, "pgm: missing raster separator");
  ++pos;
  const int bpp = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(w) * h * bpp;
  require(bytes.size() - pos >= need, ErrorCode::Format, "pgm: truncated raster");
  Image16 img(h, w);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = bpp == 2 ? static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1])
                             : static_cast<std::uint16_t>(p[i]);
  }
  return img;
}

Image16 read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::MissingInput, "cannot open image '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_pgm(ss.str());
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string encode_pgm(const Image16& img, int maxval) {
  require(maxval >= 1 && maxval <= 65535, ErrorCode::InvalidArgument, "pgm: bad maxval");
  require(img.h >= 1 && img.w >= 1 &&
              img.pixels.size() == static_cast<std::size_t>(img.h) * img.w,
          ErrorCode::InvalidArgument, "pgm: image dims inconsistent");
  std::string out = "P5\n" + std::to_string(img.w) + " " + std::to_string(img.h) + "\n" +
                    std::to_string(maxval) + "\n";
  const bool wide = maxval > 255;
  for (std::uint16_t v : img.pixels) {
    require(v <= maxval, ErrorCode::InvalidArgument, "pgm: sample exceeds maxval");
    if (wide) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  return out;
}

void write_pgm(const Image16& img, const std::string& path, int maxval) {
  const std::string bytes = encode_pgm(img, maxval);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot write '" + path + "'");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace combnet
