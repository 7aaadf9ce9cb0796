#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "sftrack/error.hpp"
#include "sftrack/image.hpp"

namespace sftrack {

namespace detail {

class PpmHeaderReader {
 public:
  PpmHeaderReader(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_])))
      throw ParseError(source_, 0, std::string("PPM header: expected ") + what);
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000) throw ParseError(source_, 0, std::string("PPM header: ") + what + " too large");
      ++pos_;
    }
    return v;
  }

  std::size_t& pos() { return pos_; }

 private:
  std::string_view bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Binary P6 with maxval 255. Header tokens may be separated by whitespace and
/// `#` comments; exactly one whitespace byte precedes the raster.
inline RawImage parse_ppm(std::string_view bytes, const std::string& source = {}) {
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw ParseError(source, 0, "not a PPM file (missing magic)");
  if (bytes[1] == '3') throw InputError(source + ": unsupported PPM variant P3 (only binary P6)");
  if (bytes[1] != '6') throw InputError(source + ": unsupported PNM variant P" + std::string(1, bytes[1]));
  detail::PpmHeaderReader r(bytes, source);
  r.pos() = 2;
  const long w = r.read_uint("width");
  const long h = r.read_uint("height");
  const long maxval = r.read_uint("maxval");
  if (w <= 0 || h <= 0) throw ParseError(source, 0, "PPM header: zero image dimension");
  if (maxval != 255) throw InputError(source + ": unsupported PPM maxval " + std::to_string(maxval));
  auto& pos = r.pos();
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw ParseError(source, 0, "PPM header: missing whitespace before raster");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() - pos < need)
    throw ParseError(source, 0, "PPM raster truncated: expected " + std::to_string(need) + " bytes, found " +
                                    std::to_string(bytes.size() - pos));
  RawImage img(static_cast<int>(w), static_cast<int>(h));
  std::copy(bytes.begin() + pos, bytes.begin() + pos + need, reinterpret_cast<char*>(img.data.data()));
  return img;
}

inline std::string read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline RawImage read_ppm(const std::string& path) { return parse_ppm(read_binary_file(path), path); }

inline std::string encode_ppm(const RawImage& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  return out;
}

inline void write_ppm(const std::string& path, const RawImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  const auto bytes = encode_ppm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace sftrack
