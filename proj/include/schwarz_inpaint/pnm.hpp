#pragma once

// Binary PNM image I/O (P5 greyscale, P6 colour, maxval 255) and P4 PBM
// masks (bit 1 = known pixel, MSB first, rows padded to byte boundaries).
// Writers emit a canonical header ("P5\n<w> <h>\n255\n"), so write-read-write
// round-trips are byte identical.  Parse failures throw std::runtime_error
// naming the file and the byte offset of the problem.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "schwarz_inpaint/image.hpp"

namespace schwarz_inpaint {

namespace pnm_detail {

[[noreturn]] inline void fail(const std::string& path, std::size_t offset,
                              const std::string& message) {
  std::ostringstream os;
  os << path << ": parse error at byte " << offset << ": " << message;
  throw std::runtime_error(os.str());
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw std::runtime_error("read failure on " + path);
  return std::move(buf).str();
}

struct Cursor {
  const std::string& buf;
  const std::string& path;
  std::size_t pos = 0;

  bool at_end() const { return pos >= buf.size(); }

  // Whitespace and '#' comments between header tokens.
  void skip_separators() {
    while (!at_end()) {
      const char c = buf[pos];
      if (c == '#') {
        while (!at_end() && buf[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
        ++pos;
      } else {
        break;
      }
    }
  }

  long parse_number(const char* what) {
    skip_separators();
    if (at_end() || buf[pos] < '0' || buf[pos] > '9') {
      fail(path, pos, std::string("expected ") + what);
    }
    long value = 0;
    while (!at_end() && buf[pos] >= '0' && buf[pos] <= '9') {
      value = value * 10 + (buf[pos] - '0');
      if (value > 1'000'000'000L) fail(path, pos, std::string(what) + " out of range");
      ++pos;
    }
    return value;
  }

  // Exactly one whitespace byte separates the header from the payload.
  void expect_payload_separator() {
    if (at_end() || !(buf[pos] == ' ' || buf[pos] == '\t' || buf[pos] == '\r' ||
                      buf[pos] == '\n')) {
      fail(path, pos, "expected single whitespace before payload");
    }
    ++pos;
  }
};

inline std::uint8_t quantise(double v) {
  const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.good()) throw std::runtime_error("write failure on " + path);
}

}  // namespace pnm_detail

// Reads a P5 (one channel) or P6 (three channels) file; values map to
// [0, 1] as byte / 255.
inline ImageBuffer read_pnm(const std::string& path) {
  using namespace pnm_detail;
  const std::string buf = slurp(path);
  Cursor cur{buf, path};
  if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6')) {
    fail(path, 0, "not a binary PGM/PPM file (expected P5 or P6)");
  }
  const int channels = buf[1] == '5' ? 1 : 3;
  cur.pos = 2;
  const long w = cur.parse_number("width");
  const long h = cur.parse_number("height");
  const long maxval = cur.parse_number("maxval");
  if (w < 1 || h < 1) fail(path, cur.pos, "image dimensions must be positive");
  if (maxval != 255) fail(path, cur.pos, "unsupported maxval (only 255 is accepted)");
  cur.expect_payload_separator();
  const std::size_t payload = static_cast<std::size_t>(w) * h * channels;
  if (buf.size() - cur.pos < payload) {
    fail(path, buf.size(), "truncated payload");
  }
  ImageBuffer image(static_cast<int>(w), static_cast<int>(h), channels);
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(buf.data() + cur.pos);
  for (int c = 0; c < channels; ++c) {
    auto dst = image.channel(c);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = bytes[i * channels + c] / 255.0;
    }
  }
  return image;
}

// Writes P5 for single-channel images, P6 for three channels.  Values are
// clamped to [0, 1] and rounded to bytes.
inline void write_pnm(const std::string& path, const ImageBuffer& image) {
  using namespace pnm_detail;
  detail::check_arg(image.channels == 1 || image.channels == 3,
                    "write_pnm: only 1- or 3-channel images are supported");
  std::string out;
  out += image.channels == 1 ? "P5\n" : "P6\n";
  out += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  const std::size_t payload = image.pixel_count() * image.channels;
  std::string bytes(payload, '\0');
  for (int c = 0; c < image.channels; ++c) {
    auto src = image.channel(c);
    for (std::size_t i = 0; i < src.size(); ++i) {
      bytes[i * image.channels + c] = static_cast<char>(quantise(src[i]));
    }
  }
  out += bytes;
  write_file(path, out);
}

// Reads a P4 bitmap as a mask; set bits mark known pixels.
inline InpaintingMask read_mask_pbm(const std::string& path) {
  using namespace pnm_detail;
  const std::string buf = slurp(path);
  Cursor cur{buf, path};
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '4') {
    fail(path, 0, "not a binary PBM file (expected P4)");
  }
  cur.pos = 2;
  const long w = cur.parse_number("width");
  const long h = cur.parse_number("height");
  if (w < 1 || h < 1) fail(path, cur.pos, "mask dimensions must be positive");
  cur.expect_payload_separator();
  const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
  if (buf.size() - cur.pos < row_bytes * h) {
    fail(path, buf.size(), "truncated payload");
  }
  InpaintingMask mask(static_cast<int>(w), static_cast<int>(h));
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(buf.data() + cur.pos);
  for (long y = 0; y < h; ++y) {
    const unsigned char* row = bytes + y * row_bytes;
    for (long x = 0; x < w; ++x) {
      mask.known[y * w + x] = (row[x / 8] >> (7 - x % 8)) & 1;
    }
  }
  return mask;
}

// Companion-file guard: the mask must match the image it belongs to.
inline InpaintingMask read_mask_pbm(const std::string& path, int expected_width,
                                    int expected_height) {
  InpaintingMask mask = read_mask_pbm(path);
  if (mask.width != expected_width || mask.height != expected_height) {
    std::ostringstream os;
    os << path << ": mask is " << mask.width << "x" << mask.height << " but the image is "
       << expected_width << "x" << expected_height;
    throw std::runtime_error(os.str());
  }
  return mask;
}

inline void write_mask_pbm(const std::string& path, const InpaintingMask& mask) {
  using namespace pnm_detail;
  std::string out = "P4\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n";
  const std::size_t row_bytes = (static_cast<std::size_t>(mask.width) + 7) / 8;
  std::string bytes(row_bytes * mask.height, '\0');
  for (int y = 0; y < mask.height; ++y) {
    char* row = bytes.data() + static_cast<std::size_t>(y) * row_bytes;
    for (int x = 0; x < mask.width; ++x) {
      if (mask.known[static_cast<std::size_t>(y) * mask.width + x]) {
        row[x / 8] |= static_cast<char>(0x80u >> (x % 8));
      }
    }
  }
  out += bytes;
  write_file(path, out);
}

}  // namespace schwarz_inpaint
