#include "maga/netpbm.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "file_io.hpp"
#include "maga/errors.hpp"

namespace maga {

namespace {

struct Header {
  std::size_t width = 0, height = 0;
  std::uint32_t maxval = 0;
  std::size_t payload_offset = 0;
};

class HeaderParser {
 public:
  explicit HeaderParser(const std::vector<std::uint8_t>& bytes) : b_(bytes) {}

  Header parse(const char* magic, std::uint32_t expected_maxval) {
    if (b_.size() < 2 || b_[0] != static_cast<std::uint8_t>(magic[0]) ||
        b_[1] != static_cast<std::uint8_t>(magic[1])) {
      throw FormatError(std::string("expected magic ") + magic, 0);
    }
    pos_ = 2;
    Header h;
    h.width = token("width");
    h.height = token("height");
    const std::size_t maxval = token("maxval");
    const std::size_t maxval_at = last_token_at_;
    if (maxval != expected_maxval) {
      throw FormatError("maxval " + std::to_string(maxval) + " does not match expected " +
                            std::to_string(expected_maxval),
                        maxval_at);
    }
    h.maxval = static_cast<std::uint32_t>(maxval);
    if (pos_ >= b_.size() || !is_space(b_[pos_])) throw FormatError("expected whitespace after maxval", pos_);
    h.payload_offset = pos_ + 1;
    if (h.width == 0 || h.height == 0) throw FormatError("image extents must be positive", maxval_at);
    return h;
  }

 private:
  static bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

  std::size_t skip_space() {
    for (;;) {
      while (pos_ < b_.size() && is_space(b_[pos_])) ++pos_;
      if (pos_ < b_.size() && b_[pos_] == '#') {
        if (seen_comment_) throw FormatError("more than one header comment line", pos_);
        seen_comment_ = true;
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
        continue;
      }
      return pos_;
    }
  }

  std::size_t token(const char* what) {
    const std::size_t start = pos_;
    skip_space();
    if (pos_ == start) throw FormatError(std::string("expected whitespace before ") + what, pos_);
    last_token_at_ = pos_;
    std::size_t value = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      value = value * 10 + (b_[pos_] - '0');
      if (value > 0xFFFFFF) throw FormatError(std::string(what) + " is too large", last_token_at_);
      ++pos_;
    }
    if (pos_ == last_token_at_) throw FormatError(std::string("expected ") + what, last_token_at_);
    return value;
  }

  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
  std::size_t last_token_at_ = 0;
  bool seen_comment_ = false;
};

void check_channels(const Tensor& t, std::size_t channels, const char* what) {
  if (t.rank() != 3 || t.dim(2) != channels) {
    throw DimensionError(std::string(what) + " must be h x w x " + std::to_string(channels) + ", got " +
                         shape_string(t.shape()));
  }
}

std::vector<std::uint8_t> header_bytes(const char* magic, std::size_t w, std::size_t h, int maxval) {
  const std::string s = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n" +
                        std::to_string(maxval) + "\n";
  return {s.begin(), s.end()};
}

void check_payload(const std::vector<std::uint8_t>& bytes, const Header& h, std::size_t expected) {
  const std::size_t available = bytes.size() >= h.payload_offset ? bytes.size() - h.payload_offset : 0;
  if (available < expected) throw FormatError("truncated payload", bytes.size());
  if (available > expected) throw FormatError("unexpected bytes after payload", h.payload_offset + expected);
}

std::uint16_t depth_to_mm(double metres) {
  if (!(metres >= 0.0)) throw ArgumentError("depth values must be non-negative and finite");
  const double mm = std::round(metres * 1000.0);
  if (mm > 65535.0) throw ArgumentError("depth " + std::to_string(metres) + " m exceeds the 16-bit range");
  return static_cast<std::uint16_t>(mm);
}

std::uint8_t color_to_byte(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw ArgumentError("colour values must lie in [0, 1]");
  return static_cast<std::uint8_t>(std::round(c * 255.0));
}

}  // namespace

std::vector<std::uint8_t> encode_depth_pgm(const Tensor& depth) {
  check_channels(depth, 1, "depth");
  auto out = header_bytes("P5", depth.dim(1), depth.dim(0), 65535);
  out.reserve(out.size() + depth.size() * 2);
  for (double v : depth.values()) {
    const std::uint16_t mm = depth_to_mm(v);
    out.push_back(static_cast<std::uint8_t>(mm >> 8));
    out.push_back(static_cast<std::uint8_t>(mm & 0xFF));
  }
  return out;
}

Tensor decode_depth_pgm(const std::vector<std::uint8_t>& bytes) {
  const Header h = HeaderParser(bytes).parse("P5", 65535);
  const std::size_t n = h.width * h.height;
  check_payload(bytes, h, n * 2);
  std::vector<double> v(n);
  const std::uint8_t* p = bytes.data() + h.payload_offset;
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned mm = (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1];
    v[i] = static_cast<double>(mm) / 1000.0;
  }
  return Tensor({h.height, h.width, 1}, std::move(v));
}

std::vector<std::uint8_t> encode_color_ppm(const Tensor& color) {
  check_channels(color, 3, "colour");
  auto out = header_bytes("P6", color.dim(1), color.dim(0), 255);
  out.reserve(out.size() + color.size());
  for (double v : color.values()) out.push_back(color_to_byte(v));
  return out;
}

Tensor decode_color_ppm(const std::vector<std::uint8_t>& bytes) {
  const Header h = HeaderParser(bytes).parse("P6", 255);
  const std::size_t n = h.width * h.height * 3;
  check_payload(bytes, h, n);
  std::vector<double> v(n);
  const std::uint8_t* p = bytes.data() + h.payload_offset;
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(p[i]) / 255.0;
  return Tensor({h.height, h.width, 3}, std::move(v));
}

void write_depth_pgm(const std::string& path, const Tensor& depth) {
  detail::write_file(path, encode_depth_pgm(depth));
}

Tensor read_depth_pgm(const std::string& path) { return decode_depth_pgm(detail::read_file(path)); }

void write_color_ppm(const std::string& path, const Tensor& color) {
  detail::write_file(path, encode_color_ppm(color));
}

Tensor read_color_ppm(const std::string& path) { return decode_color_ppm(detail::read_file(path)); }

Tensor quantize_depth(const Tensor& depth) { return decode_depth_pgm(encode_depth_pgm(depth)); }

Tensor quantize_color(const Tensor& color) { return decode_color_ppm(encode_color_ppm(color)); }

}  // namespace maga
