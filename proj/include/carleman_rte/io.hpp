#pragma once

#include <carleman_rte/errors.hpp>

#include <array>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace crte {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

/// Comma-separated writer with a header row and LF line endings.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open '" + path.string() + "' for writing");
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ << ',';
      out_ << cells[k];
    }
    out_ << '\n';
  }

  template <typename... Ts>
  void values(const Ts&... vs) {
    std::vector<std::string> cells;
    (cells.push_back(cell(vs)), ...);
    row(cells);
  }

  const std::filesystem::path& path() const noexcept { return path_; }

private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(unsigned v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(unsigned long long v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::filesystem::path path_;
  std::ofstream out_;
};

/// Binary P5 graymap with maxval 255; `pixels` is row-major, row 0 on top.
inline void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
                      const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != width * height) throw Error("pgm pixel count does not match its size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

/// Monochrome image; row 0 is the top row.
struct Bitmap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> inside;

  bool operator()(std::size_t row, std::size_t col) const { return inside[row * width + col] != 0; }
};

namespace detail {

class PnmReader {
public:
  explicit PnmReader(std::string data) : data_(std::move(data)) {}

  /// Next whitespace-delimited header token, skipping comments.
  std::string token() {
    skip_space();
    std::string t;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_])) && data_[pos_] != '#')
      t += data_[pos_++];
    if (t.empty()) throw DataError("mask file: unexpected end of header");
    return t;
  }

  unsigned long number() {
    const auto t = token();
    unsigned long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) throw DataError("mask file: bad number '" + t + "'");
    return v;
  }

  /// Plain PBM pixels may be written without separating whitespace.
  int bit() {
    skip_space();
    if (pos_ >= data_.size()) throw DataError("mask file: truncated pixel data");
    const char c = data_[pos_++];
    if (c != '0' && c != '1') throw DataError(std::string("mask file: bad pixel '") + c + "'");
    return c - '0';
  }

  /// Raw bytes follow exactly one whitespace character after the header.
  std::string_view raw(std::size_t n) {
    ++pos_;
    if (pos_ + n > data_.size()) throw DataError("mask file: truncated pixel data");
    const auto v = std::string_view(data_).substr(pos_, n);
    pos_ += n;
    return v;
  }

private:
  void skip_space() {
    while (pos_ < data_.size()) {
      if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string data_;
  std::size_t pos_ = 0;
};

} // namespace detail

/// Parses a PBM (P1/P4) or PGM (P2/P5) mask. For bitmaps 1 (black) is
/// inside; for graymaps values at or above half of maxval are inside.
inline Bitmap parse_mask(std::string data) {
  detail::PnmReader r(std::move(data));
  const auto magic = r.token();
  if (magic != "P1" && magic != "P4" && magic != "P2" && magic != "P5")
    throw DataError("mask file: unsupported format '" + magic + "'");
  Bitmap bm;
  bm.width = r.number();
  bm.height = r.number();
  if (bm.width == 0 || bm.height == 0 || bm.width > 1u << 14 || bm.height > 1u << 14)
    throw DataError("mask file: bad dimensions");
  const std::size_t n = bm.width * bm.height;
  bm.inside.resize(n);
  if (magic == "P1") {
    for (std::size_t k = 0; k < n; ++k) bm.inside[k] = static_cast<std::uint8_t>(r.bit());
  } else if (magic == "P4") {
    const std::size_t stride = (bm.width + 7) / 8;
    const auto bytes = r.raw(stride * bm.height);
    for (std::size_t row = 0; row < bm.height; ++row)
      for (std::size_t col = 0; col < bm.width; ++col) {
        const auto byte = static_cast<unsigned char>(bytes[row * stride + col / 8]);
        bm.inside[row * bm.width + col] = (byte >> (7 - col % 8)) & 1u;
      }
  } else {
    const auto maxval = r.number();
    if (maxval == 0 || maxval > 65535) throw DataError("mask file: bad maxval");
    auto inside = [&](unsigned long v) {
      if (v > maxval) throw DataError("mask file: pixel exceeds maxval");
      return static_cast<std::uint8_t>(2 * v >= maxval);
    };
    if (magic == "P2") {
      for (std::size_t k = 0; k < n; ++k) bm.inside[k] = inside(r.number());
    } else {
      const std::size_t bpp = maxval < 256 ? 1 : 2;
      const auto bytes = r.raw(n * bpp);
      for (std::size_t k = 0; k < n; ++k) {
        unsigned long v = static_cast<unsigned char>(bytes[k * bpp]);
        if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(bytes[k * bpp + 1]);
        bm.inside[k] = inside(v);
      }
    }
  }
  return bm;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline Bitmap read_mask(const std::filesystem::path& path) { return parse_mask(read_file(path)); }

/// 64-bit FNV-1a hash of a byte string.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

inline std::string file_checksum(const std::filesystem::path& path) { return hex64(fnv1a64(read_file(path))); }

} // namespace crte
