#include "fpindex/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "fpindex/error.hpp"

namespace fpindex {

void check_pipeline_image(const GrayImage& img) {
  require(img.width() >= kMinPipelineSide && img.height() >= kMinPipelineSide,
          ErrorKind::parameter,
          "image must be at least 64x64 pixels, got " +
              std::to_string(img.width()) + "x" + std::to_string(img.height()));
  require(img.resolution_dpi > 0.0 && std::isfinite(img.resolution_dpi),
          ErrorKind::parameter, "image resolution must be positive");
}

GrayImage rescale_to_canonical(const GrayImage& img) {
  require(img.resolution_dpi > 0.0 && std::isfinite(img.resolution_dpi),
          ErrorKind::parameter, "image resolution must be positive");
  if (img.resolution_dpi == kCanonicalDpi) return img;

  const double scale = kCanonicalDpi / img.resolution_dpi;
  const int out_w = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
  const int out_h = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  const RealImage src = img.to_real();
  GrayImage out(out_w, out_h, 0, kCanonicalDpi);
  const double max_x = img.width() - 1;
  const double max_y = img.height() - 1;
  for (int y = 0; y < out_h; ++y) {
    const double sy = std::clamp((y + 0.5) / scale - 0.5, 0.0, max_y);
    for (int x = 0; x < out_w; ++x) {
      const double sx = std::clamp((x + 0.5) / scale - 0.5, 0.0, max_x);
      const double v = bilinear(src, sx, sy);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

namespace {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  long next_number() {
    skip_space_and_comments();
    require(pos_ < bytes_.size() && std::isdigit(bytes_[pos_]), ErrorKind::format,
            "PGM header: expected a number at byte " + std::to_string(pos_));
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      require(value < 1'000'000, ErrorKind::format, "PGM header: number too large");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    require(pos_ < bytes_.size() && std::isspace(bytes_[pos_]), ErrorKind::format,
            "PGM header: missing separator before raster");
    return pos_ + 1;
  }

  std::size_t pos_ = 2;

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
};

}  // namespace

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes, double dpi) {
  require(bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5', ErrorKind::format,
          "not a binary PGM (expected magic P5)");
  PgmHeaderReader reader(bytes);
  const long width = reader.next_number();
  const long height = reader.next_number();
  const long maxval = reader.next_number();
  require(width > 0 && height > 0, ErrorKind::format, "PGM has zero size");
  require(maxval == 255, ErrorKind::format,
          "PGM maxval must be 255, got " + std::to_string(maxval));
  const std::size_t offset = reader.raster_offset();
  const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  require(bytes.size() >= offset + count, ErrorKind::format,
          "PGM raster truncated: need " + std::to_string(count) + " bytes, have " +
              std::to_string(bytes.size() - std::min(bytes.size(), offset)));
  GrayImage img(static_cast<int>(width), static_cast<int>(height), 0, dpi);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(offset), count,
              img.pixels.data());
  return img;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.data(), img.pixels.data() + img.pixels.size());
  return out;
}

GrayImage read_pgm(const std::filesystem::path& path, double dpi) {
  try {
    return decode_pgm(read_file_bytes(path), dpi);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  write_file_bytes(path, encode_pgm(img));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorKind::io, "read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes) {
  // Write-then-rename so readers never observe a partial file.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::io, "cannot move " + tmp.string() + " to " + path.string() +
                                  ": " + ec.message());
}

}  // namespace fpindex
