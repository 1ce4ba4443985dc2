#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fpindex {

inline constexpr double kCanonicalDpi = 500.0;

/// Row-major 8-bit pixel grid, rows = height.
using PixelArray =
    Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major real-valued image, rows = height.
using RealImage =
    Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GrayImage {
  PixelArray pixels;
  double resolution_dpi = kCanonicalDpi;

  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0,
            double dpi = kCanonicalDpi)
      : pixels(PixelArray::Constant(height, width, fill)), resolution_dpi(dpi) {}
  explicit GrayImage(PixelArray p, double dpi = kCanonicalDpi)
      : pixels(std::move(p)), resolution_dpi(dpi) {}

  int width() const { return static_cast<int>(pixels.cols()); }
  int height() const { return static_cast<int>(pixels.rows()); }
  std::uint8_t& at(int x, int y) { return pixels(y, x); }
  std::uint8_t at(int x, int y) const { return pixels(y, x); }

  RealImage to_real() const { return pixels.cast<double>(); }

  bool operator==(const GrayImage& o) const {
    return resolution_dpi == o.resolution_dpi && pixels.rows() == o.pixels.rows() &&
           pixels.cols() == o.pixels.cols() && (pixels == o.pixels).all();
  }
};

/// Signed, zero-centred output of the enhancement stage.
struct EnhancedImage {
  RealImage values;

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
  double at(int x, int y) const { return values(y, x); }
};

inline constexpr int kMinPipelineSide = 64;

// Throws a parameter error unless the image can enter the descriptor pipeline.
void check_pipeline_image(const GrayImage& img);

/// Bilinear sample at a real position; caller guarantees 0 <= x <= w-1, 0 <= y <= h-1.
inline double bilinear(const RealImage& img, double x, double y) {
  const auto x0 = static_cast<Eigen::Index>(x);
  const auto y0 = static_cast<Eigen::Index>(y);
  const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, img.cols() - 1);
  const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, img.rows() - 1);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double top = img(y0, x0) + fx * (img(y0, x1) - img(y0, x0));
  const double bottom = img(y1, x0) + fx * (img(y1, x1) - img(y1, x0));
  return top + fy * (bottom - top);
}

/// Resamples to 500 dpi with bilinear interpolation; identity when already 500 dpi.
GrayImage rescale_to_canonical(const GrayImage& img);

// Binary PGM ("P5", maxval 255). PGM carries no resolution, so the caller supplies it.
GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes,
                     double dpi = kCanonicalDpi);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path, double dpi = kCanonicalDpi);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes);

}  // namespace fpindex
