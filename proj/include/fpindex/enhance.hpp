#pragma once

#include <vector>

#include "fpindex/image.hpp"

namespace fpindex {

/// DOG band-pass + local mean/variance normalisation settings (pixels at 500 dpi).
struct EnhanceParams {
  double sigma_narrow = 1.0;
  double sigma_wide = 4.0;
  int window = 15;
  double eps = 1e-6;

  void validate() const;
};

/// Mirror an out-of-range index back into [0, n) without repeating the edge sample.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

/// Normalised 1-D Gaussian taps, radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with reflect padding.
RealImage gaussian_blur(const RealImage& img, double sigma);

RealImage dog_filter(const RealImage& img, double sigma_narrow, double sigma_wide);
EnhancedImage dog_filter(const GrayImage& img, double sigma_narrow, double sigma_wide);

/// (x - local mean) / max(local std, eps) over a window x window neighbourhood.
/// A window spanning the whole image in both directions uses global statistics.
EnhancedImage local_normalize(const EnhancedImage& img, int window, double eps);

/// Rescale to 500 dpi, DOG filter, then local normalisation.
EnhancedImage enhance(const GrayImage& img, const EnhanceParams& params = {});

}  // namespace fpindex
