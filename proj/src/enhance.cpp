#include "fpindex/enhance.hpp"

#include <cmath>

#include "fpindex/error.hpp"

namespace fpindex {

void EnhanceParams::validate() const {
  require(sigma_narrow > 0.0 && sigma_narrow < sigma_wide && std::isfinite(sigma_wide),
          ErrorKind::parameter, "DOG sigmas must satisfy 0 < sigma_narrow < sigma_wide");
  require(window >= 3 && window % 2 == 1, ErrorKind::parameter,
          "normalisation window must be odd and >= 3");
  require(eps > 0.0, ErrorKind::parameter, "normalisation eps must be positive");
}

std::vector<double> gaussian_kernel(double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::parameter,
          "Gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += taps[i + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

namespace {

// Separable correlation with reflect-101 padding. Horizontal taps run over a
// padded copy of each row; vertical taps accumulate whole rows.
RealImage separable_filter(const RealImage& img, const std::vector<double>& taps) {
  const int radius = static_cast<int>(taps.size() / 2);
  const int w = static_cast<int>(img.cols());
  const int h = static_cast<int>(img.rows());

  RealImage rows(h, w);
  std::vector<double> line(w + 2 * radius);
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < w + 2 * radius; ++i) line[i] = img(y, reflect_index(i - radius, w));
    for (int x = 0; x < w; ++x) {
      const double* src = line.data() + x;
      double acc = 0.0;
      for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * src[k];
      rows(y, x) = acc;
    }
  }
  RealImage out = RealImage::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int k = -radius; k <= radius; ++k)
      out.row(y) += taps[k + radius] * rows.row(reflect_index(y + k, h));
  return out;
}

RealImage box_sum(const RealImage& img, int window) {
  return separable_filter(img, std::vector<double>(window, 1.0));
}

}  // namespace

RealImage gaussian_blur(const RealImage& img, double sigma) {
  return separable_filter(img, gaussian_kernel(sigma));
}

RealImage dog_filter(const RealImage& img, double sigma_narrow, double sigma_wide) {
  require(sigma_narrow > 0.0 && sigma_narrow < sigma_wide, ErrorKind::parameter,
          "DOG sigmas must satisfy 0 < sigma_narrow < sigma_wide");
  return gaussian_blur(img, sigma_narrow) - gaussian_blur(img, sigma_wide);
}

EnhancedImage dog_filter(const GrayImage& img, double sigma_narrow, double sigma_wide) {
  return {dog_filter(img.to_real(), sigma_narrow, sigma_wide)};
}

EnhancedImage local_normalize(const EnhancedImage& img, int window, double eps) {
  require(window >= 3 && window % 2 == 1, ErrorKind::parameter,
          "normalisation window must be odd and >= 3");
  require(eps > 0.0, ErrorKind::parameter, "normalisation eps must be positive");
  const RealImage& in = img.values;

  if (window >= in.cols() && window >= in.rows()) {
    const double mean = in.mean();
    const double var = (in - mean).square().mean();
    return {(in - mean) / std::max(std::sqrt(var), eps)};
  }

  const double area = static_cast<double>(window) * window;
  const RealImage mean = box_sum(in, window) / area;
  const RealImage mean_sq = box_sum(in.square(), window) / area;
  const RealImage sd = (mean_sq - mean.square()).max(0.0).sqrt();
  return {(in - mean) / sd.max(eps)};
}

EnhancedImage enhance(const GrayImage& img, const EnhanceParams& params) {
  params.validate();
  const GrayImage canonical = rescale_to_canonical(img);
  return local_normalize(dog_filter(canonical, params.sigma_narrow, params.sigma_wide),
                         params.window, params.eps);
}

}  // namespace fpindex
