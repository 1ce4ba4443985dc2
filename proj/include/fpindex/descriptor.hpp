#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fpindex/enhance.hpp"
#include "fpindex/error.hpp"
#include "fpindex/geometry.hpp"
#include "fpindex/image.hpp"

namespace fpindex {

inline constexpr int kSamplingPoints = 9;
inline constexpr int kFrequencies = 5;
inline constexpr int kOrientations = 8;
inline constexpr int kGaborFeatureDim = kSamplingPoints * kFrequencies * kOrientations;
inline constexpr int kPcaDim = 30;
inline constexpr int kDescriptorDim = 25;

/// Gabor filter bank evaluated at the nine sampling points of a minutia.
///
/// Kernel for frequency f and orientation phi, at offset (u, v) from the
/// sampling point: exp(-(u^2 + v^2) / (2 s^2)) * exp(i 2 pi f (u cos phi + v sin phi))
/// with s = bandwidth / f, truncated at radius ceil(support * s) and with the
/// envelope normalised to unit sum. Orientations are phi_l = theta + l pi / 8.
struct GaborBankParams {
  double ring_radius = 25.0;
  std::array<double, kFrequencies> frequencies{1.0 / 6, 1.0 / 8, 1.0 / 10, 1.0 / 12,
                                               1.0 / 14};
  double bandwidth = 0.56;
  double support = 3.0;

  void validate() const;
  double envelope_sigma(int freq) const { return bandwidth / frequencies[freq]; }
  int kernel_radius(int freq) const;
  int max_kernel_radius() const;
};

/// Settings for turning an image + minutiae into descriptors.
struct FeatureParams {
  EnhanceParams enhance;
  GaborBankParams gabor;

  void validate() const {
    enhance.validate();
    gabor.validate();
  }
};

/// 360 Gabor moduli, index = point * 40 + freq * 8 + orientation.
using GaborFeature = Eigen::VectorXd;
/// 25-D projected descriptor.
using MinutiaDescriptor = Eigen::VectorXd;

inline int gabor_index(int point, int freq, int orient) {
  return point * kFrequencies * kOrientations + freq * kOrientations + orient;
}

/// The trained 360 x 25 map; descriptors are (feature - mean)^T * matrix.
struct DescriptorTransform {
  enum class Provenance { trained, loaded };

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(kGaborFeatureDim);
  Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(kGaborFeatureDim, kDescriptorDim);
  Provenance provenance = Provenance::trained;
  std::uint32_t version = 1;

  void validate() const;
};

/// Centre point followed by the ring at theta + k pi/4, k = 0..7.
std::array<Eigen::Vector2d, kSamplingPoints> sampling_points(const Minutia& m,
                                                             double radius);

/// Complex response of a single kernel at a (possibly off-grid) point.
std::complex<double> gabor_response(const RealImage& img, const Eigen::Vector2d& point,
                                    int freq, double orientation,
                                    const GaborBankParams& bank);

/// Throws OutOfBoundsError carrying the first sampling point whose support leaves the image.
GaborFeature gabor_feature(const EnhancedImage& img, const Minutia& m,
                           const GaborBankParams& bank);

template <typename Derived>
MinutiaDescriptor project(const Eigen::MatrixBase<Derived>& feature,
                          const DescriptorTransform& t) {
  require(feature.size() == t.matrix.rows() && t.mean.size() == t.matrix.rows(),
          ErrorKind::parameter,
          "feature dimension " + std::to_string(feature.size()) +
              " does not match transform rows " + std::to_string(t.matrix.rows()));
  return t.matrix.transpose() * (feature.derived() - t.mean);
}

struct SkippedMinutia {
  std::size_t minutia_index;
  int point_index;
};

struct DescribedMinutiae {
  std::vector<Minutia> minutiae;
  std::vector<MinutiaDescriptor> descriptors;
  std::vector<SkippedMinutia> skipped;
};

/// Gabor features for every minutia that fits; `skipped` lists the rest.
struct FeatureBatch {
  std::vector<Minutia> minutiae;
  std::vector<GaborFeature> features;
  std::vector<std::size_t> kept_indices;
  std::vector<SkippedMinutia> skipped;
};

FeatureBatch extract_features(const EnhancedImage& img,
                              const std::vector<Minutia>& minutiae,
                              const GaborBankParams& bank);

/// Minutiae are given in the image's own pixel grid; a non-500-dpi image is
/// rescaled and the minutiae mapped to match.
FeatureBatch extract_features(const GrayImage& img, const std::vector<Minutia>& minutiae,
                              const FeatureParams& params);

DescribedMinutiae describe_all(const EnhancedImage& img,
                               const std::vector<Minutia>& minutiae,
                               const DescriptorTransform& t, const GaborBankParams& bank);

DescribedMinutiae describe_all(const GrayImage& img, const std::vector<Minutia>& minutiae,
                               const DescriptorTransform& t, const FeatureParams& params);

}  // namespace fpindex
