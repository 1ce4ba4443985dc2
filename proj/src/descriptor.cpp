#include "fpindex/descriptor.hpp"

#include <cmath>
#include <string>

namespace fpindex {

void GaborBankParams::validate() const {
  require(ring_radius > 0.0 && std::isfinite(ring_radius), ErrorKind::parameter,
          "sampling ring radius must be positive");
  for (double f : frequencies)
    require(f > 0.0 && f < 0.5, ErrorKind::parameter,
            "Gabor frequencies must lie in (0, 0.5) cycles/px");
  require(bandwidth > 0.0, ErrorKind::parameter, "Gabor bandwidth must be positive");
  require(support > 0.0, ErrorKind::parameter, "Gabor support must be positive");
}

int GaborBankParams::kernel_radius(int freq) const {
  return std::max(1, static_cast<int>(std::ceil(support * envelope_sigma(freq))));
}

int GaborBankParams::max_kernel_radius() const {
  int r = 0;
  for (int j = 0; j < kFrequencies; ++j) r = std::max(r, kernel_radius(j));
  return r;
}

void DescriptorTransform::validate() const {
  require(matrix.rows() == kGaborFeatureDim && matrix.cols() == kDescriptorDim,
          ErrorKind::parameter,
          "descriptor transform must be 360x25, got " + std::to_string(matrix.rows()) +
              "x" + std::to_string(matrix.cols()));
  require(mean.size() == kGaborFeatureDim, ErrorKind::parameter,
          "descriptor transform mean must have 360 entries");
  require(matrix.allFinite() && mean.allFinite(), ErrorKind::parameter,
          "descriptor transform has non-finite entries");
}

std::array<Eigen::Vector2d, kSamplingPoints> sampling_points(const Minutia& m,
                                                             double radius) {
  require(radius > 0.0, ErrorKind::parameter, "sampling radius must be positive");
  std::array<Eigen::Vector2d, kSamplingPoints> pts;
  pts[0] = m.position();
  for (int k = 0; k < kSamplingPoints - 1; ++k) {
    const double a = m.theta + k * (kPi / 4.0);
    pts[k + 1] = m.position() + radius * Eigen::Vector2d(std::cos(a), std::sin(a));
  }
  return pts;
}

namespace {

struct Kernel1d {
  Eigen::VectorXd re;
  Eigen::VectorXd im;
};

Eigen::VectorXd envelope(double sigma, int radius) {
  Eigen::VectorXd e(2 * radius + 1);
  for (int u = -radius; u <= radius; ++u)
    e[u + radius] = std::exp(-0.5 * (u * u) / (sigma * sigma));
  return e / e.sum();
}

// One axis of the separable kernel: envelope(u) * exp(i omega u).
Kernel1d modulate(const Eigen::VectorXd& env, double omega) {
  const int radius = static_cast<int>(env.size() / 2);
  Kernel1d k{Eigen::VectorXd(env.size()), Eigen::VectorXd(env.size())};
  for (int u = -radius; u <= radius; ++u) {
    k.re[u + radius] = env[u + radius] * std::cos(omega * u);
    k.im[u + radius] = env[u + radius] * std::sin(omega * u);
  }
  return k;
}

bool support_inside(const RealImage& img, const Eigen::Vector2d& p, int radius) {
  return p.x() - radius >= 0.0 && p.y() - radius >= 0.0 &&
         p.x() + radius <= static_cast<double>(img.cols() - 1) &&
         p.y() + radius <= static_cast<double>(img.rows() - 1);
}

// Bilinear patch centred exactly on p; rows are v (y offsets), cols are u.
Eigen::MatrixXd sample_patch(const RealImage& img, const Eigen::Vector2d& p, int radius) {
  const int n = 2 * radius + 1;
  Eigen::MatrixXd patch(n, n);
  for (int v = -radius; v <= radius; ++v)
    for (int u = -radius; u <= radius; ++u)
      patch(v + radius, u + radius) = bilinear(img, p.x() + u, p.y() + v);
  return patch;
}

// The kernel is separable: response = wy^T * patch * wx.
std::complex<double> separable_response(const Eigen::Ref<const Eigen::MatrixXd>& patch,
                                        const Eigen::VectorXd& env, double frequency,
                                        double orientation) {
  const double omega = 2.0 * kPi * frequency;
  const Kernel1d wx = modulate(env, omega * std::cos(orientation));
  const Kernel1d wy = modulate(env, omega * std::sin(orientation));
  const Eigen::VectorXd row_re = patch * wx.re;
  const Eigen::VectorXd row_im = patch * wx.im;
  const double re = wy.re.dot(row_re) - wy.im.dot(row_im);
  const double im = wy.re.dot(row_im) + wy.im.dot(row_re);
  return {re, im};
}

}  // namespace

std::complex<double> gabor_response(const RealImage& img, const Eigen::Vector2d& point,
                                    int freq, double orientation,
                                    const GaborBankParams& bank) {
  require(freq >= 0 && freq < kFrequencies, ErrorKind::parameter,
          "frequency index out of range");
  const int radius = bank.kernel_radius(freq);
  if (!support_inside(img, point, radius))
    throw OutOfBoundsError(0, "Gabor kernel support leaves the image");
  const Eigen::MatrixXd patch = sample_patch(img, point, radius);
  return separable_response(patch, envelope(bank.envelope_sigma(freq), radius),
                            bank.frequencies[freq], orientation);
}

GaborFeature gabor_feature(const EnhancedImage& img, const Minutia& m,
                           const GaborBankParams& bank) {
  const auto pts = sampling_points(m, bank.ring_radius);
  const int max_radius = bank.max_kernel_radius();
  for (int i = 0; i < kSamplingPoints; ++i) {
    if (!support_inside(img.values, pts[i], max_radius))
      throw OutOfBoundsError(
          i, "sampling point " + std::to_string(i) + " at (" + std::to_string(pts[i].x()) +
                 ", " + std::to_string(pts[i].y()) + ") is too close to the border");
  }

  std::array<Eigen::VectorXd, kFrequencies> envelopes;
  for (int j = 0; j < kFrequencies; ++j)
    envelopes[j] = envelope(bank.envelope_sigma(j), bank.kernel_radius(j));

  // Per frequency, the x-axis kernels of all orientations as columns
  // [re_0 im_0 re_1 im_1 ...] so each patch needs one product.
  std::array<Eigen::MatrixXd, kFrequencies> wx;
  std::array<Eigen::MatrixXd, kFrequencies> wy;
  for (int j = 0; j < kFrequencies; ++j) {
    const Eigen::Index n = envelopes[j].size();
    const double omega = 2.0 * kPi * bank.frequencies[j];
    wx[j].resize(n, 2 * kOrientations);
    wy[j].resize(n, 2 * kOrientations);
    for (int l = 0; l < kOrientations; ++l) {
      const double phi = m.theta + l * (kPi / kOrientations);
      const Kernel1d kx = modulate(envelopes[j], omega * std::cos(phi));
      const Kernel1d ky = modulate(envelopes[j], omega * std::sin(phi));
      wx[j].col(2 * l) = kx.re;
      wx[j].col(2 * l + 1) = kx.im;
      wy[j].col(2 * l) = ky.re;
      wy[j].col(2 * l + 1) = ky.im;
    }
  }

  GaborFeature feature(kGaborFeatureDim);
  for (int i = 0; i < kSamplingPoints; ++i) {
    const Eigen::MatrixXd patch = sample_patch(img.values, pts[i], max_radius);
    for (int j = 0; j < kFrequencies; ++j) {
      const int r = bank.kernel_radius(j);
      const Eigen::MatrixXd rows =
          patch.block(max_radius - r, max_radius - r, 2 * r + 1, 2 * r + 1) * wx[j];
      const Eigen::MatrixXd cross = wy[j].transpose() * rows;
      for (int l = 0; l < kOrientations; ++l) {
        const double re = cross(2 * l, 2 * l) - cross(2 * l + 1, 2 * l + 1);
        const double im = cross(2 * l, 2 * l + 1) + cross(2 * l + 1, 2 * l);
        feature[gabor_index(i, j, l)] = std::hypot(re, im);
      }
    }
  }
  return feature;
}

FeatureBatch extract_features(const EnhancedImage& img,
                              const std::vector<Minutia>& minutiae,
                              const GaborBankParams& bank) {
  bank.validate();
  FeatureBatch batch;
  for (std::size_t i = 0; i < minutiae.size(); ++i) {
    try {
      batch.features.push_back(gabor_feature(img, minutiae[i], bank));
      batch.minutiae.push_back(minutiae[i]);
      batch.kept_indices.push_back(i);
    } catch (const OutOfBoundsError& e) {
      batch.skipped.push_back({i, e.point_index()});
    }
  }
  return batch;
}

FeatureBatch extract_features(const GrayImage& img, const std::vector<Minutia>& minutiae,
                              const FeatureParams& params) {
  params.validate();
  check_pipeline_image(img);
  const EnhancedImage enhanced = enhance(img, params.enhance);
  if (img.resolution_dpi == kCanonicalDpi)
    return extract_features(enhanced, minutiae, params.gabor);

  const double scale = kCanonicalDpi / img.resolution_dpi;
  std::vector<Minutia> mapped;
  mapped.reserve(minutiae.size());
  for (const Minutia& m : minutiae)
    mapped.emplace_back((m.x + 0.5) * scale - 0.5, (m.y + 0.5) * scale - 0.5, m.theta,
                        m.kind);
  return extract_features(enhanced, mapped, params.gabor);
}

namespace {

DescribedMinutiae project_batch(FeatureBatch batch, std::size_t input_count,
                                const DescriptorTransform& t) {
  require(input_count > 0, ErrorKind::empty_template, "no minutiae supplied");
  require(!batch.features.empty(), ErrorKind::empty_template,
          "all " + std::to_string(input_count) +
              " minutiae are too close to the image border");
  t.validate();
  DescribedMinutiae out;
  out.minutiae = std::move(batch.minutiae);
  out.skipped = std::move(batch.skipped);
  out.descriptors.reserve(batch.features.size());
  for (const GaborFeature& f : batch.features) out.descriptors.push_back(project(f, t));
  return out;
}

}  // namespace

DescribedMinutiae describe_all(const EnhancedImage& img,
                               const std::vector<Minutia>& minutiae,
                               const DescriptorTransform& t, const GaborBankParams& bank) {
  require(!minutiae.empty(), ErrorKind::empty_template, "no minutiae supplied");
  return project_batch(extract_features(img, minutiae, bank), minutiae.size(), t);
}

DescribedMinutiae describe_all(const GrayImage& img, const std::vector<Minutia>& minutiae,
                               const DescriptorTransform& t, const FeatureParams& params) {
  require(!minutiae.empty(), ErrorKind::empty_template, "no minutiae supplied");
  return project_batch(extract_features(img, minutiae, params), minutiae.size(), t);
}

}  // namespace fpindex
