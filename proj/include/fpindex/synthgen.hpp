#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fpindex/formats.hpp"
#include "fpindex/geometry.hpp"
#include "fpindex/image.hpp"

namespace fpindex {

// Synthetic fingers: concentric ridges around a random centre with a gentle
// low-frequency phase warp, plus one spiral phase singularity per minutia.
// Intensity = background + amplitude * cos(2 pi phase + sum_j s_j arg(p - z_j)),
// s_j = +1 for a ridge ending, -1 for a bifurcation.

struct SynthParams {
  int width = 320;
  int height = 320;
  double period_min = 8.0;  // px
  double period_max = 11.0;
  int minutiae_min = 25;  // generator clamps to [15, 60]
  int minutiae_max = 45;
  double minutia_region_radius = 90.0;  // around the image centre
  double min_minutia_spacing = 18.0;
  double centre_distance_min = 60.0;  // ridge centre offset from image centre
  double centre_distance_max = 500.0;
  int warp_terms = 3;
  double warp_strength = 0.05;  // peak frequency change per warp term, relative
  double background = 128.0;
  double amplitude = 90.0;
};

struct WarpTerm {
  Eigen::Vector2d wave;  // cycles/px
  double amplitude = 0.0;  // cycles
  double phase = 0.0;      // radians
};

struct RidgeParams {
  double period = 9.0;
  Eigen::Vector2d centre = Eigen::Vector2d::Zero();
  std::vector<WarpTerm> warp;
};

struct SyntheticFinger {
  std::uint64_t seed = 0;
  std::vector<Minutia> ground_truth_minutiae;
  std::vector<int> polarity;  // +1 / -1 per minutia
  RidgeParams ridge;
  SynthParams params;
};

struct PerturbParams {
  double max_rotation = radians(15.0);
  double max_translation = 20.0;  // px
  double noise_sigma = 12.0;      // grey levels
  double max_contrast_change = 0.15;
  double max_brightness_shift = 15.0;
  double max_jitter = 2.0;  // px
  double max_angle_jitter = radians(5.0);
  double max_drop = 0.07;      // fraction of minutiae
  double max_spurious = 0.05;  // fraction of minutiae

  static PerturbParams none();
};

struct SyntheticImpression {
  GrayImage image;
  std::vector<Minutia> minutiae;
  std::vector<int> truth;  // ground-truth index per minutia, -1 for spurious
  RigidMotion motion;      // finger frame -> impression frame
};

SyntheticFinger gen_finger(std::uint64_t seed, const SynthParams& params = {});

/// Phase in cycles of the smooth part (no minutiae) at a finger-frame point.
double base_phase(const RidgeParams& ridge, const Eigen::Vector2d& p);

/// Noise-free rendering seen through `motion` (finger frame -> image frame).
GrayImage render_finger(const SyntheticFinger& finger, const RigidMotion& motion = {});

SyntheticImpression gen_impression(const SyntheticFinger& finger, std::uint64_t seed,
                                   const PerturbParams& perturb = {});

/// Deterministic seed derivation for corpora.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

std::string subject_name(std::size_t finger_index);

/// Writes `<subject>_<impression>.pgm/.fpmin/.fpgt` and `manifest.txt` under
/// `out_dir`. The manifest uses relative paths; the returned entries are
/// prefixed with `out_dir`.
std::vector<ManifestEntry> write_corpus(const std::filesystem::path& out_dir,
                                        std::size_t fingers, std::size_t impressions,
                                        std::uint64_t seed, const SynthParams& synth = {},
                                        const PerturbParams& perturb = {});

}  // namespace fpindex
