#include "fpindex/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "fpindex/error.hpp"
#include "fpindex/random.hpp"

namespace fpindex {

PerturbParams PerturbParams::none() {
  PerturbParams p;
  p.max_rotation = 0.0;
  p.max_translation = 0.0;
  p.noise_sigma = 0.0;
  p.max_contrast_change = 0.0;
  p.max_brightness_shift = 0.0;
  p.max_jitter = 0.0;
  p.max_angle_jitter = 0.0;
  p.max_drop = 0.0;
  p.max_spurious = 0.0;
  return p;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finaliser over the combined value
  std::uint64_t z = base * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string subject_name(std::size_t finger_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f%04zu", finger_index);
  return buf;
}

double base_phase(const RidgeParams& ridge, const Eigen::Vector2d& p) {
  double phase = (p - ridge.centre).norm() / ridge.period;
  for (const WarpTerm& w : ridge.warp)
    phase += w.amplitude * std::sin(kTwoPi * w.wave.dot(p) + w.phase);
  return phase;
}

namespace {

// Gradient of the full phase (cycles/px) at p, leaving out minutia `skip`.
Eigen::Vector2d phase_gradient(const SyntheticFinger& f, const Eigen::Vector2d& p,
                               std::size_t skip) {
  const Eigen::Vector2d radial = p - f.ridge.centre;
  Eigen::Vector2d g = radial / (radial.norm() * f.ridge.period);
  for (const WarpTerm& w : f.ridge.warp)
    g += w.amplitude * kTwoPi * std::cos(kTwoPi * w.wave.dot(p) + w.phase) * w.wave;
  for (std::size_t j = 0; j < f.ground_truth_minutiae.size(); ++j) {
    if (j == skip) continue;
    const Eigen::Vector2d d = p - f.ground_truth_minutiae[j].position();
    g += f.polarity[j] / (kTwoPi * d.squaredNorm()) * Eigen::Vector2d(-d.y(), d.x());
  }
  return g;
}

double intensity(const SyntheticFinger& f, const Eigen::Vector2d& p) {
  // Product of (p - z_j), conjugated for s_j = -1; its argument is the sum of
  // the spiral phases. Plain arithmetic avoids the slow complex multiply.
  double re = 1.0;
  double im = 0.0;
  for (std::size_t j = 0; j < f.ground_truth_minutiae.size(); ++j) {
    const double dx = p.x() - f.ground_truth_minutiae[j].x;
    const double dy = f.polarity[j] > 0 ? p.y() - f.ground_truth_minutiae[j].y
                                        : f.ground_truth_minutiae[j].y - p.y();
    if (dx == 0.0 && dy == 0.0) continue;
    const double nre = re * dx - im * dy;
    im = re * dy + im * dx;
    re = nre;
    if (j % 16 == 15) {  // keep the magnitude in range
      const double mag = std::sqrt(re * re + im * im);
      re /= mag;
      im /= mag;
    }
  }
  const double carrier = kTwoPi * base_phase(f.ridge, p);
  return (std::cos(carrier) * re - std::sin(carrier) * im) / std::sqrt(re * re + im * im);
}

}  // namespace

SyntheticFinger gen_finger(std::uint64_t seed, const SynthParams& params) {
  require(params.width >= kMinPipelineSide && params.height >= kMinPipelineSide,
          ErrorKind::parameter, "synthetic image must be at least 64x64");
  require(params.period_min > 2.0 && params.period_min <= params.period_max,
          ErrorKind::parameter, "invalid synthetic ridge period range");
  const int count_min = std::clamp(params.minutiae_min, 15, 60);
  const int count_max = std::clamp(params.minutiae_max, count_min, 60);

  Rng rng(derive_seed(seed, 0xF1));
  SyntheticFinger f;
  f.seed = seed;
  f.params = params;
  f.ridge.period = rng.uniform(params.period_min, params.period_max);
  const Eigen::Vector2d image_centre(params.width / 2.0, params.height / 2.0);
  const double centre_angle = rng.uniform(0.0, kTwoPi);
  const double centre_dist = rng.uniform(params.centre_distance_min, params.centre_distance_max);
  f.ridge.centre = image_centre + centre_dist * Eigen::Vector2d(std::cos(centre_angle),
                                                                std::sin(centre_angle));
  for (int i = 0; i < params.warp_terms; ++i) {
    WarpTerm w;
    const double wavelength = rng.uniform(120.0, 250.0);
    const double dir = rng.uniform(0.0, kTwoPi);
    w.wave = Eigen::Vector2d(std::cos(dir), std::sin(dir)) / wavelength;
    // peak gradient 2 pi a |u| = strength / period
    w.amplitude = params.warp_strength * wavelength / (kTwoPi * f.ridge.period);
    w.phase = rng.uniform(0.0, kTwoPi);
    f.ridge.warp.push_back(w);
  }

  const int target = count_min + static_cast<int>(rng.below(count_max - count_min + 1));
  std::vector<Eigen::Vector2d> positions;
  for (int attempt = 0; attempt < 20000 && static_cast<int>(positions.size()) < target;
       ++attempt) {
    const double r = params.minutia_region_radius * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, kTwoPi);
    const Eigen::Vector2d p = image_centre + r * Eigen::Vector2d(std::cos(a), std::sin(a));
    const bool clear = std::all_of(positions.begin(), positions.end(), [&](const auto& q) {
      return (p - q).norm() >= params.min_minutia_spacing;
    });
    if (clear) positions.push_back(p);
  }
  require(positions.size() >= 15, ErrorKind::parameter,
          "synthetic minutia region too small for 15 minutiae");

  for (const auto& p : positions) {
    const int s = rng.uniform() < 0.5 ? 1 : -1;
    f.polarity.push_back(s);
    f.ground_truth_minutiae.emplace_back(
        p.x(), p.y(), 0.0, s > 0 ? MinutiaKind::ridge_ending : MinutiaKind::bifurcation);
  }
  // Direction: along the ridge toward the side that holds the extra ridge.
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Eigen::Vector2d g = phase_gradient(f, positions[i], i);
    f.ground_truth_minutiae[i].theta =
        normalize_angle(std::atan2(g.y(), g.x()) - f.polarity[i] * (kPi / 2.0));
  }
  return f;
}

GrayImage render_finger(const SyntheticFinger& finger, const RigidMotion& motion) {
  const SynthParams& sp = finger.params;
  const RigidMotion inverse = motion.inverse();
  GrayImage img(sp.width, sp.height, 0, kCanonicalDpi);
  for (int y = 0; y < sp.height; ++y)
    for (int x = 0; x < sp.width; ++x) {
      const double v = sp.background + sp.amplitude * intensity(finger, inverse.apply(
                                                                            Eigen::Vector2d(x, y)));
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  return img;
}

SyntheticImpression gen_impression(const SyntheticFinger& finger, std::uint64_t seed,
                                   const PerturbParams& perturb) {
  const SynthParams& sp = finger.params;
  Rng rng(derive_seed(finger.seed, derive_seed(seed, 0x1A)));
  const Eigen::Vector2d image_centre(sp.width / 2.0, sp.height / 2.0);

  SyntheticImpression out;
  const double rotation = rng.uniform(-1.0, 1.0) * perturb.max_rotation;
  const double shift_r = perturb.max_translation * std::sqrt(rng.uniform());
  const double shift_a = rng.uniform(0.0, kTwoPi);
  out.motion = RigidMotion::about(
      image_centre, rotation, shift_r * Eigen::Vector2d(std::cos(shift_a), std::sin(shift_a)));
  if (perturb.max_rotation == 0.0 && perturb.max_translation == 0.0) out.motion = RigidMotion{};

  const double contrast = 1.0 + rng.uniform(-1.0, 1.0) * perturb.max_contrast_change;
  const double brightness = rng.uniform(-1.0, 1.0) * perturb.max_brightness_shift;
  const RigidMotion inverse = out.motion.inverse();
  out.image = GrayImage(sp.width, sp.height, 0, kCanonicalDpi);
  for (int y = 0; y < sp.height; ++y)
    for (int x = 0; x < sp.width; ++x) {
      double v = sp.background + brightness +
                 contrast * sp.amplitude * intensity(finger, inverse.apply(Eigen::Vector2d(x, y)));
      if (perturb.noise_sigma > 0.0) v += perturb.noise_sigma * rng.normal();
      out.image.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }

  const std::size_t n = finger.ground_truth_minutiae.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto max_drop = static_cast<std::size_t>(std::floor(perturb.max_drop * n));
  const std::size_t drops = rng.below(max_drop + 1);
  for (std::size_t i = 0; i < drops; ++i)
    std::swap(order[i], order[i + rng.below(n - i)]);
  std::vector<bool> dropped(n, false);
  for (std::size_t i = 0; i < drops; ++i) dropped[order[i]] = true;

  for (std::size_t i = 0; i < n; ++i) {
    if (dropped[i]) continue;
    Minutia m = out.motion.apply(finger.ground_truth_minutiae[i]);
    const double jr = perturb.max_jitter * rng.uniform();
    const double ja = rng.uniform(0.0, kTwoPi);
    m = Minutia(m.x + jr * std::cos(ja), m.y + jr * std::sin(ja),
                m.theta + rng.uniform(-1.0, 1.0) * perturb.max_angle_jitter, m.kind);
    out.minutiae.push_back(m);
    out.truth.push_back(static_cast<int>(i));
  }

  const auto max_spurious = static_cast<std::size_t>(std::floor(perturb.max_spurious * n));
  const std::size_t spurious = rng.below(max_spurious + 1);
  for (std::size_t i = 0; i < spurious; ++i) {
    const double r = sp.minutia_region_radius * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, kTwoPi);
    out.minutiae.emplace_back(image_centre.x() + r * std::cos(a),
                              image_centre.y() + r * std::sin(a), rng.uniform(0.0, kTwoPi),
                              MinutiaKind::unknown);
    out.truth.push_back(-1);
  }
  return out;
}

std::vector<ManifestEntry> write_corpus(const std::filesystem::path& out_dir,
                                        std::size_t fingers, std::size_t impressions,
                                        std::uint64_t seed, const SynthParams& synth,
                                        const PerturbParams& perturb) {
  require(fingers >= 1 && impressions >= 1, ErrorKind::parameter,
          "corpus needs at least one finger and one impression");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(!ec, ErrorKind::io, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<ManifestEntry> entries;
  for (std::size_t f = 0; f < fingers; ++f) {
    const SyntheticFinger finger = gen_finger(derive_seed(seed, f), synth);
    const std::string subject = subject_name(f);
    for (std::size_t i = 0; i < impressions; ++i) {
      const SyntheticImpression imp = gen_impression(finger, derive_seed(seed ^ 0x5EED, i), perturb);
      const std::string stem = subject + "_" + std::to_string(i + 1);
      ManifestEntry e{subject, static_cast<int>(i + 1), stem + ".pgm", stem + ".fpmin",
                      stem + ".fpgt"};
      write_pgm(out_dir / e.image, imp.image);
      write_minutiae(out_dir / e.minutiae, imp.minutiae);
      write_text_file(out_dir / e.truth, format_truth(imp.truth));
      entries.push_back(std::move(e));
    }
  }
  write_text_file(out_dir / "manifest.txt", format_manifest(entries));
  for (ManifestEntry& e : entries) {
    e.image = out_dir / e.image;
    e.minutiae = out_dir / e.minutiae;
    e.truth = out_dir / e.truth;
  }
  return entries;
}

}  // namespace fpindex
