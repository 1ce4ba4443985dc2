#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "fpindex/corpus.hpp"
#include "fpindex/error.hpp"
#include "fpindex/synthgen.hpp"
#include "fpindex/template.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace fpindex;

namespace {

Template geometry_template(const SyntheticImpression& s) {
  Template t;
  t.minutiae = s.minutiae;
  t.descriptors.assign(s.minutiae.size(), Eigen::VectorXd::Zero(kDescriptorDim));
  return t;
}

std::set<int> truth_set(const SyntheticImpression& s) {
  std::set<int> out;
  for (int t : s.truth)
    if (t >= 0) out.insert(t);
  return out;
}

}  // namespace

TEST_CASE("fingers are deterministic and within bounds") {
  const SyntheticFinger a = gen_finger(42);
  const SyntheticFinger b = gen_finger(42);
  CHECK(a.ground_truth_minutiae == b.ground_truth_minutiae);
  CHECK(a.polarity == b.polarity);
  CHECK(render_finger(a) == render_finger(b));
  CHECK_FALSE(gen_finger(43).ground_truth_minutiae == a.ground_truth_minutiae);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SyntheticFinger f = gen_finger(seed);
    const std::size_t n = f.ground_truth_minutiae.size();
    CHECK(n >= 15);
    CHECK(n <= 60);
    CHECK(f.polarity.size() == n);
    CHECK(f.ridge.period >= 8.0);
    CHECK(f.ridge.period <= 11.0);
    for (int p : f.polarity) CHECK(std::abs(p) == 1);
    for (std::size_t i = 0; i < n; ++i) {
      const Minutia& m = f.ground_truth_minutiae[i];
      CHECK(m.kind == (f.polarity[i] > 0 ? MinutiaKind::ridge_ending : MinutiaKind::bifurcation));
      for (std::size_t j = 0; j < i; ++j)
        CHECK((m.position() - f.ground_truth_minutiae[j].position()).norm() >= 18.0 - 1e-9);
    }
  }

  SynthParams few;
  few.minutiae_min = 2;
  few.minutiae_max = 3;
  CHECK(gen_finger(1, few).ground_truth_minutiae.size() == 15);
  SynthParams bad;
  bad.period_min = 0.0;
  CHECK_THROWS_AS(gen_finger(1, bad), Error);
}

namespace {

// Ridge period measured along the line from the ridge centre through the image
// centre, where concentric rings cross at right angles.
double radial_period(const SyntheticFinger& f) {
  const oracle::Grid img = oracle::to_grid(render_finger(f));
  const Eigen::Vector2d c(0.5 * (f.params.width - 1), 0.5 * (f.params.height - 1));
  const Eigen::Vector2d dir = (c - f.ridge.centre).normalized();
  std::vector<double> profile;
  for (double t = -150.0; t <= 150.0; t += 0.5) {
    const Eigen::Vector2d p = c + t * dir;
    if (p.x() < 0 || p.y() < 0 || p.x() > f.params.width - 1 || p.y() > f.params.height - 1)
      continue;
    profile.push_back(oracle::bilinear(img, p.x(), p.y()));
  }
  REQUIRE(profile.size() > 200);
  return 0.5 * oracle::autocorrelation_period(profile);
}

}  // namespace

TEST_CASE("rendered ridge period matches the generator") {
  double ratio_sum = 0.0;
  const int n = 20;
  for (int seed = 0; seed < n; ++seed) {
    SyntheticFinger f = gen_finger(derive_seed(3, seed));
    const double with_minutiae = radial_period(f);
    ratio_sum += with_minutiae / f.ridge.period;
    f.ground_truth_minutiae.clear();
    f.polarity.clear();
    CHECK(radial_period(f) == doctest::Approx(f.ridge.period).epsilon(0.10));
  }
  // Singularities bend ridges locally; on average the period still holds.
  CHECK(ratio_sum / n == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("zero perturbation reproduces the finger") {
  const SyntheticFinger f = gen_finger(5);
  const SyntheticImpression s = gen_impression(f, 99, PerturbParams::none());
  CHECK(s.image == render_finger(f));
  CHECK(s.minutiae == f.ground_truth_minutiae);
  REQUIRE(s.truth.size() == f.ground_truth_minutiae.size());
  for (std::size_t i = 0; i < s.truth.size(); ++i) CHECK(s.truth[i] == static_cast<int>(i));
  CHECK(s.motion.rotation == 0.0);
  CHECK(s.motion.translation.isZero());
}

TEST_CASE("impressions follow their recorded motion") {
  const PerturbParams p;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SyntheticFinger f = gen_finger(derive_seed(8, seed));
    const SyntheticImpression s = gen_impression(f, seed);
    CHECK(s.truth.size() == s.minutiae.size());
    CHECK(std::abs(s.motion.rotation) <= p.max_rotation + 1e-12);
    const Eigen::Vector2d c(f.params.width / 2.0, f.params.height / 2.0);
    CHECK((s.motion.apply(c) - c).norm() <= p.max_translation + 1e-9);
    std::size_t spurious = 0;
    for (std::size_t i = 0; i < s.minutiae.size(); ++i) {
      if (s.truth[i] < 0) {
        ++spurious;
        CHECK(s.minutiae[i].kind == MinutiaKind::unknown);
        continue;
      }
      const Minutia gt = s.motion.apply(f.ground_truth_minutiae[s.truth[i]]);
      CHECK((gt.position() - s.minutiae[i].position()).norm() <= p.max_jitter + 1e-9);
      CHECK(std::abs(angle_difference(gt.theta, s.minutiae[i].theta)) <=
            p.max_angle_jitter + 1e-9);
      CHECK(s.minutiae[i].kind == gt.kind);
    }
    const double n = static_cast<double>(f.ground_truth_minutiae.size());
    CHECK(static_cast<double>(spurious) <= std::ceil(p.max_spurious * n));
    CHECK(static_cast<double>(truth_set(s).size()) >= n - std::ceil(p.max_drop * n));
  }
}

TEST_CASE("impressions of one finger share most minutiae") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SyntheticFinger f = gen_finger(derive_seed(21, seed));
    const auto a = truth_set(gen_impression(f, 2 * seed));
    const auto b = truth_set(gen_impression(f, 2 * seed + 1));
    std::size_t shared = 0;
    for (int t : a) shared += b.count(t);
    CHECK(static_cast<double>(shared) >= 0.85 * f.ground_truth_minutiae.size());
  }
}

TEST_CASE("correspondence separates same and different fingers") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const SyntheticFinger f = gen_finger(derive_seed(31, seed));
    const SyntheticFinger g = gen_finger(derive_seed(32, seed));
    const SyntheticImpression a = gen_impression(f, 1);
    const SyntheticImpression b = gen_impression(f, 2);
    const SyntheticImpression c = gen_impression(g, 3);

    const Correspondence same = correspond(geometry_template(a), geometry_template(b));
    std::size_t consistent = 0;
    for (const auto& [i, j] : same.pairs)
      consistent += a.truth[i] >= 0 && a.truth[i] == b.truth[j];
    std::size_t shared = 0;
    const auto tb = truth_set(b);
    for (int t : truth_set(a)) shared += tb.count(t);
    CHECK(consistent + 1 >= same.pairs.size());
    CHECK(static_cast<double>(consistent) >= 0.85 * static_cast<double>(shared));

    // Geometry alone still aligns a fraction of unrelated minutiae by chance.
    const std::size_t chance =
        correspond(geometry_template(a), geometry_template(c)).pairs.size();
    CHECK(static_cast<double>(chance) <=
          0.5 * static_cast<double>(std::min(a.minutiae.size(), c.minutiae.size())));
  }
}

TEST_CASE("impressions are deterministic") {
  const SyntheticFinger f = gen_finger(77);
  const SyntheticImpression a = gen_impression(f, 3);
  const SyntheticImpression b = gen_impression(f, 3);
  CHECK(a.image == b.image);
  CHECK(a.minutiae == b.minutiae);
  CHECK(a.truth == b.truth);
  CHECK_FALSE(gen_impression(f, 4).image == a.image);
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
  CHECK(subject_name(7) == "f0007");
}

TEST_CASE("corpus writer") {
  TempDir dir("synth");
  const auto entries = write_corpus(dir.path(), 2, 3, 12);
  REQUIRE(entries.size() == 6);
  CHECK(entries[4].subject_id == "f0001");
  CHECK(entries[4].impression == 2);
  const auto reread = read_manifest(dir / "manifest.txt");
  REQUIRE(reread.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(reread[i].subject_id == entries[i].subject_id);
    CHECK(std::filesystem::equivalent(reread[i].image, entries[i].image));
    CHECK(std::filesystem::exists(reread[i].truth));
  }
  const auto corpus = load_corpus(reread);
  const SyntheticFinger f1 = gen_finger(derive_seed(12, 1));
  const SyntheticImpression s = gen_impression(f1, derive_seed(12 ^ 0x5EED, 1));
  CHECK(corpus[4].impression.image == s.image);
  CHECK(corpus[4].truth == s.truth);
  REQUIRE(corpus[4].impression.minutiae.size() == s.minutiae.size());
  for (std::size_t i = 0; i < s.minutiae.size(); ++i)
    CHECK((corpus[4].impression.minutiae[i].position() - s.minutiae[i].position()).norm() <
          1e-9);

  // Same seed, same bytes.
  TempDir again("synth");
  write_corpus(again.path(), 2, 3, 12);
  CHECK(read_file_bytes(dir / "f0001_2.pgm") == read_file_bytes(again / "f0001_2.pgm"));
  CHECK(read_text_file(dir / "f0001_2.fpmin") == read_text_file(again / "f0001_2.fpmin"));
}

TEST_CASE("search vectors of one finger are closer than those of different fingers") {
  const TrainedModel& trained = fixtures::trained_model();
  const IndexModel model{trained.transform, trained.codebook};
  const PipelineParams params;
  const std::size_t fingers = 8;
  std::vector<std::vector<Eigen::VectorXd>> vecs(fingers);
  for (std::size_t f = 0; f < fingers; ++f)
    for (std::uint64_t i = 0; i < 2; ++i)
      vecs[f].push_back(
          query_vector(fixtures::as_impression(fixtures::synthetic(f, i)), model, params).values);
  double intra = 0.0;
  double inter = 0.0;
  std::size_t n_inter = 0;
  for (std::size_t f = 0; f < fingers; ++f) {
    intra += (vecs[f][0] - vecs[f][1]).norm();
    for (std::size_t g = 0; g < fingers; ++g)
      if (g != f) {
        inter += (vecs[f][0] - vecs[g][1]).norm();
        ++n_inter;
      }
  }
  intra /= static_cast<double>(fingers);
  inter /= static_cast<double>(n_inter);
  CHECK(inter > intra);
}
