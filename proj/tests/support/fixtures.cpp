#include "fixtures.hpp"

#include "fpindex/random.hpp"

namespace fixtures {

using namespace fpindex;

Impression as_impression(const SyntheticImpression& s) { return {s.image, s.minutiae}; }

SyntheticImpression synthetic(std::uint64_t finger, std::uint64_t index) {
  return gen_impression(gen_finger(derive_seed(9001, finger)), derive_seed(17, index));
}

IndexModel quick_model(std::uint64_t seed, Eigen::Index k) {
  std::vector<GaborFeature> features;
  for (std::uint64_t f = 0; f < 3; ++f) {
    const SyntheticImpression s = synthetic(100 + f, 0);
    const FeatureBatch b = extract_features(s.image, s.minutiae, FeatureParams{});
    features.insert(features.end(), b.features.begin(), b.features.end());
  }
  Rng rng(seed);
  IndexModel m;
  m.transform.mean = Eigen::VectorXd::Zero(kGaborFeatureDim);
  for (const auto& f : features) m.transform.mean += f;
  m.transform.mean /= static_cast<double>(features.size());
  for (Eigen::Index r = 0; r < m.transform.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < m.transform.matrix.cols(); ++c)
      m.transform.matrix(r, c) = rng.normal() * 0.05;
  m.codebook.centroids.resize(k, kDescriptorDim);
  for (Eigen::Index c = 0; c < k; ++c)
    m.codebook.centroids.row(c) =
        project(features[static_cast<std::size_t>(c) % features.size()], m.transform).transpose() +
        Eigen::RowVectorXd::Constant(kDescriptorDim, 1e-3 * static_cast<double>(c));
  return m;
}

const TrainedModel& trained_model() {
  static const TrainedModel model = [] {
    LabeledFeatureSet set;
    int next = 0;
    for (std::uint64_t f = 0; f < 30; ++f) {
      const SyntheticFinger finger = gen_finger(derive_seed(4242, f));
      for (std::uint64_t i = 0; i < 3; ++i) {
        const SyntheticImpression s = gen_impression(finger, derive_seed(5, i));
        const FeatureBatch b = extract_features(s.image, s.minutiae, FeatureParams{});
        for (std::size_t j = 0; j < b.features.size(); ++j) {
          const int t = s.truth[b.kept_indices[j]];
          set.features.push_back(b.features[j]);
          set.class_ids.push_back(t < 0 ? -1 : next + t);
        }
      }
      next += static_cast<int>(finger.ground_truth_minutiae.size());
    }
    TrainingOptions opt;
    opt.kmeans.k = 60;
    opt.kmeans.seed = 3;
    return train_model(set, opt);
  }();
  return model;
}

}  // namespace fixtures
