#pragma once

#include <cstdint>

#include "fpindex/gallery.hpp"
#include "fpindex/synthgen.hpp"
#include "fpindex/training.hpp"

namespace fixtures {

/// Random projection centred on real features plus a codebook of K projected
/// descriptors. Cheap, not discriminative.
fpindex::IndexModel quick_model(std::uint64_t seed, Eigen::Index k = 40);

/// Model trained on a fixed synthetic corpus (computed once per process).
const fpindex::TrainedModel& trained_model();

fpindex::Impression as_impression(const fpindex::SyntheticImpression& s);

/// Impression `index` of synthetic finger `finger` from a fixed corpus seed.
fpindex::SyntheticImpression synthetic(std::uint64_t finger, std::uint64_t index);

}  // namespace fixtures
