#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "fpindex/formats.hpp"
#include "fpindex/gallery.hpp"
#include "fpindex/training.hpp"

namespace fpindex {

struct LoadedImpression {
  ManifestEntry entry;
  Impression impression;
  std::vector<int> truth;  // empty when the manifest gives no truth file
};

/// Reads the image, minutiae and optional truth file of one manifest line.
LoadedImpression load_impression(const ManifestEntry& entry, double dpi = kCanonicalDpi);

std::vector<LoadedImpression> load_corpus(const std::vector<ManifestEntry>& entries,
                                          double dpi = kCanonicalDpi);

/// Per-minutia identity labels for one subject's impressions: the truth file
/// when every impression has one, otherwise correspondence with the first
/// impression (its minutia indices become the labels). -1 means unlabelled.
std::vector<std::vector<int>> subject_labels(const std::vector<const LoadedImpression*>& impressions,
                                             const MatchGates& gates = {});

struct TrainingCorpus {
  LabeledFeatureSet set;
  std::size_t subjects = 0;
  std::size_t impressions = 0;
  std::size_t classes = 0;  // distinct labels with at least two samples
  std::size_t skipped_minutiae = 0;
};

/// Gabor features of every minutia that fits the image; class ids are unique
/// per (subject, minutia label).
TrainingCorpus training_corpus(const std::vector<LoadedImpression>& corpus,
                               const FeatureParams& params, const MatchGates& gates = {});

}  // namespace fpindex
