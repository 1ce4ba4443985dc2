#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fpindex/descriptor.hpp"
#include "fpindex/indexvec.hpp"
#include "fpindex/template.hpp"

namespace fpindex {

struct EnrolledRecord {
  std::string subject_id;
  IndexVector index_vector;
  Template template_ref;
  std::uint64_t enrolled_at = 0;  // enrollment sequence number within the gallery
};

struct SearchHit {
  std::string subject_id;
  double distance = 0.0;

  bool operator==(const SearchHit&) const = default;
};

struct SearchResult {
  std::vector<SearchHit> ranked;  // ascending distance, ties by subject_id
  double penetration = 1.0;
  std::size_t cutoff = 0;

  bool operator==(const SearchResult&) const = default;
};

/// ceil(n * pr), with products within 1e-9 of an integer snapped to it so that
/// e.g. 100 * 0.07 gives 7 rather than 8.
std::size_t penetration_cutoff(std::size_t n, double pr);

/// Enrolled records plus exhaustive Euclidean ranking. Any number of
/// concurrent readers (search, lookups, save) or a single writer (add,
/// remove); a record becomes visible to search only once fully inserted.
class Gallery {
 public:
  explicit Gallery(Eigen::Index k);
  Gallery(const Gallery& other);
  Gallery& operator=(const Gallery& other);

  Eigen::Index k() const { return k_; }
  std::size_t size() const;
  bool contains(const std::string& subject_id) const;
  std::optional<EnrolledRecord> find(const std::string& subject_id) const;
  std::vector<std::string> ids() const;  // enrollment order
  std::vector<EnrolledRecord> records() const;

  /// Throws a conflict error when the id is already present.
  void add(EnrolledRecord record);
  /// Throws a not-found error for unknown ids.
  void remove(const std::string& subject_id);

  SearchResult search(const Eigen::VectorXd& query, double pr) const;

  std::vector<std::uint8_t> encode() const;
  static Gallery decode(const std::vector<std::uint8_t>& bytes);
  void save(const std::filesystem::path& path) const;
  static Gallery load(const std::filesystem::path& path);

  /// Same K, ids, vectors (bit-identical), templates and order.
  bool same_content(const Gallery& other) const;

 private:
  std::shared_lock<std::shared_mutex> read_lock() const;
  std::unique_lock<std::shared_mutex> write_lock() const;

  // Readers would otherwise starve writers under a reader-preferring rwlock.
  mutable std::mutex turnstile_;
  mutable std::shared_mutex mutex_;
  Eigen::Index k_;
  std::vector<EnrolledRecord> records_;
  Eigen::MatrixXd vectors_;  // K x capacity, column i is records_[i]'s vector
  std::uint64_t next_sequence_ = 0;
};

// ---------------------------------------------------------------------------
// Enrollment / query pipeline
// ---------------------------------------------------------------------------

struct Impression {
  GrayImage image;
  std::vector<Minutia> minutiae;
};

struct IndexModel {
  DescriptorTransform transform;
  Codebook codebook;
};

struct PipelineParams {
  FeatureParams features;
  MatchGates gates;
  IndexOptions index;

  void validate() const {
    features.validate();
    gates.validate();
  }
};

Template template_from_impression(const Impression& impression, const IndexModel& model,
                                  const PipelineParams& params);

/// Search vector of a single impression (build_index).
IndexVector query_vector(const Impression& impression, const IndexModel& model,
                         const PipelineParams& params);

/// Search vector of a (super-)template's descriptors.
IndexVector template_vector(const Template& t, const IndexModel& model,
                            const PipelineParams& params);

/// Templates per impression, super-template when more than one, index vector
/// from its descriptors, then an atomic insert. Nothing is stored on failure.
EnrolledRecord enroll(Gallery& gallery, const std::string& subject_id,
                      const std::vector<Impression>& impressions, const IndexModel& model,
                      const PipelineParams& params);

}  // namespace fpindex
