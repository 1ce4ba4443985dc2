#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fpindex/descriptor.hpp"
#include "fpindex/error.hpp"
#include "fpindex/training.hpp"

namespace fpindex {

// Soft cluster memberships of minutia descriptors and the fixed-length search
// vector built from them.
//
//   d_k   = |C_k - V|^2                 squared distance to every centroid
//   d_k  -= min_k d_k                   shift so the nearest term is exp(0) = 1
//   M_k   = exp(-d_k) / sum_j exp(-d_j)
//   SM    = sum over minutiae of M
//   F     = (SM - mean(SM)) / sqrt(|SM - mean(SM)|^2 / N)
//
// so every F sums to zero and has squared norm N (the minutia count).

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Memberships from precomputed squared distances (one row of d_k).
template <typename Derived>
VectorX<typename Derived::Scalar> membership_from_sq_distances(
    const Eigen::MatrixBase<Derived>& sq_distances) {
  using Scalar = typename Derived::Scalar;
  require(sq_distances.size() >= 1, ErrorKind::parameter, "empty distance vector");
  const Scalar nearest = sq_distances.minCoeff();
  const VectorX<Scalar> weights = (-(sq_distances.derived().array() - nearest)).exp().matrix();
  // The nearest centroid contributes exp(0) = 1, so the sum is >= 1.
  return weights / weights.sum();
}

/// Squared Euclidean distance from `descriptor` to each centroid row.
template <typename DerivedV, typename DerivedC>
VectorX<typename DerivedV::Scalar> sq_distances(
    const Eigen::MatrixBase<DerivedV>& descriptor,
    const Eigen::MatrixBase<DerivedC>& centroids) {
  require(descriptor.size() == centroids.cols(), ErrorKind::parameter,
          "descriptor dimension " + std::to_string(descriptor.size()) +
              " does not match codebook dimension " + std::to_string(centroids.cols()));
  return (centroids.rowwise() - descriptor.derived().transpose().template cast<
                                    typename DerivedC::Scalar>())
      .rowwise()
      .squaredNorm();
}

template <typename DerivedV, typename DerivedC>
VectorX<typename DerivedV::Scalar> membership(const Eigen::MatrixBase<DerivedV>& descriptor,
                                              const Eigen::MatrixBase<DerivedC>& centroids) {
  return membership_from_sq_distances(sq_distances(descriptor, centroids));
}

template <typename DerivedV>
Eigen::VectorXd membership(const Eigen::MatrixBase<DerivedV>& descriptor,
                           const Codebook& cb) {
  return membership(descriptor, cb.centroids);
}

struct IndexOptions {
  // Divide F by sqrt(N) afterwards so its norm no longer depends on the
  // minutia count. Off by default.
  bool normalize_unit = false;
};

inline constexpr double kDegenerateSpread = 1e-12;

struct IndexVector {
  Eigen::VectorXd values;
  std::size_t n_minutiae = 0;

  Eigen::Index k() const { return values.size(); }
  bool operator==(const IndexVector&) const = default;
};

/// Rows of `memberships` are the M^i of each minutia.
template <typename Derived>
IndexVector index_vector(const Eigen::MatrixBase<Derived>& memberships,
                         const IndexOptions& options = {}) {
  const Eigen::Index n = memberships.rows();
  const Eigen::Index k = memberships.cols();
  require(n >= 1, ErrorKind::empty_template, "index vector needs at least one minutia");
  require(k >= 1, ErrorKind::parameter, "memberships have zero width");

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i)
    sum += memberships.row(i).transpose().template cast<double>();
  const double mean = sum.sum() / static_cast<double>(k);
  const Eigen::VectorXd centred = sum.array() - mean;
  const double spread = std::sqrt(centred.squaredNorm() / static_cast<double>(n));
  require(spread >= kDegenerateSpread, ErrorKind::degenerate_vector,
          "memberships are uniform; search vector is undefined");

  IndexVector out;
  out.values = centred / spread;
  out.n_minutiae = static_cast<std::size_t>(n);
  if (options.normalize_unit) out.values /= std::sqrt(static_cast<double>(n));
  return out;
}

IndexVector index_vector(const std::vector<Eigen::VectorXd>& memberships,
                         const IndexOptions& options = {});

/// Memberships of every descriptor against the codebook, one row each.
Eigen::MatrixXd membership_rows(const std::vector<MinutiaDescriptor>& descriptors,
                                const Codebook& cb);

IndexVector index_from_descriptors(const std::vector<MinutiaDescriptor>& descriptors,
                                   const Codebook& cb, const IndexOptions& options = {});

/// describe_all -> membership per descriptor -> index_vector.
IndexVector build_index(const GrayImage& img, const std::vector<Minutia>& minutiae,
                        const DescriptorTransform& t, const Codebook& cb,
                        const FeatureParams& params, const IndexOptions& options = {});

}  // namespace fpindex
