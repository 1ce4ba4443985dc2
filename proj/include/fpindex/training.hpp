#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fpindex/descriptor.hpp"

namespace fpindex {

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

struct PcaOptions {
  Eigen::Index out_dim = kPcaDim;
  // Fit even when the covariance rank is below out_dim (trailing components
  // then span the null space). Training pipelines leave this off.
  bool allow_rank_deficient = false;
};

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;   // in_dim x out_dim, orthonormal columns
  Eigen::VectorXd eigenvalues;  // full spectrum, non-increasing
  Eigen::Index rank = 0;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  /// Rows are samples.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& samples) const;
};

/// Rows of `samples` are observations. Covariance uses the n-1 denominator.
PcaModel fit_pca(const Eigen::MatrixXd& samples, const PcaOptions& options = {});

// ---------------------------------------------------------------------------
// LDA
// ---------------------------------------------------------------------------

struct LdaOptions {
  Eigen::Index out_dim = kDescriptorDim;
  // S_W is regularised as S_W + lambda I with lambda = scale * trace(S_W) / dim.
  double regularization_scale = 1e-4;
};

struct LdaModel {
  Eigen::MatrixXd directions;   // in_dim x out_dim, unit-norm columns
  Eigen::VectorXd eigenvalues;  // all generalised eigenvalues, non-increasing
  Eigen::Index classes_used = 0;
  Eigen::Index dropped_classes = 0;  // singleton classes ignored
  double regularization = 0.0;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return directions.transpose() * v;
  }
};

/// Solves S_B w = lambda (S_W + lambda_reg I) w and keeps the leading directions.
LdaModel fit_lda(const Eigen::MatrixXd& samples, const std::vector<int>& class_ids,
                 const LdaOptions& options = {});

/// matrix = pca.components * lda.directions; the PCA mean travels with it.
DescriptorTransform compose_transform(const PcaModel& pca, const LdaModel& lda);

// ---------------------------------------------------------------------------
// Codebook
// ---------------------------------------------------------------------------

struct Codebook {
  struct TrainingMeta {
    int iterations = 0;
    double inertia = 0.0;
    std::vector<double> inertia_history;
  };

  Eigen::MatrixXd centroids;  // K x dim, one centroid per row
  TrainingMeta meta;

  Eigen::Index k() const { return centroids.rows(); }
  Eigen::Index dim() const { return centroids.cols(); }
  void validate() const;
};

struct KMeansOptions {
  Eigen::Index k = 200;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-6;
};

/// k-means++ seeding then Lloyd iterations until the largest centroid shift
/// drops below tol. Rows of `data` are points.
Codebook fit_codebook(const Eigen::MatrixXd& data, const KMeansOptions& options = {});

/// Index of the nearest centroid, lowest index on ties.
Eigen::Index nearest_centroid(const Eigen::MatrixXd& centroids,
                              const Eigen::Ref<const Eigen::RowVectorXd>& point,
                              double* sq_distance = nullptr);

/// Number of distinct rows.
Eigen::Index count_distinct_rows(const Eigen::MatrixXd& data);

// ---------------------------------------------------------------------------
// Whole model
// ---------------------------------------------------------------------------

struct LabeledFeatureSet {
  std::vector<GaborFeature> features;
  std::vector<int> class_ids;
};

struct TrainingOptions {
  PcaOptions pca;
  LdaOptions lda;
  KMeansOptions kmeans;
};

struct TrainedModel {
  DescriptorTransform transform;
  Codebook codebook;
  PcaModel pca;
  LdaModel lda;
  Eigen::Index samples = 0;
};

/// PCA over every feature, LDA over the labelled ones (class id >= 0), then
/// k-means over the projected descriptors of every feature.
TrainedModel train_model(const LabeledFeatureSet& set, const TrainingOptions& options);

}  // namespace fpindex
