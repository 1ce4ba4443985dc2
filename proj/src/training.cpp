#include "fpindex/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "fpindex/error.hpp"
#include "fpindex/random.hpp"

namespace fpindex {

namespace {

// Eigenvectors come back with arbitrary sign; make the largest-magnitude
// entry of each column positive so results are reproducible.
void fix_signs(Eigen::MatrixXd& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    Eigen::Index arg = 0;
    columns.col(c).cwiseAbs().maxCoeff(&arg);
    if (columns(arg, c) < 0.0) columns.col(c) *= -1.0;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

Eigen::VectorXd PcaModel::apply(const Eigen::VectorXd& v) const {
  return components.transpose() * (v - mean);
}

Eigen::MatrixXd PcaModel::apply_rows(const Eigen::MatrixXd& samples) const {
  return (samples.rowwise() - mean.transpose()) * components;
}

PcaModel fit_pca(const Eigen::MatrixXd& samples, const PcaOptions& options) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index dim = samples.cols();
  require(options.out_dim >= 1 && options.out_dim <= dim, ErrorKind::parameter,
          "PCA output dimension must be in [1, " + std::to_string(dim) + "]");
  require(n >= 2, ErrorKind::training, "PCA needs at least 2 samples");
  require(samples.allFinite(), ErrorKind::training, "PCA input has non-finite values");

  PcaModel model;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centred = samples.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov =
      (centred.transpose() * centred) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  require(solver.info() == Eigen::Success, ErrorKind::training,
          "PCA eigendecomposition failed");
  model.eigenvalues = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  const double top = std::max(model.eigenvalues[0], 0.0);
  model.rank = (model.eigenvalues.array() > 1e-12 * top).count();
  if (top == 0.0) model.rank = 0;
  if (!options.allow_rank_deficient)
    require(model.rank >= options.out_dim, ErrorKind::training,
            "PCA: sample covariance has rank " + std::to_string(model.rank) +
                ", need at least " + std::to_string(options.out_dim) +
                " (achievable output dimension is " + std::to_string(model.rank) + ")");

  model.components = vectors.leftCols(options.out_dim);
  fix_signs(model.components);
  return model;
}

// ---------------------------------------------------------------------------
// LDA
// ---------------------------------------------------------------------------

namespace {

void require_lda_classes(Eigen::Index used, Eigen::Index out_dim) {
  require(used >= out_dim + 1, ErrorKind::training,
          "LDA: need >= " + std::to_string(out_dim + 1) + " classes with >= 2 samples, got " +
              std::to_string(used));
}

}  // namespace

LdaModel fit_lda(const Eigen::MatrixXd& samples, const std::vector<int>& class_ids,
                 const LdaOptions& options) {
  const Eigen::Index dim = samples.cols();
  require(static_cast<std::size_t>(samples.rows()) == class_ids.size(),
          ErrorKind::parameter, "LDA: sample and label counts differ");
  require(options.out_dim >= 1 && options.out_dim <= dim, ErrorKind::parameter,
          "LDA output dimension must be in [1, " + std::to_string(dim) + "]");

  std::map<int, std::vector<Eigen::Index>> members;
  for (std::size_t i = 0; i < class_ids.size(); ++i)
    members[class_ids[i]].push_back(static_cast<Eigen::Index>(i));

  LdaModel model;
  std::vector<const std::vector<Eigen::Index>*> classes;
  for (const auto& [id, rows] : members) {
    if (rows.size() >= 2)
      classes.push_back(&rows);
    else
      ++model.dropped_classes;
  }
  model.classes_used = static_cast<Eigen::Index>(classes.size());
  require_lda_classes(model.classes_used, options.out_dim);

  Eigen::Index total = 0;
  Eigen::VectorXd grand = Eigen::VectorXd::Zero(dim);
  for (const auto* rows : classes)
    for (Eigen::Index r : *rows) {
      grand += samples.row(r).transpose();
      ++total;
    }
  grand /= static_cast<double>(total);

  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto* rows : classes) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index r : *rows) mu += samples.row(r).transpose();
    mu /= static_cast<double>(rows->size());
    for (Eigen::Index r : *rows) {
      const Eigen::VectorXd d = samples.row(r).transpose() - mu;
      within.noalias() += d * d.transpose();
    }
    const Eigen::VectorXd dm = mu - grand;
    between.noalias() += static_cast<double>(rows->size()) * dm * dm.transpose();
  }

  model.regularization = options.regularization_scale * within.trace() / dim;
  require(model.regularization > 0.0 || within.determinant() != 0.0, ErrorKind::training,
          "LDA: within-class scatter is zero");
  within.diagonal().array() += model.regularization;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(between, within);
  require(solver.info() == Eigen::Success, ErrorKind::training,
          "LDA generalised eigendecomposition failed");
  model.eigenvalues = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors =
      solver.eigenvectors().rowwise().reverse().leftCols(options.out_dim);
  vectors.colwise().normalize();
  fix_signs(vectors);
  model.directions = std::move(vectors);
  return model;
}

DescriptorTransform compose_transform(const PcaModel& pca, const LdaModel& lda) {
  require(pca.components.cols() == lda.directions.rows(), ErrorKind::parameter,
          "cannot compose: PCA output dimension " + std::to_string(pca.components.cols()) +
              " != LDA input dimension " + std::to_string(lda.directions.rows()));
  require(pca.mean.size() == pca.components.rows(), ErrorKind::parameter,
          "PCA mean does not match component rows");
  DescriptorTransform t;
  t.mean = pca.mean;
  t.matrix = pca.components * lda.directions;
  t.provenance = DescriptorTransform::Provenance::trained;
  t.validate();
  return t;
}

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

void Codebook::validate() const {
  require(centroids.rows() >= 2, ErrorKind::parameter, "codebook needs k >= 2");
  require(centroids.cols() >= 1, ErrorKind::parameter, "codebook has zero dimension");
  require(centroids.allFinite(), ErrorKind::parameter, "codebook has non-finite entries");
}

namespace {

double sq_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                   const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  double acc = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return acc;
}

bool row_less(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (m(a, c) < m(b, c)) return true;
    if (m(a, c) > m(b, c)) return false;
  }
  return false;
}

Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& data, Eigen::Index k, Rng& rng) {
  const Eigen::Index n = data.rows();
  Eigen::MatrixXd centroids(k, data.cols());
  centroids.row(0) = data.row(static_cast<Eigen::Index>(rng.below(n)));
  std::vector<double> nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) nearest[i] = sq_distance(data.row(i), centroids.row(0));

  for (Eigen::Index c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : nearest) total += d;
    const double target = rng.uniform() * total;
    double cum = 0.0;
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      cum += nearest[i];
      if (cum > target) {
        pick = i;
        break;
      }
    }
    // Rounding can leave target at the very end; never pick an existing centroid.
    while (nearest[pick] == 0.0 && pick > 0) --pick;
    centroids.row(c) = data.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], sq_distance(data.row(i), centroids.row(c)));
  }
  return centroids;
}

}  // namespace

Eigen::Index nearest_centroid(const Eigen::MatrixXd& centroids,
                              const Eigen::Ref<const Eigen::RowVectorXd>& point,
                              double* sq_dist) {
  Eigen::Index best = 0;
  double best_d = sq_distance(point, centroids.row(0));
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double d = sq_distance(point, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (sq_dist) *sq_dist = best_d;
  return best;
}

Eigen::Index count_distinct_rows(const Eigen::MatrixXd& data) {
  if (data.rows() == 0) return 0;
  std::vector<Eigen::Index> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return row_less(data, a, b); });
  Eigen::Index distinct = 1;
  for (std::size_t i = 1; i < order.size(); ++i)
    if (row_less(data, order[i - 1], order[i])) ++distinct;
  return distinct;
}

Codebook fit_codebook(const Eigen::MatrixXd& data, const KMeansOptions& options) {
  require(options.k >= 2, ErrorKind::parameter, "k-means needs k >= 2");
  require(options.max_iter >= 1 && options.tol >= 0.0, ErrorKind::parameter,
          "k-means needs max_iter >= 1 and tol >= 0");
  require(data.allFinite(), ErrorKind::training, "k-means input has non-finite values");
  const Eigen::Index distinct = count_distinct_rows(data);
  require(distinct >= options.k, ErrorKind::training,
          "k-means: need at least " + std::to_string(options.k) + " distinct points, got " +
              std::to_string(distinct));

  const Eigen::Index n = data.rows();
  const Eigen::Index k = options.k;
  Rng rng(options.seed);
  Codebook cb;
  cb.centroids = seed_centroids(data, k, rng);

  std::vector<Eigen::Index> labels(n);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double d = 0.0;
      labels[i] = nearest_centroid(cb.centroids, data.row(i), &d);
      inertia += d;
    }
    cb.meta.inertia_history.push_back(inertia);

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[i]) += data.row(i);
      ++counts[labels[i]];
    }
    double shift = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      const Eigen::RowVectorXd updated = sums.row(c) / static_cast<double>(counts[c]);
      shift = std::max(shift, std::sqrt(sq_distance(updated, cb.centroids.row(c))));
      cb.centroids.row(c) = updated;
    }
    cb.meta.iterations = iter;
    if (shift < options.tol) break;
  }

  double inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = 0.0;
    nearest_centroid(cb.centroids, data.row(i), &d);
    inertia += d;
  }
  cb.meta.inertia = inertia;
  cb.meta.inertia_history.push_back(inertia);

  require(count_distinct_rows(cb.centroids) == k, ErrorKind::training,
          "k-means produced duplicate centroids");
  return cb;
}

// ---------------------------------------------------------------------------
// Whole model
// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& rows, Eigen::Index dim) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == dim, ErrorKind::parameter, "inconsistent feature dimension");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

}  // namespace

TrainedModel train_model(const LabeledFeatureSet& set, const TrainingOptions& options) {
  require(set.features.size() == set.class_ids.size(), ErrorKind::parameter,
          "feature and label counts differ");
  require(!set.features.empty(), ErrorKind::training, "empty training set");
  // Fail on too few classes before spending time on PCA.
  std::map<int, int> class_sizes;
  for (int id : set.class_ids)
    if (id >= 0) ++class_sizes[id];
  require_lda_classes(std::count_if(class_sizes.begin(), class_sizes.end(),
                                    [](const auto& c) { return c.second >= 2; }),
                      options.lda.out_dim);
  const Eigen::MatrixXd features = stack_rows(set.features, kGaborFeatureDim);

  TrainedModel model;
  model.samples = features.rows();
  model.pca = fit_pca(features, options.pca);
  const Eigen::MatrixXd projected = model.pca.apply_rows(features);

  std::vector<Eigen::Index> labelled;
  std::vector<int> labels;
  for (std::size_t i = 0; i < set.class_ids.size(); ++i)
    if (set.class_ids[i] >= 0) {
      labelled.push_back(static_cast<Eigen::Index>(i));
      labels.push_back(set.class_ids[i]);
    }
  model.lda = fit_lda(projected(labelled, Eigen::all), labels, options.lda);
  model.transform = compose_transform(model.pca, model.lda);

  const Eigen::MatrixXd descriptors =
      (features.rowwise() - model.transform.mean.transpose()) * model.transform.matrix;
  model.codebook = fit_codebook(descriptors, options.kmeans);
  return model;
}

}  // namespace fpindex
