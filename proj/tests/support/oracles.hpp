#pragma once

// Reference implementations for the tests. They are written from the
// definitions with plain loops and share no code with the library beyond
// its value types.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fpindex/image.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;  // [y][x]

Grid to_grid(const fpindex::RealImage& img);
Grid to_grid(const fpindex::GrayImage& img);

int reflect101(int i, int n);

/// Normalised 2-D Gaussian on [-ceil(3 sigma), ceil(3 sigma)]^2.
Grid gaussian_2d(double sigma);

/// out(y, x) = sum k(v, u) img(y + v, x + u), reflect-101 borders.
Grid correlate(const Grid& img, const Grid& kernel);

Grid dog(const Grid& img, double sigma_narrow, double sigma_wide);

/// Mean and population standard deviation over each window, reflect-101 borders.
Grid local_normalize(const Grid& img, int window, double eps);

double bilinear(const Grid& img, double x, double y);

/// Direct 2-D sum of one Gabor kernel centred on (x, y).
std::complex<double> gabor(const Grid& img, double x, double y, double frequency,
                           double orientation, double bandwidth, double support);

/// Memberships written out one symbol at a time.
std::vector<double> membership(const std::vector<double>& v,
                               const std::vector<std::vector<double>>& centroids);

struct IndexTrace {
  std::vector<double> sm;
  double s = 0.0;
  std::vector<double> centred;
  double ss = 0.0;
  std::vector<double> f;
};

IndexTrace index_vector(const std::vector<std::vector<double>>& memberships);

struct KMeansTrace {
  std::vector<std::vector<double>> centroids;
  std::vector<double> inertia;  // per assignment step, then the final one
  int iterations = 0;
};

/// Seeding by squared-distance sampling driven by fpindex::Rng, then Lloyd.
KMeansTrace kmeans(const std::vector<std::vector<double>>& data, int k, std::uint64_t seed,
                   int max_iter, double tol);

/// S_W^-1 (mu_1 - mu_0), unit norm. Rows are samples; labels are 0 or 1.
Eigen::VectorXd fisher_direction(const Eigen::MatrixXd& samples, const std::vector<int>& labels);

/// Eigenvalues of the sample covariance (n - 1 denominator) from the SVD of
/// the centred data, descending, and the matching right singular vectors.
struct PcaTrace {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
};
PcaTrace pca_svd(const Eigen::MatrixXd& samples);

/// Period of the strongest repetition in `profile` (first autocorrelation
/// maximum after the zero-lag lobe, refined by a parabola).
double autocorrelation_period(const std::vector<double>& profile);

}  // namespace oracle
