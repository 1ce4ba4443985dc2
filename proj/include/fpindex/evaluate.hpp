#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "fpindex/gallery.hpp"

namespace fpindex {

struct Query {
  Eigen::VectorXd vector;
  std::string true_subject_id;
};

struct PrErPoint {
  double penetration = 0.0;
  double error = 0.0;
};

struct PrErCurve {
  std::vector<PrErPoint> points;  // penetration strictly increasing
  std::size_t n_queries = 0;
};

/// {0.01, 0.02, 0.05, 0.10, 0.15, 0.20, 0.30, 0.50, 1.00}
std::vector<double> default_pr_grid();

/// 1-based position of `subject_id` in the full ranking of `query`.
std::size_t mate_rank(const Gallery& gallery, const Eigen::VectorXd& query,
                      const std::string& subject_id);

/// Error at each penetration = fraction of queries whose mate falls outside
/// the first ceil(N * pr) results. Every mate must be enrolled.
PrErCurve pr_er_curve(const Gallery& gallery, const std::vector<Query>& queries,
                      std::vector<double> grid = default_pr_grid());

/// `pr,er` rows.
std::string curve_csv(const PrErCurve& curve);

struct BenchStats {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  std::size_t samples = 0;
  std::size_t gallery_size = 0;
};

/// Wall-clock statistics of Gallery::search alone, one sample per call.
BenchStats bench_search(const Gallery& gallery, const std::vector<Eigen::VectorXd>& queries,
                        int repetitions, double pr = 1.0);

/// Line-oriented `key=value` report.
std::string bench_report(const BenchStats& stats);

}  // namespace fpindex
