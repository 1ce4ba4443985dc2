#include "fpindex/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "fpindex/error.hpp"
#include "fpindex/formats.hpp"

namespace fpindex {

std::vector<double> default_pr_grid() {
  return {0.01, 0.02, 0.05, 0.10, 0.15, 0.20, 0.30, 0.50, 1.00};
}

std::size_t mate_rank(const Gallery& gallery, const Eigen::VectorXd& query,
                      const std::string& subject_id) {
  const SearchResult all = gallery.search(query, 1.0);
  for (std::size_t i = 0; i < all.ranked.size(); ++i)
    if (all.ranked[i].subject_id == subject_id) return i + 1;
  fail(ErrorKind::evaluation, "query mate '" + subject_id + "' is not enrolled");
}

PrErCurve pr_er_curve(const Gallery& gallery, const std::vector<Query>& queries,
                      std::vector<double> grid) {
  require(!queries.empty(), ErrorKind::evaluation, "no queries");
  require(!grid.empty(), ErrorKind::parameter, "empty penetration grid");
  for (double pr : grid)
    require(pr > 0.0 && pr <= 1.0, ErrorKind::parameter,
            "penetration grid values must be in (0, 1], got " + format_double(pr));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  for (const Query& q : queries)
    require(gallery.contains(q.true_subject_id), ErrorKind::evaluation,
            "query mate '" + q.true_subject_id + "' is not enrolled");

  std::vector<std::size_t> ranks;
  ranks.reserve(queries.size());
  for (const Query& q : queries) ranks.push_back(mate_rank(gallery, q.vector, q.true_subject_id));

  PrErCurve curve;
  curve.n_queries = queries.size();
  const std::size_t n = gallery.size();
  for (double pr : grid) {
    const std::size_t cutoff = penetration_cutoff(n, pr);
    const auto misses = std::count_if(ranks.begin(), ranks.end(),
                                      [&](std::size_t r) { return r > cutoff; });
    curve.points.push_back(
        {pr, static_cast<double>(misses) / static_cast<double>(queries.size())});
  }
  return curve;
}

std::string curve_csv(const PrErCurve& curve) {
  std::string out = "pr,er\n";
  for (const PrErPoint& p : curve.points)
    out += format_double(p.penetration) + "," + format_double(p.error) + "\n";
  return out;
}

BenchStats bench_search(const Gallery& gallery, const std::vector<Eigen::VectorXd>& queries,
                        int repetitions, double pr) {
  require(!queries.empty(), ErrorKind::parameter, "benchmark needs queries");
  require(repetitions >= 1, ErrorKind::parameter, "benchmark needs repetitions >= 1");
  require(gallery.size() > 0, ErrorKind::parameter, "benchmark needs a non-empty gallery");

  using Clock = std::chrono::steady_clock;
  std::vector<double> samples;
  samples.reserve(queries.size() * static_cast<std::size_t>(repetitions));
  std::size_t sink = 0;
  for (int rep = 0; rep < repetitions; ++rep) {
    for (const auto& q : queries) {
      const auto start = Clock::now();
      const SearchResult r = gallery.search(q, pr);
      const auto stop = Clock::now();
      sink += r.ranked.size();
      samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
  }
  require(sink > 0, ErrorKind::evaluation, "benchmark searches returned nothing");

  BenchStats stats;
  stats.samples = samples.size();
  stats.gallery_size = gallery.size();
  stats.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) /
                  static_cast<double>(samples.size());
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  stats.min_ms = *lo;
  stats.max_ms = *hi;
  const auto p95 = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(samples.size()))) - 1;
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(p95),
                   samples.end());
  stats.p95_ms = samples[p95];
  return stats;
}

std::string bench_report(const BenchStats& s) {
  return "gallery_size=" + std::to_string(s.gallery_size) + "\n" +
         "samples=" + std::to_string(s.samples) + "\n" +
         "mean_ms=" + format_double(s.mean_ms) + "\n" +
         "p95_ms=" + format_double(s.p95_ms) + "\n" +
         "min_ms=" + format_double(s.min_ms) + "\n" +
         "max_ms=" + format_double(s.max_ms) + "\n";
}

}  // namespace fpindex
