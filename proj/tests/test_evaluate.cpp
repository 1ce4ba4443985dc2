#include <doctest.h>

#include <limits>
#include <random>
#include <sstream>

#include "fpindex/error.hpp"
#include "fpindex/evaluate.hpp"

using namespace fpindex;

namespace {

Gallery random_gallery(std::size_t n, Eigen::Index k, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Gallery g(k);
  for (std::size_t i = 0; i < n; ++i) {
    EnrolledRecord r;
    r.subject_id = "s" + std::to_string(i);
    r.index_vector.values.resize(k);
    for (auto& v : r.index_vector.values) v = normal(gen);
    r.index_vector.n_minutiae = 1;
    r.template_ref.minutiae.emplace_back(0.0, 0.0, 0.0, MinutiaKind::unknown);
    r.template_ref.descriptors.push_back(Eigen::VectorXd::Zero(kDescriptorDim));
    g.add(std::move(r));
  }
  return g;
}

Eigen::VectorXd random_vector(Eigen::Index k, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(k);
  for (auto& x : v) x = normal(gen);
  return v;
}

}  // namespace

TEST_CASE("perfect ranking has zero error everywhere") {
  std::mt19937_64 gen(1);
  const Gallery g = random_gallery(50, 8, gen);
  std::vector<Query> queries;
  for (const auto& r : g.records()) queries.push_back({r.index_vector.values, r.subject_id});
  const PrErCurve c = pr_er_curve(g, queries);
  CHECK(c.n_queries == 50);
  REQUIRE(c.points.size() == 9);
  for (const auto& p : c.points) CHECK(p.error == 0.0);
}

TEST_CASE("single query gives a step function at its mate rank") {
  Gallery g(2);
  for (int i = 0; i < 10; ++i) {
    EnrolledRecord r;
    r.subject_id = "s" + std::to_string(i);
    r.index_vector.values = Eigen::Vector2d(i, 0);
    r.template_ref.minutiae.emplace_back(0.0, 0.0, 0.0, MinutiaKind::unknown);
    r.template_ref.descriptors.push_back(Eigen::VectorXd::Zero(kDescriptorDim));
    g.add(std::move(r));
  }
  // Mate s4 ranks 5th from the origin.
  CHECK(mate_rank(g, Eigen::Vector2d(-0.1, 0), "s4") == 5);
  const PrErCurve c = pr_er_curve(g, {{Eigen::Vector2d(-0.1, 0), "s4"}},
                                  {0.1, 0.4, 0.5, 0.6, 1.0});
  REQUIRE(c.points.size() == 5);
  CHECK(c.points[0].error == 1.0);
  CHECK(c.points[1].error == 1.0);
  CHECK(c.points[2].error == 0.0);
  CHECK(c.points[3].error == 0.0);
  CHECK(c.points[4].error == 0.0);
}

TEST_CASE("random ranking tracks 1 - pr") {
  std::mt19937_64 gen(2);
  const Gallery g = random_gallery(100, 10, gen);
  std::uniform_int_distribution<int> pick(0, 99);
  std::vector<Query> queries;
  for (int i = 0; i < 1000; ++i)
    queries.push_back({random_vector(10, gen), "s" + std::to_string(pick(gen))});
  const PrErCurve c = pr_er_curve(g, queries);
  for (const auto& p : c.points) CHECK(std::abs(p.error - (1.0 - p.penetration)) <= 0.05);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    CHECK(c.points[i - 1].penetration < c.points[i].penetration);
    CHECK(c.points[i - 1].error >= c.points[i].error);
  }
  CHECK(c.points.back().error == 0.0);
}

TEST_CASE("grid handling and errors") {
  std::mt19937_64 gen(3);
  const Gallery g = random_gallery(5, 4, gen);
  const Query q{random_vector(4, gen), "s1"};
  const PrErCurve one = pr_er_curve(g, {q}, {1.0});
  REQUIRE(one.points.size() == 1);
  CHECK(one.points[0].error == 0.0);

  const PrErCurve sorted = pr_er_curve(g, {q}, {0.5, 0.2, 0.5});
  REQUIRE(sorted.points.size() == 2);
  CHECK(sorted.points[0].penetration == 0.2);

  try {
    pr_er_curve(g, {q, {q.vector, "ghost"}});
    FAIL("expected evaluation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::evaluation);
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
  CHECK_THROWS_AS(pr_er_curve(g, {}), Error);
  CHECK_THROWS_AS(pr_er_curve(g, {q}, {}), Error);
  CHECK_THROWS_AS(pr_er_curve(g, {q}, {0.0}), Error);
  CHECK_THROWS_AS(pr_er_curve(g, {q}, {1.2}), Error);
}

TEST_CASE("csv output") {
  PrErCurve c;
  c.points = {{0.1, 0.5}, {1.0, 0.0}};
  CHECK(curve_csv(c) == "pr,er\n0.1,0.5\n1,0\n");
}

TEST_CASE("search benchmark") {
  std::mt19937_64 gen(4);
  const Gallery small = random_gallery(500, 200, gen);
  const Gallery large = random_gallery(1000, 200, gen);
  std::vector<Eigen::VectorXd> queries;
  for (int i = 0; i < 20; ++i) queries.push_back(random_vector(200, gen));

  const BenchStats a = bench_search(small, queries, 5);
  CHECK(a.samples == 100);
  CHECK(a.gallery_size == 500);
  CHECK(a.min_ms > 0.0);
  CHECK(a.min_ms <= a.mean_ms);
  CHECK(a.mean_ms <= a.max_ms);
  CHECK(a.p95_ms <= a.max_ms);

  // Exhaustive search is linear in the gallery size. Interleave the runs and
  // keep the fastest sample of each so background load cancels out.
  double fast_small = a.min_ms;
  double fast_large = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 5; ++round) {
    fast_large = std::min(fast_large, bench_search(large, queries, 10).min_ms);
    fast_small = std::min(fast_small, bench_search(small, queries, 10).min_ms);
  }
  const double ratio = fast_large / fast_small;
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 3.0);

  const std::string report = bench_report(a);
  CHECK(report.find("gallery_size=500\n") != std::string::npos);
  CHECK(report.find("mean_ms=") != std::string::npos);
  CHECK_THROWS_AS(bench_search(small, {}, 1), Error);
  CHECK_THROWS_AS(bench_search(small, queries, 0), Error);
}
