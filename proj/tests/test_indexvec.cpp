#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "fpindex/error.hpp"
#include "fpindex/indexvec.hpp"
#include "invariants.hpp"
#include "oracles.hpp"

using namespace fpindex;

namespace {

Eigen::MatrixXd fixture_codebook() {
  Eigen::MatrixXd c(3, 2);
  c << 0, 0, 1, 0, 0, 2;
  return c;
}

}  // namespace

TEST_CASE("membership basics") {
  SUBCASE("worked K=3 example") {
    const Eigen::VectorXd m = membership(Eigen::Vector2d(0, 0), fixture_codebook());
    const auto o = oracle::membership({0, 0}, {{0, 0}, {1, 0}, {0, 2}});
    for (int k = 0; k < 3; ++k) CHECK(std::abs(m[k] - o[k]) <= 1e-15);
    CHECK(std::abs(m[0] - 0.721399) <= 5e-7);
    CHECK(std::abs(m[1] - 0.265388) <= 5e-7);
    CHECK(std::abs(m[2] - 0.013213) <= 5e-7);
    CHECK(invariants::membership_ok(m));
  }
  SUBCASE("dominant centroid") {
    Eigen::MatrixXd c(3, 2);
    c << 1, 1, 8, 1, 1, 9;  // squared distances 0, 49, 64
    const Eigen::VectorXd m = membership(Eigen::Vector2d(1, 1), c);
    CHECK(m[0] >= 0.999);
    CHECK(m[1] <= std::exp(-40.0));
    CHECK(m[2] <= std::exp(-40.0));
  }
  SUBCASE("equidistant nearest centroids tie exactly") {
    Eigen::MatrixXd c(3, 2);
    c << 1, 0, -1, 0, 0, 5;
    const Eigen::VectorXd m = membership(Eigen::Vector2d(0, 0), c);
    CHECK(m[0] == m[1]);
  }
  SUBCASE("argmax is the nearest centroid") {
    std::mt19937 gen(1);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd c(20, 6);
    for (auto& v : c.reshaped()) v = n(gen);
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd v(6);
      for (auto& x : v) x = n(gen);
      const Eigen::VectorXd m = membership(v, c);
      Eigen::Index amax, amin;
      m.maxCoeff(&amax);
      sq_distances(v, c).minCoeff(&amin);
      CHECK(amax == amin);
      CHECK(invariants::membership_ok(m));
      CHECK(m.minCoeff() > 0.0);
    }
  }
  SUBCASE("shifting every distance leaves memberships unchanged") {
    const Eigen::VectorXd d = (Eigen::VectorXd(5) << 3.0, 0.5, 7.25, 1.0, 12.0).finished();
    const Eigen::VectorXd a = membership_from_sq_distances(d);
    for (double c : {1.0, 37.5, 1000.0}) {
      const Eigen::VectorXd b = membership_from_sq_distances((d.array() + c).matrix());
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(membership(Eigen::Vector3d(0, 0, 0), fixture_codebook()), Error);
  }
  SUBCASE("float scalar") {
    const Eigen::VectorXf m = membership(Eigen::Vector2f(0, 0), fixture_codebook().cast<float>().eval());
    CHECK(std::abs(m[0] - 0.721399f) <= 1e-6f);
  }
}

TEST_CASE("index vector worked example") {
  const Eigen::VectorXd m = membership(Eigen::Vector2d(0, 0), fixture_codebook());
  const IndexVector f = index_vector(m.transpose().eval());
  const auto o = oracle::index_vector({{m[0], m[1], m[2]}});
  CHECK(std::abs(o.s - 1.0 / 3.0) <= 1e-15);
  CHECK(std::abs(o.centred[0] - 0.388066) <= 5e-7);
  CHECK(std::abs(o.centred[1] + 0.067945) <= 5e-7);
  CHECK(std::abs(o.centred[2] + 0.320120) <= 5e-7);
  CHECK(std::abs(o.ss - 0.507631) <= 5e-7);
  CHECK(std::abs(f.values[0] - 0.764465) <= 5e-7);
  CHECK(std::abs(f.values[1] + 0.133848) <= 5e-7);
  CHECK(std::abs(f.values[2] + 0.630617) <= 5e-7);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(f.values[k] - o.f[k]) <= 1e-12);
  CHECK(f.n_minutiae == 1);
  CHECK(invariants::index_vector_ok(f));

  SUBCASE("duplicated memberships") {
    Eigen::MatrixXd twice(2, 3);
    twice << m.transpose(), m.transpose();
    const IndexVector g = index_vector(twice);
    CHECK((g.values - std::sqrt(2.0) * f.values).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(g.values.squaredNorm() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(invariants::index_vector_ok(g));
  }
}

TEST_CASE("index vector edge cases") {
  SUBCASE("zero-mean sums are left alone by centring") {
    Eigen::MatrixXd rows(2, 4);
    rows << 0.5, -0.5, 0.25, -0.25, 0.1, -0.1, 0.0, 0.0;
    const IndexVector f = index_vector(rows);
    const Eigen::VectorXd sm = rows.colwise().sum().transpose();
    const double ss = std::sqrt(sm.squaredNorm() / 2.0);
    CHECK((f.values - sm / ss).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("no memberships") {
    try {
      index_vector(Eigen::MatrixXd(0, 5));
      FAIL("expected an empty-template error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::empty_template);
    }
    CHECK_THROWS_AS(index_vector(std::vector<Eigen::VectorXd>{}), Error);
  }
  SUBCASE("uniform memberships are degenerate") {
    try {
      index_vector(Eigen::MatrixXd::Constant(3, 4, 0.25));
      FAIL("expected a degenerate-vector error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate_vector);
    }
  }
  SUBCASE("unit option") {
    Eigen::MatrixXd rows(3, 3);
    rows << 0.7, 0.2, 0.1, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4;
    const IndexVector f = index_vector(rows, IndexOptions{true});
    CHECK(f.values.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(invariants::index_vector_ok(f, true));
    CHECK((f.values * std::sqrt(3.0) - index_vector(rows).values).norm() <= 1e-12);
  }
}

TEST_CASE("index vector matches the direct transcription") {
  std::mt19937 gen(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 3 + static_cast<int>(gen() % 48);
    const int count = 1 + static_cast<int>(gen() % 100);
    const int dim = 2 + static_cast<int>(gen() % 24);
    std::vector<std::vector<double>> cs(k, std::vector<double>(dim));
    for (auto& c : cs)
      for (auto& v : c) v = n(gen);
    Eigen::MatrixXd centroids(k, dim);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < dim; ++j) centroids(i, j) = cs[i][j];
    std::vector<std::vector<double>> oracle_m;
    Eigen::MatrixXd rows(count, k);
    for (int i = 0; i < count; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = n(gen);
      oracle_m.push_back(oracle::membership(v, cs));
      rows.row(i) = membership(Eigen::Map<Eigen::VectorXd>(v.data(), dim), centroids).transpose();
    }
    const auto o = oracle::index_vector(oracle_m);
    const IndexVector f = index_vector(rows);
    double worst = 0.0;
    for (int j = 0; j < k; ++j) worst = std::max(worst, std::abs(f.values[j] - o.f[j]));
    CHECK(worst <= 1e-9);
    CHECK(invariants::index_vector_ok(f));
  }
}

TEST_CASE("build_index") {
  const IndexModel model = fixtures::quick_model(3, 200);
  const SyntheticImpression s = fixtures::synthetic(0, 0);
  const FeatureParams params;
  const IndexVector a =
      build_index(s.image, s.minutiae, model.transform, model.codebook, params);
  CHECK(a.k() == 200);
  CHECK(invariants::index_vector_ok(a));

  const IndexVector b =
      build_index(s.image, s.minutiae, model.transform, model.codebook, params);
  CHECK(a == b);

  std::vector<Minutia> reversed(s.minutiae.rbegin(), s.minutiae.rend());
  const IndexVector c = build_index(s.image, reversed, model.transform, model.codebook, params);
  CHECK((a.values - c.values).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(c.n_minutiae == a.n_minutiae);
}
