#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "zgs/error.hpp"
#include "zgs/simfeat.hpp"

using namespace zgs;

namespace {

double dist(std::vector<double> u, std::vector<double> v) { return correlation_distance(u, v); }

// Centered cosine written out directly.
double distance_oracle(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double mu = 0, mv = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) mu += u(i), mv += v(i);
  mu /= static_cast<double>(u.size());
  mv /= static_cast<double>(v.size());
  double uv = 0, uu = 0, vv = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    uv += (u(i) - mu) * (v(i) - mv);
    uu += (u(i) - mu) * (u(i) - mu);
    vv += (v(i) - mv) * (v(i) - mv);
  }
  return 1.0 - uv / std::sqrt(uu * vv);
}

}  // namespace

TEST_SUITE("simfeat") {
  TEST_CASE("aggregate sums sample rows") {
    SampleFeatureMatrix f{"d", Eigen::MatrixXd(2, 2)};
    f.rows << 1, 2, 3, 4;
    CHECK(aggregate_features(f).vector == Eigen::Vector2d(4, 6));
    SampleFeatureMatrix one{"d", Eigen::MatrixXd(1, 2)};
    one.rows << 5, -1;
    CHECK(aggregate_features(one).vector == Eigen::Vector2d(5, -1));
    CHECK(aggregate_features(f, Aggregation::Mean).vector == Eigen::Vector2d(2, 3));
  }

  TEST_CASE("aggregate matches a column-sum loop and ignores row order") {
    auto rng = make_rng(3);
    SampleFeatureMatrix f{"d", test::random_matrix(rng, 10, 6)};
    Eigen::VectorXd oracle = Eigen::VectorXd::Zero(6);
    for (int r = 0; r < 10; ++r) {
      for (int c = 0; c < 6; ++c) oracle(c) += f.rows(r, c);
    }
    const auto sum = aggregate_features(f).vector;
    CHECK((sum - oracle).cwiseAbs().maxCoeff() < 1e-12);

    SampleFeatureMatrix shuffled = f;
    for (int r = 0; r < 10; ++r) shuffled.rows.row(r) = f.rows.row(9 - r);
    CHECK((aggregate_features(shuffled).vector - sum).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("aggregate rejects an empty matrix") {
    SampleFeatureMatrix f{"d", Eigen::MatrixXd(0, 3)};
    CHECK_THROWS_AS(aggregate_features(f), Error);
  }

  TEST_CASE("correlation distance hand cases") {
    CHECK(dist({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(dist({1, 2, 3}, {3, 2, 1}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(std::abs(dist({1, 2, 3, 4}, {1, 3, 2, 4}) - 0.2) < 1e-12);
  }

  TEST_CASE("correlation distance errors") {
    try {
      dist({2, 2, 2}, {1, 2, 3});
      FAIL("expected DegenerateVector");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateVector);
    }
    CHECK_THROWS_AS(dist({1, 2}, {1, 2, 3}), Error);
    CHECK_THROWS_AS(dist({1}, {2}), Error);
  }

  TEST_CASE("correlation distance is invariant under positive affine maps") {
    auto rng = make_rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd u = test::random_vector(rng, 7), v = test::random_vector(rng, 7);
      const double a = 0.1 + 5.0 * uniform01(rng), b = 10.0 * (uniform01(rng) - 0.5);
      const Eigen::VectorXd w = (a * v.array() + b).matrix();
      const double d0 = correlation_distance({u.data(), 7}, {v.data(), 7});
      const double d1 = correlation_distance({u.data(), 7}, {w.data(), 7});
      CHECK(std::abs(d0 - d1) < 1e-12);
      const Eigen::VectorXd neg = -v;
      CHECK(std::abs(correlation_distance({u.data(), 7}, {neg.data(), 7}) - (2.0 - d0)) < 1e-12);
    }
  }

  TEST_CASE("similarity matrix examples") {
    std::vector<DatasetEmbedding> same = {{"a", Eigen::Vector3d(1, 2, 3)}, {"b", Eigen::Vector3d(1, 2, 3)}};
    CHECK((similarity_matrix(same).phi() - Eigen::Matrix2d::Ones()).cwiseAbs().maxCoeff() < 1e-15);

    std::vector<DatasetEmbedding> opposite = {{"a", Eigen::Vector3d(1, 2, 3)}, {"b", Eigen::Vector3d(3, 2, 1)}};
    const auto s = similarity_matrix(opposite);
    CHECK(s.phi()(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(s.at("b", "a").value() == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK_FALSE(s.at("a", "zz").has_value());
  }

  TEST_CASE("similarity matrix matches a pairwise oracle; symmetric with unit diagonal") {
    auto rng = make_rng(5);
    std::vector<DatasetEmbedding> e;
    for (int k = 0; k < 5; ++k) e.push_back({"d" + std::to_string(k), test::random_vector(rng, 9)});
    const auto s = similarity_matrix(e);
    for (int i = 0; i < 5; ++i) {
      CHECK(s.phi()(i, i) == 1.0);
      for (int j = 0; j < 5; ++j) {
        if (i != j) CHECK(std::abs(s.phi()(i, j) - (1.0 - distance_oracle(e[i].vector, e[j].vector))) < 1e-12);
        CHECK(std::abs(s.phi()(i, j) - s.phi()(j, i)) <= 1e-12);
        CHECK(s.phi()(i, j) >= -1.0);
        CHECK(s.phi()(i, j) <= 1.0);
      }
    }
  }

  TEST_CASE("degenerate embedding names the dataset") {
    std::vector<DatasetEmbedding> e = {{"ok", Eigen::Vector3d(1, 2, 3)}, {"flat", Eigen::Vector3d(4, 4, 4)}};
    try {
      similarity_matrix(e);
      FAIL("expected DegenerateVector");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::DegenerateVector);
      CHECK(std::string(err.what()).find("flat") != std::string::npos);
    }
  }

  TEST_CASE("similarity and embedding files round-trip") {
    test::TempDir dir;
    std::vector<DatasetEmbedding> e = {{"a", Eigen::Vector3d(1, 2, 3.25)}, {"b", Eigen::Vector3d(0.1, -2, 1)}};
    const auto s = similarity_matrix(e);
    write_similarity_csv(s, dir / "similarity.csv");
    const auto back = read_similarity_csv(dir / "similarity.csv");
    CHECK(back.dataset_ids() == s.dataset_ids());
    CHECK(back.phi() == s.phi());
    write_dataset_embedding(e[1], dir / "b.csv");
    CHECK(read_dataset_embedding(dir / "b.csv").vector == e[1].vector);
  }
}
