#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "voronn/kdtree.hpp"
#include "voronn/rng.hpp"

using namespace voronn;

namespace {

// Independent O(nK) oracle: full scan, sort by (squared distance, index).
std::vector<int> brute_force_knn(const Eigen::MatrixXd& pts,
                                 const Eigen::VectorXd& z, int K) {
  std::vector<std::pair<double, int>> all;
  all.reserve(static_cast<std::size_t>(pts.rows()));
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    all.emplace_back((pts.row(i).transpose() - z).squaredNorm(),
                     static_cast<int>(i));
  std::sort(all.begin(), all.end());
  std::vector<int> out;
  for (int i = 0; i < K; ++i) out.push_back(all[static_cast<std::size_t>(i)].second);
  return out;
}

Eigen::MatrixXd random_points(int n, int d, std::uint64_t seed) {
  Eigen::MatrixXd pts(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      pts(i, j) = rng::uniform(seed, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(j));
  return pts;
}

}  // namespace

TEST_CASE("construction") {
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, 1, 0, 0, 1;
  NeighborIndex index(PointSet{pts});
  REQUIRE(index.n() == 3);
  REQUIRE(index.d() == 2);
}

TEST_CASE("empty point set is rejected") {
  Eigen::MatrixXd pts(0, 2);
  REQUIRE_THROWS_AS(NeighborIndex(PointSet{pts}), input_error);
}

TEST_CASE("non-finite coordinates are rejected") {
  Eigen::MatrixXd pts(2, 1);
  pts << 0.0, std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(NeighborIndex(PointSet{pts}), input_error);
}

TEST_CASE("nearest point on a line") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 1.0, 2.0;
  NeighborIndex index(PointSet{pts});
  Eigen::VectorXd z(1);
  z << 0.6;
  const auto nb = index.k_nearest(z, 1);
  REQUIRE(nb.indices == std::vector<int>{1});
}

TEST_CASE("equidistant tie goes to the smaller index") {
  Eigen::MatrixXd pts(6, 1);
  pts << 10, 10, 1, 10, 10, -1;  // points 2 and 5 both at distance 1 from 0
  NeighborIndex index(PointSet{pts});
  Eigen::VectorXd z(1);
  z << 0.0;
  const auto nb = index.k_nearest(z, 1);
  REQUIRE(nb.indices == std::vector<int>{2});
}

TEST_CASE("K out of range is rejected") {
  Eigen::MatrixXd pts = random_points(5, 2, 1);
  NeighborIndex index(PointSet{pts});
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
  REQUIRE_THROWS_AS(index.k_nearest(z, 0), input_error);
  REQUIRE_THROWS_AS(index.k_nearest(z, 6), input_error);
}

TEST_CASE("matches brute force on random queries, K=30") {
  const int n = 10000, d = 3, K = 30;
  const Eigen::MatrixXd pts = random_points(n, d, 7);
  NeighborIndex index(PointSet{pts});
  for (int q = 0; q < 1000; ++q) {
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j)
      z[j] = rng::uniform(99, static_cast<std::uint64_t>(q),
                          static_cast<std::uint64_t>(j));
    const auto nb = index.k_nearest(z, K);
    REQUIRE(nb.indices == brute_force_knn(pts, z, K));
    for (int i = 1; i < K; ++i)
      REQUIRE(nb.distances[static_cast<std::size_t>(i - 1)] <=
              nb.distances[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("duplicate coordinates still produce exact, deterministic sets") {
  Eigen::MatrixXd pts(8, 2);
  pts << 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3;
  NeighborIndex index(PointSet{pts});
  Eigen::VectorXd z(2);
  z << 0.1, 0.1;
  const auto nb = index.k_nearest(z, 4);
  REQUIRE(nb.indices == brute_force_knn(pts, z, 4));
  REQUIRE(nb.indices == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("repeated queries are identical") {
  const Eigen::MatrixXd pts = random_points(500, 2, 3);
  NeighborIndex index(PointSet{pts});
  Eigen::VectorXd z(2);
  z << 0.4, 0.6;
  const auto a = index.k_nearest(z, 7);
  const auto b = index.k_nearest(z, 7);
  REQUIRE(a.indices == b.indices);
  REQUIRE(a.distances == b.distances);
}

TEST_CASE("every MC point is assigned exactly one neighbor set") {
  // The K-th order cells cover the box up to measure zero: each query point
  // yields one well-defined index set of size K.
  const Eigen::MatrixXd pts = random_points(2000, 2, 11);
  NeighborIndex index(PointSet{pts});
  const int m = 500, K = 5;
  int assigned = 0;
  for (int q = 0; q < m; ++q) {
    Eigen::VectorXd z(2);
    for (int j = 0; j < 2; ++j)
      z[j] = rng::uniform(17, static_cast<std::uint64_t>(q),
                          static_cast<std::uint64_t>(j));
    const auto nb = index.k_nearest(z, K);
    std::vector<int> sorted = nb.indices;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    REQUIRE(static_cast<int>(sorted.size()) == K);
    ++assigned;
  }
  REQUIRE(assigned == m);
}
