#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "voronn/local_poly.hpp"
#include "voronn/rng.hpp"

using namespace voronn;

namespace {

Eigen::MatrixXd random_neighbors(int K, int d, std::uint64_t seed,
                                 std::uint64_t stream) {
  Eigen::MatrixXd nb(K, d);
  rng::Stream st(seed, stream);
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < d; ++k) nb(j, k) = 2.0 * st.uniform() - 1.0;
  return nb;
}

double monomial_at(const std::vector<int>& kappa, const Eigen::VectorXd& v) {
  double r = 1.0;
  for (std::size_t k = 0; k < kappa.size(); ++k)
    r *= std::pow(v[static_cast<Eigen::Index>(k)], kappa[k]);
  return r;
}

// Independent oracle: explicitly assemble and solve the normal equations
// M gamma = G-hat with a dense pivoted solver, then read the constant
// coefficient. Same centering/rescaling convention as the weight path, but
// none of its code.
double normal_equations_fit(const MultiIndexBasis& basis,
                            const Eigen::VectorXd& z,
                            const Eigen::MatrixXd& neighbors,
                            const Eigen::VectorXd& responses) {
  const int K = static_cast<int>(neighbors.rows());
  double scale = 0.0;
  for (int j = 0; j < K; ++j)
    scale = std::max(scale, (neighbors.row(j).transpose() - z).norm());
  if (scale == 0.0) scale = 1.0;
  Eigen::MatrixXd X(K, basis.Kstar);
  for (int j = 0; j < K; ++j) {
    const Eigen::VectorXd v = (neighbors.row(j).transpose() - z) / scale;
    for (int a = 0; a < basis.Kstar; ++a)
      X(j, a) = monomial_at(basis.kappas[static_cast<std::size_t>(a)], v);
  }
  const Eigen::MatrixXd M = X.transpose() * X;
  const Eigen::VectorXd g = X.transpose() * responses;
  const Eigen::VectorXd gamma = M.fullPivLu().solve(g);
  return gamma[0];
}

}  // namespace

TEST_CASE("multi-index enumeration matches the closed-form counts") {
  SECTION("d=2, L=1") {
    const auto b = multi_index_set(2, 1);
    REQUIRE(b.kappas ==
            std::vector<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}});
    REQUIRE(b.Kstar == 3);
    REQUIRE(b.D == 2);
  }
  SECTION("d=1, L=2") {
    const auto b = multi_index_set(1, 2);
    REQUIRE(b.kappas == std::vector<std::vector<int>>{{0}, {1}, {2}});
    REQUIRE(b.Kstar == 3);
    REQUIRE(b.D == 3);  // 1 * C(3,1)
  }
  SECTION("d=3, L=1") {
    const auto b = multi_index_set(3, 1);
    REQUIRE(b.Kstar == 4);
    REQUIRE(b.D == 3);
  }
  SECTION("zero index comes first and counts agree in general") {
    for (int d = 1; d <= 4; ++d) {
      for (int L = 0; L <= 3; ++L) {
        const auto b = multi_index_set(d, L);
        REQUIRE(static_cast<int>(b.kappas.size()) == b.Kstar);
        for (int v : b.kappas[0]) REQUIRE(v == 0);
        for (const auto& kappa : b.kappas) {
          int total = 0;
          for (int v : kappa) total += v;
          REQUIRE(total <= L);
        }
      }
    }
  }
}

TEST_CASE("recommended K") {
  REQUIRE(recommended_K(2, 1) == 17);
  REQUIRE(recommended_K(3, 1) == 30);
  REQUIRE(recommended_K(5, 0) == 1);
}

TEST_CASE("L=0 weights are uniform") {
  const auto basis = multi_index_set(3, 0);
  const Eigen::MatrixXd nb = random_neighbors(7, 3, 1, 0);
  const auto w = local_fit_weights(basis, Eigen::VectorXd::Zero(3), nb);
  for (int j = 0; j < 7; ++j)
    REQUIRE(w.weights[j] == Catch::Approx(1.0 / 7.0).margin(1e-15));
  REQUIRE_FALSE(w.fallback);
}

TEST_CASE("hand-solved d=1 L=1 symmetric pair") {
  const auto basis = multi_index_set(1, 1);
  Eigen::MatrixXd nb(2, 1);
  nb << -1.0, 1.0;
  const auto w = local_fit_weights(basis, Eigen::VectorXd::Zero(1), nb);
  REQUIRE(w.weights[0] == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(w.weights[1] == Catch::Approx(0.5).margin(1e-12));
  Eigen::VectorXd resp(2);
  resp << 3.0, 5.0;
  REQUIRE(evaluate_local_fit(w, resp) == Catch::Approx(4.0).margin(1e-12));
  resp << -2.5, 2.5;
  REQUIRE(evaluate_local_fit(w, resp) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("too few neighbors for the degree is rejected") {
  const auto basis = multi_index_set(2, 1);  // Kstar = 3
  const Eigen::MatrixXd nb = random_neighbors(2, 2, 1, 1);
  REQUIRE_THROWS_AS(local_fit_weights(basis, Eigen::VectorXd::Zero(2), nb),
                    input_error);
}

TEST_CASE("weight sum is 1 on 10^4 random configurations") {
  const auto basis = multi_index_set(2, 1);
  for (int t = 0; t < 10000; ++t) {
    const Eigen::MatrixXd nb =
        random_neighbors(6, 2, 21, static_cast<std::uint64_t>(t));
    rng::Stream st(22, static_cast<std::uint64_t>(t));
    Eigen::VectorXd z(2);
    z << st.uniform(), st.uniform();
    const auto w = local_fit_weights(basis, z, nb);
    REQUIRE(w.weights.sum() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("polynomial reproduction within 1e-10 relative") {
  const std::vector<std::pair<int, int>> settings = {{2, 1}, {3, 1}, {2, 2}};
  for (const auto& [d, L] : settings) {
    const auto basis = multi_index_set(d, L);
    const int K = basis.Kstar + 4;
    int tested = 0;
    for (int t = 0; tested < 1000; ++t) {
      const Eigen::MatrixXd nb =
          random_neighbors(K, d, 31 + d + 10 * L, static_cast<std::uint64_t>(t));
      rng::Stream st(37 + d, static_cast<std::uint64_t>(t));
      Eigen::VectorXd z(d);
      for (int k = 0; k < d; ++k) z[k] = 2.0 * st.uniform() - 1.0;
      // Random polynomial of total degree <= L in the basis enumeration.
      Eigen::VectorXd coef(basis.Kstar);
      for (int a = 0; a < basis.Kstar; ++a) coef[a] = 2.0 * st.uniform() - 1.0;
      auto poly = [&](const Eigen::VectorXd& x) {
        double s = 0.0;
        for (int a = 0; a < basis.Kstar; ++a)
          s += coef[a] * monomial_at(basis.kappas[static_cast<std::size_t>(a)], x);
        return s;
      };
      const auto w = local_fit_weights(basis, z, nb);
      if (w.fallback) continue;  // degenerate random configuration
      Eigen::VectorXd resp(K);
      for (int j = 0; j < K; ++j) resp[j] = poly(nb.row(j).transpose());
      const double expected = poly(z);
      const double got = evaluate_local_fit(w, resp);
      REQUIRE(got == Catch::Approx(expected)
                         .epsilon(1e-10)
                         .margin(1e-10 * (1.0 + std::abs(expected))));
      ++tested;
    }
  }
}

TEST_CASE("scale and translation invariance of the weights") {
  const auto basis = multi_index_set(3, 1);
  for (int t = 0; t < 200; ++t) {
    const Eigen::MatrixXd nb =
        random_neighbors(8, 3, 41, static_cast<std::uint64_t>(t));
    rng::Stream st(43, static_cast<std::uint64_t>(t));
    Eigen::VectorXd z(3);
    for (int k = 0; k < 3; ++k) z[k] = st.uniform();
    const auto w0 = local_fit_weights(basis, z, nb);

    const double c = 0.01 + 5.0 * st.uniform();
    Eigen::MatrixXd scaled = nb;
    for (int j = 0; j < 8; ++j)
      scaled.row(j) = z.transpose() + c * (nb.row(j) - z.transpose());
    const auto ws = local_fit_weights(basis, z, scaled);
    for (int j = 0; j < 8; ++j)
      REQUIRE(ws.weights[j] == Catch::Approx(w0.weights[j]).margin(1e-12));

    Eigen::VectorXd shift(3);
    for (int k = 0; k < 3; ++k) shift[k] = 10.0 * st.uniform() - 5.0;
    Eigen::MatrixXd shifted = nb;
    for (int j = 0; j < 8; ++j) shifted.row(j) += shift.transpose();
    const auto wt = local_fit_weights(basis, z + shift, shifted);
    for (int j = 0; j < 8; ++j)
      REQUIRE(wt.weights[j] == Catch::Approx(w0.weights[j]).margin(1e-12));
  }
}

TEST_CASE("weight path equals the explicit normal-equations solve") {
  const auto basis = multi_index_set(2, 1);
  for (int t = 0; t < 500; ++t) {
    const Eigen::MatrixXd nb =
        random_neighbors(6, 2, 51, static_cast<std::uint64_t>(t));
    rng::Stream st(53, static_cast<std::uint64_t>(t));
    Eigen::VectorXd z(2);
    z << st.uniform(), st.uniform();
    Eigen::VectorXd resp(6);
    for (int j = 0; j < 6; ++j) resp[j] = 4.0 * st.uniform() - 2.0;
    const auto w = local_fit_weights(basis, z, nb);
    if (w.fallback) continue;
    const double via_weights = evaluate_local_fit(w, resp);
    const double via_solve = normal_equations_fit(basis, z, nb, resp);
    REQUIRE(via_weights == Catch::Approx(via_solve).margin(1e-9));
  }
}

TEST_CASE("degenerate configurations fall back to the L=0 average") {
  const auto basis = multi_index_set(2, 1);
  // All neighbors on a vertical line: the x-coordinate column vanishes.
  Eigen::MatrixXd nb(4, 2);
  nb << 0.5, 0.1, 0.5, 0.2, 0.5, 0.3, 0.5, 0.4;
  Eigen::VectorXd z(2);
  z << 0.5, 0.25;
  const auto w = local_fit_weights(basis, z, nb);
  REQUIRE(w.fallback);
  for (int j = 0; j < 4; ++j)
    REQUIRE(w.weights[j] == Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("coincident neighbors do not divide by zero") {
  const auto basis = multi_index_set(2, 1);
  Eigen::MatrixXd nb(4, 2);
  Eigen::VectorXd z(2);
  z << 0.3, 0.7;
  for (int j = 0; j < 4; ++j) nb.row(j) = z.transpose();
  const auto w = local_fit_weights(basis, z, nb);
  REQUIRE(w.fallback);
  REQUIRE(w.scale == 1.0);
  REQUIRE(w.weights.sum() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("complex responses pass through the real weights") {
  const auto basis = multi_index_set(2, 1);
  const Eigen::MatrixXd nb = random_neighbors(6, 2, 61, 0);
  const auto w = local_fit_weights(basis, Eigen::VectorXd::Zero(2), nb);
  std::vector<std::complex<double>> resp(6, {2.0, -1.0});
  const auto val = evaluate_local_fit(w, resp);
  REQUIRE(val.real() == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(val.imag() == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("response length mismatch is rejected") {
  const auto basis = multi_index_set(2, 0);
  const Eigen::MatrixXd nb = random_neighbors(5, 2, 71, 0);
  const auto w = local_fit_weights(basis, Eigen::VectorXd::Zero(2), nb);
  Eigen::VectorXd resp(4);
  resp.setZero();
  REQUIRE_THROWS_AS(evaluate_local_fit(w, resp), input_error);
}
