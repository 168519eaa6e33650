#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "voronn/errors.hpp"

namespace voronn {

// Ordered multi-index basis for polynomials of total degree <= L in d
// variables. Graded lexicographic, zero index first; the ordering is fixed
// so serialized weights are reproducible.
struct MultiIndexBasis {
  int d = 0;
  int L = 0;
  std::vector<std::vector<int>> kappas;
  int Kstar = 0;  // #kappas = C(d+L, L)
  int D = 0;      // degree-weighted count = d * C(d+L, L-1)
};

namespace detail {

inline long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline void enumerate_rec(int d, int pos, int remaining,
                          std::vector<int>& current,
                          std::vector<std::vector<int>>& out) {
  if (pos == d) {
    out.push_back(current);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    current[pos] = v;
    enumerate_rec(d, pos + 1, remaining - v, current, out);
  }
  current[pos] = 0;
}

}  // namespace detail

inline MultiIndexBasis multi_index_set(int d, int L) {
  if (d < 1) throw input_error("dimension must be at least 1");
  if (L < 0) throw input_error("degree must be nonnegative");
  MultiIndexBasis basis;
  basis.d = d;
  basis.L = L;
  basis.Kstar = static_cast<int>(detail::binom(d + L, L));
  basis.D = d * static_cast<int>(detail::binom(d + L, L - 1));
  // Degree by degree, lexicographic within each degree; degree 0 comes first.
  std::vector<int> current(d, 0);
  for (int l = 0; l <= L; ++l) {
    std::vector<std::vector<int>> level;
    detail::enumerate_rec(d, 0, l, current, level);
    for (auto& kappa : level) {
      int total = 0;
      for (int v : kappa) total += v;
      if (total == l) basis.kappas.push_back(kappa);
    }
  }
  return basis;
}

// Theoretical minimal K for the stated risk bounds: any K >= 1 when L = 0,
// else 2 + (2D+1) * Kstar. The simulations in practice use smaller K; the
// estimator layer only warns below this value.
inline int recommended_K(int d, int L) {
  if (L == 0) return 1;
  const MultiIndexBasis b = multi_index_set(d, L);
  return 2 + (2 * b.D + 1) * b.Kstar;
}

// Weights w_j such that the local least-squares polynomial fit of degree L
// on the given neighbors, evaluated at the center, equals sum_j w_j * y_j.
struct LocalWeights {
  Eigen::VectorXd center;
  std::vector<int> neighbor_indices;
  Eigen::VectorXd weights;
  double scale = 1.0;
  bool fallback = false;
};

namespace detail {

inline double monomial(const std::vector<int>& kappa,
                       const Eigen::VectorXd& v) {
  double r = 1.0;
  for (int k = 0; k < static_cast<int>(kappa.size()); ++k)
    for (int p = 0; p < kappa[k]; ++p) r *= v[k];
  return r;
}

}  // namespace detail

// Relative pivot threshold below which the design matrix is treated as
// singular and the fit falls back to the L=0 average.
inline constexpr double kPivotThreshold = 1e-10;

inline LocalWeights local_fit_weights(const MultiIndexBasis& basis,
                                      const Eigen::VectorXd& z,
                                      const Eigen::MatrixXd& neighbors,
                                      std::vector<int> neighbor_indices = {}) {
  const int K = static_cast<int>(neighbors.rows());
  if (neighbors.cols() != basis.d || z.size() != basis.d)
    throw input_error("neighbor dimension does not match basis dimension");
  if (basis.L >= 1 && K < basis.Kstar)
    throw input_error("insufficient neighbors for degree L");
  if (basis.L == 0 && K < 1)
    throw input_error("at least one neighbor required");

  LocalWeights out;
  out.center = z;
  out.neighbor_indices = std::move(neighbor_indices);

  if (basis.L == 0) {
    out.weights = Eigen::VectorXd::Constant(K, 1.0 / K);
    return out;
  }

  // Center at z and rescale by the largest neighbor distance; raw monomials
  // at cell scale make the Gram matrix arbitrarily ill-conditioned as n
  // grows, and the weights are invariant under this diagonal rescaling.
  double scale = 0.0;
  for (int j = 0; j < K; ++j)
    scale = std::max(scale, (neighbors.row(j).transpose() - z).norm());
  if (scale == 0.0) scale = 1.0;
  out.scale = scale;

  Eigen::MatrixXd xi(basis.Kstar, K);
  for (int j = 0; j < K; ++j) {
    const Eigen::VectorXd v = (neighbors.row(j).transpose() - z) / scale;
    for (int a = 0; a < basis.Kstar; ++a)
      xi(a, j) = detail::monomial(basis.kappas[a], v);
  }
  const Eigen::MatrixXd M = xi * xi.transpose();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  const Eigen::VectorXd diag = ldlt.vectorD();
  const double dmax = diag.cwiseAbs().maxCoeff();
  const double dmin = diag.cwiseAbs().minCoeff();
  if (ldlt.info() != Eigen::Success || !(dmin > kPivotThreshold * dmax)) {
    out.fallback = true;
    out.weights = Eigen::VectorXd::Constant(K, 1.0 / K);
    return out;
  }

  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(basis.Kstar);
  e0[0] = 1.0;
  Eigen::VectorXd u = ldlt.solve(e0);
  u += ldlt.solve(e0 - M * u);
  out.weights = xi.transpose() * u;
  // The exact weights reproduce constants, so their sum is 1; rescaling by
  // the computed sum removes the solve's conditioning error from the sum.
  const double wsum = out.weights.sum();
  if (!(std::abs(wsum) > 0.5)) {
    out.fallback = true;
    out.weights = Eigen::VectorXd::Constant(K, 1.0 / K);
    return out;
  }
  out.weights /= wsum;
  return out;
}

// Weighted response sum; weights are real so complex responses pass through.
template <typename Scalar>
Scalar evaluate_local_fit(const LocalWeights& w,
                          const std::vector<Scalar>& responses) {
  if (static_cast<Eigen::Index>(responses.size()) != w.weights.size())
    throw input_error("response count does not match weight count");
  Scalar acc{};
  for (Eigen::Index j = 0; j < w.weights.size(); ++j)
    acc += responses[static_cast<std::size_t>(j)] * w.weights[j];
  return acc;
}

inline double evaluate_local_fit(const LocalWeights& w,
                                 const Eigen::VectorXd& responses) {
  if (responses.size() != w.weights.size())
    throw input_error("response count does not match weight count");
  return w.weights.dot(responses);
}

}  // namespace voronn
