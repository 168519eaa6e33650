#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <sstream>
#include <vector>

#include "voronn/errors.hpp"
#include "voronn/estimators.hpp"

namespace voronn {

// All multi-indices j in {-Jn,...,Jn}^d, odometer order (last coordinate
// fastest). Contains 0 and is symmetric under negation.
struct FourierIndexGrid {
  int Jn = 0;
  int d = 0;
  std::vector<std::vector<int>> indices;

  static FourierIndexGrid make(int Jn, int d) {
    if (Jn < 0) throw input_error("cutoff Jn must be nonnegative");
    if (d < 1) throw input_error("dimension must be at least 1");
    FourierIndexGrid g;
    g.Jn = Jn;
    g.d = d;
    const int side = 2 * Jn + 1;
    std::size_t count = 1;
    for (int k = 0; k < d; ++k) count *= static_cast<std::size_t>(side);
    g.indices.reserve(count);
    std::vector<int> j(d, -Jn);
    for (;;) {
      g.indices.push_back(j);
      int pos = d - 1;
      while (pos >= 0 && j[pos] == Jn) j[pos--] = -Jn;
      if (pos < 0) break;
      ++j[pos];
    }
    return g;
  }

  std::size_t size() const { return indices.size(); }

  // Position of a multi-index; odometer layout gives a closed form.
  std::size_t position(const std::vector<int>& j) const {
    std::size_t pos = 0;
    const std::size_t side = static_cast<std::size_t>(2 * Jn + 1);
    for (int k = 0; k < d; ++k) {
      if (j[k] < -Jn || j[k] > Jn)
        throw input_error("multi-index outside grid range");
      pos = pos * side + static_cast<std::size_t>(j[k] + Jn);
    }
    return pos;
  }

  std::vector<int> negate(const std::vector<int>& j) const {
    std::vector<int> out(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) out[k] = -j[k];
    return out;
  }
};

// Complex coefficient table aligned with a grid.
struct FourierTable {
  FourierIndexGrid grid;
  std::vector<std::complex<double>> values;

  std::complex<double> at(const std::vector<int>& j) const {
    return values[grid.position(j)];
  }
};

using FourierEstimate = FourierTable;

// Known error density, given through its Fourier coefficients.
struct ErrorDensitySpec {
  std::function<std::complex<double>(const std::vector<int>&)> ft;
  double gamma = 0.0;
  double c_delta = 0.0;
  double C_delta = 0.0;
};

inline ErrorDensitySpec identity_error_spec() {
  ErrorDensitySpec spec;
  spec.ft = [](const std::vector<int>&) { return std::complex<double>(1.0, 0.0); };
  spec.gamma = 0.0;
  return spec;
}

// Product of centered Laplace densities with scale b per coordinate:
// coefficients 1 / prod_k (1 + b^2 j_k^2).
inline ErrorDensitySpec product_laplace_error_spec(double b) {
  if (!(b > 0.0)) throw input_error("Laplace scale must be positive");
  ErrorDensitySpec spec;
  spec.ft = [b](const std::vector<int>& j) {
    double denom = 1.0;
    for (int jk : j) denom *= 1.0 + b * b * static_cast<double>(jk) *
                                  static_cast<double>(jk);
    return std::complex<double>(1.0 / denom, 0.0);
  };
  spec.gamma = 2.0;
  return spec;
}

namespace detail {

inline std::complex<double> fourier_mode(const std::vector<int>& j,
                                         const Eigen::VectorXd& x) {
  double t = 0.0;
  for (std::size_t k = 0; k < j.size(); ++k)
    t += static_cast<double>(j[k]) * x[static_cast<Eigen::Index>(k)];
  return {std::cos(t), std::sin(t)};
}

inline std::string index_to_string(const std::vector<int>& j) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < j.size(); ++k)
    os << (k ? "," : "") << j[k];
  os << ")";
  return os.str();
}

}  // namespace detail

// Psi-hat_j for every j on the grid, with responses U_i * phi_j(Z_i).
// The kNN pass and the fit weights are response-independent and computed
// once per MC point, then reused across all grid indices; with a fixed seed
// the per-index values are identical whether the grid is estimated in one
// call or index by index.
inline FourierTable estimate_fourier_coefficients(
    const Sample& sample, const BoxSupport& support,
    const FourierIndexGrid& grid, int L, int K, std::int64_t m,
    std::uint64_t seed, int workers = 0) {
  if (sample.d() != support.d() || sample.d() != grid.d)
    throw input_error("sample, support and grid dimensions disagree");
  if (m < 1) throw input_error("MC point count must be at least 1");
  if (workers <= 0) workers = default_workers();

  const LocalFitContext ctx(sample.Z, L, K);
  const std::size_t G = grid.size();
  std::vector<std::complex<double>> contrib(static_cast<std::size_t>(m) * G);

  parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t k) {
    const Eigen::VectorXd x =
        detail::uniform_box_point(support, seed, static_cast<std::uint64_t>(k));
    const LocalWeights w = ctx.weights_at(x);
    for (std::size_t g = 0; g < G; ++g) {
      std::complex<double> acc{0.0, 0.0};
      for (int l = 0; l < K; ++l) {
        const int idx = w.neighbor_indices[l];
        const std::complex<double> phi = detail::fourier_mode(
            grid.indices[g], sample.Z.row(idx).transpose());
        acc += w.weights[l] * sample.Y[idx] * phi;
      }
      contrib[k * G + g] = acc;
    }
  });

  FourierTable out;
  out.grid = grid;
  out.values.assign(G, {0.0, 0.0});
  const double scale = support.volume() / static_cast<double>(m);
  for (std::size_t k = 0; k < static_cast<std::size_t>(m); ++k)
    for (std::size_t g = 0; g < G; ++g) out.values[g] += contrib[k * G + g];
  for (std::size_t g = 0; g < G; ++g) out.values[g] *= scale;
  return out;
}

// h-hat coefficients: c_{-j} = (2pi)^{-d} PsiHat_j / f_delta^ft(-j).
// For real data the table is symmetrized by averaging c_j with the
// conjugate of c_{-j}.
inline FourierEstimate deconvolve(const FourierTable& psi_hat,
                                  const ErrorDensitySpec& error_spec,
                                  const FourierIndexGrid& grid, double tol,
                                  bool real_data = true) {
  if (psi_hat.grid.Jn != grid.Jn || psi_hat.grid.d != grid.d)
    throw input_error("coefficient table grid does not match target grid");
  if (!(tol > 0.0)) throw input_error("spectral tolerance must be positive");

  FourierEstimate est;
  est.grid = grid;
  est.values.assign(grid.size(), {0.0, 0.0});
  const double norm = std::pow(2.0 * 3.14159265358979323846,
                               -static_cast<double>(grid.d));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::vector<int>& j = grid.indices[g];
    const std::vector<int> neg = grid.negate(j);
    const std::complex<double> denom = error_spec.ft(neg);
    if (std::abs(denom) < tol)
      throw numeric_error("spectral division below tolerance at index " +
                          detail::index_to_string(neg));
    est.values[grid.position(neg)] = norm * psi_hat.values[g] / denom;
  }
  if (real_data) {
    std::vector<std::complex<double>> sym(est.values.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::size_t ng = grid.position(grid.negate(grid.indices[g]));
      sym[g] = 0.5 * (est.values[g] + std::conj(est.values[ng]));
    }
    est.values = std::move(sym);
  }
  return est;
}

// Series evaluation at x. For a conjugate-symmetric table the imaginary
// part is numerical noise; a residue beyond 1e-9 relative signals an
// asymmetric table and raises an error when a real value is requested.
inline double evaluate_h(const FourierEstimate& est, const Eigen::VectorXd& x,
                         bool require_real = true) {
  if (x.size() != est.grid.d)
    throw input_error("evaluation point dimension does not match grid");
  std::complex<double> s{0.0, 0.0};
  for (std::size_t g = 0; g < est.grid.size(); ++g)
    s += est.values[g] * detail::fourier_mode(est.grid.indices[g], x);
  if (require_real &&
      std::abs(s.imag()) > 1e-9 * (1.0 + std::abs(s.real())))
    throw numeric_error(
        "asymmetric coefficient table: imaginary residue exceeds tolerance");
  return s.real();
}

// Cutoff rule Jn = max(1, round(c * n^{1/(2 alpha + 2 gamma + d)})).
inline int default_cutoff(std::int64_t n, double alpha, double gamma, int d,
                          double c = 1.0) {
  if (n < 1) throw input_error("sample size must be at least 1");
  if (!(alpha > 0.0)) throw input_error("smoothness alpha must be positive");
  if (gamma < static_cast<double>(d) / 2.0)
    throw input_error(
        "decay exponent gamma must be at least d/2 (square integrability)");
  if (!(c > 0.0)) throw input_error("cutoff scale must be positive");
  const double expo = 1.0 / (2.0 * alpha + 2.0 * gamma + static_cast<double>(d));
  const double jn = c * std::pow(static_cast<double>(n), expo);
  return std::max(1, static_cast<int>(std::llround(jn)));
}

// Degree rule L = ceil(alpha) - 1 when the smoothness is supplied.
inline int default_berkson_degree(double alpha) {
  if (!(alpha > 0.0)) throw input_error("smoothness alpha must be positive");
  return std::max(0, static_cast<int>(std::ceil(alpha)) - 1);
}

// Squared L2 norm of the series over [-pi,pi]^d via Parseval.
inline double l2_norm_squared(const FourierTable& table) {
  double s = 0.0;
  for (const auto& c : table.values) s += std::norm(c);
  return std::pow(2.0 * 3.14159265358979323846,
                  static_cast<double>(table.grid.d)) *
         s;
}

}  // namespace voronn
