#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "voronn/errors.hpp"
#include "voronn/estimators.hpp"
#include "voronn/parallel.hpp"
#include "voronn/rng.hpp"

namespace voronn {

// Simulation scenarios: covariate law, regression function, noise level and
// integration region.
struct Scenario {
  std::string id;  // f1_box, f1_full, f2_box, custom
  int d = 0;
  BoxSupport support;
  double noise_sd = 0.0;
  std::string covariate_law;
  std::function<double(const Eigen::VectorXd&)> regression_fn;
  std::function<void(rng::Stream&, Eigen::VectorXd&)> covariate_sampler;
};

inline double f1_regression(const Eigen::VectorXd& z) {
  return std::exp(2.0 * std::cos(7.0 * z[0]) * std::sin(7.0 * z[1])) *
         (4.0 - 8.0 * (z[2] - 0.5) * (z[2] - 0.5));
}

inline double f2_regression(const Eigen::VectorXd& z) {
  return z[0] * z[1] * z[1] - 1.0 + std::cos(z[0] / z[1]);
}

// Z ~ Beta(3,3)^3 componentwise, Y = f1(Z) + 0.4 eps, S* = [0.2,0.8]^3.
inline Scenario scenario_f1_box() {
  Scenario s;
  s.id = "f1_box";
  s.d = 3;
  s.support = BoxSupport(Eigen::VectorXd::Constant(3, 0.2),
                         Eigen::VectorXd::Constant(3, 0.8));
  s.noise_sd = 0.4;
  s.covariate_law = "Beta(3,3)^3";
  s.regression_fn = f1_regression;
  s.covariate_sampler = [](rng::Stream& st, Eigen::VectorXd& z) {
    for (Eigen::Index k = 0; k < 3; ++k) z[k] = st.beta_int(3, 3);
  };
  return s;
}

// Full-support variant: Z from the equal-weight mixture of Uniform[0,1]^3
// and Beta(3,3)^3, S* = [0,1]^3. The noise level 0.4 is carried over from
// the base scenario.
inline Scenario scenario_f1_full() {
  Scenario s;
  s.id = "f1_full";
  s.d = 3;
  s.support = BoxSupport(Eigen::VectorXd::Constant(3, 0.0),
                         Eigen::VectorXd::Constant(3, 1.0));
  s.noise_sd = 0.4;
  s.covariate_law = "0.5*Uniform[0,1]^3 + 0.5*Beta(3,3)^3";
  s.regression_fn = f1_regression;
  s.covariate_sampler = [](rng::Stream& st, Eigen::VectorXd& z) {
    const bool uniform_component = st.uniform() < 0.5;
    for (Eigen::Index k = 0; k < 3; ++k)
      z[k] = uniform_component ? st.uniform() : st.beta_int(3, 3);
  };
  return s;
}

// d=2 scenario: Z ~ Beta(3,3)^2, Y = f2(Z) + 0.2 eps, S* = [0.2,0.8]^2.
inline Scenario scenario_f2_box() {
  Scenario s;
  s.id = "f2_box";
  s.d = 2;
  s.support = BoxSupport(Eigen::VectorXd::Constant(2, 0.2),
                         Eigen::VectorXd::Constant(2, 0.8));
  s.noise_sd = 0.2;
  s.covariate_law = "Beta(3,3)^2";
  s.regression_fn = f2_regression;
  s.covariate_sampler = [](rng::Stream& st, Eigen::VectorXd& z) {
    for (Eigen::Index k = 0; k < 2; ++k) z[k] = st.beta_int(3, 3);
  };
  return s;
}

inline Scenario scenario_by_id(const std::string& id) {
  if (id == "f1_box") return scenario_f1_box();
  if (id == "f1_full") return scenario_f1_full();
  if (id == "f2_box") return scenario_f2_box();
  throw input_error("unknown scenario id: " + id);
}

// Row i of the sample owns RNG stream i; covariate draws come first, the
// noise draw last, so samples replay bit-exactly for a fixed seed.
inline Sample generate_scenario(const Scenario& scenario, std::int64_t n,
                                std::uint64_t seed) {
  if (n < 1) throw input_error("sample size must be at least 1");
  Sample sample;
  sample.Z.resize(n, scenario.d);
  sample.Y.resize(n);
  for (std::int64_t i = 0; i < n; ++i) {
    rng::Stream st(seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd z(scenario.d);
    scenario.covariate_sampler(st, z);
    sample.Z.row(i) = z.transpose();
    sample.Y[i] = scenario.regression_fn(z) + scenario.noise_sd * st.normal();
  }
  return sample;
}

struct OracleResult {
  double value = 0.0;
  double last_delta = 0.0;  // change at the final panel doubling
  int panels = 0;           // panels per dimension at convergence
};

namespace detail {

// 10-point Gauss-Legendre nodes/weights on [-1,1].
inline const std::vector<std::pair<double, double>>& gl10() {
  static const std::vector<std::pair<double, double>> nw = {
      {-0.9739065285171717, 0.0666713443086881},
      {-0.8650633666889845, 0.1494513491505806},
      {-0.6794095682990244, 0.2190863625159820},
      {-0.4333953941292472, 0.2692667193099963},
      {-0.1488743389816312, 0.2955242247147529},
      {0.1488743389816312, 0.2955242247147529},
      {0.4333953941292472, 0.2692667193099963},
      {0.6794095682990244, 0.2190863625159820},
      {0.8650633666889845, 0.1494513491505806},
      {0.9739065285171717, 0.0666713443086881}};
  return nw;
}

inline double tensor_quadrature(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const BoxSupport& box, int panels) {
  const int d = static_cast<int>(box.d());
  const auto& nw = gl10();
  const int q = static_cast<int>(nw.size());
  // Per-dimension node/weight tables over all panels.
  std::vector<std::vector<double>> nodes(d), weights(d);
  for (int k = 0; k < d; ++k) {
    const double width = (box.upper[k] - box.lower[k]) / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = box.lower[k] + p * width;
      for (int i = 0; i < q; ++i) {
        nodes[k].push_back(a + 0.5 * width * (nw[i].first + 1.0));
        weights[k].push_back(0.5 * width * nw[i].second);
      }
    }
  }
  const std::size_t per_dim = nodes[0].size();
  std::vector<std::size_t> idx(d, 0);
  Eigen::VectorXd x(d);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      x[k] = nodes[k][idx[k]];
      w *= weights[k][idx[k]];
    }
    total += w * fn(x);
    int pos = d - 1;
    while (pos >= 0 && idx[pos] == per_dim - 1) idx[pos--] = 0;
    if (pos < 0) break;
    ++idx[pos];
  }
  return total;
}

}  // namespace detail

// Integral of the regression function over S* by panel-refined tensor
// Gauss-Legendre quadrature; the convergence certificate (delta at the last
// doubling) travels with the value.
inline OracleResult true_value_oracle(const Scenario& scenario,
                                      double abs_tol = 1e-6) {
  if (!(abs_tol > 0.0)) throw input_error("oracle tolerance must be positive");
  double prev = detail::tensor_quadrature(scenario.regression_fn,
                                          scenario.support, 1);
  for (int panels = 2; panels <= 32; panels *= 2) {
    const double cur = detail::tensor_quadrature(scenario.regression_fn,
                                                 scenario.support, panels);
    const double delta = std::abs(cur - prev);
    if (delta < abs_tol) return {cur, delta, panels};
    prev = cur;
  }
  throw numeric_error("quadrature oracle did not converge to the requested "
                      "tolerance within the panel budget");
}

struct SummaryRow {
  std::string scenario;
  std::int64_t n = 0;
  int L = 0;
  int K = 0;
  std::int64_t N = 0;
  std::int64_t m = 0;
  double true_value = 0.0;
  double sqrtn_bias = 0.0;
  double sqrtn_stdv = 0.0;  // sample stdev (N-1 denominator)
  double sqrtn_rmse = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  std::uint64_t seed = 0;
};

struct ReplicationResult {
  SummaryRow row;
  std::vector<double> errors;              // PsiHat_r - Psi_true
  std::vector<double> standardized_errors; // (e_r - mean) / sd
};

// N independent replicates of the Psi estimator on freshly generated data.
// Replicate r derives its own sample and estimator seeds from the master
// seed, so execution order and worker count do not change the output.
inline ReplicationResult run_replications(const Scenario& scenario,
                                          std::int64_t n, std::int64_t N,
                                          int L, int K, std::int64_t m,
                                          std::uint64_t master_seed,
                                          int workers = 0,
                                          double oracle_tol = 1e-4) {
  if (N < 1) throw input_error("replication count must be at least 1");
  if (K > n) throw input_error("K exceeds the sample size");
  if (workers <= 0) workers = default_workers();

  const OracleResult truth = true_value_oracle(scenario, oracle_tol);

  std::vector<double> errors(static_cast<std::size_t>(N));
  std::vector<std::string> failures(static_cast<std::size_t>(N));
  parallel_for(static_cast<std::size_t>(N), workers, [&](std::size_t r) {
    try {
      const std::uint64_t sample_seed =
          rng::derive_seed(master_seed, 1, static_cast<std::uint64_t>(r));
      const std::uint64_t est_seed =
          rng::derive_seed(master_seed, 2, static_cast<std::uint64_t>(r));
      const Sample sample = generate_scenario(scenario, n, sample_seed);
      const EstimateReport rep =
          estimate_psi(sample, scenario.support, L, K, m, est_seed, 1);
      errors[r] = rep.estimate - truth.value;
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "replicate " << r << ": " << e.what();
      failures[r] = os.str();
    }
  });
  for (const auto& f : failures)
    if (!f.empty()) throw numeric_error(f);

  const double Nd = static_cast<double>(N);
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= Nd;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, ss = 0.0;
  for (double e : errors) {
    const double c = e - mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
    ss += e * e;
  }
  m2 /= Nd;
  m3 /= Nd;
  m4 /= Nd;
  const double sample_sd = N > 1 ? std::sqrt(m2 * Nd / (Nd - 1.0)) : 0.0;
  const double pop_sd = std::sqrt(m2);
  const double sqrtn = std::sqrt(static_cast<double>(n));

  ReplicationResult result;
  result.row.scenario = scenario.id;
  result.row.n = n;
  result.row.L = L;
  result.row.K = K;
  result.row.N = N;
  result.row.m = m;
  result.row.true_value = truth.value;
  result.row.sqrtn_bias = sqrtn * mean;
  result.row.sqrtn_stdv = sqrtn * sample_sd;
  result.row.sqrtn_rmse = sqrtn * std::sqrt(ss / Nd);
  result.row.skewness = pop_sd > 0.0 ? m3 / (pop_sd * pop_sd * pop_sd) : 0.0;
  result.row.excess_kurtosis =
      pop_sd > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  result.row.seed = master_seed;
  result.errors = errors;
  result.standardized_errors.resize(errors.size());
  for (std::size_t r = 0; r < errors.size(); ++r)
    result.standardized_errors[r] =
        sample_sd > 0.0 ? (errors[r] - mean) / sample_sd : 0.0;
  return result;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace detail

// csv: one flat record per row. markdown: the paper-table orientation, one
// column per K value with BIAS/STDV/RMSE lines, grouped by (scenario, n, L).
inline std::string emit_table(const std::vector<SummaryRow>& rows,
                              const std::string& format) {
  if (rows.empty()) throw input_error("no summary rows to emit");
  std::ostringstream os;
  if (format == "csv") {
    os << "scenario,n,N,L,K,m,true_value,sqrtn_bias,sqrtn_stdv,sqrtn_rmse,"
          "skewness,excess_kurtosis,seed\n";
    for (const auto& r : rows) {
      os << r.scenario << ',' << r.n << ',' << r.N << ',' << r.L << ',' << r.K
         << ',' << r.m << ',' << detail::fmt(r.true_value) << ','
         << detail::fmt(r.sqrtn_bias) << ',' << detail::fmt(r.sqrtn_stdv)
         << ',' << detail::fmt(r.sqrtn_rmse) << ','
         << detail::fmt(r.skewness) << ',' << detail::fmt(r.excess_kurtosis)
         << ',' << r.seed << '\n';
    }
    return os.str();
  }
  if (format != "markdown") throw input_error("unknown table format: " + format);

  // Group consecutive rows sharing (scenario, n, L).
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].scenario == rows[i].scenario &&
           rows[j].n == rows[i].n && rows[j].L == rows[i].L)
      ++j;
    os << "### " << rows[i].scenario << ", n=" << rows[i].n
       << ", L=" << rows[i].L << "\n\n";
    os << "| K |";
    for (std::size_t k = i; k < j; ++k) os << ' ' << rows[k].K << " |";
    os << "\n|---|";
    for (std::size_t k = i; k < j; ++k) os << "---|";
    os << "\n| sqrt(n) BIAS |";
    for (std::size_t k = i; k < j; ++k)
      os << ' ' << detail::fmt4(rows[k].sqrtn_bias) << " |";
    os << "\n| sqrt(n) STDV |";
    for (std::size_t k = i; k < j; ++k)
      os << ' ' << detail::fmt4(rows[k].sqrtn_stdv) << " |";
    os << "\n| sqrt(n) RMSE |";
    for (std::size_t k = i; k < j; ++k)
      os << ' ' << detail::fmt4(rows[k].sqrtn_rmse) << " |";
    os << "\n\n";
    i = j;
  }
  return os.str();
}

}  // namespace voronn
