#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "voronn/errors.hpp"
#include "voronn/kdtree.hpp"
#include "voronn/local_poly.hpp"
#include "voronn/parallel.hpp"
#include "voronn/rng.hpp"

namespace voronn {

// Regression data: covariates Z (n x d) and one response column.
struct Sample {
  Eigen::MatrixXd Z;
  Eigen::VectorXd Y;

  Eigen::Index n() const { return Z.rows(); }
  Eigen::Index d() const { return Z.cols(); }
};

// Axis-aligned box S*.
struct BoxSupport {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  BoxSupport() = default;
  BoxSupport(Eigen::VectorXd lo, Eigen::VectorXd hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw input_error("support bounds must have equal positive dimension");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
      if (!(lower[i] < upper[i]))
        throw input_error("support lower bound must be below upper bound");
  }

  Eigen::Index d() const { return lower.size(); }

  double volume() const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
    return v;
  }

  bool contains(const Eigen::VectorXd& x) const {
    for (Eigen::Index i = 0; i < lower.size(); ++i)
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
  }
};

struct EstimateReport {
  double estimate = 0.0;
  double mc_std_error = 0.0;
  std::int64_t m = 0;
  std::int64_t n = 0;
  int L = 0;
  int K = 0;
  std::int64_t fallback_count = 0;
  std::uint64_t seed = 0;
  bool below_theoretical_K = false;
};

struct TreatmentDataset {
  Eigen::VectorXd Y;
  Eigen::MatrixXd Z;
  std::vector<int> D;  // 0/1

  Eigen::Index n() const { return Z.rows(); }
  Eigen::Index d() const { return Z.cols(); }
};

struct AttReport {
  double tau_hat = 0.0;
  double tau1_hat = 0.0;
  double tau0_hat = 0.0;
  std::int64_t n1 = 0;
  std::int64_t n0 = 0;
  EstimateReport phi_report;
};

struct AteRegionReport {
  double ey1_region = 0.0;
  double ey0_region = 0.0;
  double tau_region = 0.0;
  double pi_hat = 0.0;
  std::int64_t n1 = 0;
  std::int64_t n0 = 0;
  bool empty_region_treated = false;  // no treated covariates in S*
  bool empty_region_control = false;  // no control covariates in S*
  std::int64_t fallback_count = 0;
};

// Local polynomial fit machinery shared by all functional estimators:
// an exact kNN index over the regression covariates plus the degree-L
// weight solver. Weights do not depend on the responses, so one context
// serves any number of response vectors (used by the Fourier module).
class LocalFitContext {
public:
  LocalFitContext(const Eigen::MatrixXd& covariates, int L, int K)
      : index_(PointSet{covariates}),
        basis_(multi_index_set(static_cast<int>(covariates.cols()), L)),
        K_(K) {
    if (K < 1) throw input_error("K must be at least 1");
    if (K > covariates.rows())
      throw input_error("K exceeds the sample size");
    if (L >= 1 && K < basis_.Kstar)
      throw input_error("insufficient neighbors for degree L");
  }

  const NeighborIndex& index() const { return index_; }
  const MultiIndexBasis& basis() const { return basis_; }
  int K() const { return K_; }
  int L() const { return basis_.L; }
  int d() const { return basis_.d; }

  LocalWeights weights_at(const Eigen::VectorXd& z) const {
    const Neighborhood nb = index_.k_nearest(z, K_);
    Eigen::MatrixXd neigh(K_, basis_.d);
    for (int j = 0; j < K_; ++j)
      neigh.row(j) = index_.points().points.row(nb.indices[j]);
    return local_fit_weights(basis_, z, neigh, nb.indices);
  }

  // Fitted value at z for the given responses over the full sample.
  double fit_at(const Eigen::VectorXd& z, const Eigen::VectorXd& responses,
                bool* fallback = nullptr) const {
    const LocalWeights w = weights_at(z);
    if (fallback) *fallback = w.fallback;
    double acc = 0.0;
    for (int j = 0; j < K_; ++j)
      acc += w.weights[j] * responses[w.neighbor_indices[j]];
    return acc;
  }

private:
  NeighborIndex index_;
  MultiIndexBasis basis_;
  int K_;
};

namespace detail {

// Mean / sample stdev of v, plus a fixed-order sum independent of worker
// count (v is always filled per-index before reduction).
inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

inline constexpr std::uint64_t kMcStreamTag = 0x6d63ULL;  // "mc"

inline Eigen::VectorXd uniform_box_point(const BoxSupport& box,
                                         std::uint64_t seed,
                                         std::uint64_t point_index) {
  Eigen::VectorXd x(box.d());
  for (Eigen::Index j = 0; j < box.d(); ++j) {
    const double u = rng::uniform(seed, (kMcStreamTag << 32) | point_index,
                                  static_cast<std::uint64_t>(j));
    x[j] = box.lower[j] + u * (box.upper[j] - box.lower[j]);
  }
  return x;
}

}  // namespace detail

// Psi-hat: lambda(S*) times the Monte Carlo average of the degree-L local
// polynomial fit at m uniform points on the box. The MC point stream is a
// pure function of (seed, point index), so results do not depend on the
// worker count.
inline EstimateReport estimate_psi(const Sample& sample,
                                   const BoxSupport& support, int L, int K,
                                   std::int64_t m, std::uint64_t seed,
                                   int workers = 0) {
  if (sample.d() != support.d())
    throw input_error("sample dimension does not match support dimension");
  if (m < 1) throw input_error("MC point count must be at least 1");
  if (!sample.Y.allFinite())
    throw input_error("sample responses contain non-finite values");
  if (workers <= 0) workers = default_workers();

  const LocalFitContext ctx(sample.Z, L, K);
  std::vector<double> ghat(static_cast<std::size_t>(m));
  std::vector<std::uint8_t> fell(static_cast<std::size_t>(m), 0);
  parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t k) {
    const Eigen::VectorXd x =
        detail::uniform_box_point(support, seed, static_cast<std::uint64_t>(k));
    bool fb = false;
    ghat[k] = ctx.fit_at(x, sample.Y, &fb);
    fell[k] = fb ? 1 : 0;
  });

  const auto [mean, sd] = detail::mean_sd(ghat);
  const double vol = support.volume();

  EstimateReport rep;
  rep.estimate = vol * mean;
  rep.mc_std_error = vol * sd / std::sqrt(static_cast<double>(m));
  rep.m = m;
  rep.n = sample.n();
  rep.L = L;
  rep.K = K;
  rep.seed = seed;
  rep.below_theoretical_K = K < recommended_K(static_cast<int>(sample.d()), L);
  for (auto f : fell) rep.fallback_count += f;
  return rep;
}

// Phi-hat: average of the local polynomial fit over the target points.
inline EstimateReport estimate_phi(const Sample& reg_sample,
                                   const PointSet& targets, int L, int K,
                                   int workers = 0) {
  if (reg_sample.d() != targets.d())
    throw input_error("target dimension does not match sample dimension");
  if (targets.n() < 1) throw input_error("at least one target point required");
  if (!reg_sample.Y.allFinite())
    throw input_error("sample responses contain non-finite values");
  if (workers <= 0) workers = default_workers();

  const LocalFitContext ctx(reg_sample.Z, L, K);
  const std::size_t m = static_cast<std::size_t>(targets.n());
  std::vector<double> ghat(m);
  std::vector<std::uint8_t> fell(m, 0);
  parallel_for(m, workers, [&](std::size_t k) {
    bool fb = false;
    ghat[k] = ctx.fit_at(targets.points.row(static_cast<Eigen::Index>(k))
                             .transpose(),
                         reg_sample.Y, &fb);
    fell[k] = fb ? 1 : 0;
  });

  const auto [mean, sd] = detail::mean_sd(ghat);
  EstimateReport rep;
  rep.estimate = mean;
  rep.mc_std_error = sd / std::sqrt(static_cast<double>(m));
  rep.m = static_cast<std::int64_t>(m);
  rep.n = reg_sample.n();
  rep.L = L;
  rep.K = K;
  rep.below_theoretical_K =
      K < recommended_K(static_cast<int>(reg_sample.d()), L);
  for (auto f : fell) rep.fallback_count += f;
  return rep;
}

// ATT: simple treated average minus the matching estimate of the
// counterfactual, fit on controls and queried at treated covariates.
inline AttReport estimate_att(const TreatmentDataset& data, int L, int K,
                              int workers = 0) {
  const Eigen::Index n = data.n();
  if (data.Y.size() != n || static_cast<Eigen::Index>(data.D.size()) != n)
    throw input_error("treatment dataset column lengths disagree");

  std::vector<Eigen::Index> treated, control;
  for (Eigen::Index i = 0; i < n; ++i)
    (data.D[i] == 1 ? treated : control).push_back(i);

  AttReport rep;
  rep.n1 = static_cast<std::int64_t>(treated.size());
  rep.n0 = static_cast<std::int64_t>(control.size());
  if (treated.empty()) throw input_error("no treated units");
  if (control.empty()) throw input_error("no control units");
  if (static_cast<int>(control.size()) < K)
    throw input_error("fewer control units than K neighbors");

  double sum1 = 0.0;
  for (Eigen::Index i : treated) sum1 += data.Y[i];
  rep.tau1_hat = sum1 / static_cast<double>(treated.size());

  Sample controls;
  controls.Z.resize(static_cast<Eigen::Index>(control.size()), data.d());
  controls.Y.resize(static_cast<Eigen::Index>(control.size()));
  for (std::size_t r = 0; r < control.size(); ++r) {
    controls.Z.row(static_cast<Eigen::Index>(r)) = data.Z.row(control[r]);
    controls.Y[static_cast<Eigen::Index>(r)] = data.Y[control[r]];
  }
  PointSet targets;
  targets.points.resize(static_cast<Eigen::Index>(treated.size()), data.d());
  for (std::size_t r = 0; r < treated.size(); ++r)
    targets.points.row(static_cast<Eigen::Index>(r)) = data.Z.row(treated[r]);

  rep.phi_report = estimate_phi(controls, targets, L, K, workers);
  rep.tau0_hat = rep.phi_report.estimate;
  rep.tau_hat = rep.tau1_hat - rep.tau0_hat;
  return rep;
}

namespace detail {

// One arm of the region ATE: E[Y(arm) 1(Z in S*)] estimated as the direct
// observed-arm average plus the reweighted cross-arm matching term.
inline double ate_arm(const TreatmentDataset& data,
                      const std::vector<Eigen::Index>& fit_units,
                      const std::vector<Eigen::Index>& query_units,
                      const BoxSupport& support, double fit_fraction, int L,
                      int K, int workers, bool* empty_region,
                      std::int64_t* fallback_count) {
  const Eigen::Index n = data.n();
  double direct = 0.0;
  for (Eigen::Index i : fit_units)
    if (support.contains(data.Z.row(i).transpose())) direct += data.Y[i];
  direct /= static_cast<double>(n);

  std::vector<Eigen::Index> queries_in;
  for (Eigen::Index i : query_units)
    if (support.contains(data.Z.row(i).transpose())) queries_in.push_back(i);

  *empty_region = queries_in.empty();
  if (queries_in.empty()) return direct;

  Sample fit_sample;
  fit_sample.Z.resize(static_cast<Eigen::Index>(fit_units.size()), data.d());
  fit_sample.Y.resize(static_cast<Eigen::Index>(fit_units.size()));
  for (std::size_t r = 0; r < fit_units.size(); ++r) {
    fit_sample.Z.row(static_cast<Eigen::Index>(r)) = data.Z.row(fit_units[r]);
    fit_sample.Y[static_cast<Eigen::Index>(r)] = data.Y[fit_units[r]];
  }
  PointSet targets;
  targets.points.resize(static_cast<Eigen::Index>(queries_in.size()),
                        data.d());
  for (std::size_t r = 0; r < queries_in.size(); ++r)
    targets.points.row(static_cast<Eigen::Index>(r)) =
        data.Z.row(queries_in[r]);

  const EstimateReport phi = estimate_phi(fit_sample, targets, L, K, workers);
  *fallback_count += phi.fallback_count;
  // The matching average runs over all query-arm units; points outside S*
  // contribute zero.
  const double phi_over_all_queries =
      phi.estimate * static_cast<double>(queries_in.size()) /
      static_cast<double>(query_units.size());
  return direct + (1.0 - fit_fraction) * phi_over_all_queries;
}

}  // namespace detail

inline AteRegionReport estimate_ate_region(const TreatmentDataset& data,
                                           const BoxSupport& support, int L,
                                           int K, int workers = 0) {
  const Eigen::Index n = data.n();
  if (data.Y.size() != n || static_cast<Eigen::Index>(data.D.size()) != n)
    throw input_error("treatment dataset column lengths disagree");
  if (data.d() != support.d())
    throw input_error("covariate dimension does not match support dimension");

  std::vector<Eigen::Index> treated, control;
  for (Eigen::Index i = 0; i < n; ++i)
    (data.D[i] == 1 ? treated : control).push_back(i);
  if (static_cast<int>(treated.size()) < K)
    throw input_error("fewer treated units than K neighbors");
  if (static_cast<int>(control.size()) < K)
    throw input_error("fewer control units than K neighbors");

  AteRegionReport rep;
  rep.n1 = static_cast<std::int64_t>(treated.size());
  rep.n0 = static_cast<std::int64_t>(control.size());
  rep.pi_hat = static_cast<double>(treated.size()) / static_cast<double>(n);

  rep.ey1_region = detail::ate_arm(data, treated, control, support,
                                   rep.pi_hat, L, K, workers,
                                   &rep.empty_region_control,
                                   &rep.fallback_count);
  rep.ey0_region = detail::ate_arm(data, control, treated, support,
                                   1.0 - rep.pi_hat, L, K, workers,
                                   &rep.empty_region_treated,
                                   &rep.fallback_count);
  rep.tau_region = rep.ey1_region - rep.ey0_region;
  return rep;
}

// Covariate-shift reweighted loss: identical functional to Phi-hat with the
// responses being precomputed loss values on the source sample.
inline EstimateReport estimate_weighted_loss(const Sample& source_losses,
                                             const PointSet& target_covariates,
                                             int L, int K, int workers = 0) {
  return estimate_phi(source_losses, target_covariates, L, K, workers);
}

}  // namespace voronn
