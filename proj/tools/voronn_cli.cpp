// Command-line front end: dataset ingestion, subcommand dispatch and
// machine-readable JSON/CSV output.
//
// Exit codes: 0 success, 2 input error, 3 numerical error.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "voronn/voronn.hpp"

namespace {

using voronn::io::JsonObject;

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw voronn::input_error("cannot write file: " + out_path);
  out << text;
}

struct CommonOpts {
  std::string data;
  std::string response_col = "y";
  int L = 0;
  std::optional<int> K;
  std::int64_t mc_points = 10000;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out;
  std::string format = "json";
};

// Resolve K: default to the theoretical recommendation when omitted.
int resolve_K(const CommonOpts& opts, int d, int L, bool& defaulted) {
  if (opts.K) {
    defaulted = false;
    return *opts.K;
  }
  defaulted = true;
  const int k = voronn::recommended_K(d, L);
  std::cerr << "note: K not supplied; using recommended K=" << k
            << " for d=" << d << ", L=" << L << "\n";
  return k;
}

void add_estimate_fields(JsonObject& obj, const voronn::EstimateReport& rep,
                         bool K_defaulted) {
  obj.set("estimate", rep.estimate);
  obj.set("mc_std_error", rep.mc_std_error);
  obj.set("n", rep.n);
  obj.set("m", rep.m);
  obj.set("L", rep.L);
  obj.set("K", rep.K);
  obj.set("K_defaulted", K_defaulted);
  obj.set("below_theoretical_K", rep.below_theoretical_K);
  obj.set("fallback_count", rep.fallback_count);
  obj.set("seed", rep.seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Smoothing-parameter-free estimators of inverse-density-weighted "
      "expectations, matching functionals, treatment effects and Berkson "
      "deconvolution"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string targets_path, treatment_col, support_spec;
  std::string scenario_id = "f1_box";
  std::int64_t sim_n = 1000, sim_N = 1000;
  std::string errors_out;
  std::optional<int> Jn;
  std::optional<double> alpha;
  double gamma = 2.0, cutoff_scale = 1.0, spectral_tol = 1e-8;
  std::string error_density = "identity";
  double laplace_b = 1.0;
  std::string coeff_out, h_grid_out;
  int h_grid_points = 33;

  auto add_common = [&](CLI::App* sub, bool needs_data = true) {
    if (needs_data)
      sub->add_option("--data", opts.data, "input CSV with header row")
          ->required();
    sub->add_option("--response-col", opts.response_col,
                    "response column name (default y)");
    sub->add_option("--L", opts.L, "polynomial degree (default 0)");
    sub->add_option("--K", opts.K,
                    "neighbor count (default: theoretical recommendation)");
    sub->add_option("--mc-points", opts.mc_points,
                    "Monte Carlo points (default 10000)");
    sub->add_option("--seed", opts.seed, "RNG seed (default 1)");
    sub->add_option("--workers", opts.workers,
                    "worker threads (default: hardware)");
    sub->add_option("--out", opts.out, "output path (default stdout)");
    sub->add_option("--format", opts.format, "json or csv (default json)");
  };

  auto* psi = app.add_subcommand(
      "psi", "integral of the regression function over a box region");
  add_common(psi);
  psi->add_option("--support", support_spec, "box S* as a1:b1,...,ad:bd")
      ->required();

  auto* phi = app.add_subcommand(
      "phi", "matching functional: average fitted value over target points");
  add_common(phi);
  phi->add_option("--targets", targets_path, "CSV of target covariates")
      ->required();

  auto* att =
      app.add_subcommand("att", "average treatment effect on the treated");
  add_common(att);
  att->add_option("--treatment-col", treatment_col, "0/1 treatment column")
      ->required();

  auto* ate = app.add_subcommand("ate-region",
                                 "average treatment effect over a region");
  add_common(ate);
  ate->add_option("--treatment-col", treatment_col, "0/1 treatment column")
      ->required();
  ate->add_option("--support", support_spec, "box S* as a1:b1,...,ad:bd")
      ->required();

  auto* cov = app.add_subcommand(
      "covshift-loss",
      "importance-weighted loss under covariate shift (responses are losses)");
  add_common(cov);
  cov->add_option("--targets", targets_path, "CSV of target covariates")
      ->required();

  auto* berkson = app.add_subcommand(
      "berkson", "Fourier deconvolution estimator for Berkson errors");
  add_common(berkson);
  berkson->add_option("--support", support_spec, "box S* as a1:b1,...,ad:bd")
      ->required();
  berkson->add_option("--Jn", Jn, "Fourier cutoff (exclusive with --alpha)");
  berkson->add_option("--alpha", alpha,
                      "Sobolev smoothness; sets Jn and default L");
  berkson->add_option("--gamma", gamma,
                      "error density decay exponent (default 2)");
  berkson->add_option("--cutoff-scale", cutoff_scale,
                      "constant c in Jn = c * n^(1/(2a+2g+d))");
  berkson->add_option("--error-density", error_density,
                      "identity or laplace (default identity)");
  berkson->add_option("--laplace-b", laplace_b,
                      "Laplace scale parameter (default 1)");
  berkson->add_option("--tol", spectral_tol,
                      "spectral division tolerance (default 1e-8)");
  berkson->add_option("--coeff-out", coeff_out,
                      "write h-hat coefficient table CSV here");
  berkson->add_option("--h-grid-out", h_grid_out,
                      "write h-hat grid evaluations CSV here");
  berkson->add_option("--h-grid-points", h_grid_points,
                      "points per dimension for --h-grid-out (default 33)");

  auto* simulate = app.add_subcommand(
      "simulate", "replication study reproducing the bias/variance tables");
  add_common(simulate, /*needs_data=*/false);
  simulate->add_option("--scenario", scenario_id,
                       "f1_box, f1_full or f2_box (default f1_box)");
  simulate->add_option("--n", sim_n, "sample size per replicate");
  simulate->add_option("--N", sim_N, "number of replicates");
  simulate->add_option("--errors-out", errors_out,
                       "write standardized errors (one per line) here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (psi->parsed()) {
      const auto ds =
          voronn::io::load_csv_dataset(opts.data, opts.response_col);
      const auto sample = voronn::io::to_sample(ds);
      const auto support = voronn::io::parse_support(support_spec);
      bool K_defaulted = false;
      const int K =
          resolve_K(opts, static_cast<int>(sample.d()), opts.L, K_defaulted);
      const auto rep = voronn::estimate_psi(sample, support, opts.L, K,
                                            opts.mc_points, opts.seed,
                                            opts.workers);
      JsonObject obj;
      obj.set_string("subcommand", "psi");
      obj.set_string("data", opts.data);
      obj.set_string("response_col", opts.response_col);
      obj.set_string("support", voronn::io::support_to_string(support));
      add_estimate_fields(obj, rep, K_defaulted);
      write_output(opts.out, obj.dump());
    } else if (phi->parsed() || cov->parsed()) {
      const auto ds =
          voronn::io::load_csv_dataset(opts.data, opts.response_col);
      const auto sample = voronn::io::to_sample(ds);
      const auto targets = voronn::io::load_csv_points(targets_path);
      bool K_defaulted = false;
      const int K =
          resolve_K(opts, static_cast<int>(sample.d()), opts.L, K_defaulted);
      const auto rep = voronn::estimate_phi(sample, targets, opts.L, K,
                                            opts.workers);
      JsonObject obj;
      obj.set_string("subcommand", phi->parsed() ? "phi" : "covshift-loss");
      obj.set_string("data", opts.data);
      obj.set_string("targets", targets_path);
      obj.set_string("response_col", opts.response_col);
      add_estimate_fields(obj, rep, K_defaulted);
      write_output(opts.out, obj.dump());
    } else if (att->parsed()) {
      const auto ds = voronn::io::load_csv_dataset(opts.data,
                                                   opts.response_col,
                                                   treatment_col);
      const auto data = voronn::io::to_treatment(ds);
      bool K_defaulted = false;
      const int K =
          resolve_K(opts, static_cast<int>(data.d()), opts.L, K_defaulted);
      const auto rep = voronn::estimate_att(data, opts.L, K, opts.workers);
      JsonObject obj;
      obj.set_string("subcommand", "att");
      obj.set_string("data", opts.data);
      obj.set_string("response_col", opts.response_col);
      obj.set_string("treatment_col", treatment_col);
      obj.set("tau_hat", rep.tau_hat);
      obj.set("tau1_hat", rep.tau1_hat);
      obj.set("tau0_hat", rep.tau0_hat);
      obj.set("n1", rep.n1);
      obj.set("n0", rep.n0);
      obj.set("L", opts.L);
      obj.set("K", K);
      obj.set("K_defaulted", K_defaulted);
      obj.set("below_theoretical_K", rep.phi_report.below_theoretical_K);
      obj.set("fallback_count", rep.phi_report.fallback_count);
      write_output(opts.out, obj.dump());
    } else if (ate->parsed()) {
      const auto ds = voronn::io::load_csv_dataset(opts.data,
                                                   opts.response_col,
                                                   treatment_col);
      const auto data = voronn::io::to_treatment(ds);
      const auto support = voronn::io::parse_support(support_spec);
      bool K_defaulted = false;
      const int K =
          resolve_K(opts, static_cast<int>(data.d()), opts.L, K_defaulted);
      const auto rep = voronn::estimate_ate_region(data, support, opts.L, K,
                                                   opts.workers);
      if (rep.empty_region_treated)
        std::cerr << "warning: no treated covariates inside S*; the "
                     "cross-arm term for Y(0) contributes 0\n";
      if (rep.empty_region_control)
        std::cerr << "warning: no control covariates inside S*; the "
                     "cross-arm term for Y(1) contributes 0\n";
      JsonObject obj;
      obj.set_string("subcommand", "ate-region");
      obj.set_string("data", opts.data);
      obj.set_string("response_col", opts.response_col);
      obj.set_string("treatment_col", treatment_col);
      obj.set_string("support", voronn::io::support_to_string(support));
      obj.set("ey1_region", rep.ey1_region);
      obj.set("ey0_region", rep.ey0_region);
      obj.set("tau_region", rep.tau_region);
      obj.set("pi_hat", rep.pi_hat);
      obj.set("n1", rep.n1);
      obj.set("n0", rep.n0);
      obj.set("L", opts.L);
      obj.set("K", K);
      obj.set("K_defaulted", K_defaulted);
      obj.set("empty_region_treated", rep.empty_region_treated);
      obj.set("empty_region_control", rep.empty_region_control);
      obj.set("fallback_count", rep.fallback_count);
      write_output(opts.out, obj.dump());
    } else if (berkson->parsed()) {
      const auto ds =
          voronn::io::load_csv_dataset(opts.data, opts.response_col);
      const auto sample = voronn::io::to_sample(ds);
      const auto support = voronn::io::parse_support(support_spec);
      const int d = static_cast<int>(sample.d());
      if (Jn.has_value() == alpha.has_value())
        throw voronn::input_error(
            "berkson requires exactly one of --Jn and --alpha");
      int L = opts.L;
      int cutoff;
      if (alpha) {
        cutoff = voronn::default_cutoff(sample.n(), *alpha, gamma, d,
                                        cutoff_scale);
        if (berkson->count("--L") == 0)
          L = voronn::default_berkson_degree(*alpha);
      } else {
        cutoff = *Jn;
      }
      bool K_defaulted = false;
      const int K = resolve_K(opts, d, L, K_defaulted);
      const auto grid = voronn::FourierIndexGrid::make(cutoff, d);
      const auto psi_hat = voronn::estimate_fourier_coefficients(
          sample, support, grid, L, K, opts.mc_points, opts.seed,
          opts.workers);
      voronn::ErrorDensitySpec spec;
      if (error_density == "identity") {
        spec = voronn::identity_error_spec();
      } else if (error_density == "laplace") {
        spec = voronn::product_laplace_error_spec(laplace_b);
      } else {
        throw voronn::input_error("unknown error density: " + error_density);
      }
      const auto est = voronn::deconvolve(psi_hat, spec, grid, spectral_tol);
      if (!coeff_out.empty()) voronn::io::write_fourier_csv(coeff_out, est);
      if (!h_grid_out.empty())
        voronn::io::write_h_grid_csv(h_grid_out, est, h_grid_points);
      JsonObject obj;
      obj.set_string("subcommand", "berkson");
      obj.set_string("data", opts.data);
      obj.set_string("response_col", opts.response_col);
      obj.set_string("support", voronn::io::support_to_string(support));
      obj.set("Jn", cutoff);
      if (alpha) obj.set("alpha", *alpha);
      obj.set("gamma", gamma);
      obj.set("cutoff_scale", cutoff_scale);
      obj.set_string("error_density", error_density);
      if (error_density == "laplace") obj.set("laplace_b", laplace_b);
      obj.set("tol", spectral_tol);
      obj.set("n", sample.n());
      obj.set("m", opts.mc_points);
      obj.set("L", L);
      obj.set("K", K);
      obj.set("K_defaulted", K_defaulted);
      obj.set("below_theoretical_K", K < voronn::recommended_K(d, L));
      obj.set("seed", opts.seed);
      obj.set("coefficient_count", static_cast<std::int64_t>(grid.size()));
      obj.set("l2_norm_squared", voronn::l2_norm_squared(est));
      if (!coeff_out.empty()) obj.set_string("coeff_out", coeff_out);
      if (!h_grid_out.empty()) obj.set_string("h_grid_out", h_grid_out);
      write_output(opts.out, obj.dump());
    } else if (simulate->parsed()) {
      const auto scenario = voronn::scenario_by_id(scenario_id);
      bool K_defaulted = false;
      const int K = resolve_K(opts, scenario.d, opts.L, K_defaulted);
      const auto result = voronn::run_replications(
          scenario, sim_n, sim_N, opts.L, K, opts.mc_points, opts.seed,
          opts.workers);
      if (!errors_out.empty()) {
        std::ofstream eo(errors_out);
        if (!eo)
          throw voronn::input_error("cannot write file: " + errors_out);
        for (double e : result.standardized_errors)
          eo << voronn::io::detail::num17(e) << '\n';
      }
      if (opts.format == "csv") {
        write_output(opts.out, voronn::emit_table({result.row}, "csv"));
      } else if (opts.format == "markdown") {
        write_output(opts.out, voronn::emit_table({result.row}, "markdown"));
      } else {
        const auto& r = result.row;
        JsonObject obj;
        obj.set_string("subcommand", "simulate");
        obj.set_string("scenario", r.scenario);
        obj.set("n", r.n);
        obj.set("N", r.N);
        obj.set("L", r.L);
        obj.set("K", r.K);
        obj.set("K_defaulted", K_defaulted);
        obj.set("m", r.m);
        obj.set("true_value", r.true_value);
        obj.set("sqrtn_bias", r.sqrtn_bias);
        obj.set("sqrtn_stdv", r.sqrtn_stdv);
        obj.set("sqrtn_rmse", r.sqrtn_rmse);
        obj.set("skewness", r.skewness);
        obj.set("excess_kurtosis", r.excess_kurtosis);
        obj.set("seed", r.seed);
        write_output(opts.out, obj.dump());
      }
    }
  } catch (const voronn::numeric_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const voronn::input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
