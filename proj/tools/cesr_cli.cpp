// cesr: Monte Carlo sweeps, timing comparison and one-shot estimation.
//
//   cesr sweep-mse    --config cfg.json --out mse.csv
//   cesr sweep-timing --n 8,12,16 --reps 11 --out timing.csv
//   cesr estimate     --in data.csv --estimator tyler|r-vdw|r-t --nu 5 --out est.json
//
// Exit codes: 0 ok, 2 config/input error, 3 resample-rate abort, 1 anything else.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cesr/cesr.hpp"
#include "cesr/io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitResample = 3;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cesr::ConfigError("cannot open output file '" + path + "'");
  return out;
}

int cmd_sweep_mse(const std::string& config, const std::string& out_path, bool quiet) {
  const cesr::SweepConfig cfg = cesr::load_sweep_config(config);
  const auto cells = cesr::run_mse_sweep(cfg, quiet ? nullptr : &std::cerr);
  std::ofstream out = open_output(out_path);
  cesr::write_mse_csv(out, cells);
  return 0;
}

int cmd_sweep_timing(const std::vector<int>& n_list, int reps, double s, std::uint64_t seed,
                     const std::string& out_path) {
  cesr::SweepConfig cfg;
  cfg.s_grid = {s};
  cfg.seed = seed;
  const auto rows = cesr::run_timing_sweep(n_list, reps, cfg);
  std::ofstream out = open_output(out_path);
  cesr::write_timing_csv(out, rows);
  return 0;
}

int cmd_estimate(const std::string& in_path, const std::string& estimator, double nu,
                 std::uint64_t seed, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw cesr::ConfigError("cannot open data file '" + in_path + "'");
  const cesr::Dataset data = cesr::read_dataset_csv(in);
  if (data.size() <= data.dim()) throw cesr::ConfigError("need more observations than N");

  const cesr::JointEstimate tyler = cesr::tyler_joint(data);
  nlohmann::json j;
  j["estimator"] = estimator;
  j["N"] = data.dim();
  j["L"] = data.size();
  j["mu_hat"] = cesr::complex_to_json(tyler.mu_hat);
  j["iterations"] = tyler.iterations;
  j["converged"] = tyler.converged;
  if (estimator == "tyler") {
    j["v1_hat"] = cesr::complex_to_json(tyler.v1_hat.matrix());
  } else {
    const int n = static_cast<int>(data.dim());
    const cesr::ScoreFunction score = estimator == "r-vdw"
                                          ? cesr::ScoreFunction::van_der_waerden(n)
                                          : cesr::ScoreFunction::t_nu(n, nu);
    cesr::Rng rng = cesr::Rng::substream(seed, 0);
    const cesr::REstimate r = cesr::r_estimator(data, tyler, score, rng);
    j["v1_hat"] = cesr::complex_to_json(r.v1);
    j["alpha_hat"] = r.diagnostics.alpha_hat;
    j["positive_definite"] = r.positive_definite;
    if (estimator == "r-t") j["nu"] = nu;
  }
  std::ofstream out = open_output(out_path);
  out << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-based shape estimation for complex elliptically symmetric data"};
  app.require_subcommand(1);

  std::string config, out_mse;
  bool quiet = false;
  auto* mse = app.add_subcommand("sweep-mse", "bias/MSE/bound indices over an s grid");
  mse->add_option("--config", config, "flat JSON sweep config")->required();
  mse->add_option("--out", out_mse, "output CSV")->required();
  mse->add_flag("--quiet", quiet, "do not log resampled trials");

  std::vector<int> n_list{8, 12, 16};
  int reps = 11;
  double timing_s = 0.5;
  std::uint64_t timing_seed = 1;
  std::string out_timing;
  auto* timing = app.add_subcommand("sweep-timing", "median wall time of the shape estimators");
  timing->add_option("--n", n_list, "comma-separated dimensions")->delimiter(',');
  timing->add_option("--reps", reps, "timed repetitions per N")->check(CLI::PositiveNumber);
  timing->add_option("--s", timing_s, "GG shape exponent of the synthetic data");
  timing->add_option("--seed", timing_seed, "master seed");
  timing->add_option("--out", out_timing, "output CSV")->required();

  std::string in_path, estimator, out_est;
  double nu = 5.0;
  std::uint64_t est_seed = 1;
  auto* est = app.add_subcommand("estimate", "estimate location and shape from a data CSV");
  est->add_option("--in", in_path, "data CSV (re_1,im_1,...,re_N,im_N)")->required();
  est->add_option("--estimator", estimator, "tyler, r-vdw or r-t")
      ->required()
      ->check(CLI::IsMember({"tyler", "r-vdw", "r-t"}));
  est->add_option("--nu", nu, "degrees of freedom of the t score")->check(CLI::PositiveNumber);
  est->add_option("--seed", est_seed, "seed of the alpha perturbation");
  est->add_option("--out", out_est, "output JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*mse) return cmd_sweep_mse(config, out_mse, quiet);
    if (*timing) return cmd_sweep_timing(n_list, reps, timing_s, timing_seed, out_timing);
    return cmd_estimate(in_path, estimator, nu, est_seed, out_est);
  } catch (const cesr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cesr::ResampleLimitExceeded& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kExitResample;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
