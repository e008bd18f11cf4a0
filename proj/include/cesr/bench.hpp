#pragma once

// Seeded Monte Carlo sweeps over the GG shape exponent and the wall-clock
// comparison of the estimators. Every trial draws from its own substream and
// results are reduced in trial order, so output does not depend on the
// number of workers.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "cesr/ces_model.hpp"
#include "cesr/errors.hpp"
#include "cesr/estimators.hpp"
#include "cesr/metrics.hpp"
#include "cesr/random.hpp"
#include "cesr/score.hpp"

namespace cesr {

enum class EstimatorKind { SM, SCM, Tyler, RvdW, Rt };

inline bool has_location(EstimatorKind k) { return k == EstimatorKind::SM || k == EstimatorKind::Tyler; }
inline bool has_shape(EstimatorKind k) { return k != EstimatorKind::SM; }

struct SweepConfig {
  int n = 8;
  int l = 40;
  int trials = 2000;
  std::vector<double> s_grid{0.3, 0.5, 1.0, 1.5};
  double sigma_x2 = 4.0;
  std::vector<EstimatorKind> estimators{EstimatorKind::SM, EstimatorKind::SCM,
                                        EstimatorKind::Tyler, EstimatorKind::RvdW,
                                        EstimatorKind::Rt};
  double nu = 5.0;
  std::uint64_t seed = 1;
  int workers = 1;  // 0: one per hardware thread

  void validate() const {
    if (n < 1) throw ConfigError("N must be >= 1");
    if (l <= n) throw ConfigError("L must exceed N");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (s_grid.empty()) throw ConfigError("s_grid must not be empty");
    for (double s : s_grid) {
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("s_grid values must be > 0");
    }
    if (!(sigma_x2 > 0.0)) throw ConfigError("sigma_x2 must be > 0");
    if (!(nu > 0.0)) throw ConfigError("nu must be > 0");
    if (estimators.empty()) throw ConfigError("estimators must not be empty");
    if (workers < 0) throw ConfigError("workers must be >= 0");
  }
};

inline std::string estimator_label(EstimatorKind k, double nu) {
  switch (k) {
    case EstimatorKind::SM: return "SM";
    case EstimatorKind::SCM: return "SCM";
    case EstimatorKind::Tyler: return "Tyler";
    case EstimatorKind::RvdW: return "R-vdW";
    case EstimatorKind::Rt: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "R-t%g", nu);
      return buf;
    }
  }
  return "?";
}

inline std::optional<EstimatorKind> parse_estimator(const std::string& name) {
  if (name == "SM") return EstimatorKind::SM;
  if (name == "SCM") return EstimatorKind::SCM;
  if (name == "Tyler") return EstimatorKind::Tyler;
  if (name == "R-vdW") return EstimatorKind::RvdW;
  if (name.rfind("R-t", 0) == 0) return EstimatorKind::Rt;
  return std::nullopt;
}

/// Indices for one estimator; NaN marks an index the estimator does not
/// define (location indices for pure shape estimators and vice versa).
struct EstimatorMetrics {
  EstimatorKind kind = EstimatorKind::SM;
  std::string label;
  double beta = NAN;
  double phi = NAN;
  double varrho = NAN;
  double varsigma = NAN;
  long pd_failures = 0;
};

struct McMetrics {
  double s = 0.0;
  std::vector<EstimatorMetrics> rows;
  double eps_mu = 0.0;
  double eps_v = 0.0;
  int trials = 0;
  int resamples = 0;
};

namespace detail {

struct TrialOutcome {
  std::vector<CVector> location;  // per requested estimator; empty if n/a
  std::vector<CVector> shape;
  std::vector<char> pd_failed;
  int resamples = 0;
};

struct CellContext {
  const SweepConfig* cfg;
  Scenario scenario;
  ScoreTable vdw;
  ScoreTable tnu;
  std::size_t s_index;
};

inline constexpr int kMaxAttemptsPerTrial = 100;

inline TrialOutcome run_trial(const CellContext& ctx, int trial, std::ostream* log,
                              std::mutex& log_mutex) {
  const SweepConfig& cfg = *ctx.cfg;
  const std::size_t m = cfg.estimators.size();
  const bool need_tyler = std::any_of(cfg.estimators.begin(), cfg.estimators.end(), [](auto k) {
    return k == EstimatorKind::Tyler || k == EstimatorKind::RvdW || k == EstimatorKind::Rt;
  });
  TrialOutcome out;
  for (int attempt = 0;; ++attempt) {
    try {
      Rng rng = Rng::substream(cfg.seed, ctx.s_index, static_cast<std::uint64_t>(trial),
                               static_cast<std::uint64_t>(attempt));
      const Dataset data = sample_ces(cfg.l, ctx.scenario, rng);
      out.location.assign(m, CVector());
      out.shape.assign(m, CVector());
      out.pd_failed.assign(m, 0);
      std::optional<JointEstimate> tyler;
      if (need_tyler) tyler = tyler_joint(data);
      for (std::size_t i = 0; i < m; ++i) {
        switch (cfg.estimators[i]) {
          case EstimatorKind::SM:
            out.location[i] = sample_mean(data) - ctx.scenario.mu0;
            break;
          case EstimatorKind::SCM:
            out.shape[i] = ovec(scm_shape(data).v1_hat.matrix() - ctx.scenario.v10.matrix());
            break;
          case EstimatorKind::Tyler:
            out.location[i] = tyler->mu_hat - ctx.scenario.mu0;
            out.shape[i] = ovec(tyler->v1_hat.matrix() - ctx.scenario.v10.matrix());
            break;
          case EstimatorKind::RvdW:
          case EstimatorKind::Rt: {
            const ScoreTable& table = cfg.estimators[i] == EstimatorKind::RvdW ? ctx.vdw : ctx.tnu;
            const REstimate r = r_estimator(data, *tyler, table, rng);
            const CMatrix& v = r.positive_definite ? r.v1 : tyler->v1_hat.matrix();
            out.pd_failed[i] = r.positive_definite ? 0 : 1;
            out.shape[i] = ovec(v - ctx.scenario.v10.matrix());
            break;
          }
        }
      }
      return out;
    } catch (const Error& e) {
      ++out.resamples;
      if (log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *log << "s=" << cfg.s_grid[ctx.s_index] << " trial " << trial << " attempt " << attempt
             << ": " << e.what() << " (resampling)\n";
      }
      if (attempt + 1 >= kMaxAttemptsPerTrial) {
        throw ResampleLimitExceeded("trial " + std::to_string(trial) + " failed " +
                                    std::to_string(kMaxAttemptsPerTrial) + " times");
      }
    }
  }
}

/// Runs `count` jobs on `workers` threads; job i writes only its own slot.
template <typename Job>
void parallel_for(int count, int workers, Job&& job) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(count, 1));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Maximum fraction of trials that may be resampled per s cell.
inline constexpr double kMaxResampleRate = 0.01;

inline std::vector<McMetrics> run_mse_sweep(const SweepConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  std::vector<McMetrics> result;
  std::mutex log_mutex;
  const std::size_t m = cfg.estimators.size();
  const ScoreFunction vdw = ScoreFunction::van_der_waerden(cfg.n);
  const ScoreFunction tnu = ScoreFunction::t_nu(cfg.n, cfg.nu);
  const bool need_vdw =
      std::find(cfg.estimators.begin(), cfg.estimators.end(), EstimatorKind::RvdW) !=
      cfg.estimators.end();
  const bool need_tnu = std::find(cfg.estimators.begin(), cfg.estimators.end(),
                                  EstimatorKind::Rt) != cfg.estimators.end();
  const ScoreTable vdw_table = need_vdw ? vdw.rank_scores(cfg.l) : ScoreTable{};
  const ScoreTable tnu_table = need_tnu ? tnu.rank_scores(cfg.l) : ScoreTable{};

  for (std::size_t si = 0; si < cfg.s_grid.size(); ++si) {
    const double s = cfg.s_grid[si];
    detail::CellContext ctx{&cfg, make_scenario(cfg.n, s, cfg.sigma_x2), vdw_table, tnu_table, si};

    std::vector<detail::TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    detail::parallel_for(cfg.trials, cfg.workers, [&](int t) {
      outcomes[static_cast<std::size_t>(t)] = detail::run_trial(ctx, t, log, log_mutex);
    });

    McMetrics cell;
    cell.s = s;
    cell.trials = cfg.trials;
    for (const auto& o : outcomes) cell.resamples += o.resamples;
    if (cell.resamples > kMaxResampleRate * cfg.trials) {
      throw ResampleLimitExceeded("s=" + std::to_string(s) + ": " +
                                  std::to_string(cell.resamples) + " resampled trials out of " +
                                  std::to_string(cfg.trials));
    }
    std::tie(cell.eps_mu, cell.eps_v) = bound_indices(ctx.scenario, cfg.l);

    const Index loc_dim = 2 * static_cast<Index>(cfg.n);
    const Index shp_dim = static_cast<Index>(cfg.n) * cfg.n - 1;
    for (std::size_t i = 0; i < m; ++i) {
      const EstimatorKind kind = cfg.estimators[i];
      EstimatorMetrics row;
      row.kind = kind;
      row.label = estimator_label(kind, cfg.nu);
      ErrorMoments loc(loc_dim);
      ErrorMoments shp(shp_dim);
      for (const auto& o : outcomes) {
        if (has_location(kind)) loc.add(augmented(o.location[i]));
        if (has_shape(kind)) shp.add(o.shape[i]);
        row.pd_failures += o.pd_failed[i];
      }
      if (has_location(kind)) {
        row.varrho = loc.mse();
        row.beta = loc.mean().head(cfg.n).norm();  // plain part of the augmented mean
      }
      if (has_shape(kind)) {
        row.phi = shp.bias();
        row.varsigma = shp.mse();
      }
      cell.rows.push_back(row);
    }
    result.push_back(std::move(cell));
  }
  return result;
}

struct TimingRow {
  int n = 0;
  double t_tyler = 0.0;
  double t_r_matrix = 0.0;
  double t_r_vectorized = 0.0;
  int trials = 0;  // timed repetitions (warm-up excluded)
};

inline constexpr double kTimingAgreementTol = 1e-8;

inline double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Median wall time of the three shape estimators (Tyler, Tyler + matrix-form
/// one-step, Tyler + vectorized one-step) on identical data, L = 5N. The two
/// R-estimates are checked for agreement before any timing is reported.
inline std::vector<TimingRow> run_timing_sweep(const std::vector<int>& n_list, int reps,
                                               const SweepConfig& cfg) {
  if (n_list.empty()) throw ConfigError("timing sweep needs at least one N");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (cfg.s_grid.empty() || !(cfg.s_grid.front() > 0.0)) throw ConfigError("need a valid s");
  using clock = std::chrono::steady_clock;
  auto seconds_since = [](clock::time_point t0) {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  std::vector<TimingRow> rows;
  for (int n : n_list) {
    if (n < 2) throw ConfigError("timing sweep needs N >= 2");
    const int l = 5 * n;
    const Scenario sc = make_scenario(n, cfg.s_grid.front(), cfg.sigma_x2);
    const ScoreTable scores = ScoreFunction::van_der_waerden(n).rank_scores(l);
    std::vector<double> t_ty, t_rm, t_rv;
    for (int rep = 0; rep <= reps; ++rep) {  // rep 0 is a discarded warm-up
      Rng rng = Rng::substream(cfg.seed, 0x7115u, static_cast<std::uint64_t>(n),
                               static_cast<std::uint64_t>(rep));
      const Dataset data = sample_ces(l, sc, rng);
      const JointEstimate ref = tyler_joint(data);
      const PerturbationMatrix h0 = gen_perturbation(n, ref.v1_hat, l, rng);

      auto t0 = clock::now();
      const JointEstimate ty = tyler_joint(data);
      const double dt_ty = seconds_since(t0);

      t0 = clock::now();
      const REstimate rm = r_estimator(data, tyler_joint(data), scores, h0);
      const double dt_rm = seconds_since(t0);

      t0 = clock::now();
      const REstimate rv = r_estimator_vectorized(data, tyler_joint(data), scores, h0);
      const double dt_rv = seconds_since(t0);

      const double gap = (rm.v1 - rv.v1).norm() / rv.v1.norm();
      if (!(gap < kTimingAgreementTol)) {
        throw Error("timing sweep: matrix and vectorized R-estimates differ (relative " +
                    std::to_string(gap) + ") at N=" + std::to_string(n));
      }
      (void)ty;
      if (rep == 0) continue;
      t_ty.push_back(dt_ty);
      t_rm.push_back(dt_rm);
      t_rv.push_back(dt_rv);
    }
    rows.push_back(TimingRow{n, median(t_ty), median(t_rm), median(t_rv), reps});
  }
  return rows;
}

}  // namespace cesr
