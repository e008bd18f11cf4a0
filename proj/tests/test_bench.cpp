#include <gtest/gtest.h>

#include <sstream>

#include "cesr/bench.hpp"
#include "cesr/io.hpp"
#include "cesr/metrics.hpp"
#include "test_util.hpp"

using namespace cesr;

namespace {

JointEstimate at_truth(const Scenario& sc) { return JointEstimate{sc.mu0, sc.v10, 0, true}; }

std::string sweep_csv(const SweepConfig& cfg) {
  std::ostringstream out;
  write_mse_csv(out, run_mse_sweep(cfg));
  return out.str();
}

}  // namespace

TEST(BiasIndices, Examples) {
  const Scenario sc = make_scenario(3, 1.0);
  std::vector<JointEstimate> exact{at_truth(sc), at_truth(sc)};
  auto [b0, p0] = bias_indices(exact, sc);
  EXPECT_EQ(b0, 0.0);
  EXPECT_EQ(p0, 0.0);

  JointEstimate shifted = at_truth(sc);
  shifted.mu_hat(0) += 1.0;
  std::vector<JointEstimate> one{shifted};
  EXPECT_NEAR(bias_indices(one, sc).first, 1.0, 1e-15);

  JointEstimate plus = at_truth(sc), minus = at_truth(sc);
  plus.mu_hat(1) += cdouble(0.3, -0.2);
  minus.mu_hat(1) -= cdouble(0.3, -0.2);
  CMatrix dv = CMatrix::Zero(3, 3);
  dv(1, 2) = cdouble(0.01, 0.02);
  dv(2, 1) = std::conj(dv(1, 2));
  plus.v1_hat = ShapeMatrix::from_normalized(sc.v10.matrix() + dv);
  minus.v1_hat = ShapeMatrix::from_normalized(sc.v10.matrix() - dv);
  std::vector<JointEstimate> pair{plus, minus};
  auto [b2, p2] = bias_indices(pair, sc);
  EXPECT_NEAR(b2, 0.0, 1e-15);
  EXPECT_NEAR(p2, 0.0, 1e-15);
  EXPECT_THROW(bias_indices(std::vector<JointEstimate>{}, sc), DomainError);
}

TEST(MseIndices, Examples) {
  const Scenario sc = make_scenario(3, 1.0);
  std::vector<JointEstimate> exact{at_truth(sc)};
  auto [r0, s0] = mse_indices(exact, sc);
  EXPECT_EQ(r0, 0.0);
  EXPECT_EQ(s0, 0.0);

  JointEstimate e = at_truth(sc);
  e.mu_hat(0) += 1.0;
  std::vector<JointEstimate> one{e};
  EXPECT_NEAR(mse_indices(one, sc).first, 2.0, 1e-15);
  // single atom: the MSE index is the squared bias norm of the augmented error
  const double b = bias_indices(one, sc).first;
  EXPECT_NEAR(mse_indices(one, sc).first, 2.0 * b * b, 1e-15);
}

TEST(MseIndices, StreamingTwoPassAgreement) {
  Rng rng(3);
  const Index dim = 15;
  ErrorMoments acc(dim);
  std::vector<CVector> errs;
  for (int t = 0; t < 500; ++t) {
    CVector e = test::random_complex(dim, 1, rng).col(0) * 0.1;
    e(0) += 0.05;
    errs.push_back(e);
    acc.add(e);
  }
  CVector mean = CVector::Zero(dim);
  for (const auto& e : errs) mean += e;
  mean /= 500.0;
  CMatrix cov = CMatrix::Zero(dim, dim);
  for (const auto& e : errs) cov += (e - mean) * (e - mean).adjoint();
  cov /= 500.0;
  const double two_pass = (cov + mean * mean.adjoint()).norm();
  EXPECT_NEAR(acc.mse(), two_pass, 1e-10);
  EXPECT_NEAR(acc.bias(), mean.norm(), 1e-14);
  EXPECT_THROW(acc.add(CVector::Zero(3)), DimensionMismatch);
}

TEST(BoundIndices, ScalingAndClosedForm) {
  const Scenario sc = default_scenario(1.0);
  const auto [m40, v40] = bound_indices(sc, 40);
  const auto [m80, v80] = bound_indices(sc, 80);
  EXPECT_GT(m40, 0.0);
  EXPECT_GT(v40, 0.0);
  EXPECT_NEAR(m80 / m40, 0.5, 1e-14);
  EXPECT_NEAR(v80 / v40, 0.5, 1e-14);
  const double block = std::sqrt(2.0) * sc.v10.matrix().norm();
  EXPECT_NEAR(m40, 4.0 * block / 40.0, 1e-12);
  EXPECT_THROW(bound_indices(sc, 0), DomainError);
}

TEST(MseSweep, SingleTrialSmoke) {
  SweepConfig cfg;
  cfg.trials = 1;
  cfg.s_grid = {1.0};
  cfg.estimators = {EstimatorKind::SM};
  const auto cells = run_mse_sweep(cfg);
  ASSERT_EQ(cells.size(), 1u);
  ASSERT_EQ(cells[0].rows.size(), 1u);
  EXPECT_TRUE(std::isfinite(cells[0].rows[0].beta));
  EXPECT_TRUE(std::isfinite(cells[0].rows[0].varrho));
  EXPECT_TRUE(std::isnan(cells[0].rows[0].phi));
  EXPECT_EQ(cells[0].rows[0].label, "SM");
}

TEST(MseSweep, WorkerCountDoesNotChangeBytes) {
  SweepConfig cfg;
  cfg.n = 3;
  cfg.l = 15;
  cfg.trials = 60;
  cfg.s_grid = {0.4, 1.2};
  cfg.seed = 99;
  cfg.workers = 1;
  const std::string one = sweep_csv(cfg);
  cfg.workers = 4;
  EXPECT_EQ(sweep_csv(cfg), one);
  cfg.seed = 100;
  EXPECT_NE(sweep_csv(cfg), one);
}

TEST(MseSweep, MseStaysAboveLocationBound) {
  SweepConfig cfg;
  cfg.trials = 2000;
  cfg.s_grid = {0.5, 1.0, 1.5};
  cfg.estimators = {EstimatorKind::SM, EstimatorKind::Tyler};
  cfg.seed = 5;
  for (const auto& cell : run_mse_sweep(cfg)) {
    for (const auto& row : cell.rows) {
      EXPECT_GE(row.varrho, 0.9 * cell.eps_mu) << row.label << " s=" << cell.s;
      EXPECT_GE(row.beta, 0.0);
      if (row.kind == EstimatorKind::SM) {
        EXPECT_TRUE(std::isnan(row.varsigma));
      } else {
        EXPECT_GE(row.varsigma, 0.0);
      }
    }
  }
}

TEST(MseSweep, ConfigValidation) {
  SweepConfig cfg;
  cfg.l = cfg.n;
  EXPECT_THROW(run_mse_sweep(cfg), ConfigError);
  cfg = SweepConfig{};
  cfg.s_grid = {1.0, -0.5};
  EXPECT_THROW(run_mse_sweep(cfg), ConfigError);
  cfg = SweepConfig{};
  cfg.trials = 0;
  EXPECT_THROW(run_mse_sweep(cfg), ConfigError);
}

TEST(TimingSweep, RowsArePositive) {
  SweepConfig cfg;
  cfg.s_grid = {0.5};
  const auto rows = run_timing_sweep({2, 3}, 3, cfg);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].n, 2);
  EXPECT_EQ(rows[1].n, 3);
  for (const auto& r : rows) {
    EXPECT_GT(r.t_tyler, 0.0);
    EXPECT_GT(r.t_r_matrix, 0.0);
    EXPECT_GT(r.t_r_vectorized, 0.0);
    EXPECT_EQ(r.trials, 3);
  }
  EXPECT_THROW(run_timing_sweep({1}, 3, cfg), ConfigError);
  EXPECT_THROW(run_timing_sweep({}, 3, cfg), ConfigError);
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(Config, ParsesFieldsAndAliases) {
  const auto cfg = parse_sweep_config(nlohmann::json::parse(R"({
    "N": 4, "L": 20, "trials": 10, "s_grid": [0.5, 1], "sigma_x2": 2,
    "estimators": ["SM", "R-t3"], "nu": 3, "seed": 18446744073709551615, "workers": 2})"));
  EXPECT_EQ(cfg.n, 4);
  EXPECT_EQ(cfg.l, 20);
  EXPECT_EQ(cfg.s_grid.size(), 2u);
  EXPECT_EQ(cfg.seed, 18446744073709551615ULL);
  ASSERT_EQ(cfg.estimators.size(), 2u);
  EXPECT_EQ(cfg.estimators[1], EstimatorKind::Rt);
  EXPECT_EQ(estimator_label(EstimatorKind::Rt, cfg.nu), "R-t3");
  const auto lower = parse_sweep_config(nlohmann::json::parse(R"({"n": 3, "l": 9})"));
  EXPECT_EQ(lower.n, 3);
  EXPECT_EQ(lower.l, 9);
}

TEST(Config, Rejections) {
  auto bad = [](const char* text) {
    EXPECT_THROW(parse_sweep_config(nlohmann::json::parse(text)), ConfigError) << text;
  };
  bad(R"({"N": 8, "L": 8})");
  bad(R"({"trials": 0})");
  bad(R"({"s_grid": []})");
  bad(R"({"s_grid": [0]})");
  bad(R"({"estimators": ["MLE"]})");
  bad(R"({"estimators": ["SM", "SM"]})");
  bad(R"({"N": "eight"})");
  bad(R"({"typo": 1})");
  bad(R"([1, 2])");
  EXPECT_THROW(load_sweep_config("/nonexistent/cfg.json"), ConfigError);
}

TEST(Csv, MseLayout) {
  McMetrics cell;
  cell.s = 0.1;
  cell.eps_mu = 1.0 / 3.0;
  cell.eps_v = 2.0;
  cell.trials = 5;
  EstimatorMetrics sm;
  sm.label = "SM";
  sm.beta = 0.5;
  sm.varrho = 0.25;
  cell.rows.push_back(sm);
  std::ostringstream out;
  write_mse_csv(out, {cell});
  EXPECT_EQ(out.str(),
            "s,estimator,beta,phi,varrho,varsigma,eps_mu,eps_v,trials,pd_failures\n"
            "0.10000000000000001,SM,0.5,,0.25,,0.33333333333333331,2,5,0\n");
}

TEST(Csv, TimingLayout) {
  std::ostringstream out;
  write_timing_csv(out, {TimingRow{8, 0.5, 0.25, 2.0, 11}});
  EXPECT_EQ(out.str(),
            "N,estimator,median_seconds,reps\n8,Tyler,0.5,11\n8,R-matrix,0.25,11\n"
            "8,R-vectorized,2,11\n");
}

TEST(Csv, DatasetRoundTrip) {
  Rng rng(4);
  const Dataset d = sample_ces(7, make_scenario(3, 1.0), rng);
  std::stringstream io;
  write_dataset_csv(io, d);
  EXPECT_EQ(io.str().substr(0, 30), "re_1,im_1,re_2,im_2,re_3,im_3\n");
  const Dataset back = read_dataset_csv(io);
  EXPECT_EQ(back.z, d.z);
}

TEST(Csv, DatasetRejections) {
  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(read_dataset_csv(in), ConfigError) << text;
  };
  bad("");
  bad("re_1,im_1,re_2\n1,2,3\n");
  bad("re_1,im_2\n1,2\n");
  bad("re_1,im_1\n");
  bad("re_1,im_1\n1,x\n");
  bad("re_1,im_1\n1,2,3\n");
  bad("re_1,im_1\n1,2abc\n");
}
