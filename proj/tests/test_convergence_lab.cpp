#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "wavelab/convergence_lab.hpp"

using namespace wavelab;

namespace {

SimulationConfig quick_2d(int order, BoundaryKind bc) {
  SimulationConfig cfg;
  cfg.dim = 2;
  cfg.order = order;
  cfg.bc = bc;
  cfg.tf = 0.25;
  cfg.cfl = 0.1;
  return cfg;
}

ConvergenceReport sample_report() {
  ConvergenceReport r;
  r.experiment = "refinement";
  r.rows = {{21, 0.05, 1e-2, std::nullopt}, {41, 0.025, 2.5e-3, 2.0}, {81, 0.0125, 6.1e-4, convergence_rate(2.5e-3, 6.1e-4)}};
  r.predicted_rate = 2.0;
  return r;
}

}  // namespace

TEST(Rate, MatchesHalvingFormula) {
  EXPECT_NEAR(convergence_rate(1e-2, 2.5e-3), 2.0, 1e-12);
  EXPECT_NEAR(convergence_rate(1.0, 1.0 / 32.0), 5.0, 1e-12);
  EXPECT_THROW(convergence_rate(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(convergence_rate(1.0, -1.0), std::invalid_argument);
}

TEST(Report, HeadlineAndVerdict) {
  auto r = sample_report();
  EXPECT_NEAR(r.headline_rate(), std::log(2.5e-3 / 6.1e-4) / std::log(2.0), 1e-12);
  EXPECT_TRUE(r.passed());
  r.predicted_rate = 2.4;
  EXPECT_FALSE(r.passed());
  r.predicted_rate.reset();
  EXPECT_TRUE(r.passed());
  r.rows.resize(1);
  EXPECT_THROW(r.headline_rate(), std::logic_error);
}

TEST(Report, CsvRoundTripIsExact) {
  const auto r = sample_report();
  std::ostringstream os;
  write_csv(os, r);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "N,h,l2_error,rate");
  std::istringstream is(os.str());
  const auto rows = read_csv(is);
  ASSERT_EQ(rows.size(), r.rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].n, r.rows[k].n);
    EXPECT_EQ(rows[k].h, r.rows[k].h);
    EXPECT_EQ(rows[k].l2_error, r.rows[k].l2_error);
    EXPECT_EQ(rows[k].rate.has_value(), r.rows[k].rate.has_value());
    if (rows[k].rate) EXPECT_EQ(*rows[k].rate, *r.rows[k].rate);
  }
}

TEST(Report, MalformedCsvIsRejected) {
  for (const char* text : {"", "N,h,l2_error,rate\n41,abc,1e-3,\n", "N,h\n41,0.1\n", "N,h,l2_error,rate\n41,0.1\n"}) {
    std::istringstream is(text);
    EXPECT_THROW(read_csv(is), std::runtime_error) << text;
  }
}

TEST(Report, JsonHasSummaryKeys) {
  auto r = sample_report();
  r.metadata["order"] = "2";
  const auto j = nlohmann::json::parse(report_json(r));
  for (const char* key : {"experiment", "rows", "headline_rate", "predicted_rate", "tolerance", "passed", "metadata"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["rows"].size(), 3u);
  EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(Study, RejectsBadLadders) {
  const auto cfg = quick_2d(2, BoundaryKind::dirichlet);
  EXPECT_THROW(run_refinement_study(cfg, {21, 41}), std::invalid_argument);
  EXPECT_THROW(run_refinement_study(cfg, {41, 21, 81}), std::invalid_argument);
}

TEST(Study, OneDimensionalFourthOrder) {
  SimulationConfig cfg;
  cfg.dim = 1;
  cfg.order = 4;
  cfg.bc = BoundaryKind::neumann;
  cfg.tf = 1.0;
  const auto r = run_refinement_study(cfg, {41, 81, 161});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_FALSE(r.rows[0].rate.has_value());
  EXPECT_GT(r.headline_rate(), 3.7);
  EXPECT_EQ(r.metadata.at("order"), "4");
}

TEST(Study, TwoDimensionalSecondOrder) {
  const auto r = run_refinement_study(quick_2d(2, BoundaryKind::neumann), {21, 41, 81});
  EXPECT_NEAR(r.headline_rate(), 2.0, 0.3);
}

TEST(Corner, SitesAndAmplitude) {
  const auto cp = default_corner_perturbation(4, BoundaryKind::dirichlet);
  for (int n : {41, 81, 321}) {
    const auto s = cp.sites(n);
    EXPECT_EQ(s.size(), 10u);
    EXPECT_EQ(s.front(), 0);
    EXPECT_EQ(s.back(), n - 1);
  }
  EXPECT_NEAR(cp.nu(0.1) / cp.nu(0.05), 4.0, 1e-12);
  const auto cn = default_corner_perturbation(4, BoundaryKind::neumann);
  EXPECT_NEAR(cn.nu(0.1) / cn.nu(0.05), 2.0, 1e-12);
}

TEST(Corner, LeadingCoefficients) {
  EXPECT_NEAR(corner_coefficient(2), 1.0, 1e-12);
  EXPECT_NEAR(corner_coefficient(4), -11.0 / 12.0, 1e-12);
  EXPECT_THROW(corner_coefficient(8), std::invalid_argument);
}

TEST(Corner, ZeroAmplitudeReproducesRefinement) {
  const auto cfg = quick_2d(2, BoundaryKind::dirichlet);
  auto cp = default_corner_perturbation(2, BoundaryKind::dirichlet);
  cp.amplitude_scale = 0.0;
  const std::vector<int> levels{21, 41, 81};
  const auto corner = run_corner_experiment(cfg, levels, cp);
  const auto plain = run_refinement_study(cfg, levels);
  for (std::size_t k = 0; k < levels.size(); ++k) EXPECT_EQ(corner.rows[k].l2_error, plain.rows[k].l2_error);
}

TEST(Corner, PerturbedErrorScalesLinearlyInAmplitude) {
  const auto cfg = quick_2d(2, BoundaryKind::neumann);
  auto cp = default_corner_perturbation(2, BoundaryKind::neumann);
  cp.amplitude_scale = 200.0;
  const double base = solve_level(cfg, 41);
  const double e1 = solve_corner_level(cfg, cp, 41);
  cp.amplitude_scale = 400.0;
  const double e2 = solve_corner_level(cfg, cp, 41);
  // the perturbation dominates the base error, so doubling it nearly doubles the total
  EXPECT_GT(e1, 5.0 * base);
  EXPECT_NEAR(e2 / e1, 2.0, 0.1);
}

TEST(Corner, MismatchedPerturbationIsRejected) {
  const auto cfg = quick_2d(2, BoundaryKind::dirichlet);
  EXPECT_THROW(solve_corner_level(cfg, default_corner_perturbation(2, BoundaryKind::neumann), 21), std::invalid_argument);
  EXPECT_THROW(solve_corner_level(cfg, default_corner_perturbation(4, BoundaryKind::dirichlet), 21), std::invalid_argument);
}

TEST(Prediction, RateTable) {
  EXPECT_DOUBLE_EQ(predicted_rate(2, BoundaryKind::dirichlet), 2.0);
  EXPECT_DOUBLE_EQ(predicted_rate(4, BoundaryKind::neumann), 4.0);
  EXPECT_DOUBLE_EQ(predicted_rate(6, BoundaryKind::dirichlet), 5.5);
  EXPECT_DOUBLE_EQ(predicted_rate(4, BoundaryKind::dirichlet, PenaltyRegime::at_threshold), 2.5);
  EXPECT_THROW(predicted_rate(8, BoundaryKind::dirichlet), std::invalid_argument);
}

TEST(Prediction, CornerLoss) {
  for (int order : {2, 4, 6}) {
    EXPECT_EQ(corner_w(order, BoundaryKind::neumann), 1) << order;
    EXPECT_EQ(corner_w(order, BoundaryKind::dirichlet), 0) << order;
  }
  EXPECT_DOUBLE_EQ(predicted_corner_rate(4, 0), 3.0);
  EXPECT_DOUBLE_EQ(predicted_corner_rate(4, 1), 2.0);
}

class TruncationProbe : public ::testing::TestWithParam<std::tuple<int, BoundaryKind>> {};

TEST_P(TruncationProbe, BandSlopes) {
  const auto [order, bc] = GetParam();
  const double p = order / 2;
  const auto cfg = quick_2d(order, bc);
  const auto rep = truncation_probe(cfg, 41, default_corner_perturbation(order, bc));
  EXPECT_EQ(rep.n_fine, 81);
  EXPECT_NEAR(rep.interior.slope, 2.0 * p, 0.3);
  EXPECT_NEAR(rep.closure.slope, p, 0.3);
  ASSERT_TRUE(rep.corner.has_value());
  EXPECT_NEAR(rep.corner->slope, p - 2.0, 0.3);
}

INSTANTIATE_TEST_SUITE_P(Schemes, TruncationProbe,
                         ::testing::Combine(::testing::Values(2, 4, 6),
                                            ::testing::Values(BoundaryKind::dirichlet, BoundaryKind::neumann)));

TEST(Study, TemporalErrorIsNegligible) {
  SimulationConfig cfg;
  cfg.order = 4;
  cfg.bc = BoundaryKind::dirichlet;
  cfg.tf = 2.0;
  const double coarse = solve_level(cfg, 81);
  cfg.cfl = 0.05;
  const double fine = solve_level(cfg, 81);
  EXPECT_LT(std::abs(coarse - fine) / fine, 0.01);
}
