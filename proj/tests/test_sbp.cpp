#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavelab/sbp.hpp"

using namespace wavelab;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> monomial(const SbpD2Operator& op, int k) {
  std::vector<double> v(static_cast<std::size_t>(op.n()));
  for (int i = 0; i < op.n(); ++i) v[i] = std::pow(i * op.h(), k);
  return v;
}

}  // namespace

class SbpOrders : public ::testing::TestWithParam<int> {};

TEST_P(SbpOrders, PropertySuitePassesAt61) {
  const auto op = build_sbp_d2(GetParam(), Grid1D::unit(61));
  const auto r = verify_sbp_properties(op);
  EXPECT_TRUE(r.h_positive());
  EXPECT_TRUE(r.symmetric()) << r.m_asymmetry;
  EXPECT_TRUE(r.semidefinite()) << r.m_eigmin;
  EXPECT_TRUE(r.b_pattern_ok);
  EXPECT_TRUE(r.exact());
  EXPECT_LE(r.s_first_residual, 1e-8);
  EXPECT_TRUE(r.passed());
}

TEST_P(SbpOrders, ConstantsAndLinearsAreAnnihilated) {
  const auto op = build_sbp_d2(GetParam(), Grid1D::unit(41));
  for (int k : {0, 1}) {
    const auto d = apply_d2(op, monomial(op, k));
    for (double v : d) EXPECT_NEAR(v, 0.0, 1e-9);
  }
  const auto zero = apply_d2(op, std::vector<double>(41, 0.0));
  for (double v : zero) EXPECT_EQ(v, 0.0);
}

TEST_P(SbpOrders, InteriorStencilSymmetricAndConsistent) {
  const auto op = build_sbp_d2(GetParam(), Grid1D::unit(41));
  const auto a = op.interior_coeffs();
  ASSERT_EQ(static_cast<int>(a.size()), GetParam() + 1);
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_DOUBLE_EQ(a[j], a[a.size() - 1 - j]);
    sum += a[j];
  }
  EXPECT_NEAR(sum, 0.0, 1e-14);
}

TEST_P(SbpOrders, NormScalesLinearlyInH) {
  const auto a = build_sbp_d2(GetParam(), Grid1D::unit(41));
  const auto b = build_sbp_d2(GetParam(), Grid1D::unit(81));
  for (int i = 0; i < a.closure_rows(); ++i) {
    EXPECT_NEAR(a.h_diag()[i] / a.h(), b.h_diag()[i] / b.h(), 1e-14);
  }
}

TEST_P(SbpOrders, BuiltinTablesMatchDataFiles) {
  const int order = GetParam();
  const std::string path = std::string(WAVELAB_DATA_DIR) + "/sbp/d2_order" + std::to_string(order) + ".txt";
  EXPECT_EQ(read_file(path), std::string(builtin_sbp_table_text(order)));
  const auto t = load_sbp_table(path);
  EXPECT_EQ(t.order, order);
  EXPECT_EQ(t.h_diag, builtin_sbp_table(order).h_diag);
}

TEST_P(SbpOrders, ApplyIsDeterministic) {
  const auto op = build_sbp_d2(GetParam(), Grid1D::unit(81));
  std::vector<double> v(81);
  for (int i = 0; i < 81; ++i) v[i] = std::sin(2.0 * std::numbers::pi * i * op.h());
  EXPECT_EQ(apply_d2(op, v), apply_d2(op, v));
}

INSTANTIATE_TEST_SUITE_P(AllOrders, SbpOrders, ::testing::Values(2, 4, 6));

TEST(Sbp, SecondOrderInteriorRow) {
  const auto op = build_sbp_d2(2, Grid1D::unit(11));
  const double h2 = op.h() * op.h();
  const auto d = op.dense_d();
  EXPECT_NEAR(d(5, 4) * h2, 1.0, 1e-12);
  EXPECT_NEAR(d(5, 5) * h2, -2.0, 1e-12);
  EXPECT_NEAR(d(5, 6) * h2, 1.0, 1e-12);
}

TEST(Sbp, SecondOrderNeumannClosureFirstRow) {
  // -h M for the second-order operator: first row (-1, 1, 0, ...)
  const auto op = build_sbp_d2(2, Grid1D::unit(11));
  const Eigen::MatrixXd pq = -op.h() * op.dense_m();
  EXPECT_NEAR(pq(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(pq(0, 1), 1.0, 1e-12);
  for (int j = 2; j < 11; ++j) EXPECT_NEAR(pq(0, j), 0.0, 1e-12);
}

TEST(Sbp, FourthOrderCubicExact) {
  const auto op = build_sbp_d2(4, Grid1D::unit(41));
  const auto d = apply_d2(op, monomial(op, 3));
  for (int i = 0; i < 41; ++i) EXPECT_NEAR(d[i], 6.0 * i * op.h(), 1e-8) << i;
}

TEST(Sbp, FourthOrderExactnessTable) {
  const auto r = verify_sbp_properties(build_sbp_d2(4, Grid1D::unit(61)));
  for (const auto& row : r.exactness) {
    if (row.degree <= 5) EXPECT_LE(row.interior_residual, 1e-8) << row.degree;
    if (row.degree <= 3) EXPECT_LE(row.boundary_residual, 1e-8) << row.degree;
  }
  // closures are not exact beyond p+1: degree 4 must leave a visible residual
  bool found = false;
  for (const auto& row : r.exactness) {
    if (row.degree == 4) {
      found = true;
      EXPECT_GT(row.boundary_residual, 1e-6);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Sbp, SixthOrderSineConvergesAtRateSix) {
  std::vector<double> err;
  for (int n : {81, 161}) {
    const auto op = build_sbp_d2(6, Grid1D::unit(n));
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = std::sin(2.0 * std::numbers::pi * i * op.h());
    const auto d = apply_d2(op, v);
    double e = 0.0;
    for (int i = op.closure_rows(); i < n - op.closure_rows(); ++i) {
      const double x = i * op.h();
      e = std::max(e, std::abs(d[i] + 4.0 * std::numbers::pi * std::numbers::pi * std::sin(2.0 * std::numbers::pi * x)));
    }
    err.push_back(e);
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 5.7);
}

TEST(Sbp, CorruptedMFailsSymmetry) {
  const auto op = build_sbp_d2(2, Grid1D::unit(21));
  Eigen::MatrixXd m = op.dense_m();
  m(3, 4) += 1e-3;
  const auto r = verify_sbp_properties(op, m);
  EXPECT_FALSE(r.symmetric());
  EXPECT_FALSE(r.passed());
  EXPECT_TRUE(verify_sbp_properties(op).passed());
}

TEST(Sbp, SecondOrderMIsSemidefinite) {
  const auto r = verify_sbp_properties(build_sbp_d2(2, Grid1D::unit(61)));
  EXPECT_GE(r.m_eigmin, -1e-10);
}

TEST(Sbp, RejectsBadInput) {
  EXPECT_THROW(build_sbp_d2(8, 61, 0.1), std::invalid_argument);
  EXPECT_THROW(build_sbp_d2(3, 61, 0.1), std::invalid_argument);
  EXPECT_THROW(build_sbp_d2(6, SbpD2Operator::min_size(6) - 1, 0.1), std::invalid_argument);
  EXPECT_NO_THROW(build_sbp_d2(6, SbpD2Operator::min_size(6), 0.1));
  EXPECT_THROW(build_sbp_d2(4, 41, -1.0), std::invalid_argument);
  const auto op = build_sbp_d2(2, Grid1D::unit(11));
  EXPECT_THROW(apply_d2(op, std::vector<double>(10)), std::invalid_argument);
}

TEST(Sbp, MinSizeMessageNamesBound) {
  try {
    build_sbp_d2(4, 5, 0.25);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(SbpD2Operator::min_size(4))), std::string::npos);
  }
}

TEST(SbpTableFormat, RejectsChecksumMismatch) {
  EXPECT_NO_THROW(parse_sbp_table(builtin_sbp_table_text(4)));
  std::string bad(builtin_sbp_table_text(4));
  bad.replace(bad.find("17/48"), 5, "18/48");
  EXPECT_THROW(parse_sbp_table(bad), std::runtime_error);
}

TEST(SbpTableFormat, RejectsMissingFileAndUnknownKey) {
  EXPECT_THROW(load_sbp_table("/nonexistent/table.txt"), std::runtime_error);
  std::string text(builtin_sbp_table_text(2));
  text.insert(0, "bogus 1\n");
  EXPECT_THROW(parse_sbp_table(text), std::runtime_error);
}
