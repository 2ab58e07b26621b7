#include <gtest/gtest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "wavelab/stencil_matrix.hpp"

using wavelab::StencilMatrix;

namespace {

StencilMatrix sample_matrix(int n) {
  // 2 border rows, 3 border cols, 3-point interior stencil
  std::vector<double> left = {1, 2, 3, 4, 5, 6};
  std::vector<double> right = {-1, -2, -3, -4, -5, -6};
  return StencilMatrix(n, 2, 3, left, right, {1, -2, 1}, 0.5);
}

}  // namespace

TEST(StencilMatrix, EntriesFollowBorderLayout) {
  const StencilMatrix a = sample_matrix(8);
  EXPECT_DOUBLE_EQ(a.entry(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(a.entry(1, 2), 6.0);
  EXPECT_DOUBLE_EQ(a.entry(7, 7), -1.0);
  EXPECT_DOUBLE_EQ(a.entry(6, 5), -6.0);
  EXPECT_DOUBLE_EQ(a.entry(3, 2), 1.0);
  EXPECT_DOUBLE_EQ(a.entry(3, 3), -2.0);
  EXPECT_DOUBLE_EQ(a.entry(3, 5), 0.0);
}

TEST(StencilMatrix, ApplyMatchesDense) {
  const StencilMatrix a = sample_matrix(11);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> u(11);
  for (auto& v : u) v = dist(rng);
  std::vector<double> out(11);
  a.apply(u, out);
  const Eigen::VectorXd ref = a.dense() * Eigen::Map<const Eigen::VectorXd>(u.data(), 11);
  for (int i = 0; i < 11; ++i) EXPECT_NEAR(out[i], ref(i), 1e-14);
}

TEST(StencilMatrix, StridedAccumulate) {
  const StencilMatrix a = sample_matrix(9);
  std::vector<double> u(18), out(18, 1.0);
  for (int i = 0; i < 18; ++i) u[i] = 0.1 * i;
  a.apply(u.data(), 2, out.data(), 2, true);
  std::vector<double> uc(9), ref(9);
  for (int i = 0; i < 9; ++i) uc[i] = u[2 * i];
  a.apply(uc, ref);
  for (int i = 0; i < 9; ++i) {
    EXPECT_NEAR(out[2 * i], 1.0 + ref[i], 1e-14);
    EXPECT_DOUBLE_EQ(out[2 * i + 1], 1.0);
  }
}

TEST(StencilMatrix, ScaledChangesOnlyScale) {
  const StencilMatrix a = sample_matrix(9);
  const StencilMatrix b = a.scaled(4.0);
  EXPECT_LT((b.dense() - 4.0 * a.dense()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(StencilMatrix, RejectsInconsistentShapes) {
  EXPECT_THROW(StencilMatrix(8, 2, 3, std::vector<double>(5), std::vector<double>(6), {1, -2, 1}, 1.0),
               std::invalid_argument);
  EXPECT_THROW(StencilMatrix(8, 2, 3, std::vector<double>(6), std::vector<double>(6), {1, -2}, 1.0),
               std::invalid_argument);
  EXPECT_THROW(StencilMatrix(3, 2, 3, std::vector<double>(6), std::vector<double>(6), {1, -2, 1}, 1.0),
               std::invalid_argument);
  const StencilMatrix a = sample_matrix(8);
  std::vector<double> u(7), out(8);
  EXPECT_THROW(a.apply(u, out), std::invalid_argument);
}
