#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "wavelab/spectral.hpp"

using namespace wavelab;

namespace {

Spectrum reference_q2_spectrum(int n, double h) {
  return diagonalize(reference_neumann_q2(n) / (h * h), Eigen::VectorXd::Ones(n), h);
}

}  // namespace

TEST(Spectral, SecondOrderNeumannMatchesClosedForm) {
  const int n = 41;
  const double h = 1.0 / n;
  const Spectrum sp = reference_q2_spectrum(n, h);
  for (int r = 1; r <= n; ++r) {
    const double exact = reference_neumann_q2_eigenvalue(n, r, h);
    EXPECT_NEAR(sp.lambda(r - 1), exact, 1e-10 * std::max(exact, sp.lambda(n - 1))) << "r=" << r;
  }
  EXPECT_NEAR(sp.lambda(0), 0.0, 1e-10 * sp.lambda(n - 1));
}

TEST(Spectral, ContinuousReference) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_EQ(continuous_eigen_reference(BoundaryKind::neumann, 1), 0.0);
  EXPECT_DOUBLE_EQ(continuous_eigen_reference(BoundaryKind::neumann, 3), 4.0 * pi2);
  EXPECT_DOUBLE_EQ(continuous_eigen_reference(BoundaryKind::neumann, 2), pi2);
  EXPECT_DOUBLE_EQ(continuous_eigen_reference(BoundaryKind::dirichlet, 1), pi2);
  EXPECT_THROW(continuous_eigen_reference(BoundaryKind::dirichlet, 0), std::invalid_argument);
}

class SpectralCases : public ::testing::TestWithParam<std::tuple<int, BoundaryKind>> {};

TEST_P(SpectralCases, SpectrumInvariants) {
  const auto [order, kind] = GetParam();
  const auto sd = assemble_1d(build_sbp_d2(order, Grid1D::unit(41)), kind);
  const Spectrum sp = diagonalize(sd);
  ASSERT_EQ(sp.size(), 41);
  const double lmax = sp.lambda.maxCoeff();
  for (int r = 0; r < sp.size(); ++r) {
    EXPECT_GE(sp.lambda(r), -1e-10 * lmax);
    if (r > 0) EXPECT_LE(sp.lambda(r - 1), sp.lambda(r));
  }
  EXPECT_NEAR(sp.norm_phi, sp.norm_p_inv_sqrt, 1e-8 * sp.norm_p_inv_sqrt);
  EXPECT_NEAR(sp.norm_phi_inv, sp.norm_p_sqrt, 1e-8 * sp.norm_p_sqrt);
  EXPECT_LE(sp.residual, 1e-8 * sp.operator_norm);
  const Eigen::MatrixXd id = sp.phi_inv * sp.phi;
  EXPECT_LE((id - Eigen::MatrixXd::Identity(41, 41)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST_P(SpectralCases, PhaseConventionFirstComponentPositive) {
  const auto [order, kind] = GetParam();
  const Spectrum sp = diagonalize(assemble_1d(build_sbp_d2(order, Grid1D::unit(31)), kind));
  for (int r = 0; r < sp.size(); ++r) {
    const auto col = sp.phi.col(r);
    const double tol = 1e-10 * col.cwiseAbs().maxCoeff();
    for (int i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > tol) {
        EXPECT_GT(col(i), 0.0) << "r=" << r;
        break;
      }
    }
  }
}

TEST_P(SpectralCases, ConditionNumberStaysBounded) {
  const auto [order, kind] = GetParam();
  double lo = 1e300;
  double hi = 0.0;
  for (int n : {21, 41, 81, 161}) {
    const double c = diagonalize(assemble_1d(build_sbp_d2(order, Grid1D::unit(n)), kind)).cond();
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  EXPECT_LT(hi / lo - 1.0, 0.1);
}

INSTANTIATE_TEST_SUITE_P(All, SpectralCases,
                         ::testing::Combine(::testing::Values(2, 4, 6),
                                            ::testing::Values(BoundaryKind::dirichlet, BoundaryKind::neumann)));

TEST(Spectral, NeumannHasZeroEigenvalue) {
  for (int order : {2, 4, 6}) {
    const Spectrum sp = diagonalize(assemble_neumann_1d(build_sbp_d2(order, Grid1D::unit(41))));
    EXPECT_NEAR(sp.lambda(0), 0.0, 1e-10 * sp.lambda.maxCoeff()) << "order " << order;
  }
}

TEST(Spectral, LowModesConvergeToContinuousFrequencies) {
  for (int order : {4, 6}) {
    std::vector<double> err41, err81;
    for (int n : {41, 81}) {
      const Spectrum sp = diagonalize(assemble_neumann_1d(build_sbp_d2(order, Grid1D::unit(n))));
      for (int r = 2; r <= 5; ++r) {
        const double e = std::abs(std::sqrt(std::max(sp.lambda(r - 1), 0.0)) - (r - 1) * std::numbers::pi);
        (n == 41 ? err41 : err81).push_back(e);
      }
    }
    for (std::size_t k = 0; k < err41.size(); ++k) {
      EXPECT_GE(std::log2(err41[k] / err81[k]), 2.0) << "order " << order << " r=" << k + 2;
    }
  }
}

TEST(Spectral, RejectsUnstableOperator) {
  const auto sd = assemble_neumann_1d(build_sbp_d2(4, Grid1D::unit(21)));
  const Eigen::MatrixXd a = -sd.matrix().dense();
  Eigen::VectorXd p(21);
  for (int i = 0; i < 21; ++i) p(i) = sd.p_diag()[i];
  EXPECT_THROW(diagonalize(a, p, sd.h()), std::domain_error);
}

TEST(Spectral, ShiftExamples) {
  const auto a = shift({1.0, 0.0}, 4.0, 1.0);
  EXPECT_NEAR(a.s_plus.real(), std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(a.s_plus.imag(), 0.0, 1e-15);
  const std::complex<double> s{0.3, -2.0};
  const auto b = shift(s, 0.0, 0.1);
  EXPECT_NEAR(std::abs(b.s_plus - s), 0.0, 1e-15);
}

TEST(Spectral, ShiftNeverReducesRealPart) {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> re(0.0, 5.0);
  std::uniform_real_distribution<double> im(-20.0, 20.0);
  std::uniform_real_distribution<double> lam(0.0, 100.0);
  int violations = 0;
  for (int k = 0; k < 100000; ++k) {
    const std::complex<double> s{re(rng), im(rng)};
    const auto d = shift(s, lam(rng), 0.5);
    if (d.s_plus.real() < s.real() * (1.0 - 1e-14)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Spectral, CosineTransformOfCornerData) {
  const int n = 40;
  const double h = 1.0 / n;
  const Spectrum sp = reference_q2_spectrum(n, h);
  std::vector<double> t0(n, 0.0);
  t0[0] = 1.0;
  const auto tr = spectral_transform(t0, sp);
  EXPECT_NEAR(tr.tau(0), 1.0 / std::sqrt(n), 1e-12);
  for (int r = 2; r <= n; ++r) {
    const double exact = std::sqrt(2.0 / n) * std::cos(std::numbers::pi * (r - 1) / (2.0 * n));
    EXPECT_NEAR(tr.tau(r - 1), exact, 1e-10) << "r=" << r;
  }
}

TEST(Spectral, CornerTransformDecaysLikeSqrtH) {
  for (int order : {2, 4}) {
    std::vector<double> maxes;
    for (int n : {41, 81, 161}) {
      const Spectrum sp = diagonalize(assemble_neumann_1d(build_sbp_d2(order, Grid1D::unit(n))));
      std::vector<double> t0(n, 0.0);
      t0[0] = 1.0;
      maxes.push_back(spectral_transform(t0, sp).max_abs);
    }
    for (std::size_t k = 1; k < maxes.size(); ++k) {
      EXPECT_NEAR(maxes[k - 1] / maxes[k], std::sqrt(2.0), 0.1 * std::sqrt(2.0)) << "order " << order;
    }
  }
}

TEST(Spectral, ParsevalIdentity) {
  const int n = 31;
  const auto sd = assemble_1d(build_sbp_d2(4, Grid1D::unit(n)), BoundaryKind::dirichlet);
  const Spectrum sp = diagonalize(sd);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> field(static_cast<std::size_t>(n * n));
  for (auto& v : field) v = dist(rng);
  const double lhs = weighted_norm2_2d(field, n, sp);
  const double rhs = modal_norm2_2d(decompose(field, n, sp), sd.h());
  EXPECT_NEAR(lhs, rhs, 1e-12 * lhs);
}

TEST(Spectral, ConstantDataHitsOnlyTheNullMode) {
  const int n = 41;
  const Spectrum sp = diagonalize(assemble_neumann_1d(build_sbp_d2(4, Grid1D::unit(n))));
  const std::vector<double> t0(n, 1.0);
  const auto tr = spectral_transform(t0, sp);
  EXPECT_GT(std::abs(tr.tau(0)), 0.5);
  for (int r = 1; r < n; ++r) EXPECT_NEAR(tr.tau(r), 0.0, 1e-10);
  EXPECT_NEAR(tr.tau.norm(), (sp.phi_inv * Eigen::VectorXd::Ones(n)).norm(), 1e-14);
}

TEST(Spectral, CsvHasOneRowPerMode) {
  const Spectrum sp = diagonalize(assemble_neumann_1d(build_sbp_d2(2, Grid1D::unit(11))));
  std::ostringstream os;
  write_spectrum_csv(os, sp, BoundaryKind::neumann);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "r,lambda,lambda_continuous,relerr");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 11);
}
