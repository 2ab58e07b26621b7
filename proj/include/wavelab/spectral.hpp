#pragma once

#include <complex>
#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wavelab/semidisc.hpp"

namespace wavelab {

/// Eigen-decomposition -A = Phi Lambda Phi^-1 of a 1D operator A = Q/h^2.
struct Spectrum {
  Eigen::VectorXd lambda;     // ascending, non-negative up to round-off
  Eigen::MatrixXd phi;        // columns are eigenvectors
  Eigen::MatrixXd phi_inv;
  Eigen::VectorXd p_diag;     // norm weights used for the symmetrization
  double norm_phi = 0.0;      // ||Phi||_2
  double norm_phi_inv = 0.0;  // ||Phi^-1||_2
  double norm_p_inv_sqrt = 0.0;
  double norm_p_sqrt = 0.0;
  double residual = 0.0;      // ||A + Phi Lambda Phi^-1||_max
  double operator_norm = 0.0; // ||A||_max
  double h = 0.0;

  int size() const { return static_cast<int>(lambda.size()); }
  double cond() const { return norm_phi * norm_phi_inv; }
};

/// Diagonalizes A (= Q/h^2) given the diagonal of P, after checking that
/// P*A is symmetric negative semi-definite. Throws std::domain_error
/// (message carries the offending eigenvalue) when that check fails.
/// Eigenvector phase: first component above round-off is positive.
Spectrum diagonalize(const Eigen::MatrixXd& a, const Eigen::VectorXd& p_diag, double h);
Spectrum diagonalize(const SemiDiscretization1D& sd);

/// Eigenvalues of -d^2/dx^2 on [0, 1]: Neumann (r-1)^2 pi^2, Dirichlet r^2 pi^2.
/// Throws std::invalid_argument for r < 1.
double continuous_eigen_reference(BoundaryKind kind, int r);

/// Cell-centred second-order Neumann matrix with rows (-1, 1), (1, -2, 1), (1, -1).
/// Its weight matrix is the identity and its eigenvalues are 4 sin^2(pi (r-1) / (2n)).
Eigen::MatrixXd reference_neumann_q2(int n);
/// Closed-form eigenvalues of reference_neumann_q2(n) / h^2.
double reference_neumann_q2_eigenvalue(int n, int r, double h);

struct ShiftedDual {
  std::complex<double> s;
  double lambda = 0.0;
  std::complex<double> s_plus;  // sqrt(s^2 + h^2 lambda), Re >= 0
};

ShiftedDual shift(std::complex<double> s, double lambda, double h);

struct SpectralTransform {
  Eigen::VectorXd tau;       // Phi^-1 T0
  double max_abs = 0.0;      // max_r |tau_r|
  double scaled = 0.0;       // max_abs / sqrt(h)
};

SpectralTransform spectral_transform(std::span<const double> t0, const Spectrum& spectrum);

/// Row-wise modal coefficients of a 2D field stored as u[j*ny + i]:
/// result(r, j) = (Phi^-1 u_{:,j})_r.
Eigen::MatrixXd decompose(std::span<const double> field, int nx, const Spectrum& spectrum);

/// h^2 sum_j u_{:,j}^T P u_{:,j}; with P = I this is the plain 2D norm squared.
double weighted_norm2_2d(std::span<const double> field, int nx, const Spectrum& spectrum);
/// h sum_r ||coeffs(r, :)||^2_{1D,x}
double modal_norm2_2d(const Eigen::MatrixXd& coeffs, double h);

/// CSV with header r,lambda,lambda_continuous,relerr. relerr is absolute
/// when the reference eigenvalue is zero.
void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum, BoundaryKind kind);

}  // namespace wavelab
