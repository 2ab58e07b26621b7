#include "wavelab/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace wavelab {

namespace {

double norm2(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

Spectrum diagonalize(const Eigen::MatrixXd& a, const Eigen::VectorXd& p_diag, double h) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || p_diag.size() != n) throw std::invalid_argument("diagonalize: dimension mismatch");
  if ((p_diag.array() <= 0.0).any()) throw std::invalid_argument("diagonalize: P must be positive");

  const Eigen::MatrixXd pa = p_diag.asDiagonal() * a;
  const double pa_max = pa.cwiseAbs().maxCoeff();
  const double asym = (pa - pa.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * pa_max) {
    std::ostringstream os;
    os << "diagonalize: P*A is not symmetric (asymmetry " << asym << ")";
    throw std::domain_error(os.str());
  }

  const Eigen::VectorXd ps = p_diag.cwiseSqrt();
  const Eigen::VectorXd pis = ps.cwiseInverse();
  // P^{1/2} A P^{-1/2} = P^{-1/2} (P A) P^{-1/2} is symmetric
  Eigen::MatrixXd sym = pis.asDiagonal() * pa * pis.asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("diagonalize: eigensolver failed");

  const Eigen::VectorXd mu = es.eigenvalues();  // ascending, so -mu descending
  const double scale = mu.cwiseAbs().maxCoeff();
  if (mu.maxCoeff() > 1e-10 * scale) {
    std::ostringstream os;
    os << "diagonalize: P*A is not negative semi-definite (eigmin of -sym(PA) = " << -mu.maxCoeff() << ")";
    throw std::domain_error(os.str());
  }

  Spectrum s;
  s.h = h;
  s.p_diag = p_diag;
  s.lambda.resize(n);
  Eigen::MatrixXd v(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index src = n - 1 - r;
    s.lambda(r) = -mu(src);
    Eigen::VectorXd col = es.eigenvectors().col(src);
    const double cmax = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > 1e-10 * cmax) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
    v.col(r) = col;
  }
  s.phi = pis.asDiagonal() * v;
  s.phi_inv = v.transpose() * ps.asDiagonal();
  s.norm_phi = norm2(s.phi);
  s.norm_phi_inv = norm2(s.phi_inv);
  s.norm_p_inv_sqrt = pis.maxCoeff();
  s.norm_p_sqrt = ps.maxCoeff();
  s.operator_norm = a.cwiseAbs().maxCoeff();
  s.residual = (a + s.phi * s.lambda.asDiagonal() * s.phi_inv).cwiseAbs().maxCoeff();
  return s;
}

Spectrum diagonalize(const SemiDiscretization1D& sd) {
  const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(sd.p_diag().data(), sd.n());
  return diagonalize(sd.matrix().dense(), p, sd.h());
}

double continuous_eigen_reference(BoundaryKind kind, int r) {
  if (r < 1) throw std::invalid_argument("continuous_eigen_reference: r must be >= 1");
  const double k = kind == BoundaryKind::neumann ? r - 1 : r;
  return k * k * std::numbers::pi * std::numbers::pi;
}

Eigen::MatrixXd reference_neumann_q2(int n) {
  if (n < 2) throw std::invalid_argument("reference_neumann_q2: n must be >= 2");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      q(i, i - 1) = 1.0;
      q(i, i) -= 1.0;
    }
    if (i < n - 1) {
      q(i, i + 1) = 1.0;
      q(i, i) -= 1.0;
    }
  }
  return q;
}

double reference_neumann_q2_eigenvalue(int n, int r, double h) {
  const double s = std::sin(std::numbers::pi * (r - 1) / (2.0 * n));
  return 4.0 * s * s / (h * h);
}

ShiftedDual shift(std::complex<double> s, double lambda, double h) {
  ShiftedDual d{s, lambda, std::sqrt(s * s + h * h * lambda)};
  if (d.s_plus.real() < 0.0) d.s_plus = -d.s_plus;
  return d;
}

SpectralTransform spectral_transform(std::span<const double> t0, const Spectrum& spectrum) {
  if (static_cast<int>(t0.size()) != spectrum.size()) {
    throw std::invalid_argument("spectral_transform: length mismatch");
  }
  SpectralTransform out;
  out.tau = spectrum.phi_inv * Eigen::Map<const Eigen::VectorXd>(t0.data(), spectrum.size());
  out.max_abs = out.tau.cwiseAbs().maxCoeff();
  out.scaled = out.max_abs / std::sqrt(spectrum.h);
  return out;
}

Eigen::MatrixXd decompose(std::span<const double> field, int nx, const Spectrum& spectrum) {
  const int ny = spectrum.size();
  if (field.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
    throw std::invalid_argument("decompose: field size does not match nx * ny");
  }
  const Eigen::Map<const Eigen::MatrixXd> u(field.data(), ny, nx);
  return spectrum.phi_inv * u;
}

double weighted_norm2_2d(std::span<const double> field, int nx, const Spectrum& spectrum) {
  const int ny = spectrum.size();
  if (field.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
    throw std::invalid_argument("weighted_norm2_2d: field size does not match nx * ny");
  }
  const Eigen::Map<const Eigen::MatrixXd> u(field.data(), ny, nx);
  return spectrum.h * spectrum.h * (spectrum.p_diag.asDiagonal() * u.cwiseAbs2()).sum();
}

double modal_norm2_2d(const Eigen::MatrixXd& coeffs, double h) {
  return h * h * coeffs.cwiseAbs2().sum();
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum, BoundaryKind kind) {
  os << "r,lambda,lambda_continuous,relerr\n";
  char buf[128];
  for (int r = 1; r <= spectrum.size(); ++r) {
    const double lam = spectrum.lambda(r - 1);
    const double ref = continuous_eigen_reference(kind, r);
    const double err = ref == 0.0 ? std::abs(lam) : std::abs(lam - ref) / ref;
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r, lam, ref, err);
    os << buf;
  }
}

}  // namespace wavelab
