#include "wavelab/semidisc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wavelab/kernels.hpp"

namespace wavelab {

std::string_view to_string(BoundaryKind kind) {
  return kind == BoundaryKind::dirichlet ? "dirichlet" : "neumann";
}

BoundaryKind parse_boundary_kind(std::string_view text) {
  if (text == "dirichlet" || text == "Dirichlet" || text == "D") return BoundaryKind::dirichlet;
  if (text == "neumann" || text == "Neumann" || text == "N") return BoundaryKind::neumann;
  throw std::invalid_argument("unknown boundary kind '" + std::string(text) + "'");
}

namespace {

int border_rows_for(const SbpD2Operator& op, BoundaryKind kind) {
  return kind == BoundaryKind::dirichlet ? std::max(op.closure_rows(), op.s_width()) : op.closure_rows();
}

}  // namespace

SemiDiscretization1D::SemiDiscretization1D(SbpD2Operator op, BoundaryKind kind, double iota, double iota0)
    : op_(std::move(op)), kind_(kind), iota_(iota), iota0_(iota0) {
  const int n = op_.n();
  const double h = op_.h();
  const int rows = border_rows_for(op_, kind_);
  const int l = op_.p();
  const int cols = std::max({op_.closure_cols(), op_.s_width(), rows + l});
  if (n < 2 * rows + 1) {
    throw std::invalid_argument("SAT assembly: n = " + std::to_string(n) + " is below the minimum " +
                                std::to_string(2 * rows + 1) + " for order " + std::to_string(op_.order()));
  }
  const auto& tab = op_.table();
  auto hw = [&](int i) {
    return i < op_.closure_rows() ? tab.h_diag[static_cast<std::size_t>(i)] : 1.0;
  };

  // left block in grid units (the full operator is this times 1/h^2)
  std::vector<double> block(static_cast<std::size_t>(rows * cols), 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) block[static_cast<std::size_t>(i * cols + j)] = op_.d().entry(i, j);
  }
  auto at = [&](int i, int j) -> double& { return block[static_cast<std::size_t>(i * cols + j)]; };
  const int sw = op_.s_width();
  b_left_.assign(static_cast<std::size_t>(rows), 0.0);

  if (kind_ == BoundaryKind::dirichlet) {
    // -H^-1 S^T (u_0 - g) - (iota/h) H^-1 e_0 (u_0 - g)
    for (int i = 0; i < sw; ++i) {
      const double c = tab.s_row[static_cast<std::size_t>(i)] / hw(i);
      at(i, 0) -= c;
      b_left_[static_cast<std::size_t>(i)] += c / (h * h);
    }
    at(0, 0) -= iota_ / hw(0);
    b_left_[0] += iota_ / (hw(0) * h * h);
  } else {
    // H^-1 e_0 (S u + g_out), g_out = -u_x(0)
    for (int j = 0; j < sw; ++j) at(0, j) += tab.s_row[static_cast<std::size_t>(j)] / hw(0);
    b_left_[0] = 1.0 / (hw(0) * h);
  }
  // The closures are mirror images, including the sign flips of S_last and the outward normal.
  b_right_ = b_left_;
  a_ = StencilMatrix(n, rows, cols, block, block, tab.interior, 1.0 / (h * h));

  p_diag_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p_diag_[static_cast<std::size_t>(i)] = op_.h_diag()[static_cast<std::size_t>(i)] / h;
}

void SemiDiscretization1D::apply(std::span<const double> u, double g_left, double g_right,
                                 std::span<double> out) const {
  a_.apply(u, out);
  const int n = op_.n();
  for (std::size_t i = 0; i < b_left_.size(); ++i) {
    out[i] += b_left_[i] * g_left;
    out[static_cast<std::size_t>(n - 1) - i] += b_right_[i] * g_right;
  }
}

Eigen::MatrixXd SemiDiscretization1D::dense_q() const {
  return a_.dense() * (op_.h() * op_.h());
}

Eigen::MatrixXd SemiDiscretization1D::dense_pq() const {
  return Eigen::Map<const Eigen::VectorXd>(p_diag_.data(), op_.n()).asDiagonal() * dense_q();
}

EnergyConditionReport check_energy_condition(const SemiDiscretization1D& sd) {
  const Eigen::MatrixXd pq = sd.dense_pq();
  EnergyConditionReport r;
  r.asymmetry = (pq - pq.transpose()).cwiseAbs().maxCoeff();
  r.pq_max = pq.cwiseAbs().maxCoeff();
  const Eigen::MatrixXd sym = 0.5 * (pq + pq.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  r.eigmax = es.eigenvalues().maxCoeff();
  r.norm2 = es.eigenvalues().cwiseAbs().maxCoeff();
  return r;
}

namespace {

// Cholesky feasibility of -sym(PQ(iota)) + tol*||.||_inf*I.
bool penalty_is_stable(const SbpD2Operator& op, double iota) {
  const SemiDiscretization1D sd(op, BoundaryKind::dirichlet, iota, std::numeric_limits<double>::quiet_NaN());
  const Eigen::MatrixXd pq = sd.dense_pq();
  Eigen::MatrixXd neg = -0.5 * (pq + pq.transpose());
  const double norm = neg.cwiseAbs().rowwise().sum().maxCoeff();
  neg.diagonal().array() += 1e-10 * norm;
  Eigen::LLT<Eigen::MatrixXd> llt(neg);
  return llt.info() == Eigen::Success;
}

}  // namespace

double compute_iota0(const SbpD2Operator& op) {
  double lo = 0.0;
  double hi = 1.0;
  if (penalty_is_stable(op, lo)) return 0.0;
  while (!penalty_is_stable(op, hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) {
      throw std::runtime_error("compute_iota0: no stable penalty found in [0, 1e6] for order " +
                               std::to_string(op.order()));
    }
  }
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (penalty_is_stable(op, mid) ? hi : lo) = mid;
  }
  return hi;
}

SemiDiscretization1D assemble_dirichlet_1d(const SbpD2Operator& op, double iota, std::optional<double> iota0) {
  const double threshold = iota0 ? *iota0 : compute_iota0(op);
  if (iota < threshold - 1e-9) {
    std::ostringstream os;
    os << "Dirichlet penalty iota = " << iota << " is below the stability threshold iota0 = " << threshold;
    throw std::invalid_argument(os.str());
  }
  return SemiDiscretization1D(op, BoundaryKind::dirichlet, iota, threshold);
}

SemiDiscretization1D assemble_neumann_1d(const SbpD2Operator& op) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return SemiDiscretization1D(op, BoundaryKind::neumann, nan, nan);
}

SemiDiscretization1D assemble_1d(const SbpD2Operator& op, BoundaryKind kind, double penalty_factor) {
  if (kind == BoundaryKind::neumann) return assemble_neumann_1d(op);
  const double iota0 = compute_iota0(op);
  return assemble_dirichlet_1d(op, penalty_factor * iota0, iota0);
}

SemiDiscretization2D::SemiDiscretization2D(SemiDiscretization1D sx, SemiDiscretization1D sy)
    : sx_(std::move(sx)), sy_(std::move(sy)) {
  if (std::abs(sx_.h() - sy_.h()) > 1e-14 * sx_.h()) {
    throw std::invalid_argument("assemble_2d: grid spacing differs between directions");
  }
}

void SemiDiscretization2D::apply_homogeneous(std::span<const double> u, std::span<double> out) const {
  if (u.size() != size() || out.size() != size()) {
    throw std::invalid_argument("SemiDiscretization2D: dimension mismatch");
  }
  kernels::apply_kron_sum(sx_.matrix(), sy_.matrix(), u.data(), out.data());
}

void SemiDiscretization2D::add_data(const BoundaryData2D& data, std::span<double> out) const {
  const int nx = this->nx();
  const int ny = this->ny();
  auto check = [](const std::vector<double>& v, int n, const char* side) {
    if (static_cast<int>(v.size()) != n) {
      throw std::invalid_argument(std::string("boundary data ") + side + " has wrong length");
    }
  };
  check(data.x0, ny, "x0");
  check(data.x1, ny, "x1");
  check(data.y0, nx, "y0");
  check(data.y1, nx, "y1");
  const auto bx = sx_.b_left();
  const auto bxr = sx_.b_right();
  for (std::size_t k = 0; k < bx.size(); ++k) {
    double* left = out.data() + k * static_cast<std::size_t>(ny);
    double* right = out.data() + (static_cast<std::size_t>(nx) - 1 - k) * static_cast<std::size_t>(ny);
    for (int i = 0; i < ny; ++i) {
      left[i] += bx[k] * data.x0[static_cast<std::size_t>(i)];
      right[i] += bxr[k] * data.x1[static_cast<std::size_t>(i)];
    }
  }
  const auto by = sy_.b_left();
  const auto byr = sy_.b_right();
  for (int j = 0; j < nx; ++j) {
    double* col = out.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(ny);
    for (std::size_t k = 0; k < by.size(); ++k) {
      col[k] += by[k] * data.y0[static_cast<std::size_t>(j)];
      col[static_cast<std::size_t>(ny) - 1 - k] += byr[k] * data.y1[static_cast<std::size_t>(j)];
    }
  }
}

void SemiDiscretization2D::apply(std::span<const double> u, const BoundaryData2D& data,
                                 std::span<double> out) const {
  apply_homogeneous(u, out);
  add_data(data, out);
}

Eigen::MatrixXd SemiDiscretization2D::dense() const {
  const Eigen::MatrixXd ax = sx_.matrix().dense();
  const Eigen::MatrixXd ay = sy_.matrix().dense();
  const int nx = this->nx();
  const int ny = this->ny();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(nx * ny, nx * ny);
  // (Ax (x) I_y) + (I_x (x) Ay)
  for (int j = 0; j < nx; ++j) {
    for (int k = 0; k < nx; ++k) {
      if (ax(j, k) != 0.0) {
        for (int i = 0; i < ny; ++i) q(j * ny + i, k * ny + i) += ax(j, k);
      }
    }
    q.block(j * ny, j * ny, ny, ny) += ay;
  }
  return q;
}

SemiDiscretization2D assemble_2d(const SbpD2Operator& opx, const SbpD2Operator& opy, BoundaryKind kind,
                                 double penalty_factor) {
  if (std::abs(opx.h() - opy.h()) > 1e-14 * opx.h()) {
    throw std::invalid_argument("assemble_2d: grid spacing differs between directions");
  }
  return SemiDiscretization2D(assemble_1d(opx, kind, penalty_factor), assemble_1d(opy, kind, penalty_factor));
}

SemiDiscretization2D assemble_2d(SemiDiscretization1D sx, SemiDiscretization1D sy) {
  return SemiDiscretization2D(std::move(sx), std::move(sy));
}

}  // namespace wavelab
