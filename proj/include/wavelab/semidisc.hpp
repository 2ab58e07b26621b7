#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wavelab/sbp.hpp"
#include "wavelab/stencil_matrix.hpp"

namespace wavelab {

enum class BoundaryKind { dirichlet, neumann };

std::string_view to_string(BoundaryKind kind);
/// Accepts "dirichlet"/"neumann" (also "D"/"N"). Throws std::invalid_argument.
BoundaryKind parse_boundary_kind(std::string_view text);

/// Time-dependent boundary data for a 1D problem. Dirichlet data is the trace
/// of u; Neumann data is the outward normal derivative (-u_x at the left end,
/// +u_x at the right end). Empty functions mean homogeneous data.
struct BoundaryConditionSpec {
  BoundaryKind kind = BoundaryKind::dirichlet;
  std::function<double(double)> left;
  std::function<double(double)> right;
};

/// u_tt = Q u / h^2 + b_left g_left(t) + b_right g_right(t) + F
///
/// Q/h^2 is D plus the SAT terms acting on u; the b vectors carry the data
/// injection of the same SAT terms. Immutable after assembly.
class SemiDiscretization1D {
 public:
  SemiDiscretization1D(SbpD2Operator op, BoundaryKind kind, double iota, double iota0);

  const SbpD2Operator& op() const { return op_; }
  BoundaryKind kind() const { return kind_; }
  int n() const { return op_.n(); }
  double h() const { return op_.h(); }
  /// Penalty parameter; NaN for Neumann.
  double iota() const { return iota_; }
  double iota0() const { return iota0_; }

  /// Q / h^2 in banded-plus-border form.
  const StencilMatrix& matrix() const { return a_; }
  /// Data injection vectors; entry i acts on row i (left) or row n-1-i (right).
  std::span<const double> b_left() const { return b_left_; }
  std::span<const double> b_right() const { return b_right_; }
  /// P = H / h.
  std::span<const double> p_diag() const { return p_diag_; }

  /// out = Q u / h^2 + b_left g_left + b_right g_right
  void apply(std::span<const double> u, double g_left, double g_right, std::span<double> out) const;

  /// Q itself (h^2 times the operator), dense.
  Eigen::MatrixXd dense_q() const;
  /// P Q, dense.
  Eigen::MatrixXd dense_pq() const;

 private:
  SbpD2Operator op_;
  BoundaryKind kind_;
  double iota_;
  double iota0_;
  StencilMatrix a_;
  std::vector<double> b_left_;
  std::vector<double> b_right_;
  std::vector<double> p_diag_;
};

/// Energy-condition diagnostics for P Q with P = H / h.
struct EnergyConditionReport {
  double asymmetry = 0.0;     // ||PQ - (PQ)^T||_max
  double pq_max = 0.0;        // ||PQ||_max
  double norm2 = 0.0;         // ||sym(PQ)||_2
  double eigmax = 0.0;        // largest eigenvalue of sym(PQ)
  double tol = 1e-10;

  bool symmetric() const { return asymmetry <= tol * pq_max; }
  /// eigmin(-sym(PQ)) >= -tol * ||PQ||_2
  bool negative_semidefinite() const { return -eigmax >= -tol * norm2; }
  bool passed() const { return symmetric() && negative_semidefinite(); }
};

EnergyConditionReport check_energy_condition(const SemiDiscretization1D& sd);

/// Smallest penalty (to 1e-6 absolute) making sym(PQ) negative semi-definite.
/// Throws std::runtime_error if no bracket is found in [0, 1e6].
double compute_iota0(const SbpD2Operator& op);

/// Dirichlet SAT scheme. Throws std::invalid_argument if iota < iota0 - 1e-9.
/// If iota0 is not supplied it is computed.
SemiDiscretization1D assemble_dirichlet_1d(const SbpD2Operator& op, double iota,
                                           std::optional<double> iota0 = std::nullopt);
SemiDiscretization1D assemble_neumann_1d(const SbpD2Operator& op);
/// Dirichlet with iota = penalty_factor * iota0, or Neumann.
SemiDiscretization1D assemble_1d(const SbpD2Operator& op, BoundaryKind kind, double penalty_factor = 1.2);

/// Boundary data along the four sides of the unit square. x0/x1 hold values
/// at the y grid points on x = 0 / x = 1; y0/y1 hold values at the x grid
/// points on y = 0 / y = 1.
struct BoundaryData2D {
  std::vector<double> x0, x1, y0, y1;
};

/// Kronecker semi-discretization on an nx-by-ny grid. Unknowns are stored
/// column-wise: u[j * ny + i] lives at (x_j, y_i), so the first ny entries
/// are the boundary x = 0.
class SemiDiscretization2D {
 public:
  SemiDiscretization2D(SemiDiscretization1D sx, SemiDiscretization1D sy);

  const SemiDiscretization1D& x() const { return sx_; }
  const SemiDiscretization1D& y() const { return sy_; }
  int nx() const { return sx_.n(); }
  int ny() const { return sy_.n(); }
  std::size_t size() const { return static_cast<std::size_t>(nx()) * static_cast<std::size_t>(ny()); }
  double h() const { return sx_.h(); }

  /// out = (Q_x (x) I_y) u / h^2 + (I_x (x) Q_y) u / h^2 (OpenMP kernel)
  void apply_homogeneous(std::span<const double> u, std::span<double> out) const;
  /// Homogeneous action plus SAT data terms.
  void apply(std::span<const double> u, const BoundaryData2D& data, std::span<double> out) const;
  /// Adds the data terms only.
  void add_data(const BoundaryData2D& data, std::span<double> out) const;

  /// Explicit Kronecker matrix; only sensible for small grids.
  Eigen::MatrixXd dense() const;

 private:
  SemiDiscretization1D sx_;
  SemiDiscretization1D sy_;
};

/// Throws std::invalid_argument if the two directions use different h.
SemiDiscretization2D assemble_2d(const SbpD2Operator& opx, const SbpD2Operator& opy, BoundaryKind kind,
                                 double penalty_factor = 1.2);
SemiDiscretization2D assemble_2d(SemiDiscretization1D sx, SemiDiscretization1D sy);

}  // namespace wavelab
