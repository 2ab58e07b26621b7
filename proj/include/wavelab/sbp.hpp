#pragma once

#include <algorithm>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wavelab/stencil_matrix.hpp"

namespace wavelab {

/// Equidistant grid x_i = i*h, i = 0..n-1.
struct Grid1D {
  int n = 0;
  double h = 0.0;

  /// Grid spanning [0, 1]: h = 1/(n-1).
  static Grid1D unit(int n);
  double x(int i) const { return i * h; }
  std::vector<double> points() const;
};

/// Closure coefficients of one diagonal-norm operator, in grid units (h = 1).
struct SbpTable {
  int order = 0;
  int closure_rows = 0;
  int closure_cols = 0;
  std::vector<double> h_diag;    // closure_rows weights
  std::vector<double> m_rows;    // closure_rows x closure_cols, row-major
  std::vector<double> s_row;     // boundary first-derivative row
  std::vector<double> interior;  // 2p+1 centered coefficients
};

/// Parses the plain-text table format and validates its trailing crc32 line.
/// Throws std::runtime_error on malformed input or checksum mismatch.
SbpTable parse_sbp_table(std::string_view text, std::string_view source_name = "<memory>");
SbpTable load_sbp_table(const std::filesystem::path& path);
/// The table compiled into the library (same text as data/sbp/d2_order<k>.txt).
const SbpTable& builtin_sbp_table(int order);
std::string_view builtin_sbp_table_text(int order);

/// Diagonal-norm SBP approximation of d^2/dx^2: D = H^-1 (-M + B S).
class SbpD2Operator {
 public:
  SbpD2Operator(const SbpTable& table, int n, double h);

  int order() const { return table_.order; }
  int p() const { return table_.order / 2; }
  int n() const { return n_; }
  double h() const { return h_; }
  int closure_rows() const { return table_.closure_rows; }
  int closure_cols() const { return table_.closure_cols; }
  const SbpTable& table() const { return table_; }

  /// Central interior coefficients a_0..a_2p (grid units).
  std::span<const double> interior_coeffs() const { return table_.interior; }

  /// Full diagonal of H (scales with h).
  std::span<const double> h_diag() const { return h_diag_; }
  /// S_first as a dense row over columns 0..s_width-1, scaled by 1/h.
  std::vector<double> s_first() const;
  /// S_last over columns n-s_width..n-1, scaled by 1/h.
  std::vector<double> s_last() const;
  int s_width() const { return static_cast<int>(table_.s_row.size()); }

  /// D in banded-plus-border storage, entries scaled by 1/h^2.
  const StencilMatrix& d() const { return d_; }

  Eigen::MatrixXd dense_d() const { return d_.dense(); }
  Eigen::MatrixXd dense_h() const;
  Eigen::MatrixXd dense_m() const;
  /// B S, where B = diag(-1, 0, ..., 0, 1).
  Eigen::MatrixXd dense_bs() const;

  /// Minimum n for which the two boundary closures do not overlap.
  static int min_size(int order);

 private:
  SbpTable table_;
  int n_;
  double h_;
  std::vector<double> h_diag_;
  StencilMatrix d_;
};

/// Builds the operator for interior order 2, 4 or 6 on n points with spacing h.
/// Throws std::invalid_argument for an unsupported order or n < min_size(order).
SbpD2Operator build_sbp_d2(int order, int n, double h);
SbpD2Operator build_sbp_d2(int order, const Grid1D& grid);

/// v -> D v. Throws std::invalid_argument on dimension mismatch.
std::vector<double> apply_d2(const SbpD2Operator& op, std::span<const double> v);

struct ExactnessRow {
  int degree = 0;
  double interior_residual = 0.0;  // scaled max residual over interior rows
  double boundary_residual = 0.0;  // scaled max residual over closure rows
};

struct SbpPropertyReport {
  int order = 0;
  int n = 0;
  int nonpositive_h = 0;           // count of H_ii <= 0
  double m_asymmetry = 0.0;        // ||M - M^T||_max
  double m_max = 0.0;              // ||M||_max
  double m_eigmin = 0.0;           // smallest eigenvalue of (M + M^T)/2
  double m_norm2 = 0.0;
  bool b_pattern_ok = false;
  double decomposition_residual = 0.0;  // ||H^-1(-M + BS) - D||_max / ||D||_max
  double s_first_residual = 0.0;   // max |S_first x^k - k 0^(k-1)| for k <= p
  std::vector<ExactnessRow> exactness;

  // Thresholds used by passed(); defaults are the acceptance values.
  double symmetry_tol = 1e-12;
  double eig_tol = 1e-10;
  double exact_tol = 1e-8;

  bool h_positive() const { return nonpositive_h == 0; }
  bool symmetric() const { return m_asymmetry <= symmetry_tol * m_max; }
  bool semidefinite() const { return m_eigmin >= -eig_tol; }
  bool exact() const;
  bool passed() const;
};

/// Checks the SBP decomposition numerically. Never throws for a constructed
/// operator; failures are recorded in the report.
SbpPropertyReport verify_sbp_properties(const SbpD2Operator& op);
/// Same checks on explicitly supplied matrices (used to test corrupted inputs).
SbpPropertyReport verify_sbp_properties(const SbpD2Operator& op, const Eigen::MatrixXd& m);

}  // namespace wavelab
