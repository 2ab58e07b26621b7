#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace wavelab {

/// Square n-by-n matrix with a repeated interior stencil and dense border
/// blocks at both ends.
///
/// Row i < border_rows uses left(i, 0..border_cols-1) on columns 0..border_cols-1.
/// Row n-1-i uses right(i, j) on column n-1-j (the right block is stored in
/// reflected coordinates). All remaining rows apply the centered stencil of
/// half width l. Every entry is multiplied by `scale` on application.
///
/// Rows are evaluated as sum_j A(i, j) (u_j - u_i) + (row sum) u_i. For rows
/// that annihilate constants this keeps the round-off proportional to the
/// local variation of u instead of its magnitude, which matters once the
/// 1/h^2 scaling amplifies it.
class StencilMatrix {
 public:
  StencilMatrix() = default;
  StencilMatrix(int n, int border_rows, int border_cols, std::vector<double> left,
                std::vector<double> right, std::vector<double> stencil, double scale);

  int size() const { return n_; }
  int border_rows() const { return border_rows_; }
  int border_cols() const { return border_cols_; }
  int half_width() const { return static_cast<int>(stencil_.size() / 2); }
  double scale() const { return scale_; }

  std::span<const double> stencil() const { return stencil_; }
  double left(int i, int j) const { return left_[static_cast<std::size_t>(i * border_cols_ + j)]; }
  double right(int i, int j) const { return right_[static_cast<std::size_t>(i * border_cols_ + j)]; }
  /// Unscaled row sums of the border blocks and of the stencil.
  double left_row_sum(int i) const { return left_sum_[static_cast<std::size_t>(i)]; }
  double right_row_sum(int i) const { return right_sum_[static_cast<std::size_t>(i)]; }
  double stencil_sum() const { return stencil_sum_; }

  /// Unscaled entry (i, j) of the full matrix.
  double entry(int i, int j) const;

  /// out[k*ostride] (+)= scale * sum_j A(k, j) u[j*stride]
  void apply(const double* u, std::ptrdiff_t stride, double* out, std::ptrdiff_t ostride,
             bool accumulate = false) const;

  void apply(std::span<const double> u, std::span<double> out) const;

  /// Scaled dense copy, for small-n oracles and eigen-analysis.
  Eigen::MatrixXd dense() const;

  /// Same matrix with every entry multiplied by `factor` (scale changes only).
  StencilMatrix scaled(double factor) const;

 private:
  int n_ = 0;
  int border_rows_ = 0;
  int border_cols_ = 0;
  std::vector<double> left_;
  std::vector<double> right_;
  std::vector<double> stencil_;
  std::vector<double> left_sum_;
  std::vector<double> right_sum_;
  double stencil_sum_ = 0.0;
  double scale_ = 1.0;
};

}  // namespace wavelab
