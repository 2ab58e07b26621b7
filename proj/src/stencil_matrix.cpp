#include "wavelab/stencil_matrix.hpp"

#include <stdexcept>
#include <string>

namespace wavelab {

StencilMatrix::StencilMatrix(int n, int border_rows, int border_cols, std::vector<double> left,
                             std::vector<double> right, std::vector<double> stencil, double scale)
    : n_(n),
      border_rows_(border_rows),
      border_cols_(border_cols),
      left_(std::move(left)),
      right_(std::move(right)),
      stencil_(std::move(stencil)),
      scale_(scale) {
  if (stencil_.size() % 2 != 1) {
    throw std::invalid_argument("StencilMatrix: stencil length must be odd");
  }
  const auto block = static_cast<std::size_t>(border_rows_ * border_cols_);
  if (left_.size() != block || right_.size() != block) {
    throw std::invalid_argument("StencilMatrix: border block size mismatch");
  }
  const int l = half_width();
  if (n_ < 2 * border_rows_ || n_ < border_cols_ || n_ < 2 * l + 1) {
    throw std::invalid_argument("StencilMatrix: n = " + std::to_string(n_) +
                                " too small for border rows " + std::to_string(border_rows_));
  }
  // interior rows must not reach outside the matrix
  if (border_rows_ < l) {
    throw std::invalid_argument("StencilMatrix: border must cover the stencil half width");
  }
  // the last border row must hold its full interior-width neighbourhood
  if (border_rows_ > 0 && border_cols_ < border_rows_ + l) {
    throw std::invalid_argument("StencilMatrix: border columns must reach border_rows + half width");
  }
  left_sum_.assign(static_cast<std::size_t>(border_rows_), 0.0);
  right_sum_.assign(static_cast<std::size_t>(border_rows_), 0.0);
  for (int i = 0; i < border_rows_; ++i) {
    for (int j = 0; j < border_cols_; ++j) {
      const auto k = static_cast<std::size_t>(i * border_cols_ + j);
      left_sum_[static_cast<std::size_t>(i)] += left_[k];
      right_sum_[static_cast<std::size_t>(i)] += right_[k];
    }
  }
  for (double c : stencil_) stencil_sum_ += c;
}

double StencilMatrix::entry(int i, int j) const {
  if (i < border_rows_) {
    return j < border_cols_ ? left(i, j) : 0.0;
  }
  if (i >= n_ - border_rows_) {
    const int ri = n_ - 1 - i;
    const int rj = n_ - 1 - j;
    return (rj >= 0 && rj < border_cols_) ? right(ri, rj) : 0.0;
  }
  const int k = j - i + half_width();
  return (k >= 0 && k < static_cast<int>(stencil_.size())) ? stencil_[static_cast<std::size_t>(k)]
                                                           : 0.0;
}

void StencilMatrix::apply(const double* u, std::ptrdiff_t stride, double* out,
                          std::ptrdiff_t ostride, bool accumulate) const {
  const int l = half_width();
  const int w = static_cast<int>(stencil_.size());
  auto store = [&](int i, double v) {
    double& o = out[i * ostride];
    o = accumulate ? o + scale_ * v : scale_ * v;
  };
  for (int i = 0; i < border_rows_; ++i) {
    const double ui = u[i * stride];
    double acc = 0.0;
    for (int j = 0; j < border_cols_; ++j) acc += left(i, j) * (u[j * stride] - ui);
    store(i, acc + left_sum_[static_cast<std::size_t>(i)] * ui);
  }
  for (int i = border_rows_; i < n_ - border_rows_; ++i) {
    const double ui = u[i * stride];
    double acc = 0.0;
    const double* base = u + (i - l) * stride;
    for (int k = 0; k < w; ++k) acc += stencil_[static_cast<std::size_t>(k)] * (base[k * stride] - ui);
    store(i, acc + stencil_sum_ * ui);
  }
  for (int i = 0; i < border_rows_; ++i) {
    const double ui = u[(n_ - 1 - i) * stride];
    double acc = 0.0;
    for (int j = 0; j < border_cols_; ++j) acc += right(i, j) * (u[(n_ - 1 - j) * stride] - ui);
    store(n_ - 1 - i, acc + right_sum_[static_cast<std::size_t>(i)] * ui);
  }
}

void StencilMatrix::apply(std::span<const double> u, std::span<double> out) const {
  if (static_cast<int>(u.size()) != n_ || static_cast<int>(out.size()) != n_) {
    throw std::invalid_argument("StencilMatrix::apply: dimension mismatch (expected " +
                                std::to_string(n_) + ", got " + std::to_string(u.size()) + ")");
  }
  apply(u.data(), 1, out.data(), 1, false);
}

Eigen::MatrixXd StencilMatrix::dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    const int lo = std::max(0, i - std::max(border_cols_, half_width()));
    const int hi = std::min(n_ - 1, i + std::max(border_cols_, half_width()));
    for (int j = lo; j <= hi; ++j) a(i, j) = scale_ * entry(i, j);
  }
  return a;
}

StencilMatrix StencilMatrix::scaled(double factor) const {
  StencilMatrix copy = *this;
  copy.scale_ *= factor;
  return copy;
}

}  // namespace wavelab
