#include "wavelab/kernels.hpp"

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wavelab::kernels {

void apply_kron_sum(const StencilMatrix& ax, const StencilMatrix& ay, const double* u, double* out) {
  const int nx = ax.size();
  const int ny = ay.size();
  const int rows = ax.border_rows();
  const int cols = ax.border_cols();
  const int l = ax.half_width();
  const auto st = ax.stencil();
  const int w = static_cast<int>(st.size());
  const double sx = ax.scale();

#pragma omp parallel for schedule(static)
  for (int j = 0; j < nx; ++j) {
    double* o = out + static_cast<std::ptrdiff_t>(j) * ny;
    ay.apply(u + static_cast<std::ptrdiff_t>(j) * ny, 1, o, 1, false);

    const double* self = u + static_cast<std::ptrdiff_t>(j) * ny;
    // same difference form as StencilMatrix::apply
    auto add_column = [&](double c, int k) {
      const double a = sx * c;
      if (a == 0.0 || k == j) return;
      const double* src = u + static_cast<std::ptrdiff_t>(k) * ny;
#pragma omp simd
      for (int i = 0; i < ny; ++i) o[i] += a * (src[i] - self[i]);
    };

    double row_sum = 0.0;
    if (j < rows) {
      for (int k = 0; k < cols; ++k) add_column(ax.left(j, k), k);
      row_sum = ax.left_row_sum(j);
    } else if (j >= nx - rows) {
      const int r = nx - 1 - j;
      for (int k = 0; k < cols; ++k) add_column(ax.right(r, k), nx - 1 - k);
      row_sum = ax.right_row_sum(r);
    } else {
      for (int k = 0; k < w; ++k) add_column(st[static_cast<std::size_t>(k)], j - l + k);
      row_sum = ax.stencil_sum();
    }
    if (row_sum != 0.0) {
      const double a = sx * row_sum;
#pragma omp simd
      for (int i = 0; i < ny; ++i) o[i] += a * self[i];
    }
  }
}

void apply_kron_sum_serial(const StencilMatrix& ax, const StencilMatrix& ay, const double* u, double* out) {
  const int nx = ax.size();
  const int ny = ay.size();
  for (int j = 0; j < nx; ++j) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(j) * ny;
    ay.apply(u + off, 1, out + off, 1, false);
  }
  for (int i = 0; i < ny; ++i) {
    ax.apply(u + i, ny, out + i, ny, true);
  }
}

void axpby(std::size_t n, double a, const double* x, double b, double* y) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) y[k] = a * x[k] + b * y[k];
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n >= 1) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace wavelab::kernels
