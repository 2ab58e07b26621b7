#pragma once

#include "wavelab/stencil_matrix.hpp"

namespace wavelab::kernels {

// 2D operator application on a column-major nx-by-ny grid function
// (u[j * ny + i] at x-index j, y-index i):
//   out = (Ax (x) I_y) u + (I_x (x) Ay) u
// The parallel version distributes x-columns over OpenMP threads and runs
// the x-direction stencil as column axpys. The serial version applies the
// generic strided 1D operator line by line and is kept as the reference.

void apply_kron_sum(const StencilMatrix& ax, const StencilMatrix& ay, const double* u, double* out);
void apply_kron_sum_serial(const StencilMatrix& ax, const StencilMatrix& ay, const double* u, double* out);

/// y = a*x + b*y over n entries.
void axpby(std::size_t n, double a, const double* x, double b, double* y);

/// Number of OpenMP threads the kernels will use (1 without OpenMP).
int max_threads();
/// Caps the thread count; values < 1 are ignored.
void set_threads(int n);

}  // namespace wavelab::kernels
