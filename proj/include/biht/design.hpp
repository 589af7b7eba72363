#pragma once

#include <cstdint>
#include <vector>

#include "biht/vec.hpp"

namespace biht {

// Measurement matrix with i.i.d. standard normal entries, stored row major.
// Entry (i, j) is normal_at(seed, i * cols + j), so the matrix is fully
// determined by (rows, cols, seed) and can be regenerated or filled in
// parallel without changing a single bit.
struct GaussianDesign {
  int rows = 0;
  int cols = 0;
  std::uint64_t seed = 0;
  std::vector<double> entries;

  const double* row(int i) const {
    return entries.data() + static_cast<std::size_t>(i) * cols;
  }
};

// Parallel fill over disjoint index ranges. Identical output to the serial
// reference for every thread count.
GaussianDesign gaussian_design(int n, int d, std::uint64_t seed);

// Single-loop reference used by tests.
GaussianDesign gaussian_design_serial(int n, int d, std::uint64_t seed);

// out[i] = <row_i, theta>. When theta is sparse enough the kernel gathers
// only the supporting columns; both paths add the same nonzero terms in the
// same order, so they agree exactly.
void margins(const GaussianDesign& X, const Vec& theta, Vec& out);
void margins_serial(const GaussianDesign& X, const Vec& theta, Vec& out);

// out = sum_i coef[i] * row_i for coef[i] in {-1, 0, +1}; rows with a zero
// coefficient are skipped. The parallel kernel accumulates fixed row blocks
// and folds the partials in block order, so its output does not depend on
// the thread count (it differs from the serial reference only by that fixed
// regrouping of additions).
void accumulate_signed_rows(const GaussianDesign& X, const std::vector<std::int8_t>& coef,
                            Vec& out);
void accumulate_signed_rows_serial(const GaussianDesign& X,
                                   const std::vector<std::int8_t>& coef, Vec& out);

}  // namespace biht
