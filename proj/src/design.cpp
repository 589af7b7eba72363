#include "biht/design.hpp"

#include <cmath>
#include <cstring>

namespace biht {

namespace {

// Fills entries [first, last) of the stream, honoring Box-Muller pairing:
// positions 2p and 2p+1 share the same two uniform draws. first must be
// even so the pair boundary is respected.
void fill_normals(double* dst, std::uint64_t key, std::size_t first, std::size_t last) {
  for (std::size_t i = first; i < last; i += 2) {
    const double u1 = unit_pos_from(hash_at(key, i));
    const double u2 = unit_from(hash_at(key, i + 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.2831853071795864769 * u2;
    dst[i] = r * std::cos(a);
    if (i + 1 < last) dst[i + 1] = r * std::sin(a);
  }
}

constexpr std::size_t kFillChunk = 1u << 16;  // entries per parallel fill task
constexpr int kAccumBlockRows = 4096;         // rows per accumulation block

}  // namespace

GaussianDesign gaussian_design(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw InvalidParams("gaussian_design: need n >= 1 and d >= 1");
  GaussianDesign X;
  X.rows = n;
  X.cols = d;
  X.seed = seed;
  const std::size_t m = static_cast<std::size_t>(n) * d;
  X.entries.resize(m);
  const std::int64_t chunks = static_cast<std::int64_t>((m + kFillChunk - 1) / kFillChunk);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::size_t first = static_cast<std::size_t>(c) * kFillChunk;
    const std::size_t last = std::min(m, first + kFillChunk);
    fill_normals(X.entries.data(), seed, first, last);
  }
  return X;
}

GaussianDesign gaussian_design_serial(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw InvalidParams("gaussian_design: need n >= 1 and d >= 1");
  GaussianDesign X;
  X.rows = n;
  X.cols = d;
  X.seed = seed;
  const std::size_t m = static_cast<std::size_t>(n) * d;
  X.entries.resize(m);
  fill_normals(X.entries.data(), seed, 0, m);
  return X;
}

namespace {

void check_margin_args(const GaussianDesign& X, const Vec& theta) {
  if (static_cast<int>(theta.size()) != X.cols)
    throw InvalidParams("margins: theta length must equal design cols");
}

double row_dot_dense(const double* row, const Vec& theta) {
  double s = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) s += row[j] * theta[j];
  return s;
}

double row_dot_gather(const double* row, const Vec& theta, const SupportSet& supp) {
  double s = 0.0;
  for (int j : supp) s += row[j] * theta[j];
  return s;
}

}  // namespace

void margins(const GaussianDesign& X, const Vec& theta, Vec& out) {
  check_margin_args(X, theta);
  out.resize(X.rows);
  const SupportSet supp = support_of(theta);
  const bool gather = !supp.empty() && static_cast<int>(supp.size()) * 8 <= X.cols;
  if (gather) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < X.rows; ++i) out[i] = row_dot_gather(X.row(i), theta, supp);
  } else {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < X.rows; ++i) out[i] = row_dot_dense(X.row(i), theta);
  }
}

void margins_serial(const GaussianDesign& X, const Vec& theta, Vec& out) {
  check_margin_args(X, theta);
  out.resize(X.rows);
  const SupportSet supp = support_of(theta);
  const bool gather = !supp.empty() && static_cast<int>(supp.size()) * 8 <= X.cols;
  for (int i = 0; i < X.rows; ++i)
    out[i] = gather ? row_dot_gather(X.row(i), theta, supp) : row_dot_dense(X.row(i), theta);
}

namespace {

void accumulate_block(const GaussianDesign& X, const std::vector<std::int8_t>& coef,
                      int row_first, int row_last, double* acc) {
  const int d = X.cols;
  for (int i = row_first; i < row_last; ++i) {
    const std::int8_t c = coef[i];
    if (c == 0) continue;
    const double* row = X.row(i);
    if (c > 0)
      for (int j = 0; j < d; ++j) acc[j] += row[j];
    else
      for (int j = 0; j < d; ++j) acc[j] -= row[j];
  }
}

}  // namespace

void accumulate_signed_rows(const GaussianDesign& X, const std::vector<std::int8_t>& coef,
                            Vec& out) {
  if (static_cast<int>(coef.size()) != X.rows)
    throw InvalidParams("accumulate_signed_rows: coef length must equal design rows");
  out.assign(X.cols, 0.0);
  const int nb = (X.rows + kAccumBlockRows - 1) / kAccumBlockRows;
  if (nb <= 1) {
    accumulate_block(X, coef, 0, X.rows, out.data());
    return;
  }
  std::vector<double> partial(static_cast<std::size_t>(nb) * X.cols, 0.0);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < nb; ++b) {
    const int first = b * kAccumBlockRows;
    const int last = std::min(X.rows, first + kAccumBlockRows);
    accumulate_block(X, coef, first, last,
                     partial.data() + static_cast<std::size_t>(b) * X.cols);
  }
  for (int b = 0; b < nb; ++b) {
    const double* p = partial.data() + static_cast<std::size_t>(b) * X.cols;
    for (int j = 0; j < X.cols; ++j) out[j] += p[j];
  }
}

void accumulate_signed_rows_serial(const GaussianDesign& X,
                                   const std::vector<std::int8_t>& coef, Vec& out) {
  if (static_cast<int>(coef.size()) != X.rows)
    throw InvalidParams("accumulate_signed_rows: coef length must equal design rows");
  out.assign(X.cols, 0.0);
  accumulate_block(X, coef, 0, X.rows, out.data());
}

}  // namespace biht
