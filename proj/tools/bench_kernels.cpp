#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "biht/design.hpp"

// Times the parallel kernels against their serial references on one shared
// problem and reports throughput plus the largest observed divergence. The
// parallel results must match serially computed ones: generation and margins
// exactly, accumulation to rounding (its additions are regrouped into fixed
// blocks).

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_best_of(int reps, F&& body) {
  double best = 1e100;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    body();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int rows = 20000;
  int cols = 500;
  int reps = 5;
  std::uint64_t seed = 1;
  for (int i = 1; i < argc; ++i) {
    const auto next_int = [&](int& dst) {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "missing value after %s\n", argv[i]);
        std::exit(1);
      }
      dst = std::atoi(argv[++i]);
    };
    if (std::strcmp(argv[i], "--rows") == 0) {
      next_int(rows);
    } else if (std::strcmp(argv[i], "--cols") == 0) {
      next_int(cols);
    } else if (std::strcmp(argv[i], "--reps") == 0) {
      next_int(reps);
    } else if (std::strcmp(argv[i], "--seed") == 0) {
      int s = 0;
      next_int(s);
      seed = static_cast<std::uint64_t>(s);
    } else {
      std::fprintf(stderr, "unknown argument: %s\n", argv[i]);
      return 1;
    }
  }
  if (rows < 1 || cols < 1 || reps < 1) {
    std::fprintf(stderr, "rows, cols, reps must be positive\n");
    return 1;
  }

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("design: %d x %d, best of %d reps\n\n", rows, cols, reps);
  const double mentries = static_cast<double>(rows) * cols / 1e6;

  // Generation.
  biht::GaussianDesign X;
  const double gen_par = time_best_of(reps, [&] { X = biht::gaussian_design(rows, cols, seed); });
  biht::GaussianDesign X_ref;
  const double gen_ser =
      time_best_of(reps, [&] { X_ref = biht::gaussian_design_serial(rows, cols, seed); });
  bool gen_equal = X.entries == X_ref.entries;
  std::printf("generate   parallel %8.2f Mentries/s   serial %8.2f Mentries/s   %s\n",
              mentries / gen_par, mentries / gen_ser,
              gen_equal ? "bit-identical" : "MISMATCH");

  // Margins against a sparse and a dense vector.
  biht::Rng rng(seed + 1);
  const biht::Vec sparse = biht::random_sparse_unit(cols, std::max(1, cols / 100), rng).entries;
  biht::Vec dense(cols);
  for (int j = 0; j < cols; ++j) dense[j] = rng.next_normal();
  biht::Vec m_par, m_ser;
  const double mar_par = time_best_of(reps, [&] { biht::margins(X, dense, m_par); });
  const double mar_ser = time_best_of(reps, [&] { biht::margins_serial(X, dense, m_ser); });
  bool mar_equal = m_par == m_ser;
  biht::Vec ms_par, ms_ser;
  biht::margins(X, sparse, ms_par);
  biht::margins_serial(X, sparse, ms_ser);
  mar_equal = mar_equal && ms_par == ms_ser;
  std::printf("margins    parallel %8.2f Mentries/s   serial %8.2f Mentries/s   %s\n",
              mentries / mar_par, mentries / mar_ser,
              mar_equal ? "bit-identical" : "MISMATCH");

  // Signed-row accumulation with a half-and-half coefficient pattern.
  std::vector<std::int8_t> coef(rows);
  for (int i = 0; i < rows; ++i)
    coef[i] = static_cast<std::int8_t>(rng.next_below(2) == 0 ? 0 : (i % 2 ? 1 : -1));
  biht::Vec acc_par, acc_ser;
  const double acc_par_t =
      time_best_of(reps, [&] { biht::accumulate_signed_rows(X, coef, acc_par); });
  const double acc_ser_t =
      time_best_of(reps, [&] { biht::accumulate_signed_rows_serial(X, coef, acc_ser); });
  double acc_diff = 0.0;
  for (int j = 0; j < cols; ++j)
    acc_diff = std::max(acc_diff, std::fabs(acc_par[j] - acc_ser[j]));
  std::printf("accumulate parallel %8.2f Mentries/s   serial %8.2f Mentries/s   max diff %.2e\n",
              mentries / acc_par_t, mentries / acc_ser_t, acc_diff);

  const bool ok = gen_equal && mar_equal && acc_diff <= 1e-12;
  std::printf("\n%s\n", ok ? "kernel agreement OK" : "kernel agreement FAILED");
  return ok ? 0 : 1;
}
