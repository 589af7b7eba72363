#include "biht/biht.hpp"

#include <algorithm>
#include <cmath>

namespace biht {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005;

void check_run_args(const GaussianDesign& X, const ResponseVector& y, int k) {
  if (static_cast<int>(y.size()) != X.rows)
    throw InvalidParams("biht: response length must equal design rows");
  if (k < 1 || k > X.cols) throw InvalidParams("biht: k must lie in [1, cols]");
  for (std::int8_t s : y)
    if (s != 1 && s != -1) throw InvalidParams("biht: responses must be +1 or -1");
}

// Step given precomputed margins of theta_hat; also reports how many
// responses disagree with the margin signs.
Vec step_from_margins(const GaussianDesign& X, const ResponseVector& y, const Vec& theta_hat,
                      const Vec& m, int k, RunVariant variant, int* mismatches_out) {
  std::vector<std::int8_t> coef(X.rows);
  int mismatches = 0;
  for (int i = 0; i < X.rows; ++i) {
    // (y - sign(m)) / 2 is -sign(m) on disagreeing rows and 0 elsewhere.
    const std::int8_t s = m[i] >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
    if (y[i] == s) {
      coef[i] = 0;
    } else {
      coef[i] = y[i];
      ++mismatches;
    }
  }
  if (mismatches_out) *mismatches_out = mismatches;
  Vec corr;
  accumulate_signed_rows(X, coef, corr);
  const double scale = kSqrt2Pi / X.rows;
  Vec tilde(theta_hat);
  for (int j = 0; j < X.cols; ++j) tilde[j] += scale * corr[j];
  Vec thr = top_k_threshold(tilde, k);
  double nrm = norm(thr);
  if (nrm == 0.0) throw DegenerateIterate("biht_step: thresholded iterate is zero");
  if (variant == RunVariant::normalized)
    for (double& x : thr) x /= nrm;
  return thr;
}

}  // namespace

double relu_loss(const GaussianDesign& X, const ResponseVector& y, const Vec& theta) {
  check_run_args(X, y, 1);
  Vec m;
  margins(X, theta, m);
  double s = 0.0;
  for (int i = 0; i < X.rows; ++i) s += std::max(0.0, -static_cast<double>(y[i]) * m[i]);
  return s / X.rows;
}

Vec biht_step(const GaussianDesign& X, const ResponseVector& y, const Vec& theta_hat,
              int k, RunVariant variant) {
  check_run_args(X, y, k);
  if (static_cast<int>(theta_hat.size()) != X.cols)
    throw InvalidParams("biht_step: theta length must equal design cols");
  Vec m;
  margins(X, theta_hat, m);
  return step_from_margins(X, y, theta_hat, m, k, variant, nullptr);
}

TrialTrace biht_run(const GaussianDesign& X, const ResponseVector& y, const BihtConfig& cfg,
                    const Vec* theta_star) {
  check_run_args(X, y, cfg.k);
  if (cfg.max_iters < 0) throw InvalidParams("biht_run: max_iters must be nonnegative");
  const int T = cfg.max_iters;

  TrialTrace trace;
  trace.iterates.reserve(T + 1);
  trace.errors.reserve(T + 1);
  trace.mismatch_fractions.reserve(T + 1);
  trace.losses.reserve(T + 1);

  Rng init_rng(cfg.init_seed);
  Vec theta = random_sparse_unit(X.cols, cfg.k, init_rng).entries;

  Vec m;
  for (int t = 0;; ++t) {
    margins(X, theta, m);
    int mismatches = 0;
    double loss = 0.0;
    for (int i = 0; i < X.rows; ++i) {
      const std::int8_t s = m[i] >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
      if (y[i] != s) ++mismatches;
      loss += std::max(0.0, -static_cast<double>(y[i]) * m[i]);
    }
    trace.iterates.push_back(theta);
    trace.mismatch_fractions.push_back(static_cast<double>(mismatches) / X.rows);
    trace.losses.push_back(loss / X.rows);
    if (theta_star) {
      const Vec unit =
          cfg.variant == RunVariant::normalized ? theta : normalized(theta);
      trace.errors.push_back(l2_error(*theta_star, unit));
    }
    if (t == T) break;
    theta = step_from_margins(X, y, theta, m, cfg.k, cfg.variant, nullptr);
  }
  return trace;
}

}  // namespace biht
