#pragma once

#include <cstdint>
#include <vector>

#include "biht/design.hpp"
#include "biht/glm.hpp"
#include "biht/vec.hpp"

namespace biht {

// The two update rules. Both threshold to the k largest magnitudes; the
// normalized rule also rescales the iterate to the unit sphere each step,
// which is what the error guarantees analyze. The unnormalized rule keeps
// the raw thresholded vector and is retained as the classical baseline.
enum class RunVariant { normalized, unnormalized };

struct BihtConfig {
  int k = 1;
  int max_iters = 0;
  RunVariant variant = RunVariant::normalized;
  std::uint64_t init_seed = 0;
};

// Per-iterate record of one run; every vector has length max_iters + 1 and
// index t describes the iterate after t steps (index 0 is the random
// initialization).
struct TrialTrace {
  std::vector<Vec> iterates;
  std::vector<double> errors;              // ||theta* - iterate/||iterate|| ||, if theta* given
  std::vector<double> mismatch_fractions;  // fraction of responses disagreeing in sign
  std::vector<double> losses;              // one-bit hinge loss of the iterate
};

// Mean one-bit hinge loss (1/n) sum_i max(0, -y_i <x_i, theta>). Zero
// exactly when every response agrees with its margin sign.
double relu_loss(const GaussianDesign& X, const ResponseVector& y, const Vec& theta);

// One descent-and-threshold step from theta_hat:
//   correction = (sqrt(2pi) / n) X^T (y - sign(X theta_hat)) / 2
//   result     = top_k(theta_hat + correction), normalized per variant.
// Raises DegenerateIterate when the thresholded vector is identically zero.
Vec biht_step(const GaussianDesign& X, const ResponseVector& y, const Vec& theta_hat,
              int k, RunVariant variant);

// Full run from a random k-sparse unit initialization drawn from
// cfg.init_seed. When theta_star is given, errors are filled with the
// distance from theta_star to the normalized iterate.
TrialTrace biht_run(const GaussianDesign& X, const ResponseVector& y, const BihtConfig& cfg,
                    const Vec* theta_star = nullptr);

}  // namespace biht
