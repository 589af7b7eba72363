#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biht/glm.hpp"
#include "biht/theory.hpp"

namespace biht {

// Outcome of one named empirical property check.
struct VerifyLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyLine> lines;

  bool all_pass() const {
    for (const VerifyLine& l : lines)
      if (!l.pass) return false;
    return true;
  }
};

// Deterministic-inequality spot checks: the unit-difference bound, the
// angle sandwich, the thresholding factor-3 inequality, and the
// contraction recurrences. All randomized instances derive from seed.
VerifyReport verify_facts(std::uint64_t seed);

// Link-model quantities: closed forms against quadrature, the Stein
// identity, Monte Carlo agreement, the logistic envelope, and the shape
// assumptions.
VerifyReport verify_glm(std::uint64_t seed);

// Deviation-map algebra and statistics: exact decomposition identities,
// orthogonal projections, restricted expectations, the mismatch law, the
// error split, and the guarantee curve.
VerifyReport verify_theory(std::uint64_t seed);

// Restricted-correction inequality under probe stress at growing sample
// sizes.
VerifyReport verify_raic(std::uint64_t seed);

// Runs the suites selected by name ("all", "facts", "glm", "theory",
// "raic").
std::vector<VerifyReport> run_verify_suites(const std::string& which, std::uint64_t seed);

// Monte-Carlo check of the four restricted-map expectations at one model:
//   E[h_J(t*, t')] = t* - t'                           (drift toward the target)
//   E[<hf(t*, t*), t*>] = -(1 - sqrt(pi/2) gamma)      (self-correction shrinkage)
//   E[g_J(t*, t')] = 0                                 (no bias off the pair plane)
//   ||E[t' + hf(t*, t')]|| = sqrt(pi/2) gamma          (one-step pull strength)
// Each check reports its largest |z| across coordinates (or of the scalar).
struct ExpectationCheck {
  std::string name;
  double worst_z = 0.0;
  bool pass = false;  // |z| <= 3 everywhere
};

std::vector<ExpectationCheck> check_restricted_expectations(const LinkModel& model,
                                                            int replicates, int n, int d,
                                                            int k, std::uint64_t seed);

// Monte-Carlo check that the sign-mismatch count between two fixed unit
// vectors at a given angle is Binomial(n, angle / pi): sample mean within
// 3 standard errors, sample variance within var_tol of the binomial
// variance (relative).
struct MismatchCheck {
  double angle = 0.0;
  double mean_z = 0.0;
  double var_ratio = 0.0;  // sample variance / binomial variance
  bool pass_mean = false;
  bool pass_var = false;

  bool pass() const { return pass_mean && pass_var; }
};

MismatchCheck check_mismatch_binomial(double angle, int replicates, int n, int d,
                                      std::uint64_t seed, double var_tol);

}  // namespace biht
