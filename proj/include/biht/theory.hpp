#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biht/biht.hpp"
#include "biht/design.hpp"
#include "biht/glm.hpp"
#include "biht/vec.hpp"

namespace biht {

// Deviation maps underlying the one-step analysis. With s(u) = sign(X u)
// taken entrywise,
//   h(u, v)  = (sqrt(2pi) / n) X^T (s(u) - s(v)) / 2
//   hf(y, v) = (sqrt(2pi) / n) X^T (y - s(v)) / 2
// h measures the update direction between two candidate parameters; hf is
// the actual algorithm correction, with observed responses in place of
// s(u). The restricted versions zero every coordinate outside
// supp(u) union supp(v) union J (for hf: supp(v) union J, since the
// parameter behind y is unknown; callers fold its support into J when the
// analysis needs it).
Vec h_fn(const GaussianDesign& X, const Vec& u, const Vec& v);
Vec h_fn_restricted(const GaussianDesign& X, const Vec& u, const Vec& v, const SupportSet& J);
Vec hf_fn(const GaussianDesign& X, const ResponseVector& y, const Vec& v);
Vec hf_fn_restricted(const GaussianDesign& X, const ResponseVector& y, const Vec& v,
                     const SupportSet& J);

// Component of h(u, v) orthogonal to span{u - v, u + v}, for unit u, v:
//   g = h - <h, e-> e- - <h, e+> e+,  e- = (u-v)/||u-v||, e+ = (u+v)/||u+v||.
// Raises DegenerateDirection when u = v or u = -v (the span collapses).
// The restricted version projects the restricted h the same way.
Vec g_fn(const GaussianDesign& X, const Vec& u, const Vec& v);
Vec g_fn_restricted(const GaussianDesign& X, const Vec& u, const Vec& v, const SupportSet& J);

// Same subtraction applied to the algorithm correction at v = u: removes
// the component along u itself,  gf = hf(y, u) - <hf(y, u), u> u.
Vec gf_fn(const GaussianDesign& X, const ResponseVector& y, const Vec& u);

// Number of rows where sign(<x_i, u>) differs from sign(<x_i, v>). For a
// Gaussian design this count is Binomial(n, arccos(<u, v>) / pi).
int mismatch_count(const GaussianDesign& X, const Vec& u, const Vec& v);

// Parameters of the contraction recurrences. u is determined by w through
// u = (1 + sqrt(1 + 4w)) / 2 and must satisfy 1 <= u <= sqrt(2 / v).
struct RecurrenceParams {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
};

RecurrenceParams make_recurrence_params(double v, double w);

// f1(0) = 2, f1(t) = sqrt(v f1(t-1)) + v w: the exact one-step error
// recursion.
double recurrence_f1(const RecurrenceParams& p, int t);

// Closed-form envelope f2(t) = 2^(2^-t) (u^2 v)^(1 - 2^-t), the explicit
// bound dominating f1 with the same limit u^2 v.
double recurrence_f2(const RecurrenceParams& p, int t);

// The guarantee curve 2^(2^-t) eps^(1 - 2^-t): starts at 2, decreases
// strictly, converges to eps. Evaluated in log space so large t is exact.
double theoretical_error_curve(double epsilon, int t);

// Which term of the sample complexity dominates at noise level beta and
// accuracy eps, with its leading term k log(d/k) / {beta^2 eps^2, beta
// eps^2, eps}. Constants are uncalibrated; the value orders regimes, it is
// not a usable sample count.
struct RegimeInfo {
  std::string label;  // "low-SNR", "mid-SNR", "high-SNR"
  double leading_term = 0.0;
};

RegimeInfo sample_complexity_regime(LinkFamily family, double beta, double epsilon, int d,
                                    int k);

// Checks the support-aware thresholding inequality
//   ||u - T_k(x)/||T_k(x)|| || <= 3 ||u - T_S(x)/||T_S(x)|| ||,
//   S = J union supp(u) union supp(T_k(x)),
// for a unit k-sparse u and |J| <= k. Returns both sides.
struct Factor3Check {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

Factor3Check check_factor3_lemma(const SparseUnitVector& u, const Vec& x, const SupportSet& J);

// Splits the one-step error at theta_dd into the three concentration terms
// that bound it:
//   total = ||theta* - (theta_dd + hf_J(theta*, theta_dd)) normalized||
//   total <= 2 (||h_J(theta*, theta') - E|| + ||h_{S* u J}(theta', theta_dd) - E||
//              + ||hf_{S' u J}(theta*, theta*) - E||) / (sqrt(pi/2) gamma)
// with S* = supp(theta*), S' = supp(theta'). Requires supp(theta_dd) u J =
// supp(theta') u J, which makes the split exact.
struct DeviationDecomposition {
  double total = 0.0;
  double term_far = 0.0;    // h(theta*, theta') deviation
  double term_near = 0.0;   // h(theta', theta_dd) deviation
  double term_noise = 0.0;  // hf(theta*, theta*) deviation
  bool ok = false;          // total <= term_far + term_near + term_noise
};

DeviationDecomposition decompose_deviation(const GaussianDesign& X, const ResponseVector& y,
                                           const LinkModel& model, const Vec& theta_star,
                                           const Vec& theta_prime, const Vec& theta_dd,
                                           const SupportSet& J);

// Stress test of the restricted-correction inequality
//   ||theta* - (theta_dd + hf_J(theta*, theta_dd)) normalized||
//     <= sqrt(delta ||theta* - theta_dd||) + delta,
//   delta = eps / ((3/2)(5 + sqrt(21))),
// over a mixture of probes theta_dd (perturbations of theta*, independent
// sparse directions, sign flips) with random J of size <= k, all against
// one fresh design and response draw.
struct RaicSample {
  double lhs = 0.0;
  double rhs = 0.0;
  double distance = 0.0;  // ||theta* - theta_dd||
  bool violated = false;
};

struct RaicResult {
  double delta = 0.0;
  double violation_fraction = 0.0;
  std::vector<RaicSample> samples;
};

RaicResult raic_probe(const LinkModel& model, const SparseUnitVector& theta_star, int n,
                      double epsilon, int num_probes, std::uint64_t seed);

}  // namespace biht
