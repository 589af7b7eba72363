#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "biht/rng.hpp"
#include "biht/vec.hpp"

namespace biht {

// Binary response model: y = +1 with probability p(<x, theta>), else -1.
// The built-in families share the scale convention p(z) = F(beta * z) for a
// fixed cdf F, so beta acts as the signal-to-noise level.
enum class LinkFamily { sign, logistic, probit, custom };

struct LinkModel {
  LinkFamily family = LinkFamily::sign;
  double beta = 0.0;
  std::function<double(double)> custom_p;

  static LinkModel sign_model();
  static LinkModel logistic(double beta);
  static LinkModel probit(double beta);
  static LinkModel custom(std::function<double(double)> p);
};

std::string family_name(LinkFamily family);

using ResponseVector = std::vector<std::int8_t>;

// Success probability p(z). Custom links are checked to return values in
// [0, 1]; a violation (including NaN) raises InvalidLink.
double p_eval(const LinkModel& model, double z);

// Flip probability nu(z) = 1 - p(z) + p(-z), the chance that a response at
// margin z (or -z) disagrees with the sign of z.
double nu_eval(const LinkModel& model, double z);

// Draws y_i in {-1, +1} with P(y_i = +1) = p(margin_i). The sign family is
// sampled without consuming randomness.
ResponseVector sample_responses(const LinkModel& model, const Vec& margins, Rng& rng);

// alpha = P(y != sign(<x, theta>)) for a unit theta under a standard normal
// design: the one-bit noise level of the model. Lies in [0, 1/2] for any
// monotone link.
double alpha(const LinkModel& model);
double alpha_quadrature(const LinkModel& model);

// gamma = E[Z f(Z)] where f(z) = E[y | margin z] = 2p(z) - 1: the signal
// strength surviving the binary quantization. Lies in [0, sqrt(2/pi)].
double gamma(const LinkModel& model);
double gamma_quadrature(const LinkModel& model);

// gamma via the Gaussian integration-by-parts identity 2 E[p'(Z)], with a
// central finite difference for p'. Undefined for the sign family
// (UnsupportedLink): its p has no pointwise derivative at 0.
double gamma_stein(const LinkModel& model);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

MonteCarloEstimate alpha_monte_carlo(const LinkModel& model, std::int64_t draws, Rng& rng);
MonteCarloEstimate gamma_monte_carlo(const LinkModel& model, std::int64_t draws, Rng& rng);

struct ModelQuantities {
  double alpha = 0.0;
  double gamma = 0.0;
};

// Both quantities at once, range checked.
ModelQuantities model_quantities(const LinkModel& model);

// Noise floor entering the error guarantees: alpha0 = max(alpha, c * eps)
// with c = 1 / ((3/2)(5 + sqrt(21))). Requires 0 < eps < 1.
double alpha0(const LinkModel& model, double epsilon);

// Closed-form envelope for the logistic family: an upper bound on alpha and
// the matching lower bound gamma >= sqrt(2/pi) (1 - 2 alpha_upper), clamped
// at zero.
struct LogisticBounds {
  double alpha_upper = 0.0;
  double gamma_lower = 0.0;
};

LogisticBounds logistic_bounds(double beta);

// Grid check of the shape conditions the theory needs: p nondecreasing, and
// z -> nu(z + w) / nu(z) nonincreasing on z >= 0 for each probed w > 0.
// Grid points where nu vanishes exactly are skipped and counted.
struct AssumptionReport {
  bool monotone_ok = false;
  bool ratio_ok = false;
  double worst_violation = 0.0;
  int skipped_points = 0;

  bool ok() const { return monotone_ok && ratio_ok; }
};

AssumptionReport check_assumption(const LinkModel& model);

}  // namespace biht
