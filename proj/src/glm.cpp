#include "biht/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "biht/quadrature.hpp"

namespace biht {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286536;  // sqrt(2/pi)
constexpr double kInvSqrt2Pi = 0.39894228040143268;   // 1/sqrt(2*pi)
constexpr double kTailCut = 12.0;  // Gaussian mass beyond 12 is ~1.8e-33

// Quantities are exact in [0, bound]; allow rounding slack before
// declaring the link inconsistent with the model class.
constexpr double kRangeSlack = 1e-9;

const GaussLegendreRule& base_rule() {
  static const GaussLegendreRule rule = gauss_legendre_rule(16);
  return rule;
}

double softplus(double x) {
  return std::log1p(std::exp(-std::fabs(x))) + std::max(x, 0.0);
}

double sigmoid(double t) { return std::exp(-softplus(-t)); }

void check_beta(double beta) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw InvalidParams("LinkModel: beta must be finite and nonnegative");
}

double checked_range(double value, double upper, const char* what) {
  if (!std::isfinite(value) || value < -kRangeSlack || value > upper + kRangeSlack)
    throw InvalidLink(std::string(what) + ": value outside its exact range");
  return std::fmin(std::fmax(value, 0.0), upper);
}

}  // namespace

LinkModel LinkModel::sign_model() { return LinkModel{LinkFamily::sign, 0.0, nullptr}; }

LinkModel LinkModel::logistic(double beta) {
  check_beta(beta);
  return LinkModel{LinkFamily::logistic, beta, nullptr};
}

LinkModel LinkModel::probit(double beta) {
  check_beta(beta);
  return LinkModel{LinkFamily::probit, beta, nullptr};
}

LinkModel LinkModel::custom(std::function<double(double)> p) {
  if (!p) throw InvalidParams("LinkModel: custom link requires a function");
  return LinkModel{LinkFamily::custom, 0.0, std::move(p)};
}

std::string family_name(LinkFamily family) {
  switch (family) {
    case LinkFamily::sign: return "sign";
    case LinkFamily::logistic: return "logistic";
    case LinkFamily::probit: return "probit";
    case LinkFamily::custom: return "custom";
  }
  return "unknown";
}

double p_eval(const LinkModel& model, double z) {
  if (!std::isfinite(z)) throw InvalidParams("p_eval: non-finite margin");
  switch (model.family) {
    case LinkFamily::sign:
      return z >= 0.0 ? 1.0 : 0.0;
    case LinkFamily::logistic:
      return sigmoid(model.beta * z);
    case LinkFamily::probit:
      return 0.5 * std::erfc(-model.beta * z * M_SQRT1_2);
    case LinkFamily::custom: {
      const double v = model.custom_p(z);
      if (!(v >= 0.0 && v <= 1.0))
        throw InvalidLink("p_eval: custom link left [0, 1]");
      return v;
    }
  }
  throw InvalidParams("p_eval: unknown family");
}

namespace {

// 1 - p(z) without cancellation: every built-in family has an exact
// survival form, which keeps nu accurate deep in the tails where p(z) is
// within an ulp of 1.
double p_complement(const LinkModel& model, double z) {
  switch (model.family) {
    case LinkFamily::sign:
      return z >= 0.0 ? 0.0 : 1.0;
    case LinkFamily::logistic:
      return sigmoid(-model.beta * z);
    case LinkFamily::probit:
      return 0.5 * std::erfc(model.beta * z * M_SQRT1_2);
    case LinkFamily::custom:
      return 1.0 - p_eval(model, z);
  }
  throw InvalidParams("p_complement: unknown family");
}

}  // namespace

double nu_eval(const LinkModel& model, double z) {
  if (!std::isfinite(z)) throw InvalidParams("nu_eval: non-finite margin");
  return p_complement(model, z) + p_eval(model, -z);
}

ResponseVector sample_responses(const LinkModel& model, const Vec& margins, Rng& rng) {
  ResponseVector y(margins.size());
  if (model.family == LinkFamily::sign) {
    for (std::size_t i = 0; i < margins.size(); ++i)
      y[i] = static_cast<std::int8_t>(sign_of(margins[i]));
    return y;
  }
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double p = p_eval(model, margins[i]);
    y[i] = rng.next_unit_pos() <= p ? std::int8_t{1} : std::int8_t{-1};
  }
  return y;
}

double alpha_quadrature(const LinkModel& model) {
  const double integral = integrate(
      [&model](double z) { return std::exp(-0.5 * z * z) * nu_eval(model, z); }, 0.0,
      kTailCut, 32, base_rule());
  return checked_range(kInvSqrt2Pi * integral, 0.5, "alpha");
}

double alpha(const LinkModel& model) {
  switch (model.family) {
    case LinkFamily::sign:
      return 0.0;
    case LinkFamily::probit:
      // P(sign flip) for Phi(beta z) reduces to the orthant probability
      // arctan(1/beta) / pi.
      if (model.beta > 0.0) return std::atan(1.0 / model.beta) / M_PI;
      return alpha_quadrature(model);
    default:
      return alpha_quadrature(model);
  }
}

double gamma_quadrature(const LinkModel& model) {
  const double zeta = integrate(
      [&model](double z) { return z * std::exp(-0.5 * z * z) * nu_eval(model, z); }, 0.0,
      kTailCut, 32, base_rule());
  return checked_range(kSqrt2OverPi * (1.0 - zeta), kSqrt2OverPi, "gamma");
}

double gamma(const LinkModel& model) {
  switch (model.family) {
    case LinkFamily::sign:
      return kSqrt2OverPi;
    case LinkFamily::probit:
      return kSqrt2OverPi * model.beta / std::sqrt(1.0 + model.beta * model.beta);
    default:
      return gamma_quadrature(model);
  }
}

double gamma_stein(const LinkModel& model) {
  if (model.family == LinkFamily::sign)
    throw UnsupportedLink("gamma_stein: sign link has no pointwise derivative");
  constexpr double h = 1e-6;
  const double integral = integrate(
      [&model](double z) {
        const double dp = (p_eval(model, z + h) - p_eval(model, z - h)) / (2.0 * h);
        return kInvSqrt2Pi * std::exp(-0.5 * z * z) * dp;
      },
      -kTailCut, kTailCut, 64, base_rule());
  return checked_range(2.0 * integral, kSqrt2OverPi, "gamma_stein");
}

MonteCarloEstimate alpha_monte_carlo(const LinkModel& model, std::int64_t draws, Rng& rng) {
  if (draws < 2) throw InvalidParams("alpha_monte_carlo: need at least 2 draws");
  // Conditional on the margin z, the flip probability is 1 - p(z) for
  // z >= 0 and p(z) otherwise; averaging it instead of sampled flips
  // removes the binary sampling noise.
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    const double z = rng.next_normal();
    const double q = z >= 0.0 ? 1.0 - p_eval(model, z) : p_eval(model, z);
    sum += q;
    sumsq += q * q;
  }
  const double mean = sum / draws;
  const double var = std::max(0.0, sumsq / draws - mean * mean);
  MonteCarloEstimate est;
  est.value = mean;
  est.std_error = std::sqrt(var / draws);
  if (mean < -3.0 * est.std_error - kRangeSlack ||
      mean > 0.5 + 3.0 * est.std_error + kRangeSlack)
    throw InvalidLink("alpha_monte_carlo: estimate outside its exact range");
  return est;
}

MonteCarloEstimate gamma_monte_carlo(const LinkModel& model, std::int64_t draws, Rng& rng) {
  if (draws < 2) throw InvalidParams("gamma_monte_carlo: need at least 2 draws");
  // E[Z f(Z)] with f(z) = 2p(z) - 1 averaged over margin draws.
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    const double z = rng.next_normal();
    const double g = z * (2.0 * p_eval(model, z) - 1.0);
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / draws;
  const double var = std::max(0.0, sumsq / draws - mean * mean);
  MonteCarloEstimate est;
  est.value = mean;
  est.std_error = std::sqrt(var / draws);
  if (mean < -3.0 * est.std_error - kRangeSlack ||
      mean > kSqrt2OverPi + 3.0 * est.std_error + kRangeSlack)
    throw InvalidLink("gamma_monte_carlo: estimate outside its exact range");
  return est;
}

ModelQuantities model_quantities(const LinkModel& model) {
  return ModelQuantities{alpha(model), gamma(model)};
}

double alpha0(const LinkModel& model, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidParams("alpha0: epsilon must lie in (0, 1)");
  const double c = 1.5 * (5.0 + std::sqrt(21.0));
  return std::max(alpha(model), epsilon / c);
}

LogisticBounds logistic_bounds(double beta) {
  check_beta(beta);
  LogisticBounds b;
  // Three regimes: the trivial 1/2, a small-beta expansion of the margin
  // integral, and a 1/beta tail bound; the minimum holds for all beta.
  const double expansion = 0.5 - kSqrt2OverPi * (1.0 - beta * beta / 6.0) * (beta / 4.0);
  const double tail = beta > 0.0 ? kSqrt2OverPi / beta
                                 : std::numeric_limits<double>::infinity();
  b.alpha_upper = std::min(0.5, std::min(expansion, tail));
  b.gamma_lower = std::max(0.0, kSqrt2OverPi * (1.0 - 2.0 * b.alpha_upper));
  return b;
}

AssumptionReport check_assumption(const LinkModel& model) {
  constexpr double tol = 1e-9;
  AssumptionReport report;
  report.monotone_ok = true;
  report.ratio_ok = true;

  // Monotonicity of p on [-10, 10] in steps of 0.01.
  double prev = p_eval(model, -10.0);
  for (int i = 1; i <= 2000; ++i) {
    const double z = -10.0 + 0.01 * i;
    const double cur = p_eval(model, z);
    const double drop = prev - cur;
    if (drop > tol) {
      report.monotone_ok = false;
      report.worst_violation = std::max(report.worst_violation, drop);
    }
    prev = cur;
  }

  // nu(z + w) / nu(z) nonincreasing on z in [0, 10] for each shift w.
  const double shifts[] = {0.1, 0.5, 1.0, 2.0, 5.0};
  for (double w : shifts) {
    bool have_prev = false;
    double prev_ratio = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double z = 0.01 * i;
      const double lo = nu_eval(model, z);
      if (lo == 0.0) {
        ++report.skipped_points;
        continue;
      }
      const double ratio = nu_eval(model, z + w) / lo;
      if (have_prev) {
        const double rise = ratio - prev_ratio;
        if (rise > tol) {
          report.ratio_ok = false;
          report.worst_violation = std::max(report.worst_violation, rise);
        }
      }
      prev_ratio = ratio;
      have_prev = true;
    }
  }
  return report;
}

}  // namespace biht
