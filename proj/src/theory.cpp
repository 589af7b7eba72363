#include "biht/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace biht {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005;
constexpr double kSqrtPiOver2 = 1.2533141373155003;

void check_pair(const GaussianDesign& X, const Vec& u, const Vec& v) {
  if (static_cast<int>(u.size()) != X.cols || static_cast<int>(v.size()) != X.cols)
    throw InvalidParams("deviation map: vector length must equal design cols");
}

// Shared core: (sqrt(2pi) / n) X^T c / 2 where c_i = top_i - sign(<x_i, v>),
// top being either sign(<x_i, u>) or the observed response.
Vec correction(const GaussianDesign& X, const std::vector<std::int8_t>& top, const Vec& v) {
  Vec mv;
  margins(X, v, mv);
  std::vector<std::int8_t> coef(X.rows);
  for (int i = 0; i < X.rows; ++i) {
    const std::int8_t sv = mv[i] >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
    coef[i] = sv == top[i] ? std::int8_t{0} : top[i];
  }
  Vec out;
  accumulate_signed_rows(X, coef, out);
  const double scale = kSqrt2Pi / X.rows;
  for (double& x : out) x *= scale;
  return out;
}

std::vector<std::int8_t> margin_signs(const GaussianDesign& X, const Vec& u) {
  Vec mu;
  margins(X, u, mu);
  std::vector<std::int8_t> s(X.rows);
  for (int i = 0; i < X.rows; ++i) s[i] = mu[i] >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
  return s;
}

void check_responses(const GaussianDesign& X, const ResponseVector& y) {
  if (static_cast<int>(y.size()) != X.rows)
    throw InvalidParams("deviation map: response length must equal design rows");
}

Vec project_out_pair(Vec h, const Vec& u, const Vec& v) {
  // e- and e+ are orthonormal when u and v are unit vectors.
  const double dist_minus = l2_error(u, v);
  Vec sum(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) sum[j] = u[j] + v[j];
  const double dist_plus = norm(sum);
  if (dist_minus == 0.0 || dist_plus == 0.0)
    throw DegenerateDirection("g_fn: u and v must not coincide up to sign");
  Vec eminus(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) eminus[j] = (u[j] - v[j]) / dist_minus;
  Vec eplus(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) eplus[j] = sum[j] / dist_plus;
  const double cm = dot(h, eminus);
  const double cp = dot(h, eplus);
  for (std::size_t j = 0; j < u.size(); ++j) h[j] -= cm * eminus[j] + cp * eplus[j];
  return h;
}

}  // namespace

Vec h_fn(const GaussianDesign& X, const Vec& u, const Vec& v) {
  check_pair(X, u, v);
  return correction(X, margin_signs(X, u), v);
}

Vec h_fn_restricted(const GaussianDesign& X, const Vec& u, const Vec& v, const SupportSet& J) {
  const SupportSet su = support_of(u);
  const SupportSet sv = support_of(v);
  return subset_threshold(h_fn(X, u, v), support_union({&su, &sv, &J}));
}

Vec hf_fn(const GaussianDesign& X, const ResponseVector& y, const Vec& v) {
  check_pair(X, v, v);
  check_responses(X, y);
  return correction(X, y, v);
}

Vec hf_fn_restricted(const GaussianDesign& X, const ResponseVector& y, const Vec& v,
                     const SupportSet& J) {
  const SupportSet sv = support_of(v);
  return subset_threshold(hf_fn(X, y, v), support_union({&sv, &J}));
}

Vec g_fn(const GaussianDesign& X, const Vec& u, const Vec& v) {
  return project_out_pair(h_fn(X, u, v), u, v);
}

Vec g_fn_restricted(const GaussianDesign& X, const Vec& u, const Vec& v, const SupportSet& J) {
  return project_out_pair(h_fn_restricted(X, u, v, J), u, v);
}

Vec gf_fn(const GaussianDesign& X, const ResponseVector& y, const Vec& u) {
  Vec h = hf_fn(X, y, u);
  const double c = dot(h, u);
  for (std::size_t j = 0; j < u.size(); ++j) h[j] -= c * u[j];
  return h;
}

int mismatch_count(const GaussianDesign& X, const Vec& u, const Vec& v) {
  check_pair(X, u, v);
  const std::vector<std::int8_t> su = margin_signs(X, u);
  const std::vector<std::int8_t> sv = margin_signs(X, v);
  int count = 0;
  for (int i = 0; i < X.rows; ++i)
    if (su[i] != sv[i]) ++count;
  return count;
}

RecurrenceParams make_recurrence_params(double v, double w) {
  if (!(v > 0.0) || !(w > 0.0))
    throw InvalidParams("make_recurrence_params: v and w must be positive");
  RecurrenceParams p;
  p.v = v;
  p.w = w;
  p.u = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * w));
  if (p.u > std::sqrt(2.0 / v) * (1.0 + 1e-12))
    throw InvalidParams("make_recurrence_params: need u <= sqrt(2 / v)");
  return p;
}

double recurrence_f1(const RecurrenceParams& p, int t) {
  if (t < 0) throw InvalidParams("recurrence_f1: t must be nonnegative");
  double f = 2.0;
  for (int i = 0; i < t; ++i) f = std::sqrt(p.v * f) + p.v * p.w;
  return f;
}

double recurrence_f2(const RecurrenceParams& p, int t) {
  if (t < 0) throw InvalidParams("recurrence_f2: t must be nonnegative");
  // 2^(2^-t) (u^2 v)^(1 - 2^-t) evaluated via logs so that the 2^-t
  // exponent underflows gracefully instead of rounding the power.
  const double q = std::ldexp(1.0, -t);
  return std::exp(q * std::log(2.0) + (1.0 - q) * std::log(p.u * p.u * p.v));
}

double theoretical_error_curve(double epsilon, int t) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidParams("theoretical_error_curve: epsilon must lie in (0, 1)");
  if (t < 0) throw InvalidParams("theoretical_error_curve: t must be nonnegative");
  const double q = std::ldexp(1.0, -t);
  return std::exp(q * std::log(2.0) + (1.0 - q) * std::log(epsilon));
}

RegimeInfo sample_complexity_regime(LinkFamily family, double beta, double epsilon, int d,
                                    int k) {
  if (family != LinkFamily::logistic && family != LinkFamily::probit)
    throw InvalidParams("sample_complexity_regime: defined for logistic and probit");
  if (!(beta > 0.0)) throw InvalidParams("sample_complexity_regime: beta must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidParams("sample_complexity_regime: epsilon must lie in (0, 1)");
  if (k < 1 || k > d) throw InvalidParams("sample_complexity_regime: need 1 <= k <= d");
  const double base = k * std::log(static_cast<double>(d) / k);
  const double crest = (family == LinkFamily::logistic ? 3.0 / kSqrt2Pi : 1.5) *
                       (5.0 + std::sqrt(21.0));
  RegimeInfo info;
  if (beta < 1.0) {
    info.label = "low-SNR";
    info.leading_term = base / (beta * beta * epsilon * epsilon);
  } else if (beta < crest / epsilon) {
    info.label = "mid-SNR";
    info.leading_term = base / (beta * epsilon * epsilon);
  } else {
    info.label = "high-SNR";
    info.leading_term = base / epsilon;
  }
  return info;
}

Factor3Check check_factor3_lemma(const SparseUnitVector& u, const Vec& x,
                                 const SupportSet& J) {
  u.validate();
  if (static_cast<int>(x.size()) != u.dim)
    throw InvalidParams("check_factor3_lemma: dimension mismatch");
  if (static_cast<int>(J.size()) > u.budget)
    throw InvalidParams("check_factor3_lemma: |J| must not exceed the sparsity budget");
  const Vec tk = top_k_threshold(x, u.budget);
  const SupportSet su = u.support();
  const SupportSet stk = support_of(tk);
  const Vec ts = subset_threshold(x, support_union({&J, &su, &stk}));
  Factor3Check out;
  out.lhs = l2_error(u.entries, normalized(tk));
  out.rhs = 3.0 * l2_error(u.entries, normalized(ts));
  out.ok = out.lhs <= out.rhs + 1e-10;
  return out;
}

DeviationDecomposition decompose_deviation(const GaussianDesign& X, const ResponseVector& y,
                                           const LinkModel& model, const Vec& theta_star,
                                           const Vec& theta_prime, const Vec& theta_dd,
                                           const SupportSet& J) {
  check_pair(X, theta_star, theta_prime);
  check_pair(X, theta_star, theta_dd);
  check_responses(X, y);
  const SupportSet s_star = support_of(theta_star);
  const SupportSet s_prime = support_of(theta_prime);
  const SupportSet s_dd = support_of(theta_dd);
  if (support_union({&s_dd, &J}) != support_union({&s_prime, &J}))
    throw InvalidParams(
        "decompose_deviation: supp(theta_dd) u J must equal supp(theta_prime) u J");

  const double g = gamma(model);
  const double denom = kSqrtPiOver2 * g;
  if (denom <= 1e-12)
    throw DegenerateIterate("decompose_deviation: gamma is zero, no signal direction");

  // Left side: error after one corrected step from theta_dd, restricted to
  // the supports in play plus J.
  const SupportSet j_star = support_union({&s_star, &J});
  Vec corrected = hf_fn_restricted(X, y, theta_dd, j_star);
  for (std::size_t j = 0; j < corrected.size(); ++j) corrected[j] += theta_dd[j];
  DeviationDecomposition out;
  out.total = l2_error(theta_star, normalized(corrected));

  // Exact means of the three deviation maps under the model.
  const Vec h_far = h_fn_restricted(X, theta_star, theta_prime, J);
  const Vec h_near = h_fn_restricted(X, theta_prime, theta_dd, j_star);
  const SupportSet j_prime = support_union({&s_prime, &J});
  const Vec h_noise = hf_fn_restricted(X, y, theta_star, j_prime);

  // E[h_J(a, b)] = a - b on the restriction set; zero off it. The noisy
  // map at (theta*, theta*) has mean -(1 - sqrt(pi/2) gamma) theta*.
  const double noise_coeff = -(1.0 - denom);
  const SupportSet set_far = support_union({&s_star, &s_prime, &J});
  Vec mean_far(X.cols, 0.0);
  for (int j : set_far) mean_far[j] = theta_star[j] - theta_prime[j];
  const SupportSet set_near = support_union({&s_prime, &s_dd, &j_star});
  Vec mean_near(X.cols, 0.0);
  for (int j : set_near) mean_near[j] = theta_prime[j] - theta_dd[j];
  Vec mean_noise(X.cols, 0.0);
  for (int j : s_star) mean_noise[j] = noise_coeff * theta_star[j];

  out.term_far = 2.0 * l2_error(h_far, mean_far) / denom;
  out.term_near = 2.0 * l2_error(h_near, mean_near) / denom;
  out.term_noise = 2.0 * l2_error(h_noise, mean_noise) / denom;
  out.ok = out.total <= out.term_far + out.term_near + out.term_noise + 1e-9;
  return out;
}

RaicResult raic_probe(const LinkModel& model, const SparseUnitVector& theta_star, int n,
                      double epsilon, int num_probes, std::uint64_t seed) {
  theta_star.validate();
  if (n < 1) throw InvalidParams("raic_probe: n must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidParams("raic_probe: epsilon must lie in (0, 1)");
  if (num_probes < 1) throw InvalidParams("raic_probe: need at least one probe");
  const int d = theta_star.dim;
  const int k = theta_star.budget;

  const GaussianDesign X =
      gaussian_design(n, d, derive_key(seed, 0, StreamPurpose::design));
  Vec m_star;
  margins(X, theta_star.entries, m_star);
  Rng resp_rng = Rng::stream(seed, 0, StreamPurpose::responses);
  const ResponseVector y = sample_responses(model, m_star, resp_rng);

  Rng probe_rng = Rng::stream(seed, 0, StreamPurpose::probe);
  const SupportSet s_star = theta_star.support();

  RaicResult result;
  result.delta = epsilon / (1.5 * (5.0 + std::sqrt(21.0)));
  result.samples.reserve(num_probes);

  const double radii[] = {0.5 * epsilon, epsilon, 2.0 * epsilon, 0.5};
  int violations = 0;
  for (int probe = 0; probe < num_probes; ++probe) {
    Vec theta_dd;
    switch (probe % 3) {
      case 0: {
        // Perturb theta_star and reproject onto the sparse unit sphere.
        const double r = radii[(probe / 3) % 4];
        Vec cand(theta_star.entries);
        for (int j = 0; j < d; ++j) cand[j] += r * probe_rng.next_normal();
        theta_dd = normalized(top_k_threshold(cand, k));
        break;
      }
      case 1:
        theta_dd = random_sparse_unit(d, k, probe_rng).entries;
        break;
      default: {
        // Flip the signs of a uniformly random nonempty subset of the
        // support of theta_star.
        theta_dd = theta_star.entries;
        const int s = static_cast<int>(s_star.size());
        const std::uint64_t mask =
            1 + probe_rng.next_below((std::uint64_t{1} << s) - 1);
        for (int b = 0; b < s; ++b)
          if (mask & (std::uint64_t{1} << b)) theta_dd[s_star[b]] = -theta_dd[s_star[b]];
        break;
      }
    }

    // Random extra coordinate set J, size 0..k.
    const int jsize = static_cast<int>(probe_rng.next_below(k + 1));
    SupportSet J;
    {
      std::vector<int> idx(d);
      std::iota(idx.begin(), idx.end(), 0);
      for (int i = 0; i < jsize; ++i) {
        const int j = i + static_cast<int>(probe_rng.next_below(d - i));
        std::swap(idx[i], idx[j]);
      }
      J.assign(idx.begin(), idx.begin() + jsize);
      std::sort(J.begin(), J.end());
    }

    const SupportSet restrict = support_union({&s_star, &J});
    Vec corrected = hf_fn_restricted(X, y, theta_dd, restrict);
    for (int j = 0; j < d; ++j) corrected[j] += theta_dd[j];

    RaicSample sample;
    sample.distance = l2_error(theta_star.entries, theta_dd);
    sample.rhs = std::sqrt(result.delta * sample.distance) + result.delta;
    try {
      sample.lhs = l2_error(theta_star.entries, normalized(corrected));
    } catch (const DegenerateIterate&) {
      sample.lhs = std::numeric_limits<double>::infinity();
    }
    sample.violated = sample.lhs > sample.rhs;
    if (sample.violated) ++violations;
    result.samples.push_back(sample);
  }
  result.violation_fraction = static_cast<double>(violations) / num_probes;
  return result;
}

}  // namespace biht
