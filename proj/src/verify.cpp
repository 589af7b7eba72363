#include "biht/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <numeric>

#include "biht/design.hpp"

namespace biht {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string detailf(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

Vec gaussian_vec(int d, Rng& rng) {
  Vec v(d);
  for (int j = 0; j < d; ++j) v[j] = rng.next_normal();
  return v;
}

SupportSet random_subset(int d, int size, Rng& rng) {
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < size; ++i) {
    const int j = i + static_cast<int>(rng.next_below(d - i));
    std::swap(idx[i], idx[j]);
  }
  SupportSet out(idx.begin(), idx.begin() + size);
  std::sort(out.begin(), out.end());
  return out;
}

double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::fabs(a[j] - b[j]));
  return m;
}

}  // namespace

VerifyReport verify_facts(std::uint64_t seed) {
  VerifyReport report;
  report.suite = "facts";

  {
    // ||u/||u|| - v/||v|| || <= 2 min(||u - v|| / ||u||, ||u - v|| / ||v||).
    Rng rng = Rng::stream(seed, 1, StreamPurpose::aux);
    int violations = 0;
    double worst = 0.0;
    const int total = 10000;
    for (int i = 0; i < total; ++i) {
      const int d = 1 + static_cast<int>(rng.next_below(20));
      const Vec u = gaussian_vec(d, rng);
      Vec v;
      if (i % 4 == 3) {
        // Near-parallel pair: a rescaled copy plus a small perturbation.
        const double c = 0.25 + 2.0 * rng.next_unit();
        v = u;
        for (double& x : v) x = c * x + 1e-3 * rng.next_normal();
      } else {
        v = gaussian_vec(d, rng);
      }
      if (norm(u) == 0.0 || norm(v) == 0.0) continue;
      const double lhs = l2_error(normalized(u), normalized(v));
      const double diff = l2_error(u, v);
      const double bound = 2.0 * std::min(diff / norm(u), diff / norm(v));
      const double excess = lhs - bound;
      worst = std::max(worst, excess);
      if (excess > 1e-10) ++violations;
    }
    report.lines.push_back({"unit-difference-bound", violations == 0,
                            detailf("%d instances, %d violations, worst excess %.2e",
                                    total, violations, worst)});
  }

  {
    // ||u - v|| <= arccos<u, v> <= (pi/2) ||u - v|| for unit u, v.
    Rng rng = Rng::stream(seed, 2, StreamPurpose::aux);
    int violations = 0;
    const int total = 10000;
    for (int i = 0; i < total; ++i) {
      const int d = 2 + static_cast<int>(rng.next_below(19));
      const Vec u = normalized(gaussian_vec(d, rng));
      Vec v;
      if (i % 101 == 0) {
        v = u;
        for (double& x : v) x = -x;  // exact antipode, exercises the clamp
      } else {
        v = normalized(gaussian_vec(d, rng));
      }
      const double dist = l2_error(u, v);
      const double ang = angular_distance(u, v);
      if (dist > ang + 1e-10 || ang > M_PI_2 * dist + 1e-10) ++violations;
    }
    report.lines.push_back({"angle-sandwich", violations == 0,
                            detailf("%d instances, %d violations", total, violations)});
  }

  {
    // ||u - T_k(x) normalized|| <= 3 ||u - T_S(x) normalized||.
    Rng rng = Rng::stream(seed, 3, StreamPurpose::aux);
    int violations = 0;
    double worst_ratio = 0.0;
    const int total = 10000;
    for (int i = 0; i < total; ++i) {
      const int d = 5 + static_cast<int>(rng.next_below(26));
      const int k = 1 + static_cast<int>(rng.next_below(std::min(8, d)));
      const SparseUnitVector u = random_sparse_unit(d, k, rng);
      Vec x;
      switch (i % 3) {
        case 0:
          x = gaussian_vec(d, rng);
          break;
        case 1: {
          // Concentrated near u, the regime where thresholding matters.
          const double scale = (i % 2 == 0) ? 0.05 : 0.3;
          x = u.entries;
          for (double& e : x) e += scale * rng.next_normal();
          break;
        }
        default: {
          const int kk = std::min(d, k + 1 + static_cast<int>(rng.next_below(k + 1)));
          x = random_sparse_unit(d, kk, rng).entries;
          const double c = 0.1 + 2.0 * rng.next_unit();
          for (double& e : x) e *= c;
          break;
        }
      }
      const SupportSet J =
          random_subset(d, static_cast<int>(rng.next_below(k + 1)), rng);
      const Factor3Check check = check_factor3_lemma(u, x, J);
      if (!check.ok) ++violations;
      if (check.rhs > 0.0) worst_ratio = std::max(worst_ratio, check.lhs / check.rhs);
    }
    report.lines.push_back({"threshold-factor-3", violations == 0,
                            detailf("%d instances, %d violations, worst lhs/rhs %.3f",
                                    total, violations, worst_ratio)});
  }

  {
    // f1 dominated by f2, both decreasing to the common limit u^2 v.
    Rng rng = Rng::stream(seed, 4, StreamPurpose::aux);
    int violations = 0;
    double worst_gap = 0.0;
    const int total = 100;
    for (int i = 0; i < total; ++i) {
      const double w = 0.05 + 3.0 * rng.next_unit();
      const double u = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * w));
      const double v = (2.0 / (u * u)) * (0.05 + 0.9 * rng.next_unit());
      const RecurrenceParams p = make_recurrence_params(v, w);
      const double limit = p.u * p.u * p.v;
      double f1 = 2.0;
      bool ok = true;
      for (int t = 0; t <= 50; ++t) {
        const double f2 = recurrence_f2(p, t);
        if (f1 > f2 + 1e-10) ok = false;
        if (t < 50) {
          const double f1_next = std::sqrt(p.v * f1) + p.v * p.w;
          const double f2_next = recurrence_f2(p, t + 1);
          if (f1_next > f1 + 1e-10 || f2_next > f2 + 1e-10) ok = false;
          f1 = f1_next;
        }
      }
      if (std::fabs(f1 - recurrence_f1(p, 50)) > 1e-12) ok = false;
      const double gap =
          std::max(std::fabs(f1 - limit), std::fabs(recurrence_f2(p, 50) - limit));
      worst_gap = std::max(worst_gap, gap);
      if (gap > 1e-10 * std::max(1.0, limit)) ok = false;
      if (!ok) ++violations;
    }
    report.lines.push_back({"contraction-recurrence", violations == 0,
                            detailf("%d parameter draws, %d violations, worst limit gap %.2e",
                                    total, violations, worst_gap)});
  }

  return report;
}

VerifyReport verify_glm(std::uint64_t seed) {
  VerifyReport report;
  report.suite = "glm";
  const double beta_grid[] = {0.1, 0.5, 1.0, 2.0, 5.0};

  {
    double worst = 0.0;
    for (double b : beta_grid) {
      const LinkModel m = LinkModel::probit(b);
      worst = std::max(worst, std::fabs(alpha(m) - alpha_quadrature(m)));
      const double closed = 0.79788456080286536 * b / std::sqrt(1.0 + b * b);
      worst = std::max(worst, std::fabs(closed - gamma_quadrature(m)));
    }
    report.lines.push_back({"probit-closed-forms", worst <= 1e-10,
                            detailf("max |closed - quadrature| = %.2e", worst)});
  }

  {
    double worst = 0.0;
    const double grid[] = {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
    for (double b : grid) {
      worst = std::max(worst, std::fabs(gamma_quadrature(LinkModel::logistic(b)) -
                                        gamma_stein(LinkModel::logistic(b))));
      worst = std::max(worst, std::fabs(gamma_quadrature(LinkModel::probit(b)) -
                                        gamma_stein(LinkModel::probit(b))));
    }
    report.lines.push_back({"stein-identity", worst <= 1e-6,
                            detailf("max |moment - stein| = %.2e", worst)});
  }

  {
    bool pass = true;
    double worst_z = 0.0;
    const LinkModel models[] = {LinkModel::sign_model(), LinkModel::logistic(1.0),
                                LinkModel::probit(1.0)};
    int stream = 0;
    for (const LinkModel& m : models) {
      Rng ra = Rng::stream(seed, 10 + stream, StreamPurpose::aux);
      const MonteCarloEstimate ea = alpha_monte_carlo(m, 1000000, ra);
      const double za = ea.std_error > 0.0
                            ? std::fabs(ea.value - alpha(m)) / ea.std_error
                            : (ea.value == alpha(m) ? 0.0 : kInf);
      Rng rg = Rng::stream(seed, 20 + stream, StreamPurpose::aux);
      const MonteCarloEstimate eg = gamma_monte_carlo(m, 1000000, rg);
      const double zg = std::fabs(eg.value - gamma(m)) / eg.std_error;
      worst_z = std::max(worst_z, std::max(za, zg));
      if (za > 3.0 || zg > 3.0) pass = false;
      ++stream;
    }
    report.lines.push_back({"monte-carlo-agreement", pass,
                            detailf("3 models x 1e6 draws, worst |z| = %.2f", worst_z)});
  }

  {
    bool pass = true;
    double worst = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double b = 0.05 * i;
      const LogisticBounds lb = logistic_bounds(b);
      const LinkModel m = LinkModel::logistic(b);
      const double a = alpha_quadrature(m);
      const double g = gamma_quadrature(m);
      worst = std::max(worst, std::max(a - lb.alpha_upper, lb.gamma_lower - g));
      if (a > lb.alpha_upper + 1e-12 || g < lb.gamma_lower - 1e-12) pass = false;
    }
    report.lines.push_back({"logistic-envelope", pass,
                            detailf("beta in [0.05, 10], worst excess %.2e", worst)});
  }

  {
    const AssumptionReport a1 = check_assumption(LinkModel::logistic(1.0));
    const AssumptionReport a2 = check_assumption(LinkModel::probit(1.0));
    const AssumptionReport a3 = check_assumption(LinkModel::sign_model());
    const bool pass = a1.ok() && a2.ok() && a3.ok();
    report.lines.push_back(
        {"shape-assumptions", pass,
         detailf("logistic/probit/sign ok=%d/%d/%d, skipped=%d/%d/%d", a1.ok(), a2.ok(),
                 a3.ok(), a1.skipped_points, a2.skipped_points, a3.skipped_points)});
  }

  {
    const LinkModel wavy =
        LinkModel::custom([](double z) { return 0.5 + 0.4 * std::sin(z); });
    const AssumptionReport rep = check_assumption(wavy);
    report.lines.push_back({"non-monotone-detected", !rep.monotone_ok,
                            detailf("worst violation %.3f", rep.worst_violation)});
  }

  {
    // A custom link matching probit beta = 1 must reproduce its quantities.
    const LinkModel m =
        LinkModel::custom([](double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); });
    const double da = std::fabs(alpha(m) - 0.25);
    const double dg = std::fabs(gamma(m) - std::sqrt(1.0 / M_PI));
    report.lines.push_back({"custom-link-quadrature", da <= 1e-10 && dg <= 1e-10,
                            detailf("|da| = %.2e, |dg| = %.2e", da, dg)});
  }

  {
    // Noise floor: the max picks alpha when it dominates and the epsilon
    // term otherwise.
    const double floor_sign = alpha0(LinkModel::sign_model(), 0.25);
    const double expect = 0.25 / (1.5 * (5.0 + std::sqrt(21.0)));
    const double d1 = std::fabs(floor_sign - expect);
    const LinkModel lg = LinkModel::logistic(1.0);
    const double d2 = std::fabs(alpha0(lg, 0.01) - alpha(lg));
    report.lines.push_back({"noise-floor-branches", d1 <= 1e-15 && d2 == 0.0,
                            detailf("|d1| = %.2e, |d2| = %.2e", d1, d2)});
  }

  {
    // A decreasing link has negative signal strength; the range guard must
    // reject it rather than return a value.
    bool thrown = false;
    try {
      gamma_quadrature(LinkModel::custom([](double z) { return 0.5 * std::erfc(z * M_SQRT1_2); }));
    } catch (const InvalidLink&) {
      thrown = true;
    }
    report.lines.push_back({"range-guard", thrown, "decreasing link rejected"});
  }

  return report;
}

std::vector<ExpectationCheck> check_restricted_expectations(const LinkModel& model,
                                                            int replicates, int n, int d,
                                                            int k, std::uint64_t seed) {
  if (replicates < 2 || n < 1 || d < 1 || k < 1 || k > d)
    throw InvalidParams("check_restricted_expectations: bad sizes");
  Rng setup = Rng::stream(seed, 0, StreamPurpose::signal);
  const SparseUnitVector theta_star = random_sparse_unit(d, k, setup);
  const SparseUnitVector theta_prime = random_sparse_unit(d, k, setup);
  const SupportSet J = random_subset(d, k, setup);

  const double g = gamma(model);
  const double pull = std::sqrt(M_PI / 2.0) * g;
  const double shrink = -(1.0 - pull);

  const int R = replicates;
  Vec sum1(d, 0.0), sq1(d, 0.0), sum3(d, 0.0), sq3(d, 0.0);
  double s2_sum = 0.0, s2_sq = 0.0;
  std::vector<Vec> v4_rows;
  v4_rows.reserve(R);

  for (int r = 0; r < R; ++r) {
    const GaussianDesign X =
        gaussian_design(n, d, derive_key(seed, r + 1, StreamPurpose::design));
    Vec m_star;
    margins(X, theta_star.entries, m_star);
    Rng resp = Rng::stream(seed, r + 1, StreamPurpose::responses);
    const ResponseVector y = sample_responses(model, m_star, resp);

    const Vec v1 = h_fn_restricted(X, theta_star.entries, theta_prime.entries, J);
    for (int j = 0; j < d; ++j) {
      sum1[j] += v1[j];
      sq1[j] += v1[j] * v1[j];
    }
    const double s2 = dot(hf_fn(X, y, theta_star.entries), theta_star.entries);
    s2_sum += s2;
    s2_sq += s2 * s2;
    const Vec v3 = g_fn_restricted(X, theta_star.entries, theta_prime.entries, J);
    for (int j = 0; j < d; ++j) {
      sum3[j] += v3[j];
      sq3[j] += v3[j] * v3[j];
    }
    Vec v4 = hf_fn(X, y, theta_prime.entries);
    for (int j = 0; j < d; ++j) v4[j] += theta_prime.entries[j];
    v4_rows.push_back(std::move(v4));
  }

  const auto coord_z = [R](double sum, double sq, double expected) {
    const double mean = sum / R;
    const double var = std::max(0.0, sq / R - mean * mean);
    const double se = std::sqrt(var / R);
    if (se == 0.0) return mean == expected ? 0.0 : kInf;
    return std::fabs(mean - expected) / se;
  };

  std::vector<ExpectationCheck> checks(4);

  checks[0].name = "restricted-drift";
  // Expected value of the restricted drift is theta* - theta' on the
  // restriction set and zero elsewhere.
  {
    const SupportSet s1 = theta_star.support();
    const SupportSet s2 = theta_prime.support();
    const SupportSet set = support_union({&s1, &s2, &J});
    Vec expected(d, 0.0);
    for (int j : set) expected[j] = theta_star.entries[j] - theta_prime.entries[j];
    double worst = 0.0;
    for (int j = 0; j < d; ++j)
      worst = std::max(worst, coord_z(sum1[j], sq1[j], expected[j]));
    checks[0].worst_z = worst;
    checks[0].pass = worst <= 3.0;
  }

  checks[1].name = "self-shrinkage";
  checks[1].worst_z = coord_z(s2_sum, s2_sq, shrink);
  checks[1].pass = checks[1].worst_z <= 3.0;

  checks[2].name = "orthogonal-mean";
  {
    double worst = 0.0;
    for (int j = 0; j < d; ++j) worst = std::max(worst, coord_z(sum3[j], sq3[j], 0.0));
    checks[2].worst_z = worst;
    checks[2].pass = worst <= 3.0;
  }

  checks[3].name = "pull-strength";
  {
    Vec mean(d, 0.0);
    for (const Vec& row : v4_rows)
      for (int j = 0; j < d; ++j) mean[j] += row[j];
    for (int j = 0; j < d; ++j) mean[j] /= R;
    const double nm = norm(mean);
    double proj_sum = 0.0, proj_sq = 0.0;
    for (const Vec& row : v4_rows) {
      double p = 0.0;
      for (int j = 0; j < d; ++j) p += row[j] * mean[j];
      p /= nm;
      proj_sum += p;
      proj_sq += p * p;
    }
    const double pmean = proj_sum / R;
    const double pvar = std::max(0.0, proj_sq / R - pmean * pmean);
    const double se = std::sqrt(pvar / R);
    checks[3].worst_z = se > 0.0 ? std::fabs(nm - pull) / se : (nm == pull ? 0.0 : kInf);
    checks[3].pass = checks[3].worst_z <= 3.0;
  }

  return checks;
}

MismatchCheck check_mismatch_binomial(double angle, int replicates, int n, int d,
                                      std::uint64_t seed, double var_tol) {
  if (!(angle > 0.0 && angle < M_PI))
    throw InvalidParams("check_mismatch_binomial: angle must lie in (0, pi)");
  if (replicates < 2 || n < 1 || d < 2)
    throw InvalidParams("check_mismatch_binomial: bad sizes");
  Rng rng = Rng::stream(seed, 0, StreamPurpose::aux);
  const Vec u = normalized(gaussian_vec(d, rng));
  Vec b = gaussian_vec(d, rng);
  const double c = dot(b, u);
  for (int j = 0; j < d; ++j) b[j] -= c * u[j];
  b = normalized(b);
  Vec v(d);
  for (int j = 0; j < d; ++j) v[j] = std::cos(angle) * u[j] + std::sin(angle) * b[j];

  // Use the realized angle so floating-point drift in constructing v does
  // not bias the comparison.
  const double p = angular_distance(u, v) / M_PI;

  double sum = 0.0, sq = 0.0;
  for (int r = 0; r < replicates; ++r) {
    const GaussianDesign X =
        gaussian_design(n, d, derive_key(seed, r + 1, StreamPurpose::design));
    const double cnt = mismatch_count(X, u, v);
    sum += cnt;
    sq += cnt * cnt;
  }
  const double mean = sum / replicates;
  const double var =
      std::max(0.0, (sq - replicates * mean * mean) / (replicates - 1));
  const double bin_mean = n * p;
  const double bin_var = n * p * (1.0 - p);

  MismatchCheck out;
  out.angle = angle;
  out.mean_z = std::fabs(mean - bin_mean) / std::sqrt(bin_var / replicates);
  out.var_ratio = var / bin_var;
  out.pass_mean = out.mean_z <= 3.0;
  out.pass_var = std::fabs(out.var_ratio - 1.0) <= var_tol;
  return out;
}

VerifyReport verify_theory(std::uint64_t seed) {
  VerifyReport report;
  report.suite = "theory";

  {
    // hf_J(u, v) = h_J(u, v) + hf_{supp(v) u J}(u, u), an exact identity
    // of the correction algebra.
    Rng rng = Rng::stream(seed, 1, StreamPurpose::aux);
    double worst = 0.0;
    const int total = 60;
    for (int i = 0; i < total; ++i) {
      const int d = 30, k = 4, n = 200;
      const LinkModel model =
          (i % 2 == 0) ? LinkModel::sign_model() : LinkModel::logistic(1.0);
      const SparseUnitVector u = random_sparse_unit(d, k, rng);
      const SparseUnitVector v = random_sparse_unit(d, k, rng);
      const SupportSet J =
          random_subset(d, static_cast<int>(rng.next_below(k + 1)), rng);
      const GaussianDesign X = gaussian_design(n, d, rng.next_u64());
      Vec mu;
      margins(X, u.entries, mu);
      Rng resp(rng.next_u64());
      const ResponseVector y = sample_responses(model, mu, resp);

      const SupportSet su = u.support();
      const SupportSet sv = v.support();
      const SupportSet j_with_u = support_union({&J, &su});
      const SupportSet j_with_v = support_union({&J, &sv});
      const Vec lhs = hf_fn_restricted(X, y, v.entries, j_with_u);
      const Vec t1 = h_fn_restricted(X, u.entries, v.entries, J);
      const Vec t2 = hf_fn_restricted(X, y, u.entries, j_with_v);
      Vec rhs(d);
      for (int j = 0; j < d; ++j) rhs[j] = t1[j] + t2[j];
      worst = std::max(worst, max_abs_diff(lhs, rhs));
    }
    report.lines.push_back({"correction-split-identity", worst <= 1e-12,
                            detailf("%d instances, max coord diff %.2e", 60, worst)});
  }

  {
    // h_J(u, v) = h_J(u, w) + h_{supp(u) u J}(w, v) whenever
    // supp(w) u J = supp(v) u J.
    Rng rng = Rng::stream(seed, 2, StreamPurpose::aux);
    double worst = 0.0;
    const int total = 60;
    for (int i = 0; i < total; ++i) {
      const int d = 30, k = 4, n = 200;
      const SparseUnitVector u = random_sparse_unit(d, k, rng);
      const SparseUnitVector v = random_sparse_unit(d, k, rng);
      const SupportSet J =
          random_subset(d, static_cast<int>(rng.next_below(k + 1)), rng);
      const GaussianDesign X = gaussian_design(n, d, rng.next_u64());

      // Build w with supp(w) u J = supp(v) u J: keep supp(v) \ J, add a
      // random part of J.
      const SupportSet sv = v.support();
      SupportSet sw;
      for (int j : sv)
        if (!std::binary_search(J.begin(), J.end(), j)) sw.push_back(j);
      for (int j : J)
        if (rng.next_below(2) == 0) sw.push_back(j);
      std::sort(sw.begin(), sw.end());
      sw.erase(std::unique(sw.begin(), sw.end()), sw.end());
      Vec w(d, 0.0);
      for (int j : sw) w[j] = rng.next_normal();
      if (support_of(w).size() != sw.size()) continue;  // measure-zero exact zero draw

      const SupportSet su = u.support();
      const SupportSet j_with_u = support_union({&J, &su});
      const Vec lhs = h_fn_restricted(X, u.entries, v.entries, J);
      const Vec t1 = h_fn_restricted(X, u.entries, w, J);
      const Vec t2 = h_fn_restricted(X, w, v.entries, j_with_u);
      Vec rhs(d);
      for (int j = 0; j < d; ++j) rhs[j] = t1[j] + t2[j];
      worst = std::max(worst, max_abs_diff(lhs, rhs));
    }
    report.lines.push_back({"correction-chain-identity", worst <= 1e-12,
                            detailf("%d instances, max coord diff %.2e", total, worst)});
  }

  {
    // g is orthogonal to the pair plane; gf is orthogonal to its anchor.
    Rng rng = Rng::stream(seed, 3, StreamPurpose::aux);
    double worst = 0.0;
    bool degenerate_ok = true;
    const int total = 100;
    for (int i = 0; i < total; ++i) {
      const int d = 4 + static_cast<int>(rng.next_below(27));
      const int n = 100;
      const Vec u = normalized(gaussian_vec(d, rng));
      const Vec v = normalized(gaussian_vec(d, rng));
      const GaussianDesign X = gaussian_design(n, d, rng.next_u64());
      const Vec g = g_fn(X, u, v);
      Vec eminus(d), eplus(d);
      for (int j = 0; j < d; ++j) {
        eminus[j] = u[j] - v[j];
        eplus[j] = u[j] + v[j];
      }
      eminus = normalized(eminus);
      eplus = normalized(eplus);
      worst = std::max(worst, std::fabs(dot(g, eminus)));
      worst = std::max(worst, std::fabs(dot(g, eplus)));

      Vec mu;
      margins(X, u, mu);
      Rng resp(rng.next_u64());
      const ResponseVector y = sample_responses(LinkModel::logistic(1.0), mu, resp);
      const Vec gf = gf_fn(X, y, u);
      worst = std::max(worst, std::fabs(dot(gf, u)));

      if (i == 0) {
        Vec neg(u);
        for (double& x : neg) x = -x;
        try {
          g_fn(X, u, u);
          degenerate_ok = false;
        } catch (const DegenerateDirection&) {
        }
        try {
          g_fn(X, u, neg);
          degenerate_ok = false;
        } catch (const DegenerateDirection&) {
        }
      }
    }
    report.lines.push_back({"pair-plane-projection", worst <= 1e-10 && degenerate_ok,
                            detailf("%d instances, worst residual %.2e", total, worst)});
  }

  {
    const std::vector<ExpectationCheck> checks =
        check_restricted_expectations(LinkModel::logistic(1.0), 400, 300, 30, 4, seed + 100);
    for (const ExpectationCheck& c : checks)
      report.lines.push_back(
          {"expectation-" + c.name, c.pass, detailf("worst |z| = %.2f", c.worst_z)});
  }

  {
    const MismatchCheck mc = check_mismatch_binomial(M_PI_2, 800, 200, 6, seed + 200, 0.15);
    report.lines.push_back(
        {"mismatch-binomial", mc.pass(),
         detailf("mean z = %.2f, variance ratio = %.3f", mc.mean_z, mc.var_ratio)});
  }

  {
    // One-step error dominated by the three deviation terms.
    Rng rng = Rng::stream(seed, 4, StreamPurpose::aux);
    int failures = 0;
    double worst_ratio = 0.0;
    const int total = 100;
    const LinkModel model = LinkModel::logistic(1.0);
    for (int i = 0; i < total; ++i) {
      const int d = 40, k = 5, n = 1000;
      const SparseUnitVector ts = random_sparse_unit(d, k, rng);
      const SparseUnitVector tp = random_sparse_unit(d, k, rng);
      const SupportSet J =
          random_subset(d, static_cast<int>(rng.next_below(k + 1)), rng);
      // theta_dd support: (supp(theta') \ J) plus a random part of J.
      const SupportSet sp = tp.support();
      SupportSet sd;
      for (int j : sp)
        if (!std::binary_search(J.begin(), J.end(), j)) sd.push_back(j);
      for (int j : J)
        if (rng.next_below(2) == 0) sd.push_back(j);
      std::sort(sd.begin(), sd.end());
      sd.erase(std::unique(sd.begin(), sd.end()), sd.end());
      if (sd.empty()) sd.push_back(sp.front());
      Vec td(d, 0.0);
      for (int j : sd) td[j] = rng.next_normal();
      if (support_of(td).size() != sd.size()) continue;
      td = normalized(td);

      const GaussianDesign X = gaussian_design(n, d, rng.next_u64());
      Vec ms;
      margins(X, ts.entries, ms);
      Rng resp(rng.next_u64());
      const ResponseVector y = sample_responses(model, ms, resp);
      const DeviationDecomposition dec =
          decompose_deviation(X, y, model, ts.entries, tp.entries, td, J);
      if (!dec.ok) ++failures;
      const double bound = dec.term_far + dec.term_near + dec.term_noise;
      if (bound > 0.0) worst_ratio = std::max(worst_ratio, dec.total / bound);
    }
    report.lines.push_back({"error-split", failures == 0,
                            detailf("%d instances, %d failures, worst total/bound %.3f",
                                    total, failures, worst_ratio)});
  }

  {
    // Guarantee curve endpoints, monotonicity, and agreement with the
    // closed-form recurrence envelope under the standard instantiation.
    bool pass = true;
    double worst = 0.0;
    const double eps_grid[] = {0.05, 0.25, 0.7};
    for (double eps : eps_grid) {
      if (std::fabs(theoretical_error_curve(eps, 0) - 2.0) > 1e-15) pass = false;
      if (std::fabs(theoretical_error_curve(eps, 60) - eps) > 1e-12) pass = false;
      double prev = theoretical_error_curve(eps, 0);
      for (int t = 1; t <= 60; ++t) {
        const double cur = theoretical_error_curve(eps, t);
        if (cur >= prev + 1e-15) pass = false;
        prev = cur;
      }
      const double delta = eps / (1.5 * (5.0 + std::sqrt(21.0)));
      const RecurrenceParams p = make_recurrence_params(9.0 * delta, 1.0 / 3.0);
      for (int t = 0; t <= 60; ++t) {
        const double diff =
            std::fabs(recurrence_f2(p, t) - theoretical_error_curve(eps, t));
        worst = std::max(worst, diff);
        if (diff > 1e-12) pass = false;
      }
    }
    const double sqrt_half = std::fabs(theoretical_error_curve(0.25, 1) -
                                       0.70710678118654752);
    if (sqrt_half > 1e-15) pass = false;
    report.lines.push_back({"guarantee-curve", pass,
                            detailf("max |envelope - curve| = %.2e", worst)});
  }

  {
    // Regime selection against the breakpoints.
    bool pass = true;
    const RegimeInfo low = sample_complexity_regime(LinkFamily::logistic, 0.5, 0.25, 500, 5);
    if (low.label != "low-SNR") pass = false;
    const double base = 5.0 * std::log(100.0);
    if (std::fabs(low.leading_term - base / (0.25 * 0.0625)) > 1e-9) pass = false;
    const RegimeInfo mid = sample_complexity_regime(LinkFamily::logistic, 2.0, 0.25, 500, 5);
    if (mid.label != "mid-SNR") pass = false;
    const RegimeInfo high =
        sample_complexity_regime(LinkFamily::logistic, 200.0, 0.25, 500, 5);
    if (high.label != "high-SNR") pass = false;
    const RegimeInfo pmid = sample_complexity_regime(LinkFamily::probit, 50.0, 0.25, 500, 5);
    if (pmid.label != "mid-SNR") pass = false;
    const RegimeInfo phigh =
        sample_complexity_regime(LinkFamily::probit, 60.0, 0.25, 500, 5);
    if (phigh.label != "high-SNR") pass = false;
    // Halving eps inside low-SNR quadruples the requirement.
    const RegimeInfo low2 =
        sample_complexity_regime(LinkFamily::logistic, 0.5, 0.125, 500, 5);
    if (std::fabs(low2.leading_term / low.leading_term - 4.0) > 1e-9) pass = false;
    report.lines.push_back({"regime-map", pass, "breakpoints and scaling as specified"});
  }

  return report;
}

VerifyReport verify_raic(std::uint64_t seed) {
  VerifyReport report;
  report.suite = "raic";
  const int d = 200, k = 3;
  const double eps = 0.3;
  Rng srng = Rng::stream(seed, 0, StreamPurpose::signal);
  const SparseUnitVector theta_star = random_sparse_unit(d, k, srng);

  {
    // Noiseless self-probe: the correction at theta* itself vanishes, so
    // the recovered direction is exact.
    const GaussianDesign X =
        gaussian_design(5000, d, derive_key(seed, 1, StreamPurpose::design));
    Vec ms;
    margins(X, theta_star.entries, ms);
    Rng resp = Rng::stream(seed, 1, StreamPurpose::responses);
    const ResponseVector y = sample_responses(LinkModel::sign_model(), ms, resp);
    const SupportSet s = theta_star.support();
    const Vec correction = hf_fn_restricted(X, y, theta_star.entries, s);
    const double corr_norm = norm(correction);
    Vec corrected(theta_star.entries);
    for (int j = 0; j < d; ++j) corrected[j] += correction[j];
    // The correction is exactly zero; the distance only picks up the
    // rounding of re-normalizing a vector whose norm is 1 up to an ulp.
    const double lhs = l2_error(theta_star.entries, normalized(corrected));
    report.lines.push_back({"self-probe-exact", corr_norm == 0.0 && lhs <= 1e-14,
                            detailf("correction norm = %.2e, lhs = %.2e", corr_norm, lhs)});
  }

  {
    const int grid[] = {1000, 5000, 20000};
    double fracs[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      const RaicResult res = raic_probe(LinkModel::sign_model(), theta_star, grid[i], eps,
                                        150, derive_key(seed, 10 + i, StreamPurpose::probe));
      fracs[i] = res.violation_fraction;
    }
    report.lines.push_back(
        {"probe-violations", fracs[2] <= 0.05,
         detailf("violation fraction at n = 1000/5000/20000: %.3f/%.3f/%.3f", fracs[0],
                 fracs[1], fracs[2])});
  }

  return report;
}

std::vector<VerifyReport> run_verify_suites(const std::string& which, std::uint64_t seed) {
  std::vector<VerifyReport> reports;
  const bool all = which == "all";
  if (all || which == "facts") reports.push_back(verify_facts(seed));
  if (all || which == "glm") reports.push_back(verify_glm(seed));
  if (all || which == "theory") reports.push_back(verify_theory(seed));
  if (all || which == "raic") reports.push_back(verify_raic(seed));
  if (reports.empty())
    throw InvalidParams("verify: unknown suite '" + which +
                        "' (expected all, facts, glm, theory, raic)");
  return reports;
}

}  // namespace biht
