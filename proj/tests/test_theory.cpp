#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "biht/design.hpp"
#include "biht/glm.hpp"
#include "biht/rng.hpp"
#include "biht/theory.hpp"
#include "biht/vec.hpp"

using namespace biht;

namespace {

constexpr double kNoiseFloorDivisor = 14.37386354243376;  // (3/2)(5 + sqrt(21))

struct Instance {
  GaussianDesign X;
  Vec u;
  Vec v;
  ResponseVector y;
  SupportSet J;
};

Instance make_instance(std::uint64_t seed, int n = 60, int d = 20, int k = 4) {
  Instance ins;
  ins.X = gaussian_design(n, d, derive_key(seed, 0, StreamPurpose::design));
  Rng rng = Rng::stream(seed, 0, StreamPurpose::signal);
  ins.u = random_sparse_unit(d, k, rng).entries;
  ins.v = random_sparse_unit(d, k, rng).entries;
  Vec m;
  margins(ins.X, ins.u, m);
  Rng resp = Rng::stream(seed, 0, StreamPurpose::responses);
  ins.y = sample_responses(LinkModel::logistic(1.0), m, resp);
  Rng jr = Rng::stream(seed, 0, StreamPurpose::aux);
  const int jsize = static_cast<int>(jr.next_below(k + 1));
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  for (int i = 0; i < jsize; ++i)
    std::swap(idx[i], idx[i + static_cast<int>(jr.next_below(d - i))]);
  ins.J.assign(idx.begin(), idx.begin() + jsize);
  std::sort(ins.J.begin(), ins.J.end());
  return ins;
}

bool contains(const SupportSet& s, int j) {
  return std::binary_search(s.begin(), s.end(), j);
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("restricted maps vanish exactly off their coordinate set") {
  const Instance ins = make_instance(1);
  const SupportSet su = support_of(ins.u);
  const SupportSet sv = support_of(ins.v);

  const Vec h_full = h_fn(ins.X, ins.u, ins.v);
  const Vec h_res = h_fn_restricted(ins.X, ins.u, ins.v, ins.J);
  const SupportSet h_set = support_union({&su, &sv, &ins.J});
  for (int j = 0; j < ins.X.cols; ++j) {
    if (contains(h_set, j))
      CHECK(h_res[j] == h_full[j]);
    else
      CHECK(h_res[j] == 0.0);
  }

  const Vec hf_full = hf_fn(ins.X, ins.y, ins.v);
  const Vec hf_res = hf_fn_restricted(ins.X, ins.y, ins.v, ins.J);
  const SupportSet hf_set = support_union({&sv, &ins.J});
  for (int j = 0; j < ins.X.cols; ++j) {
    if (contains(hf_set, j))
      CHECK(hf_res[j] == hf_full[j]);
    else
      CHECK(hf_res[j] == 0.0);
  }
}

TEST_CASE("observed and pairwise deviations satisfy the exact splitting identity") {
  // hf_{J u S(u)}(y, v) = h_J(u, v) + hf_{S(v) u J}(y, u) holds without any
  // support condition: both sides restrict to the same coordinate set and
  // the sign differences telescope.
  for (std::uint64_t seed : {2ull, 3ull, 4ull, 5ull}) {
    const Instance ins = make_instance(seed);
    const SupportSet su = support_of(ins.u);
    const SupportSet sv = support_of(ins.v);

    const SupportSet j_left = support_union({&ins.J, &su});
    const Vec lhs = hf_fn_restricted(ins.X, ins.y, ins.v, j_left);

    const Vec a = h_fn_restricted(ins.X, ins.u, ins.v, ins.J);
    const SupportSet j_right = support_union({&sv, &ins.J});
    const Vec b = hf_fn_restricted(ins.X, ins.y, ins.u, j_right);

    for (int j = 0; j < ins.X.cols; ++j)
      CHECK(lhs[j] == doctest::Approx(a[j] + b[j]).epsilon(1e-12));
  }
}

TEST_CASE("the chain identity needs the support alignment condition") {
  const Instance ins = make_instance(7);

  // Aligned case: w lives on the support of v, so S(w) u J = S(v) u J and
  // h telescopes exactly through the intermediate point.
  Vec w = ins.v;
  for (double& x : w) x *= 1.7;
  {
    const Vec left = h_fn_restricted(ins.X, ins.u, ins.v, ins.J);
    const Vec a = h_fn_restricted(ins.X, ins.u, w, ins.J);
    const SupportSet su = support_of(ins.u);
    const SupportSet j_mid = support_union({&su, &ins.J});
    const Vec b = h_fn_restricted(ins.X, w, ins.v, j_mid);
    for (int j = 0; j < ins.X.cols; ++j)
      CHECK(left[j] == doctest::Approx(a[j] + b[j]).epsilon(1e-12));
  }

  // Misaligned case: give w mass on a coordinate no other set covers. The
  // right side picks up that coordinate, the left side stays zero there.
  {
    const SupportSet su = support_of(ins.u);
    const SupportSet sv = support_of(ins.v);
    const SupportSet covered = support_union({&su, &sv, &ins.J});
    int outside = -1;
    for (int j = 0; j < ins.X.cols; ++j)
      if (!contains(covered, j)) {
        outside = j;
        break;
      }
    REQUIRE(outside >= 0);
    Vec w2 = ins.v;
    w2[outside] = 0.9;

    const Vec left = h_fn_restricted(ins.X, ins.u, ins.v, ins.J);
    const Vec a = h_fn_restricted(ins.X, ins.u, w2, ins.J);
    const SupportSet j_mid = support_union({&su, &ins.J});
    const Vec b = h_fn_restricted(ins.X, w2, ins.v, j_mid);
    double worst = 0.0;
    for (int j = 0; j < ins.X.cols; ++j) worst = std::max(worst, std::fabs(left[j] - (a[j] + b[j])));
    CHECK(left[outside] == 0.0);
    CHECK(worst > 1e-6);
  }
}

TEST_CASE("the projected deviation is orthogonal to the pair plane") {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const Instance ins = make_instance(20 + rep);
    const Vec un = normalized(ins.u);
    const Vec vn = normalized(ins.v);
    const Vec g = g_fn(ins.X, un, vn);

    Vec eminus(un.size()), eplus(un.size());
    for (std::size_t j = 0; j < un.size(); ++j) {
      eminus[j] = un[j] - vn[j];
      eplus[j] = un[j] + vn[j];
    }
    CHECK(std::fabs(dot(g, eminus)) <= 1e-12);
    CHECK(std::fabs(dot(g, eplus)) <= 1e-12);

    // Reconstruction: g is h minus its components along the orthonormal
    // pair directions.
    const Vec h = h_fn(ins.X, un, vn);
    const Vec em = normalized(eminus);
    const Vec ep = normalized(eplus);
    const double cm = dot(h, em);
    const double cp = dot(h, ep);
    for (std::size_t j = 0; j < h.size(); ++j)
      CHECK(g[j] == doctest::Approx(h[j] - cm * em[j] - cp * ep[j]).epsilon(1e-12));

    const Vec gr = g_fn_restricted(ins.X, un, vn, ins.J);
    CHECK(std::fabs(dot(gr, eminus)) <= 1e-12);
    CHECK(std::fabs(dot(gr, eplus)) <= 1e-12);
  }

  const Instance ins = make_instance(30);
  const Vec un = normalized(ins.u);
  Vec anti = un;
  for (double& x : anti) x = -x;
  CHECK_THROWS_AS(g_fn(ins.X, un, un), DegenerateDirection);
  CHECK_THROWS_AS(g_fn(ins.X, un, anti), DegenerateDirection);

  const Vec gf = gf_fn(ins.X, ins.y, un);
  CHECK(std::fabs(dot(gf, un)) <= 1e-12);
}

TEST_CASE("mismatch counting is exact and symmetric") {
  const Instance ins = make_instance(40, 80, 15, 3);
  const Vec un = normalized(ins.u);
  const Vec vn = normalized(ins.v);
  CHECK(mismatch_count(ins.X, un, un) == 0);

  Vec anti = un;
  for (double& x : anti) x = -x;
  CHECK(mismatch_count(ins.X, un, anti) == ins.X.rows);

  CHECK(mismatch_count(ins.X, un, vn) == mismatch_count(ins.X, vn, un));

  int brute = 0;
  Vec mu, mv;
  margins(ins.X, un, mu);
  margins(ins.X, vn, mv);
  for (int i = 0; i < ins.X.rows; ++i)
    if (sign_of(mu[i]) != sign_of(mv[i])) ++brute;
  CHECK(mismatch_count(ins.X, un, vn) == brute);
}

TEST_CASE("orthogonal directions disagree on half the margins on average") {
  // At angle pi/2 the mismatch count is Binomial(n, 1/2); the mean over
  // fresh designs concentrates fast.
  const int n = 200, reps = 200;
  Vec e1(8, 0.0), e2(8, 0.0);
  e1[0] = 1.0;
  e2[1] = 1.0;
  double acc = 0.0;
  for (int r = 0; r < reps; ++r)
    acc += mismatch_count(gaussian_design(n, 8, derive_key(900, r, StreamPurpose::design)),
                          e1, e2);
  const double mean = acc / reps;
  // 4 standard errors: 4 * sqrt(n/4) / sqrt(reps) = 2.
  CHECK(std::fabs(mean - 100.0) <= 2.0);
}

TEST_CASE("recurrence parameters implement the quadratic root map") {
  const RecurrenceParams p = make_recurrence_params(0.1, 1.0);
  CHECK(p.v == 0.1);
  CHECK(p.w == 1.0);
  CHECK(p.u == doctest::Approx(0.5 * (1.0 + std::sqrt(5.0))).epsilon(1e-15));

  CHECK_THROWS_AS(make_recurrence_params(0.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(make_recurrence_params(0.1, 0.0), InvalidParams);
  // v = 1.9, w = 1 gives u = golden ratio > sqrt(2/1.9).
  CHECK_THROWS_AS(make_recurrence_params(1.9, 1.0), InvalidParams);
}

TEST_CASE("the error recursion decays under its closed-form envelope") {
  Rng rng(123);
  for (int rep = 0; rep < 50; ++rep) {
    const double w = 0.05 + 3.0 * rng.next_unit();
    const double u = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * w));
    const double v = (2.0 / (u * u)) * (0.05 + 0.9 * rng.next_unit());
    const RecurrenceParams p = make_recurrence_params(v, w);

    CHECK(recurrence_f1(p, 0) == 2.0);
    CHECK(recurrence_f2(p, 0) == doctest::Approx(2.0).epsilon(1e-15));

    double prev1 = recurrence_f1(p, 0);
    double prev2 = recurrence_f2(p, 0);
    for (int t = 1; t <= 50; ++t) {
      const double f1 = recurrence_f1(p, t);
      const double f2 = recurrence_f2(p, t);
      CHECK(f1 <= f2 + 1e-10);
      CHECK(f1 <= prev1 + 1e-12);
      CHECK(f2 <= prev2 + 1e-12);
      prev1 = f1;
      prev2 = f2;
    }
    const double limit = p.u * p.u * p.v;
    CHECK(recurrence_f2(p, 60) == doctest::Approx(limit).epsilon(1e-12));
    CHECK_THROWS_AS(recurrence_f1(p, -1), InvalidParams);
  }
}

TEST_CASE("the guarantee curve starts at 2 and converges to epsilon") {
  CHECK(theoretical_error_curve(0.25, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(theoretical_error_curve(0.25, 1) ==
        doctest::Approx(0.70710678118654752).epsilon(1e-15));
  double prev = theoretical_error_curve(0.25, 0);
  for (int t = 1; t <= 12; ++t) {
    const double cur = theoretical_error_curve(0.25, t);
    CHECK(cur < prev);
    CHECK(cur >= 0.25 - 1e-15);
    prev = cur;
  }
  // In log space the exponent 2^-t underflows cleanly instead of losing
  // the epsilon limit.
  CHECK(theoretical_error_curve(0.25, 800) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(theoretical_error_curve(0.0, 1), InvalidParams);
  CHECK_THROWS_AS(theoretical_error_curve(1.0, 1), InvalidParams);
  CHECK_THROWS_AS(theoretical_error_curve(0.25, -1), InvalidParams);
}

TEST_CASE("the guarantee curve is the envelope at the canonical parameters") {
  // With delta = eps / ((3/2)(5 + sqrt(21))), the pair (v, w) = (9 delta,
  // 1/3) gives u^2 v = eps exactly, so the envelope IS the curve.
  const double eps = 0.25;
  const double delta = eps / kNoiseFloorDivisor;
  const RecurrenceParams p = make_recurrence_params(9.0 * delta, 1.0 / 3.0);
  CHECK(p.u * p.u * p.v == doctest::Approx(eps).epsilon(1e-14));
  for (int t = 0; t <= 40; ++t)
    CHECK(recurrence_f2(p, t) ==
          doctest::Approx(theoretical_error_curve(eps, t)).epsilon(1e-12));
}

TEST_CASE("sample-size regimes switch at the noise crest") {
  const int d = 500, k = 5;
  const double eps = 0.25;
  const double base = k * std::log(d / static_cast<double>(k));

  const RegimeInfo low = sample_complexity_regime(LinkFamily::logistic, 0.5, eps, d, k);
  CHECK(low.label == "low-SNR");
  CHECK(low.leading_term == doctest::Approx(base / (0.25 * eps * eps)).epsilon(1e-12));

  const RegimeInfo mid = sample_complexity_regime(LinkFamily::logistic, 2.0, eps, d, k);
  CHECK(mid.label == "mid-SNR");
  CHECK(mid.leading_term == doctest::Approx(base / (2.0 * eps * eps)).epsilon(1e-12));

  // The crest differs by the family scale: logistic 3(5+sqrt21)/sqrt(2pi)
  // is about 11.5, probit (3/2)(5+sqrt21) about 14.4. At beta = 50 and
  // eps = 0.25 logistic has crossed into the high regime, probit has not.
  const RegimeInfo hi = sample_complexity_regime(LinkFamily::logistic, 50.0, eps, d, k);
  CHECK(hi.label == "high-SNR");
  CHECK(hi.leading_term == doctest::Approx(base / eps).epsilon(1e-12));
  const RegimeInfo pm = sample_complexity_regime(LinkFamily::probit, 50.0, eps, d, k);
  CHECK(pm.label == "mid-SNR");

  CHECK_THROWS_AS(sample_complexity_regime(LinkFamily::sign, 1.0, eps, d, k), InvalidParams);
  CHECK_THROWS_AS(sample_complexity_regime(LinkFamily::logistic, -1.0, eps, d, k),
                  InvalidParams);
  CHECK_THROWS_AS(sample_complexity_regime(LinkFamily::logistic, 1.0, 1.5, d, k),
                  InvalidParams);
}

TEST_CASE("thresholding loses at most a factor of three") {
  // When top-k already picks the right coordinate both sides vanish.
  SparseUnitVector u;
  u.dim = 4;
  u.budget = 1;
  u.entries = {1.0, 0.0, 0.0, 0.0};
  const Factor3Check exact = check_factor3_lemma(u, {0.9, 0.8, 0.0, 0.0}, {});
  CHECK(exact.lhs <= 1e-12);
  CHECK(exact.ok);

  // When top-k picks the wrong coordinate the superset projection still
  // controls the loss.
  const Factor3Check missed = check_factor3_lemma(u, {0.5, 0.9, 0.0, 0.0}, {});
  CHECK(missed.lhs == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(missed.ok);

  CHECK_THROWS_AS(check_factor3_lemma(u, {0.5, 0.9, 0.0, 0.0}, {0, 1}), InvalidParams);
  CHECK_THROWS_AS(check_factor3_lemma(u, {0.5, 0.9}, {}), InvalidParams);

  // Random stress mirroring the adversarial shapes: concentrated near u,
  // independent, and rescaled sparse directions.
  Rng rng(314);
  int violations = 0;
  for (int i = 0; i < 500; ++i) {
    const int d = 5 + static_cast<int>(rng.next_below(26));
    const int k = 1 + static_cast<int>(rng.next_below(std::min(8, d)));
    const SparseUnitVector uu = random_sparse_unit(d, k, rng);
    Vec x(d);
    if (i % 2 == 0) {
      x = uu.entries;
      for (double& e : x) e += 0.1 * rng.next_normal();
    } else {
      for (double& e : x) e = rng.next_normal();
    }
    SupportSet J;
    const int jsize = static_cast<int>(rng.next_below(k + 1));
    for (int j = 0; j < jsize; ++j) J.push_back(j);
    if (!check_factor3_lemma(uu, x, J).ok) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("the one-step error splits into the three deviation terms") {
  const int n = 150, d = 30, k = 4;
  const GaussianDesign X = gaussian_design(n, d, derive_key(55, 0, StreamPurpose::design));
  Rng sr = Rng::stream(55, 0, StreamPurpose::signal);
  const Vec star = random_sparse_unit(d, k, sr).entries;
  const Vec prime = random_sparse_unit(d, k, sr).entries;
  Vec dd = prime;
  for (double& x : dd) x *= 0.8;  // same support, so any J aligns

  Vec m;
  margins(X, star, m);
  Rng rr = Rng::stream(55, 0, StreamPurpose::responses);
  const ResponseVector y = sample_responses(LinkModel::logistic(1.0), m, rr);

  const DeviationDecomposition dec =
      decompose_deviation(X, y, LinkModel::logistic(1.0), star, prime, dd, {0, 1});
  CHECK(dec.ok);
  CHECK(dec.total >= 0.0);
  CHECK(dec.term_far >= 0.0);
  CHECK(dec.term_near >= 0.0);
  CHECK(dec.term_noise >= 0.0);
  CHECK(dec.total <= dec.term_far + dec.term_near + dec.term_noise + 1e-9);

  // Support misalignment between theta_dd and theta_prime is rejected.
  Vec off(d, 0.0);
  off[d - 1] = 1.0;
  CHECK_THROWS_AS(
      decompose_deviation(X, y, LinkModel::logistic(1.0), star, prime, off, {}),
      InvalidParams);

  // A linkless model has gamma = 0: no direction to rescale against.
  const LinkModel flat = LinkModel::custom([](double) { return 0.5; });
  CHECK_THROWS_AS(decompose_deviation(X, y, flat, star, prime, dd, {0, 1}),
                  DegenerateIterate);
}

TEST_CASE("correction probes rarely violate the restricted bound at moderate n") {
  Rng sr = Rng::stream(808, 0, StreamPurpose::signal);
  const SparseUnitVector star = random_sparse_unit(50, 3, sr);
  const RaicResult res = raic_probe(LinkModel::sign_model(), star, 400, 0.3, 60, 5);

  CHECK(res.delta == doctest::Approx(0.3 / kNoiseFloorDivisor).epsilon(1e-15));
  REQUIRE(res.samples.size() == 60);
  int violated = 0;
  for (const RaicSample& s : res.samples) {
    CHECK(s.distance >= 0.0);
    CHECK(s.rhs ==
          doctest::Approx(std::sqrt(res.delta * s.distance) + res.delta).epsilon(1e-12));
    CHECK(s.violated == (s.lhs > s.rhs));
    if (s.violated) ++violated;
  }
  CHECK(res.violation_fraction ==
        doctest::Approx(violated / 60.0).epsilon(1e-15));

  // The bound itself only kicks in once n clears the sampling requirement;
  // at this shape n = 1500 is comfortably inside it.
  const RaicResult ample = raic_probe(LinkModel::sign_model(), star, 1500, 0.3, 60, 5);
  CHECK(ample.violation_fraction <= 0.15);

  // Determinism across calls.
  const RaicResult again = raic_probe(LinkModel::sign_model(), star, 400, 0.3, 60, 5);
  for (std::size_t i = 0; i < res.samples.size(); ++i)
    CHECK(res.samples[i].lhs == again.samples[i].lhs);

  CHECK_THROWS_AS(raic_probe(LinkModel::sign_model(), star, 0, 0.3, 10, 1), InvalidParams);
  CHECK_THROWS_AS(raic_probe(LinkModel::sign_model(), star, 100, 1.0, 10, 1), InvalidParams);
  CHECK_THROWS_AS(raic_probe(LinkModel::sign_model(), star, 100, 0.3, 0, 1), InvalidParams);
}

}  // TEST_SUITE
