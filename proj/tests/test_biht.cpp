#include <cmath>
#include <vector>

#include "doctest.h"

#include "biht/biht.hpp"
#include "biht/design.hpp"
#include "biht/glm.hpp"
#include "biht/rng.hpp"
#include "biht/vec.hpp"

using namespace biht;

namespace {

// The update scale, frozen to the same literal the library uses so the
// hand-built degenerate instance cancels exactly.
constexpr double kSqrt2Pi = 2.5066282746310005;

GaussianDesign identity2() { return GaussianDesign{2, 2, 0, {1.0, 0.0, 0.0, 1.0}}; }

}  // namespace

TEST_SUITE("biht") {

TEST_CASE("a consistent response vector is a fixed point") {
  // Single row with margin exactly 0: sign(0) = +1 matches y = +1, so the
  // correction vanishes and the iterate passes through unchanged.
  const GaussianDesign X{1, 2, 0, {1.0, 0.0}};
  const Vec theta = {0.0, 1.0};
  CHECK(biht_step(X, {1}, theta, 2, RunVariant::normalized) == theta);
  CHECK(biht_step(X, {1}, theta, 2, RunVariant::unnormalized) == theta);

  // General fixed point: responses manufactured from the iterate's own
  // margins leave any iterate in place.
  const GaussianDesign G = gaussian_design(20, 6, 41);
  Rng rng(8);
  const Vec u = random_sparse_unit(6, 3, rng).entries;
  Vec m;
  margins(G, u, m);
  const ResponseVector y = signs_of(m);
  const Vec stepped = biht_step(G, y, u, 3, RunVariant::normalized);
  for (int j = 0; j < 6; ++j) CHECK(stepped[j] == doctest::Approx(u[j]).epsilon(1e-14));
}

TEST_CASE("one mismatched row moves the iterate by the update scale") {
  // x = [1, 0], iterate [-1, 0], response +1: the margin sign is -1, the
  // correction is sqrt(2pi) * x, so coordinate 0 lands at sqrt(2pi) - 1.
  const GaussianDesign X{1, 2, 0, {1.0, 0.0}};
  const Vec raw = biht_step(X, {1}, {-1.0, 0.0}, 2, RunVariant::unnormalized);
  CHECK(raw[0] == doctest::Approx(1.5066282746310005).epsilon(1e-15));
  CHECK(raw[1] == 0.0);

  // The normalized variant collapses the same ray onto the unit sphere.
  const Vec unit = biht_step(X, {1}, {-1.0, 0.0}, 2, RunVariant::normalized);
  CHECK(unit[0] == 1.0);
  CHECK(unit[1] == 0.0);
}

TEST_CASE("two-row toy hits the frozen oracle in both variants") {
  // X = I_2, iterate [0.6, -0.8], y = [-1, -1]: row 0 mismatches (margin
  // +0.6), row 1 agrees. Correction = (sqrt(2pi)/2) * (-1, 0).
  const GaussianDesign X = identity2();
  const Vec theta = {0.6, -0.8};
  const ResponseVector y = {-1, -1};

  const Vec raw = biht_step(X, y, theta, 2, RunVariant::unnormalized);
  CHECK(raw[0] == doctest::Approx(-0.65331413731550025).epsilon(1e-15));
  CHECK(raw[1] == -0.8);

  const Vec unit = biht_step(X, y, theta, 2, RunVariant::normalized);
  CHECK(unit[0] == doctest::Approx(-0.63252342157460725).epsilon(1e-15));
  CHECK(unit[1] == doctest::Approx(-0.77454123270459376).epsilon(1e-15));
  CHECK(norm(unit) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("thresholding to k = 1 keeps the dominant coordinate") {
  const GaussianDesign X = identity2();
  const Vec theta = {0.6, -0.8};
  const ResponseVector y = {-1, -1};

  // After the update the coordinates are (-0.653..., -0.8); top-1 keeps
  // index 1.
  const Vec raw = biht_step(X, y, theta, 1, RunVariant::unnormalized);
  CHECK(raw[0] == 0.0);
  CHECK(raw[1] == -0.8);

  const Vec unit = biht_step(X, y, theta, 1, RunVariant::normalized);
  CHECK(unit[0] == 0.0);
  CHECK(unit[1] == -1.0);
}

TEST_CASE("an exactly cancelled update raises the degenerate error") {
  // The correction equals -theta, so the thresholded vector is zero.
  const GaussianDesign X{1, 2, 0, {1.0, 0.0}};
  const Vec theta = {kSqrt2Pi, 0.0};
  CHECK_THROWS_AS(biht_step(X, {-1}, theta, 2, RunVariant::normalized), DegenerateIterate);
  CHECK_THROWS_AS(biht_step(X, {-1}, theta, 2, RunVariant::unnormalized),
                  DegenerateIterate);
}

TEST_CASE("k equal to the dimension skips thresholding but still normalizes") {
  const GaussianDesign X = gaussian_design(30, 6, 17);
  Rng rng(2);
  const Vec theta = random_sparse_unit(6, 6, rng).entries;
  Rng rr(3);
  Vec m;
  margins(X, theta, m);
  const ResponseVector y = sample_responses(LinkModel::logistic(1.0), m, rr);
  const Vec next = biht_step(X, y, theta, 6, RunVariant::normalized);
  CHECK(norm(next) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("step arguments are validated") {
  const GaussianDesign X = identity2();
  const Vec theta = {1.0, 0.0};
  CHECK_THROWS_AS(biht_step(X, {1}, theta, 2, RunVariant::normalized), InvalidParams);
  CHECK_THROWS_AS(biht_step(X, {1, 0}, theta, 2, RunVariant::normalized), InvalidParams);
  CHECK_THROWS_AS(biht_step(X, {1, -1}, {1.0}, 2, RunVariant::normalized), InvalidParams);
  CHECK_THROWS_AS(biht_step(X, {1, -1}, theta, 0, RunVariant::normalized), InvalidParams);
  CHECK_THROWS_AS(biht_step(X, {1, -1}, theta, 3, RunVariant::normalized), InvalidParams);
}

TEST_CASE("hinge loss counts exactly the sign disagreements") {
  const GaussianDesign X{1, 2, 0, {1.0, 0.0}};
  CHECK(relu_loss(X, {-1}, {1.0, 0.0}) == 1.0);
  CHECK(relu_loss(X, {1}, {1.0, 0.0}) == 0.0);

  // Zero loss exactly when every response matches its margin sign.
  const GaussianDesign G = gaussian_design(25, 5, 6);
  Rng rng(77);
  const Vec u = random_sparse_unit(5, 2, rng).entries;
  Vec m;
  margins(G, u, m);
  CHECK(relu_loss(G, signs_of(m), u) == 0.0);

  // Against a direct evaluation of (1/n) sum max(0, -y m).
  Rng rr(5);
  ResponseVector y(25);
  for (auto& v : y) v = rr.next_below(2) ? 1 : -1;
  double acc = 0.0;
  for (int i = 0; i < 25; ++i) acc += std::max(0.0, -static_cast<double>(y[i]) * m[i]);
  CHECK(relu_loss(G, y, u) == doctest::Approx(acc / 25.0).epsilon(1e-14));
}

TEST_CASE("runs record one entry per iteration including the start") {
  const GaussianDesign X = gaussian_design(40, 8, 29);
  Rng rr(4);
  Vec m;
  const Vec star = random_sparse_unit(8, 3, rr).entries;
  margins(X, star, m);
  const ResponseVector y = signs_of(m);

  BihtConfig cfg;
  cfg.k = 3;
  cfg.max_iters = 7;
  cfg.init_seed = 100;
  const TrialTrace trace = biht_run(X, y, cfg, &star);
  CHECK(trace.iterates.size() == 8);
  CHECK(trace.errors.size() == 8);
  CHECK(trace.mismatch_fractions.size() == 8);
  CHECK(trace.losses.size() == 8);
  for (double f : trace.mismatch_fractions) {
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }

  // Without a reference parameter the error channel stays empty.
  const TrialTrace anon = biht_run(X, y, cfg);
  CHECK(anon.errors.empty());
  CHECK(anon.iterates.size() == 8);
}

TEST_CASE("a zero-iteration run reports only the initialization") {
  const GaussianDesign X = gaussian_design(10, 6, 3);
  Vec m;
  Rng rr(9);
  const Vec star = random_sparse_unit(6, 2, rr).entries;
  margins(X, star, m);
  BihtConfig cfg;
  cfg.k = 2;
  cfg.max_iters = 0;
  cfg.init_seed = 5;
  const TrialTrace trace = biht_run(X, signs_of(m), cfg, &star);
  CHECK(trace.iterates.size() == 1);
  CHECK(trace.errors.size() == 1);
  // Two unit vectors are never farther apart than the sphere diameter.
  CHECK(trace.errors[0] <= 2.0 + 1e-12);
}

TEST_CASE("responses consistent with the initialization freeze the whole run") {
  const GaussianDesign X = gaussian_design(30, 10, 12);
  BihtConfig cfg;
  cfg.k = 4;
  cfg.max_iters = 0;
  cfg.init_seed = 33;
  const TrialTrace probe = biht_run(X, ResponseVector(30, 1), cfg);
  const Vec theta0 = probe.iterates[0];

  Vec m;
  margins(X, theta0, m);
  cfg.max_iters = 5;
  const TrialTrace trace = biht_run(X, signs_of(m), cfg);
  REQUIRE(trace.iterates.size() == 6);
  for (const Vec& it : trace.iterates)
    for (int j = 0; j < 10; ++j) CHECK(it[j] == doctest::Approx(theta0[j]).epsilon(1e-13));
}

TEST_CASE("normalized iterates stay unit norm and within the sparsity budget") {
  const GaussianDesign X = gaussian_design(400, 50, 151);
  Rng sr(21);
  const SparseUnitVector star = random_sparse_unit(50, 3, sr);
  Vec m;
  margins(X, star.entries, m);
  const ResponseVector y = signs_of(m);

  BihtConfig cfg;
  cfg.k = 3;
  cfg.max_iters = 12;
  cfg.init_seed = 9;
  const TrialTrace trace = biht_run(X, y, cfg, &star.entries);
  for (const Vec& it : trace.iterates) {
    CHECK(norm(it) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(static_cast<int>(support_of(it).size()) <= 3);
  }

  cfg.variant = RunVariant::unnormalized;
  const TrialTrace raw = biht_run(X, y, cfg, &star.entries);
  for (const Vec& it : raw.iterates)
    CHECK(static_cast<int>(support_of(it).size()) <= 3);
}

TEST_CASE("identical inputs give bit-identical traces") {
  const GaussianDesign X = gaussian_design(60, 12, 88);
  Rng rr(14);
  Vec m;
  const Vec star = random_sparse_unit(12, 3, rr).entries;
  margins(X, star, m);
  Rng resp(15);
  const ResponseVector y = sample_responses(LinkModel::logistic(1.0), m, resp);

  BihtConfig cfg;
  cfg.k = 3;
  cfg.max_iters = 6;
  cfg.init_seed = 71;
  const TrialTrace a = biht_run(X, y, cfg, &star);
  const TrialTrace b = biht_run(X, y, cfg, &star);
  REQUIRE(a.iterates.size() == b.iterates.size());
  for (std::size_t t = 0; t < a.iterates.size(); ++t) CHECK(a.iterates[t] == b.iterates[t]);
  CHECK(a.errors == b.errors);
  CHECK(a.losses == b.losses);
}

TEST_CASE("a generously sampled noiseless instance is recovered") {
  // d = 200, k = 3, n = 600: far above the information threshold, one
  // seeded instance must come back nearly exactly within 30 iterations.
  const int d = 200, k = 3, n = 600;
  const GaussianDesign X = gaussian_design(n, d, derive_key(424242, 0, StreamPurpose::design));
  Rng sr = Rng::stream(424242, 0, StreamPurpose::signal);
  const SparseUnitVector star = random_sparse_unit(d, k, sr);
  Vec m;
  margins(X, star.entries, m);
  const ResponseVector y = signs_of(m);

  BihtConfig cfg;
  cfg.k = k;
  cfg.max_iters = 30;
  cfg.init_seed = derive_key(424242, 0, StreamPurpose::init);
  const TrialTrace trace = biht_run(X, y, cfg, &star.entries);
  CHECK(trace.errors.back() < 0.1);
}

}  // TEST_SUITE
