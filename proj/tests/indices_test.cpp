#include <doctest.h>

#include <cmath>

#include "divq/indices.hpp"
#include "divq/models.hpp"
#include "divq/risk_measures.hpp"
#include "test_support.hpp"

using namespace divq;

namespace {

SampleMatrix duplicate_pair(const std::vector<double>& x) {
  SampleMatrix m(x.size(), 2);
  for (std::size_t i = 0; i < x.size(); ++i) m(i, 0) = m(i, 1) = x[i];
  return m;
}

SampleMatrix hedged_pair(const std::vector<double>& x) {
  SampleMatrix m(x.size(), 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    m(i, 0) = x[i];
    m(i, 1) = -x[i];
  }
  return m;
}

}  // namespace

TEST_CASE("dq_var benchmark portfolios") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(dq_var(duplicate_pair(x), 0.25) == doctest::Approx(1.0));
  // Full hedge with positive pooled capital.
  CHECK(empirical_var(x, 0.25) + empirical_var(std::vector<double>{-1, -2, -3, -4}, 0.25) > 0);
  CHECK(dq_var(hedged_pair(x), 0.25) == 0.0);

  SampleMatrix m = SampleMatrix::from_rows({{1, 1}, {2, 0}, {0, 2}, {5, 5}});
  CHECK(dq_var(m, 0.25) == doctest::Approx(1.0));
}

TEST_CASE("dq_var output lies on the k/(N alpha) grid") {
  auto g = test::rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    auto m = test::random_matrix(g, 40 + rep, 3);
    const double alpha = 0.1 + 0.01 * (rep % 10);
    const double v = dq_var(m, alpha);
    const double steps = v * static_cast<double>(m.rows()) * alpha;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
  }
}

TEST_CASE("dq_es benchmark portfolios") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(dq_es(duplicate_pair(x), 0.5) == doctest::Approx(1.0));

  SampleMatrix zero_branch = SampleMatrix::from_rows({{0, 0}, {0, 0}, {0, 0}, {4, 4}});
  CHECK(dq_es(zero_branch, 0.25, Weights({0.5, 0.5})) == 0.0);

  CHECK(dq_es(hedged_pair(x), 0.25) == 0.0);
}

TEST_CASE("dq_general inverts the level curve") {
  SUBCASE("constant matrix gives alpha* = 0") {
    SampleMatrix m(4, 3);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 3; ++j) m(i, j) = 2.5;
    auto res = dq_general(RiskFamily::var_family(), m, 0.3);
    CHECK(res.alpha_star == 0.0);
    CHECK(res.value == 0.0);
  }

  SUBCASE("scaled-phi(SD) reproduces DR^SD") {
    auto g = test::rng(21);
    for (int rep = 0; rep < 100; ++rep) {
      auto m = test::random_matrix(g, 10 + rep % 60, 2 + rep % 4);
      const double alpha = 0.05 + 0.4 * (rep % 7) / 7.0;
      auto res = dq_general(RiskFamily::scaled_phi(PhiSpec::sd()), m, alpha);
      const double ratio = dr(PhiSpec::sd(), m);
      CHECK(res.value == doctest::Approx(ratio).epsilon(1e-12));
    }
  }

  SUBCASE("VaR family agrees with the closed form within one grid step") {
    auto g = test::rng(22);
    for (int rep = 0; rep < 100; ++rep) {
      auto m = test::random_matrix(g, 30 + rep % 50, 2 + rep % 3);
      const double alpha = 0.08 + 0.3 * (rep % 5) / 5.0;
      auto res = dq_general(RiskFamily::var_family(), m, alpha);
      const double direct = dq_var(m, alpha);
      const double grid_step = 1.0 / (static_cast<double>(m.rows()) * alpha);
      CHECK(std::abs(res.value - direct) <= grid_step + 1e-9);
    }
  }

  SUBCASE("ES family agrees with the minimization form") {
    auto g = test::rng(23);
    for (int rep = 0; rep < 100; ++rep) {
      auto m = test::random_matrix(g, 30 + rep % 50, 2 + rep % 3);
      const double alpha = 0.08 + 0.3 * (rep % 5) / 5.0;
      auto res = dq_general(RiskFamily::es_family(), m, alpha);
      const double direct = dq_es(m, alpha);
      CHECK(std::abs(res.value - direct) <= 1e-6);
    }
  }

  SUBCASE("empty inversion set returns alpha_bar") {
    // Anti-aligned spikes: both marginal VaRs are 0 yet every scenario sum
    // exceeds 0, so no level satisfies the inversion inequality.
    SampleMatrix m = SampleMatrix::from_rows({{0, 5}, {0, 5}, {5, 0}, {5, 0}});
    auto res = dq_general(RiskFamily::var_family(), m, 0.6);
    CHECK(res.alpha_star == doctest::Approx(1.0));
    CHECK(res.value == doctest::Approx(1.0 / 0.6));
    CHECK(dq_var(m, 0.6) == doctest::Approx(1.0 / 0.6));  // every scenario exceeds
  }
}

TEST_CASE("dr satisfies the 0/0 and 1/0 conventions") {
  SampleMatrix zeros(5, 3);
  CHECK(dr(PhiSpec::sd(), zeros) == 0.0);

  auto g = test::rng(31);
  auto base = test::random_sample(g, 500);
  SampleMatrix dup(base.size(), 4);
  for (std::size_t i = 0; i < base.size(); ++i)
    for (std::size_t j = 0; j < 4; ++j) dup(i, j) = base[i];
  CHECK(dr(PhiSpec::variance(), dup) == doctest::Approx(4.0).epsilon(1e-12));

  // Denominator zero with positive numerator: marginal quantiles sit on the
  // zero plateau while the tied spikes push the sum quantile up.
  SampleMatrix m = SampleMatrix::from_rows({{0, 0}, {0, 0}, {5, 0}, {0, 5}});
  CHECK(std::isinf(dr(PhiSpec::var(0.3), m)));
}

TEST_CASE("dr(SD) of many uncorrelated equal-variance columns is 1/sqrt(n)") {
  auto m = sample_model(ModelSpec::standard_gaussian(10, 999), 200000);
  CHECK(dr(PhiSpec::sd(), m) == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(0.02));
}

TEST_CASE("db examples") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(db(PhiSpec::es(0.25), duplicate_pair(x)) == 0.0);
  CHECK(db(PhiSpec::es(0.25), hedged_pair(x)) == doctest::Approx(3.0));
  SampleMatrix zeros(5, 3);
  CHECK(db(PhiSpec::sd(), zeros) == 0.0);
}

TEST_CASE("dq_esssup_mix closed form") {
  const std::vector<double> x{1, 2, 3, 4};
  auto r1 = dq_esssup_mix(PhiSpec::es(0.5), duplicate_pair(x));
  CHECK(r1.value == doctest::Approx(1.0));
  CHECK_FALSE(r1.degenerate);

  SampleMatrix m = SampleMatrix::from_rows({{0, 1}, {1, 0}});
  auto r2 = dq_esssup_mix(PhiSpec::es(0.5), m);
  CHECK(r2.value == 0.0);

  // Tied maxima force the VaR of the sum onto the essential supremum while
  // the marginal quantiles stay at zero: positive numerator over zero.
  SampleMatrix deg = SampleMatrix::from_rows({{0, 0}, {0, 0}, {5, 0}, {0, 5}});
  auto r3 = dq_esssup_mix(PhiSpec::var(0.3), deg);
  CHECK(std::isinf(r3.value));
  CHECK(r3.degenerate);
}

TEST_CASE("location and scale invariance") {
  auto g = test::rng(41);
  std::uniform_int_distribution<int> ishift(-6, 6);
  std::uniform_int_distribution<int> ipow(-3, 3);
  std::uniform_real_distribution<double> rshift(-5.0, 5.0);
  std::uniform_real_distribution<double> rscale(0.1, 10.0);

  SUBCASE("bitwise on integer data with integer shifts and dyadic scalings") {
    for (int rep = 0; rep < 60; ++rep) {
      auto m = test::random_integer_matrix(g, 64, 3);
      const double alpha = 0.25;  // N*alpha = 16, exactly representable
      std::vector<double> shift(3);
      for (auto& s : shift) s = ishift(g);
      const double lambda = std::exp2(ipow(g));
      CHECK(dq_var(test::shifted_matrix(m, shift), alpha) == dq_var(m, alpha));
      CHECK(dq_var(test::scaled_matrix(m, lambda), alpha) == dq_var(m, alpha));
      CHECK(dq_es(test::shifted_matrix(m, shift), alpha) == dq_es(m, alpha));
      CHECK(dq_es(test::scaled_matrix(m, lambda), alpha) == dq_es(m, alpha));
    }
  }

  SUBCASE("within float noise on real data") {
    for (int rep = 0; rep < 60; ++rep) {
      auto m = test::random_matrix(g, 50 + rep, 3);
      const double alpha = 0.1 + 0.05 * (rep % 5);
      std::vector<double> shift(3);
      for (auto& s : shift) s = rshift(g);
      const double lambda = rscale(g);
      CHECK(dq_var(test::shifted_matrix(m, shift), alpha) ==
            doctest::Approx(dq_var(m, alpha)).epsilon(1e-9));
      CHECK(dq_es(test::scaled_matrix(m, lambda), alpha) ==
            doctest::Approx(dq_es(m, alpha)).epsilon(1e-9));
    }
  }
}

TEST_CASE("riskless invariance and replication consistency") {
  auto g = test::rng(51);
  for (int rep = 0; rep < 50; ++rep) {
    auto m = test::random_matrix(g, 60, 3);
    const double alpha = 0.15;
    const double c = (rep % 7) - 3.0;
    CHECK(dq_var(m.with_constant_column(c), alpha) == dq_var(m, alpha));
    CHECK(dq_es(m.with_constant_column(c), alpha) ==
          doctest::Approx(dq_es(m, alpha)).epsilon(1e-10));
    CHECK(dq_var(m.replicated(), alpha) == dq_var(m, alpha));
    CHECK(dq_es(m.replicated(), alpha) == doctest::Approx(dq_es(m, alpha)).epsilon(1e-10));
  }
}

TEST_CASE("DQ ranges hold on random matrices") {
  auto g = test::rng(61);
  std::uniform_real_distribution<double> alpha_dist(0.02, 0.95);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rep % 5;
    auto m = (rep % 3 == 0) ? test::random_t_matrix(g, 40 + rep, n, 3.0)
                            : test::random_matrix(g, 40 + rep, n);
    const double alpha = alpha_dist(g);
    const double v = dq_var(m, alpha);
    const double e = dq_es(m, alpha);
    const double var_bound = std::min(static_cast<double>(n), 1.0 / alpha);
    CHECK(v >= 0.0);
    CHECK(v <= var_bound * (1.0 + 1e-12));
    CHECK(e >= 0.0);
    CHECK(e <= 1.0 + 1e-12);
  }
}

TEST_CASE("comonotone rearrangement never decreases DQ^ES") {
  auto g = test::rng(71);
  for (int rep = 0; rep < 100; ++rep) {
    auto m = test::random_matrix(g, 40 + rep % 30, 2 + rep % 3);
    const double alpha = 0.1 + 0.04 * (rep % 10);
    CHECK(dq_es(test::comonotone_rearranged(m), alpha) >= dq_es(m, alpha) - 1e-9);
  }
}

TEST_CASE("diversification benefit exists iff DQ^ES < 1") {
  auto g = test::rng(81);
  std::uniform_real_distribution<double> alpha_dist(0.1, 0.5);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    auto m = test::random_matrix(g, 50 + rep % 40, 2 + rep % 3);
    const double alpha = alpha_dist(g);
    double pooled = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) pooled += empirical_es(m.column(j), alpha);
    const double sum_es = empirical_es(m.row_sums(), alpha);
    const double scale = std::abs(pooled) + std::abs(sum_es) + 1.0;
    if (std::abs(sum_es - pooled) < 1e-9 * scale) continue;  // razor-edge tie
    ++checked;
    const double v = dq_es(m, alpha);
    if (sum_es < pooled) {
      CHECK(v < 1.0);
    } else {
      CHECK(v >= 1.0 - 1e-9);
    }
  }
  CHECK(checked > 150);
}

TEST_CASE("weighted evaluation uses phi(w_i X_i)") {
  auto g = test::rng(91);
  auto m = test::random_matrix(g, 80, 3);
  Weights w({0.5, 0.3, 0.2});
  // For positively homogeneous VaR the weighted marginals coincide with the
  // scaled thresholds; the weighted index must respect that.
  double pooled = 0.0;
  for (std::size_t j = 0; j < 3; ++j)
    pooled += empirical_var(m.column_scaled(j, w[j]), 0.2);
  const auto sums = m.row_sums(w.values());
  std::size_t count = 0;
  for (double s : sums)
    if (s > pooled) ++count;
  CHECK(dq_var(m, 0.2, w) ==
        doctest::Approx(static_cast<double>(count) / (80.0 * 0.2)));
}
