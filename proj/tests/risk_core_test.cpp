#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "divq/risk_family.hpp"
#include "divq/risk_measures.hpp"
#include "test_support.hpp"

using namespace divq;

namespace {

// Definitional infimum over the empirical cdf, independent of the order
// statistic shortcut.
double var_oracle(std::vector<double> values, double alpha) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (double x : values) {
    double frac = 0.0;
    for (double v : values)
      if (v <= x) frac += 1.0;
    if (frac / n >= 1.0 - alpha) return x;
  }
  return values.back();
}

// Rockafellar-Uryasev value: the objective is piecewise linear in t with
// kinks at the sample points, so scanning them is an exact minimization.
double es_ru_oracle(const std::vector<double>& values, double alpha) {
  const double n = static_cast<double>(values.size());
  double best = std::numeric_limits<double>::infinity();
  for (double t : values) {
    double mean_pos = 0.0;
    for (double v : values) mean_pos += std::max(v - t, 0.0);
    mean_pos /= n;
    best = std::min(best, t + mean_pos / alpha);
  }
  return best;
}

// Standard normal quantile by bisection on erfc, independent of the library
// implementation under test.
double normal_quantile_oracle(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("empirical VaR matches the definitional infimum") {
  CHECK(empirical_var(std::vector<double>{1, 2, 3, 4}, 0.25) == 3.0);
  CHECK(empirical_var(std::vector<double>{5, 5, 5}, 0.10) == 5.0);
  CHECK(empirical_var(std::vector<double>{1, 2, 3, 4}, 0.50) == 2.0);

  auto g = test::rng(101);
  std::uniform_real_distribution<double> alpha_dist(0.02, 0.98);
  for (int rep = 0; rep < 200; ++rep) {
    auto sample = test::random_sample(g, 1 + rep % 37);
    const double alpha = alpha_dist(g);
    CHECK(empirical_var(sample, alpha) == var_oracle(sample, alpha));
  }
}

TEST_CASE("empirical VaR rejects levels outside (0,1)") {
  std::vector<double> v{1, 2, 3};
  CHECK_THROWS_AS(empirical_var(v, 0.0), std::domain_error);
  CHECK_THROWS_AS(empirical_var(v, 1.0), std::domain_error);
  CHECK_THROWS_AS(empirical_es(v, -0.5), std::domain_error);
}

TEST_CASE("empirical ES equals the Rockafellar-Uryasev minimum") {
  CHECK(empirical_es(std::vector<double>{1, 2, 3, 4}, 0.25) == doctest::Approx(4.0));
  CHECK(empirical_es(std::vector<double>{1, 2, 3, 4}, 0.50) == doctest::Approx(3.5));
  CHECK(empirical_es(std::vector<double>{5, 5, 5}, 0.30) == doctest::Approx(5.0));

  auto g = test::rng(202);
  std::uniform_real_distribution<double> alpha_dist(0.02, 0.98);
  for (int rep = 0; rep < 1000; ++rep) {
    auto sample = test::random_sample(g, 1 + rep % 53, 3.0);
    const double alpha = alpha_dist(g);
    const double es = empirical_es(sample, alpha);
    const double ru = es_ru_oracle(sample, alpha);
    CHECK(es == doctest::Approx(ru).epsilon(1e-12));
  }
}

TEST_CASE("ES dominates VaR at every common level") {
  auto g = test::rng(303);
  std::uniform_real_distribution<double> alpha_dist(0.02, 0.98);
  for (int rep = 0; rep < 300; ++rep) {
    auto sample = test::random_sample(g, 2 + rep % 40);
    const double alpha = alpha_dist(g);
    CHECK(empirical_es(sample, alpha) >= empirical_var(sample, alpha) - 1e-14);
  }
}

TEST_CASE("empirical ES is subadditive on paired samples") {
  auto g = test::rng(404);
  std::uniform_real_distribution<double> alpha_dist(0.05, 0.95);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 3 + rep % 60;
    auto x = test::random_sample(g, n, 2.0);
    auto y = test::random_sample(g, n, 2.0);
    std::vector<double> sum(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] = x[i] + y[i];
      scale = std::max({scale, std::abs(x[i]), std::abs(y[i])});
    }
    const double alpha = alpha_dist(g);
    CHECK(empirical_es(sum, alpha) <=
          empirical_es(x, alpha) + empirical_es(y, alpha) + 1e-12 * scale);
  }
}

TEST_CASE("empirical VaR is constant-additive and positively homogeneous") {
  auto g = test::rng(505);
  std::uniform_real_distribution<double> shift(-7.0, 7.0);
  std::uniform_real_distribution<double> scale(0.01, 50.0);
  std::uniform_real_distribution<double> alpha_dist(0.05, 0.95);
  for (int rep = 0; rep < 200; ++rep) {
    auto sample = test::random_sample(g, 2 + rep % 30);
    const double alpha = alpha_dist(g);
    const double c = shift(g);
    const double lambda = scale(g);
    const double base = empirical_var(sample, alpha);
    auto shifted = sample;
    for (double& v : shifted) v += c;
    auto scaled = sample;
    for (double& v : scaled) v *= lambda;
    CHECK(empirical_var(shifted, alpha) == base + c);
    CHECK(empirical_var(scaled, alpha) == lambda * base);
  }
}

TEST_CASE("sd_and_var uses the population convention") {
  auto [sd1, var1] = sd_and_var(std::vector<double>{1, 3});
  CHECK(sd1 == doctest::Approx(1.0));
  CHECK(var1 == doctest::Approx(1.0));
  auto [sd2, var2] = sd_and_var(std::vector<double>{4.2, 4.2, 4.2});
  CHECK(sd2 == 0.0);
  CHECK(var2 == 0.0);
  auto [sd3, var3] = sd_and_var(std::vector<double>{0, 0, 6, 6});
  CHECK(sd3 == doctest::Approx(3.0));
  CHECK(var3 == doctest::Approx(9.0));

  auto g = test::rng(606);
  for (int rep = 0; rep < 100; ++rep) {
    auto sample = test::random_sample(g, 1 + rep % 25, 4.0);
    auto [sd, var] = sd_and_var(sample);
    CHECK(sd * sd == doctest::Approx(var).epsilon(1e-12));
  }
}

TEST_CASE("interpolated VaR stays between neighbouring order statistics") {
  std::vector<double> v{1, 2, 3, 4};
  const double smooth = empirical_var(v, 0.30, VarEstimator::Interpolated);
  CHECK(smooth >= 2.0);
  CHECK(smooth <= 4.0);
  CHECK(empirical_var(v, 0.25, VarEstimator::Interpolated) ==
        doctest::Approx(3.25));  // h = 3*(0.75) = 2.25 between 3 and 4
}

TEST_CASE("family_eval covers each family kind") {
  std::vector<double> sd2{0.0, 4.0};  // population SD 2
  CHECK(RiskFamily::scaled_phi(PhiSpec::sd()).eval(0.5, sd2) == doctest::Approx(4.0));

  CHECK(RiskFamily::gaussian_analytic(0.0, 1.0, GaussianBase::VaR).eval(0.05, sd2) ==
        doctest::Approx(normal_quantile_oracle(0.95)).epsilon(1e-3));

  std::vector<double> s{1, 2, 3, 4};
  CHECK(RiskFamily::esssup_mix(PhiSpec::es(0.5)).eval(1.0, s) == doctest::Approx(3.5));

  CHECK(RiskFamily::var_family().eval(0.25, s) == 3.0);
  CHECK(RiskFamily::es_family().eval(0.5, s) == doctest::Approx(3.5));

  CHECK_THROWS_AS(RiskFamily::var_family().eval(1.5, s), std::domain_error);
  CHECK_THROWS_AS(RiskFamily::esssup_mix(PhiSpec::es(0.5)).eval(1.0 + 1e-9, s),
                  std::domain_error);
  CHECK_NOTHROW(RiskFamily::scaled_phi(PhiSpec::sd()).eval(100.0, s));
}

TEST_CASE("every family is non-increasing in its level") {
  auto g = test::rng(707);
  const std::vector<RiskFamily> families = {
      RiskFamily::var_family(),
      RiskFamily::es_family(),
      RiskFamily::scaled_phi(PhiSpec::sd()),
      RiskFamily::scaled_phi_affine(PhiSpec::sd(), 1.0, 1.0),
      RiskFamily::esssup_mix(PhiSpec::es(0.3)),
      RiskFamily::gaussian_analytic(0.5, 2.0, GaussianBase::VaR),
      RiskFamily::gaussian_analytic(0.0, 1.0, GaussianBase::ES),
  };
  for (const auto& family : families) {
    for (int rep = 0; rep < 100; ++rep) {
      auto sample = test::random_sample(g, 5 + rep % 40, 2.0);
      const double hi = std::isinf(family.alpha_bar()) ? 20.0 : family.alpha_bar();
      double prev = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= 50; ++k) {
        const double beta = hi * static_cast<double>(k) / 51.0;
        const double value = family.eval(beta, sample);
        CHECK(value <= prev + 1e-9 * (1.0 + std::abs(prev)));
        prev = value;
      }
    }
  }
}

TEST_CASE("normal closed forms match independent inversion") {
  CHECK(std_normal_quantile(0.95) ==
        doctest::Approx(normal_quantile_oracle(0.95)).epsilon(1e-12));
  CHECK(normal_var(0.0, 1.0, 0.05) == doctest::Approx(1.6449).epsilon(1e-3));
  // ES of a standard normal at alpha: pdf(z)/alpha.
  const double z = normal_quantile_oracle(0.95);
  CHECK(normal_es(0.0, 1.0, 0.05) ==
        doctest::Approx(std_normal_pdf(z) / 0.05).epsilon(1e-10));
  // Far tail stays accurate.
  CHECK(std_normal_tail(std_normal_upper_quantile(1e-12)) ==
        doctest::Approx(1e-12).epsilon(1e-9));
}

TEST_CASE("Sample validates its invariants") {
  CHECK_THROWS_AS(Sample(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(Sample(std::vector<double>{1.0, std::nan("")}), std::invalid_argument);
  CHECK(Sample(std::vector<double>{1.0}).size() == 1);
}
