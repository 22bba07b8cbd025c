#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "coalstat/error.hpp"
#include "coalstat/inference.hpp"
#include "coalstat/recursions.hpp"

using namespace coalstat;

namespace {

const CoalescentModel kKingman = CoalescentModel::lambda(LambdaFamily::kingman());
const CoalescentModel kStar = CoalescentModel::lambda(LambdaFamily::star());

double log_factorial(std::int64_t k) { return std::lgamma(k + 1.0); }

}  // namespace

TEST_CASE("Watterson estimator and time scales") {
  CHECK(watterson(kKingman, 2, 5) == doctest::Approx(5.0));
  CHECK(watterson(kStar, 10, 5) == doctest::Approx(1.0));
  CHECK(watterson(CoalescentModel::lambda(LambdaFamily::beta(1.5)), 30, 0) == 0.0);
  CHECK(watterson(kStar, 30, 0) == 0.0);
  CHECK(real_time_unit(2.0, 1.0) == doctest::Approx(1.0));
  CHECK(pair_coalescence_probability(1e-6, 0.002) == doctest::Approx(1e-3));
  CHECK_THROWS_AS(real_time_unit(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(pair_coalescence_probability(-1.0, 1.0), DomainError);

  GrowthOptions g;
  g.replicates = 4000;
  const double xi = watterson(CoalescentModel::xi_four_fold(LambdaFamily::kingman()), 6, 10, g);
  CHECK(xi == doctest::Approx(watterson(kKingman, 6, 10)).epsilon(0.05));
}

TEST_CASE("fixed-s likelihood") {
  CHECK(fixed_s_loglik(kStar, 6, SfsVector(std::vector<std::int64_t>{7, 0, 0, 0, 0}), 7) == 0.0);
  CHECK(fixed_s_loglik(kStar, 6, SfsVector(std::vector<std::int64_t>{6, 1, 0, 0, 0}), 7) ==
        -std::numeric_limits<double>::infinity());
  const auto tables = build_tables(kKingman, 3);
  const double expected = std::log(tables.branch_lengths()[0] / tables.expected_total_length());
  CHECK(fixed_s_loglik(kKingman, 3, SfsVector(std::vector<std::int64_t>{1, 0}), 1) ==
        doctest::Approx(expected));
  CHECK(expected == doctest::Approx(std::log(2.0 / 3.0)));
  CHECK_THROWS_AS(fixed_s_loglik(kKingman, 3, SfsVector(std::vector<std::int64_t>{1, 1}), 1),
                  ArgumentError);

  // Multinomial oracle.
  const std::vector<double> w = {0.5, 0.3, 0.2};
  const std::vector<std::int64_t> k = {3, 1, 2};
  const double oracle = log_factorial(6) - log_factorial(3) - log_factorial(1) - log_factorial(2) +
                        3 * std::log(0.5) + std::log(0.3) + 2 * std::log(0.2);
  CHECK(fixed_s_loglik(w, k, 6) == doctest::Approx(oracle));
}

TEST_CASE("Poisson likelihood") {
  CHECK(poisson_approx_loglik(kKingman, 5, SfsVector(5), 0) == 0.0);
  const std::vector<double> w = {0.5, 0.3, 0.2};
  const std::vector<std::int64_t> k = {3, 1, 2};
  double oracle = 0.0;
  for (int i = 0; i < 3; ++i) oracle += -6 * w[i] + k[i] * std::log(6 * w[i]) - log_factorial(k[i]);
  CHECK(poisson_approx_loglik(w, k, 6) == doctest::Approx(oracle));

  // Mode: moving one unit of mass away from s * phi lowers the likelihood.
  const auto p5 = phi(kKingman, 5);
  const std::int64_t s = 250;
  std::vector<std::int64_t> mode(4);
  std::int64_t total = 0;
  for (int i = 0; i < 4; ++i) total += mode[i] = std::llround(s * p5[i]);
  REQUIRE(total == s);
  const double best = poisson_approx_loglik(p5, mode, s);
  for (int from = 0; from < 4; ++from) {
    for (int to = 0; to < 4; ++to) {
      if (from == to) continue;
      auto moved = mode;
      --moved[from];
      ++moved[to];
      CHECK(poisson_approx_loglik(p5, moved, s) < best);
    }
  }
}

TEST_CASE("Poissonisation identity") {
  const int n = 12;
  const SfsVector sfs(std::vector<std::int64_t>{9, 4, 2, 2, 1, 0, 1, 0, 0, 1, 0});
  const std::int64_t s = sfs.segregating_sites();
  const HypothesisGrid grid = parse_grid("beta:1:2:0.1+bs+pointmass:0.2:0.8:0.3+twoatom:0.5");
  double difference = 0.0;
  for (std::size_t i = 0; i < grid.models.size(); ++i) {
    const double d = poisson_approx_loglik(grid.models[i], n, sfs, s) - fixed_s_loglik(grid.models[i], n, sfs, s);
    if (i == 0) difference = d;
    CHECK(d == doctest::Approx(difference).epsilon(1e-10));
  }
  CHECK(difference == doctest::Approx(-s + s * std::log(static_cast<double>(s)) - log_factorial(s)));
}

TEST_CASE("grid specs") {
  const HypothesisGrid growth = growth_grid_default();
  CHECK(growth.models.size() == 11 + 99);
  CHECK(growth.models.front() == CoalescentModel::kingman_growth(0.0));
  CHECK(growth.models.back() == CoalescentModel::kingman_growth(1000.0));
  const HypothesisGrid beta = beta_grid_default();
  CHECK(beta.models.size() == 41);
  CHECK(beta.models.back() == kKingman);
  CHECK(beta.models.front() == CoalescentModel::lambda(LambdaFamily::beta(1.0)));
  CHECK(parse_grid("kingman+beta:1.5").models.size() == 2);
  CHECK_THROWS_AS(parse_grid("beta:1:2:0.5+beta:1.5"), ParseError);
  CHECK_THROWS_AS(parse_grid("beta:1:2"), ParseError);
  CHECK_THROWS_AS(parse_grid("beta:1:2:0"), ParseError);
  CHECK_THROWS_AS(parse_grid(""), ParseError);
  CHECK_THROWS_AS(parse_grid("beta:1:3:0.5"), DomainError);
  CHECK(parse_likelihood_kind("poisson") == LikelihoodKind::poisson);
  CHECK(parse_likelihood_kind("fixed-s") == LikelihoodKind::fixed_s);
  CHECK_THROWS_AS(parse_likelihood_kind("exact"), ParseError);
}

TEST_CASE("lower quantile") {
  CHECK(lower_quantile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.2) == 2.0);
  CHECK(lower_quantile({10, 9, 8, 7, 6, 5, 4, 3, 2, 1}, 0.25) == 2.0);
  CHECK(lower_quantile({1, 1, 1, 2, 3}, 0.4) == -std::numeric_limits<double>::infinity());
  CHECK(lower_quantile({1, 2, 3}, 0.1) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(lower_quantile({}, 0.1), ArgumentError);
}

TEST_CASE("LR statistic") {
  const int n = 15;
  GrowthOptions g;
  g.replicates = 3000;
  const HypothesisGrid growth = parse_grid("growth:0:20:5", "null");
  const HypothesisGrid beta = parse_grid("beta:1:2:0.25", "alt");
  const GridTables null(growth, n, g), alt(beta, n, g);

  const SfsVector sfs(std::vector<std::int64_t>{10, 3, 2, 1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0});
  const ObservedSfs obs = ObservedSfs::unfolded(sfs);
  const LrResult same = lr_statistic(null, null, obs, obs.total(), LikelihoodKind::fixed_s);
  CHECK(same.rho == 0.0);
  CHECK(same.argmax_null == same.argmax_alt);

  const LrResult a = lr_statistic(null, alt, obs, obs.total(), LikelihoodKind::fixed_s);
  const LrResult b = lr_statistic(growth, beta, sfs, obs.total(), LikelihoodKind::fixed_s, g);
  CHECK(a.rho == doctest::Approx(b.rho));
  CHECK(a.rho == doctest::Approx(a.null_loglik - a.alt_loglik));

  // More singletons push the Beta argmax toward alpha = 1.
  std::size_t previous = beta.models.size();
  for (std::int64_t singletons : {2, 10, 40, 200}) {
    std::vector<std::int64_t> counts(n - 1, 1);
    counts[0] = singletons;
    const ObservedSfs o = ObservedSfs::unfolded(SfsVector(counts));
    const LrResult r = lr_statistic(null, alt, o, o.total(), LikelihoodKind::fixed_s);
    CHECK(r.argmax_alt <= previous);
    previous = r.argmax_alt;
  }
  CHECK(previous == 0);

  const GridTables star(parse_grid("star"), n);
  std::vector<std::int64_t> counts(n - 1, 0);
  counts[1] = 3;
  const ObservedSfs impossible = ObservedSfs::unfolded(SfsVector(counts));
  CHECK_THROWS_AS(lr_statistic(star, star, impossible, 3, LikelihoodKind::fixed_s), DegenerateDataError);
}

TEST_CASE("calibration and power") {
  const int n = 20;
  GrowthOptions g;
  g.replicates = 3000;
  const GridTables null(parse_grid("growth:0:10:2", "null"), n, g);
  const GridTables alt(parse_grid("beta:1:2:0.25", "alt"), n, g);

  for (LikelihoodKind kind : {LikelihoodKind::fixed_s, LikelihoodKind::poisson}) {
    CalibrationOptions o;
    o.replicates = 400;
    o.seed = 5;
    o.kind = kind;
    o.workers = 1;
    const TestCalibration one = calibrate(null, alt, 30, 0.05, o);
    o.workers = 3;
    const TestCalibration three = calibrate(null, alt, 30, 0.05, o);
    CHECK(one.critical_value == three.critical_value);
    CHECK(one.model_quantiles == three.model_quantiles);
    CHECK(std::isfinite(one.critical_value));
    for (double size : one.model_size) CHECK(size <= 0.05 + 1e-12);

    o.workers = 0;
    const TestCalibration loose = calibrate(null, alt, 30, 0.2, o);
    const TestCalibration strict = calibrate(null, alt, 30, 0.01, o);
    CHECK(strict.critical_value <= one.critical_value);
    CHECK(one.critical_value <= loose.critical_value);

    o.seed = 77;
    const PowerEstimate size = power(one, null, alt, CoalescentModel::kingman_growth(4.0), o);
    CHECK(size.power <= 0.05 + 2.0 * std::sqrt(0.05 * 0.95 / size.replicates));
    const PowerEstimate strong = power(one, null, alt, CoalescentModel::lambda(LambdaFamily::beta(1.0)), o);
    CHECK(strong.power > size.power);
    o.workers = 1;
    const PowerEstimate again = power(one, null, alt, CoalescentModel::lambda(LambdaFamily::beta(1.0)), o);
    CHECK(again.power == strong.power);
  }

  CalibrationOptions folded;
  folded.replicates = 200;
  folded.folded = true;
  folded.poisson_simulation = true;
  const TestCalibration f = calibrate(null, alt, 30, 0.05, folded);
  CHECK(f.folded);
  CalibrationOptions few;
  few.replicates = 50;
  CHECK_THROWS_AS(calibrate(null, alt, 30, 0.05, few), ArgumentError);
}
