#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "coalstat/error.hpp"
#include "coalstat/multilocus.hpp"
#include "coalstat/recursions.hpp"

using namespace coalstat;

namespace {

SfsVector sfs(std::vector<std::int64_t> counts) { return SfsVector(std::move(counts)); }

MultiLocusOptions small_options() {
  MultiLocusOptions o;
  o.n = 12;
  o.loci = 4;
  o.k = 4;
  o.replicates = 200;
  o.seed = 3;
  o.targets = {5, 10};
  o.pilot_replicates = 500;
  return o;
}

}  // namespace

TEST_CASE("summaries") {
  const auto one = summarize({sfs({5, 0, 0, 0, 0})}, 3);
  CHECK(one.zeta1 == 1.0);
  CHECK(one.zetabar == 0.0);
  CHECK(one.loci_used == 1);
  const auto high = summarize({sfs({0, 0, 4, 2, 1})}, 3);
  CHECK(high.zeta1 == 0.0);
  CHECK(high.zetabar == 1.0);
  const auto both = summarize({sfs({3, 0, 0, 0, 0}), sfs({0, 0, 2, 0, 6})}, 3);
  CHECK(both.zeta1 == doctest::Approx(0.5));
  CHECK(both.zetabar == doctest::Approx(0.5));
  const auto skip = summarize({sfs({3, 0, 0, 0, 0}), sfs({0, 0, 0, 0, 0})}, 3);
  CHECK(skip.zeta1 == 1.0);
  CHECK(skip.loci_used == 1);
  const auto mixed = summarize({sfs({2, 1, 1, 0, 0})}, 3);
  CHECK(mixed.zeta1 == doctest::Approx(0.5));
  CHECK(mixed.zetabar == doctest::Approx(0.25));
  CHECK_THROWS_AS(summarize({sfs({0, 0, 0}), sfs({0, 0, 0})}, 2), DegenerateDataError);
  CHECK_THROWS_AS(summarize({}, 2), ArgumentError);
  CHECK_THROWS_AS(summarize({sfs({1, 0, 0})}, 4), ArgumentError);
}

TEST_CASE("KDE") {
  const KdeModel point = kde_fit({{0.2, 0.3}}, Sym2{1e-6, 0.0, 1e-6});
  CHECK(point.density({0.2, 0.3}) > 1e3 * point.density({0.25, 0.3}));
  CHECK(point.density({0.2, 0.3}) == doctest::Approx(1.0 / (2 * std::numbers::pi * 1e-6)));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Point2> points(20000);
  for (auto& p : points) {
    const double a = z(rng), b = z(rng);
    p = {1.0 + a, -2.0 + 0.5 * a + 0.5 * b};
  }
  const KdeModel fit = kde_fit(points);
  CHECK_FALSE(fit.fallback());
  const double h = std::pow(20000.0, -1.0 / 3.0);
  CHECK(fit.bandwidth()[0] == doctest::Approx(h * 1.0).epsilon(0.05));
  CHECK(fit.bandwidth()[1] == doctest::Approx(h * 0.5).epsilon(0.1));
  // Generating density at its mode: 1 / (2 pi sqrt(det Sigma)), det = 0.25.
  CHECK(fit.density({1.0, -2.0}) == doctest::Approx(1.0 / (2 * std::numbers::pi * 0.5)).epsilon(0.05));
  CHECK(kde_eval(fit, {1.0, -2.0}) == fit.density({1.0, -2.0}));
  CHECK(fit.log_density({40.0, 40.0}) < -100.0);
  CHECK(std::isfinite(fit.log_density({40.0, 40.0})));

  const KdeModel degenerate = kde_fit({{0.5, 0.1}, {0.5, 0.1}, {0.5, 0.1}});
  CHECK(degenerate.fallback());
  CHECK(std::isfinite(degenerate.log_density({0.5, 0.1})));
  CHECK_THROWS_AS(kde_fit({}), ArgumentError);
  CHECK_THROWS_AS(kde_fit({{0, 0}}, Sym2{1.0, 2.0, 1.0}), DomainError);
}

TEST_CASE("theta protocol") {
  MultiLocusOptions o = small_options();
  const auto growth = CoalescentModel::kingman_growth(10.0);
  GrowthOptions g;
  const double length = expected_total_length(growth, o.n, g);
  const auto thetas = multilocus_thetas(growth, o);
  REQUIRE(thetas.size() == 2);
  CHECK(thetas[0] == doctest::Approx(2.0 * 5.0 / length).epsilon(1e-9));
  CHECK(thetas[1] == doctest::Approx(2.0 * 10.0 / length).epsilon(1e-9));
  const auto xi = multilocus_thetas(CoalescentModel::xi_four_fold(LambdaFamily::kingman()), o);
  const double kingman = expected_total_length(CoalescentModel::lambda(LambdaFamily::kingman()), o.n);
  CHECK(xi[0] == doctest::Approx(10.0 / kingman).epsilon(0.1));
}

TEST_CASE("summaries are reproducible across worker counts") {
  MultiLocusOptions o = small_options();
  const auto model = CoalescentModel::xi_four_fold(LambdaFamily::beta(1.2));
  const auto thetas = multilocus_thetas(model, o);
  o.workers = 1;
  const auto a = simulate_summaries(model, o, thetas, 300, 9);
  o.workers = 4;
  const auto b = simulate_summaries(model, o, thetas, 300, 9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].zeta1 == b[i].zeta1);
    CHECK(a[i].zetabar == b[i].zetabar);
  }
}

TEST_CASE("multilocus LR") {
  MultiLocusOptions o = small_options();
  const HypothesisGrid null = parse_grid("growth:0+growth:50", "null");
  const HypothesisGrid alt = parse_grid("xibeta:1+xibeta:1.5", "alt");
  const auto null_fits = fit_grid(null, o);
  const auto alt_fits = fit_grid(alt, o);
  REQUIRE(null_fits.size() == 2);

  const MultiLocusSummary observed{0.4, 0.3, o.k, o.loci};
  const MultiLocusLr same = multilocus_lr(null_fits, null_fits, observed);
  CHECK(same.statistic == 0.0);

  const MultiLocusLr lr = multilocus_lr(null_fits, alt_fits, observed);
  CHECK(lr.statistic == doctest::Approx(lr.null_log_density[lr.argmax_null] -
                                        lr.alt_log_density[lr.argmax_alt]));
  const MultiLocusLr far = multilocus_lr(null_fits, alt_fits, MultiLocusSummary{5.0, 5.0, o.k, o.loci});
  CHECK(far.low_density);

  const auto cal = multilocus_calibrate(null_fits, alt_fits, o, 0.05, 100, 12);
  CHECK(std::isfinite(cal.critical_value));
  for (double s : cal.model_size) CHECK(s <= 0.05 + 1e-12);
  const auto p = multilocus_power(cal, null_fits, alt_fits, alt.models[0], o, 100, 13);
  CHECK(p.power >= 0.0);
  CHECK(p.power <= 1.0);
}

TEST_CASE("locus correlation") {
  MultiLocusOptions o = small_options();
  o.loci = 3;
  const auto xi = locus_length_correlation(CoalescentModel::xi_four_fold(LambdaFamily::beta(1.0)), o,
                                           600, 200, 0.95, 4);
  CHECK(xi.lower <= xi.value);
  CHECK(xi.value <= xi.upper);
  CHECK(xi.lower > 0.0);
  const auto growth = locus_length_correlation(CoalescentModel::kingman_growth(10.0), o, 600, 200, 0.95, 4);
  CHECK(growth.lower < 0.0);
  CHECK(growth.upper > 0.0);
}
