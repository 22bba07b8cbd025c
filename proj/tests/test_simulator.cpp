#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "coalstat/error.hpp"
#include "coalstat/parallel.hpp"
#include "coalstat/recursions.hpp"
#include "coalstat/simulator.hpp"

using namespace coalstat;

namespace {

// Kolmogorov-Smirnov distance of a sample against Exp(rate).
double ks_exponential(std::vector<double> x, double rate) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("Kingman pair: total length is 2 Exp(1)") {
  const GenealogySimulator sim(CoalescentModel::lambda(LambdaFamily::kingman()), 2);
  const std::size_t reps = 20000;
  std::vector<double> times;
  MeanAccumulator total;
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = make_stream(3, r);
    const Genealogy g = sim.simulate_genealogy(rng);
    times.push_back(g.level_times[2]);
    total.add(g.lengths.total());
  }
  CHECK(std::abs(total.mean() - 2.0) < 4.0 * total.standard_error());
  CHECK(ks_exponential(times, 1.0) < 1.63 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("Star: one n-merger") {
  const int n = 7;
  const GenealogySimulator sim(CoalescentModel::lambda(LambdaFamily::star()), n);
  Rng rng(5);
  for (int r = 0; r < 50; ++r) {
    const Genealogy g = sim.simulate_genealogy(rng);
    CHECK(g.lengths.length(1) == doctest::Approx(n * g.level_times[n]));
    for (int i = 2; i < n; ++i) CHECK(g.lengths.length(i) == 0.0);
  }
}

TEST_CASE("family-size lengths match the recursions") {
  for (const auto& family : {LambdaFamily::beta(1.5), LambdaFamily::bolthausen_sznitman(),
                             LambdaFamily::point_mass(0.5), LambdaFamily::two_atom(0.5)}) {
    const auto model = CoalescentModel::lambda(family);
    const int n = 20;
    const auto tables = build_tables(model, n);
    const GenealogySimulator sim(model, n);
    std::vector<MeanAccumulator> acc(n - 1);
    for (std::size_t r = 0; r < 20000; ++r) {
      Rng rng = make_stream(9, r);
      const FamilySizeLengths l = sim.simulate(rng);
      for (int i = 1; i < n; ++i) acc[i - 1].add(l.length(i));
      double tree = 0.0;
      for (int i = 1; i < n; ++i) tree += l.length(i);
      CHECK(tree == doctest::Approx(l.total()));
    }
    for (int i = 1; i < n; ++i) {
      CAPTURE(model.to_string());
      CAPTURE(i);
      const double expected = tables.branch_lengths()[i - 1];
      CHECK(std::abs(acc[i - 1].mean() - expected) < 4.0 * acc[i - 1].standard_error() + 1e-12);
    }
  }
}

TEST_CASE("growth genealogies match the level-time estimate") {
  const auto model = CoalescentModel::kingman_growth(5.0);
  const int n = 10;
  GrowthOptions g;
  g.replicates = 40000;
  const double expected = expected_total_length(model, n, g);
  const GenealogySimulator sim(model, n);
  MeanAccumulator acc;
  for (std::size_t r = 0; r < 20000; ++r) {
    Rng rng = make_stream(17, r);
    const Genealogy gen = sim.simulate_genealogy(rng);
    double weighted = 0.0;
    for (int k = 2; k <= n; ++k) weighted += k * gen.level_times[k];
    CHECK(weighted == doctest::Approx(gen.lengths.total()));
    acc.add(gen.lengths.total());
  }
  CHECK(std::abs(acc.mean() - expected) < 5.0 * acc.standard_error());
}

TEST_CASE("mutation dropping") {
  FamilySizeLengths star(5);
  star.add(1, 3.0);
  Rng rng(1);
  CHECK(drop_mutations_fixed_s(star, 0, rng).segregating_sites() == 0);
  const SfsVector s = drop_mutations_fixed_s(star, 12, rng);
  CHECK(s.count(1) == 12);
  for (int i = 2; i < 5; ++i) CHECK(s.count(i) == 0);
  CHECK_THROWS_AS(drop_mutations_fixed_s(FamilySizeLengths(5), 3, rng), DegenerateDataError);
  CHECK(drop_mutations_fixed_s(FamilySizeLengths(5), 0, rng).segregating_sites() == 0);

  int zero = 0;
  for (int r = 0; r < 1000; ++r) zero += drop_mutations_poisson(star, 1e-9, rng).segregating_sites() == 0;
  CHECK(zero >= 999);
}

TEST_CASE("simulated SFS matches the recursions") {
  const int n = 10;
  BatchOptions options;
  options.replicates = 20000;
  options.seed = 4;
  const auto kingman = CoalescentModel::lambda(LambdaFamily::kingman());
  const SfsSummary s = simulate_sfs_batch(kingman, n, MutationMode::poisson(2.0), options);
  for (int i = 1; i < n; ++i) CHECK(std::abs(s.mean[i - 1] - 2.0 / i) < 4.0 * s.standard_error[i - 1]);
  CHECK(s.mean[0] / s.mean[1] == doctest::Approx(2.0).epsilon(0.1));

  const auto beta = CoalescentModel::lambda(LambdaFamily::beta(1.5));
  const auto tables = build_tables(beta, 20);
  const SfsSummary p = simulate_sfs_batch(beta, 20, MutationMode::poisson(4.0), options);
  for (int i = 1; i < 20; ++i) {
    CHECK(std::abs(p.mean[i - 1] - 2.0 * tables.branch_lengths()[i - 1]) < 4.0 * p.standard_error[i - 1]);
  }

  // Under fixed S the class frequencies average l_i / L over trees.
  const GenealogySimulator sim(beta, 20);
  std::vector<MeanAccumulator> share(19);
  for (std::size_t r = 0; r < 20000; ++r) {
    Rng rng = make_stream(31, r);
    const FamilySizeLengths l = sim.simulate(rng);
    for (int i = 1; i < 20; ++i) share[i - 1].add(l.length(i) / l.total());
  }
  const SfsSummary f = simulate_sfs_batch(beta, 20, MutationMode::fixed(50), options);
  CHECK(f.mean_segregating_sites == 50.0);
  for (int i = 1; i < 20; ++i) {
    const double se = std::hypot(f.standard_error[i - 1] / 50.0, share[i - 1].standard_error());
    CHECK(std::abs(f.mean[i - 1] / 50.0 - share[i - 1].mean()) < 4.0 * se + 1e-12);
  }
}

TEST_CASE("batches are reproducible across worker counts") {
  const auto model = CoalescentModel::lambda(LambdaFamily::beta(1.2));
  std::vector<std::vector<SfsVector>> runs;
  std::vector<SfsSummary> summaries;
  for (int workers : {1, 2, 5}) {
    BatchOptions options{3000, 99, workers};
    runs.emplace_back();
    summaries.push_back(simulate_sfs_batch(model, 15, MutationMode::poisson(3.0), options,
                                           [&](std::size_t rep, const SfsVector& sfs) {
                                             CHECK(rep == runs.back().size());
                                             runs.back().push_back(sfs);
                                           }));
  }
  CHECK(runs[0] == runs[1]);
  CHECK(runs[0] == runs[2]);
  CHECK(summaries[0].mean == summaries[2].mean);
  CHECK(summaries[0].standard_error == summaries[2].standard_error);

  const auto xi = CoalescentModel::xi_four_fold(LambdaFamily::beta(1.0));
  BatchOptions a{300, 7, 1}, b{300, 7, 3};
  CHECK(simulate_sfs_batch(xi, 12, MutationMode::fixed(20), a).mean ==
        simulate_sfs_batch(xi, 12, MutationMode::fixed(20), b).mean);
}
