#include "coalstat/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <cmath>
#include <string>

#include "coalstat/error.hpp"
#include "coalstat/measures.hpp"
#include "coalstat/special.hpp"
#include "coalstat/xi_arg.hpp"
#include "coalstat/length_accumulator.hpp"

namespace coalstat {

GenealogySimulator::GenealogySimulator(const CoalescentModel& model, int n)
    : model_(model), n_(n) {
  if (n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(n));
  if (model.kind() == ModelKind::xi_four_fold) {
    ArgOptions options;
    options.n = n;
    options.loci = 1;
    options.unlinked = true;
    xi_ = std::make_shared<const XiArgSimulator>(model, options);
    return;
  }
  if (!model.is_lambda()) return;
  const LambdaFamily& family = model.family();
  if (family.kind() == LambdaKind::kingman || family.kind() == LambdaKind::star) return;
  cumulative_.resize(n + 1);
  total_rate_.assign(n + 1, 0.0);
  for (int b = 2; b <= n; ++b) {
    std::vector<double>& cdf = cumulative_[b];
    cdf.resize(b - 1);
    double running = 0.0;
    for (int k = 2; k <= b; ++k) {
      running += merger_size_rate(family, b, k);
      cdf[k - 2] = running;
    }
    total_rate_[b] = running;
    for (double& c : cdf) c /= running;
    cdf.back() = 1.0;
  }
}

FamilySizeLengths GenealogySimulator::simulate(Rng& rng) const {
  return simulate_genealogy(rng).lengths;
}

Genealogy GenealogySimulator::simulate_genealogy(Rng& rng) const {
  switch (model_.kind()) {
    case ModelKind::lambda:
      return run_lambda(rng);
    case ModelKind::kingman_growth:
      return run_growth(rng);
    case ModelKind::xi_four_fold: {
      Genealogy g;
      auto per_locus = xi_->simulate(rng, &g.level_times);
      g.lengths = std::move(per_locus.front());
      return g;
    }
  }
  throw UnsupportedModelError("unknown model kind");
}

Genealogy GenealogySimulator::run_lambda(Rng& rng) const {
  const LambdaFamily& family = model_.family();
  const LambdaKind kind = family.kind();
  Genealogy g{FamilySizeLengths(n_), std::vector<double>(n_ + 1, 0.0)};
  LengthAccumulator acc(n_);
  std::vector<int> sizes(n_, 1);
  acc.add(1, n_, 0.0);

  std::exponential_distribution<double> unit(1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double t = 0.0;
  int b = n_;
  while (b > 1) {
    int k;
    double rate;
    if (kind == LambdaKind::kingman) {
      k = 2;
      rate = pairs(b);
    } else if (kind == LambdaKind::star) {
      k = b;
      rate = 1.0;
    } else {
      const auto& cdf = cumulative_[b];
      k = 2 + static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), uniform(rng)) - cdf.begin());
      k = std::min(k, b);
      rate = total_rate_[b];
    }
    const double dt = unit(rng) / rate;
    t += dt;
    g.level_times[b] += dt;

    // Move k uniformly chosen blocks to the back, then merge them.
    int merged = 0;
    for (int j = 0; j < k; ++j) {
      std::uniform_int_distribution<int> pick(0, b - 1 - j);
      std::swap(sizes[pick(rng)], sizes[b - 1 - j]);
      merged += sizes[b - 1 - j];
      acc.remove(sizes[b - 1 - j], 1, t);
    }
    b -= k - 1;
    sizes.resize(b);
    sizes[b - 1] = merged;
    acc.add(merged, 1, t);
    assert(std::accumulate(sizes.begin(), sizes.end(), 0) == n_);
  }
  acc.finish(t, g.lengths);
  return g;
}

Genealogy GenealogySimulator::run_growth(Rng& rng) const {
  const double beta = model_.growth_rate();
  Genealogy g{FamilySizeLengths(n_), std::vector<double>(n_ + 1, 0.0)};
  LengthAccumulator acc(n_);
  std::vector<int> sizes(n_, 1);
  acc.add(1, n_, 0.0);

  std::exponential_distribution<double> unit(1.0);
  double t = 0.0;
  for (int b = n_; b > 1; --b) {
    const double e = unit(rng);
    const double rate = pairs(b);
    double next;
    if (beta == 0.0) {
      next = t + e / rate;
    } else {
      // Inverse of the integrated hazard rate * (exp(beta s) - exp(beta t)) / beta.
      next = t + std::log1p(std::exp(std::log(beta * e / rate) - beta * t)) / beta;
    }
    g.level_times[b] = next - t;
    t = next;

    std::uniform_int_distribution<int> first(0, b - 1);
    std::swap(sizes[first(rng)], sizes[b - 1]);
    std::uniform_int_distribution<int> second(0, b - 2);
    std::swap(sizes[second(rng)], sizes[b - 2]);
    const int merged = sizes[b - 1] + sizes[b - 2];
    acc.remove(sizes[b - 1], 1, t);
    acc.remove(sizes[b - 2], 1, t);
    sizes.pop_back();
    sizes.back() = merged;
    acc.add(merged, 1, t);
  }
  acc.finish(t, g.lengths);
  return g;
}

FamilySizeLengths simulate_lengths(const CoalescentModel& model, int n, Rng& rng) {
  return GenealogySimulator(model, n).simulate(rng);
}

SfsVector drop_mutations_poisson(const FamilySizeLengths& lengths, double theta, Rng& rng) {
  if (!(theta > 0.0)) throw DomainError("theta must be > 0");
  const int n = lengths.sample_size();
  SfsVector sfs(n);
  for (int i = 1; i < n; ++i) {
    const double mean = theta * lengths.length(i) / 2.0;
    if (mean <= 0.0) continue;
    std::poisson_distribution<std::int64_t> draw(mean);
    sfs.set(i, draw(rng));
  }
  return sfs;
}

SfsVector drop_mutations_fixed_s(const FamilySizeLengths& lengths, std::int64_t s, Rng& rng) {
  if (s < 0) throw ArgumentError("number of segregating sites must be >= 0");
  const int n = lengths.sample_size();
  SfsVector sfs(n);
  if (s == 0) return sfs;
  const double total = lengths.total();
  if (!(total > 0.0)) {
    throw DegenerateDataError("cannot place mutations on a tree of total length 0");
  }
  std::vector<std::int64_t> counts(n - 1, 0);
  if (s <= 4 * static_cast<std::int64_t>(n)) {
    // Throw each mutation at a uniform position along the concatenated branches.
    std::vector<double> cdf(n - 1);
    double running = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      running += lengths.values()[i];
      cdf[i] = running;
    }
    std::uniform_real_distribution<double> uniform(0.0, running);
    for (std::int64_t m = 0; m < s; ++m) {
      auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform(rng));
      ++counts[std::min<std::size_t>(it - cdf.begin(), n - 2)];
    }
  } else {
    // Sequential conditional binomials against exact suffix masses.
    std::vector<double> suffix(n, 0.0);
    for (int i = n - 2; i >= 0; --i) suffix[i] = suffix[i + 1] + lengths.values()[i];
    std::int64_t remaining = s;
    for (int i = 0; i < n - 1 && remaining > 0; ++i) {
      const double mass = lengths.values()[i];
      if (mass <= 0.0) continue;
      std::int64_t draw = remaining;
      if (mass < suffix[i]) {
        std::binomial_distribution<std::int64_t> binom(remaining, mass / suffix[i]);
        draw = binom(rng);
      }
      counts[i] = draw;
      remaining -= draw;
    }
  }
  return SfsVector(std::move(counts));
}

SfsVector MutationMode::apply(const FamilySizeLengths& lengths, Rng& rng) const {
  return kind == Kind::fixed_s ? drop_mutations_fixed_s(lengths, s, rng)
                               : drop_mutations_poisson(lengths, theta, rng);
}

SfsSummary simulate_sfs_batch(const CoalescentModel& model, int n, const MutationMode& mode,
                              const BatchOptions& options,
                              const std::function<void(std::size_t, const SfsVector&)>& sink) {
  if (options.replicates < 1) throw ArgumentError("need at least one replicate");
  if (mode.kind == MutationMode::Kind::poisson_theta && !(mode.theta > 0.0)) {
    throw DomainError("theta must be > 0");
  }
  if (mode.kind == MutationMode::Kind::fixed_s && mode.s < 0) {
    throw ArgumentError("number of segregating sites must be >= 0");
  }
  const int workers = options.workers > 0 ? options.workers : default_workers();
  const GenealogySimulator simulator(model, n);

  std::vector<MeanAccumulator> classes(n - 1);
  MeanAccumulator segregating;
  ordered_replicates<SfsVector>(
      options.replicates, workers,
      [&](std::size_t rep, SfsVector& out) {
        Rng rng = make_stream(options.seed, rep);
        out = mode.apply(simulator.simulate(rng), rng);
      },
      [&](std::size_t rep, const SfsVector& sfs) {
        for (int i = 1; i < n; ++i) classes[i - 1].add(static_cast<double>(sfs.count(i)));
        segregating.add(static_cast<double>(sfs.segregating_sites()));
        if (sink) sink(rep, sfs);
      });

  SfsSummary summary;
  summary.replicates = options.replicates;
  summary.mean.resize(n - 1);
  summary.standard_error.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    summary.mean[i] = classes[i].mean();
    summary.standard_error[i] = classes[i].standard_error();
  }
  summary.mean_segregating_sites = segregating.mean();
  summary.segregating_sites_se = segregating.standard_error();
  return summary;
}

}  // namespace coalstat
