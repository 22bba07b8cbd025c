#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "coalstat/model.hpp"
#include "coalstat/parallel.hpp"
#include "coalstat/sfs.hpp"

namespace coalstat {

class XiArgSimulator;

// One simulated genealogy: family-size-indexed lengths plus the sojourn
// time at each block count (index k = 2..n; zero for skipped levels).
struct Genealogy {
  FamilySizeLengths lengths;
  std::vector<double> level_times;
};

// Draws genealogies of n leaves under a fixed model. Only leaf counts of
// blocks are tracked; no topology and no labels are stored. Construction
// caches merger-size distributions, after which simulate() is const and
// safe to call concurrently with distinct generators.
class GenealogySimulator {
 public:
  GenealogySimulator(const CoalescentModel& model, int n);

  const CoalescentModel& model() const { return model_; }
  int sample_size() const { return n_; }

  FamilySizeLengths simulate(Rng& rng) const;
  Genealogy simulate_genealogy(Rng& rng) const;

 private:
  Genealogy run_lambda(Rng& rng) const;
  Genealogy run_growth(Rng& rng) const;

  CoalescentModel model_;
  int n_;
  // cumulative_[b][k - 2] = P(merger size <= k | b blocks), k = 2..b.
  std::vector<std::vector<double>> cumulative_;
  std::vector<double> total_rate_;
  std::shared_ptr<const XiArgSimulator> xi_;  // four-fold Xi models, one locus
};

FamilySizeLengths simulate_lengths(const CoalescentModel& model, int n, Rng& rng);

// xi_i ~ Poisson(theta * b_i / 2) independently.
SfsVector drop_mutations_poisson(const FamilySizeLengths& lengths, double theta, Rng& rng);

// s mutations placed uniformly on the tree: xi ~ Multinomial(s; b_i / B).
SfsVector drop_mutations_fixed_s(const FamilySizeLengths& lengths, std::int64_t s, Rng& rng);

struct MutationMode {
  enum class Kind { poisson_theta, fixed_s };
  Kind kind = Kind::poisson_theta;
  double theta = 0.0;
  std::int64_t s = 0;

  static MutationMode poisson(double theta) { return {Kind::poisson_theta, theta, 0}; }
  static MutationMode fixed(std::int64_t s) { return {Kind::fixed_s, 0.0, s}; }

  SfsVector apply(const FamilySizeLengths& lengths, Rng& rng) const;
};

struct BatchOptions {
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = default_workers()
};

struct SfsSummary {
  std::vector<double> mean;  // index i-1
  std::vector<double> standard_error;
  double mean_segregating_sites = 0.0;
  double segregating_sites_se = 0.0;
  std::size_t replicates = 0;
};

// Replicate r uses generator make_stream(seed, r): first the genealogy, then
// the mutations. Per-replicate results reach `sink` (if given) in replicate
// order; only summaries are kept in memory.
SfsSummary simulate_sfs_batch(
    const CoalescentModel& model, int n, const MutationMode& mode, const BatchOptions& options,
    const std::function<void(std::size_t, const SfsVector&)>& sink = {});

}  // namespace coalstat
