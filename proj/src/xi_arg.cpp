#include "coalstat/xi_arg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "coalstat/error.hpp"
#include "coalstat/length_accumulator.hpp"
#include "coalstat/simulator.hpp"
#include "coalstat/special.hpp"

namespace coalstat {

LeafSet LeafSet::singleton(int n, int leaf) {
  LeafSet set(n);
  set.insert(leaf);
  return set;
}

int LeafSet::count() const {
  int total = 0;
  for (std::uint64_t w : words_) total += std::popcount(w);
  return total;
}

bool LeafSet::empty() const {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

void LeafSet::clear() { std::fill(words_.begin(), words_.end(), 0); }

bool LeafSet::intersects(const LeafSet& other) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & other.words_[i]) return true;
  }
  return false;
}

LeafSet& LeafSet::operator|=(const LeafSet& other) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

std::vector<int> LeafSet::elements() const {
  std::vector<int> out;
  for (int leaf = 0; leaf < n_; ++leaf) {
    if (contains(leaf)) out.push_back(leaf);
  }
  return out;
}

AncestralConfig::AncestralConfig(int n, int loci) : n_(n), loci_(loci), retired_(loci, false) {
  if (n < 1) throw ArgumentError("sample size must be >= 1, got " + std::to_string(n));
  if (loci < 1) throw ArgumentError("locus count must be >= 1, got " + std::to_string(loci));
  chromosomes_.reserve(n);
  for (int i = 0; i < n; ++i) chromosomes_.emplace_back(loci, LeafSet::singleton(n, i));
}

AncestralConfig::AncestralConfig(int n, int loci, std::vector<Chromosome> chromosomes)
    : n_(n), loci_(loci), chromosomes_(std::move(chromosomes)), retired_(loci, false) {
  if (n < 1) throw ArgumentError("sample size must be >= 1, got " + std::to_string(n));
  if (loci < 1) throw ArgumentError("locus count must be >= 1, got " + std::to_string(loci));
  for (const Chromosome& c : chromosomes_) {
    if (static_cast<int>(c.size()) != loci) {
      throw ArgumentError("chromosome has " + std::to_string(c.size()) + " loci, expected " +
                          std::to_string(loci));
    }
    for (const LeafSet& set : c) {
      if (set.universe() != n) throw ArgumentError("leaf set over the wrong sample size");
    }
  }
  check_invariants();
}

int AncestralConfig::blocks_at(int locus) const {
  int count = 0;
  for (const Chromosome& c : chromosomes_) count += c[locus].empty() ? 0 : 1;
  return count;
}

bool AncestralConfig::locus_complete(int locus) const {
  if (retired_[locus]) return true;
  int blocks = 0;
  int leaves = 0;
  for (const Chromosome& c : chromosomes_) {
    if (c[locus].empty()) continue;
    ++blocks;
    leaves = c[locus].count();
  }
  return blocks == 1 && leaves == n_;
}

bool AncestralConfig::complete() const {
  for (int l = 0; l < loci_; ++l) {
    if (!locus_complete(l)) return false;
  }
  return true;
}

void AncestralConfig::check_invariants() const {
  for (std::size_t i = 0; i < chromosomes_.size(); ++i) {
    const Chromosome& c = chromosomes_[i];
    if (std::all_of(c.begin(), c.end(), [](const LeafSet& s) { return s.empty(); })) {
      throw InvariantViolation("chromosome " + std::to_string(i) + " carries no material");
    }
  }
  for (int l = 0; l < loci_; ++l) {
    if (retired_[l]) continue;
    LeafSet seen(n_);
    for (const Chromosome& c : chromosomes_) {
      if (seen.intersects(c[l])) {
        throw InvariantViolation("overlapping ancestral sets at locus " + std::to_string(l));
      }
      seen |= c[l];
    }
    if (seen.count() != n_) {
      throw InvariantViolation("locus " + std::to_string(l) + " does not cover the sample");
    }
  }
}

void AncestralConfig::merge_into(int target, int source) {
  Chromosome& into = chromosomes_[target];
  const Chromosome& from = chromosomes_[source];
  for (int l = 0; l < loci_; ++l) {
    if (into[l].intersects(from[l])) {
      throw InvariantViolation("overlapping ancestral sets at locus " + std::to_string(l));
    }
    into[l] |= from[l];
  }
}

void AncestralConfig::remove_empty() {
  std::erase_if(chromosomes_, [](const Chromosome& c) {
    return std::all_of(c.begin(), c.end(), [](const LeafSet& s) { return s.empty(); });
  });
}

void AncestralConfig::pairmerge(int i1, int i2) {
  if (i1 == i2 || i1 < 0 || i2 < 0 || i1 >= size() || i2 >= size()) {
    throw ArgumentError("pairmerge needs two distinct chromosome indices below " +
                        std::to_string(size()));
  }
  const int target = std::min(i1, i2);
  const int source = std::max(i1, i2);
  merge_into(target, source);
  chromosomes_.erase(chromosomes_.begin() + source);
}

void AncestralConfig::groupmerge(const std::array<std::vector<int>, 4>& groups) {
  int pairs_or_more = 0;
  bool triple = false;
  std::vector<bool> used(chromosomes_.size(), false);
  for (const auto& group : groups) {
    for (int i : group) {
      if (i < 0 || i >= size()) throw ArgumentError("groupmerge index out of range");
      if (used[i]) throw ArgumentError("groupmerge groups are not disjoint");
      used[i] = true;
    }
    if (group.size() >= 2) ++pairs_or_more;
    if (group.size() >= 3) triple = true;
  }
  if (!triple && pairs_or_more < 2) {
    throw ArgumentError("groupmerge needs a group of size >= 3 or two groups of size >= 2");
  }
  std::vector<int> removed;
  for (const auto& group : groups) {
    if (group.size() < 2) continue;
    const int target = *std::min_element(group.begin(), group.end());
    for (int i : group) {
      if (i == target) continue;
      merge_into(target, i);
      removed.push_back(i);
    }
  }
  std::sort(removed.rbegin(), removed.rend());
  for (int i : removed) chromosomes_.erase(chromosomes_.begin() + i);
  remove_empty();
}

bool AncestralConfig::recomb(int i, int split) {
  if (i < 0 || i >= size()) throw ArgumentError("recomb chromosome index out of range");
  if (split < 1 || split > loci_ - 1) {
    throw ArgumentError("recomb split must lie in [1, " + std::to_string(loci_ - 1) + "], got " +
                        std::to_string(split));
  }
  Chromosome right = chromosomes_[i];
  Chromosome& left = chromosomes_[i];
  bool left_empty = true;
  bool right_empty = true;
  for (int l = 0; l < loci_; ++l) {
    if (l < split) {
      right[l].clear();
      left_empty = left_empty && left[l].empty();
    } else {
      right_empty = right_empty && right[l].empty();
    }
  }
  if (left_empty || right_empty) return false;
  for (int l = split; l < loci_; ++l) left[l].clear();
  chromosomes_.push_back(std::move(right));
  return true;
}

void AncestralConfig::retire_locus(int locus) {
  retired_[locus] = true;
  for (Chromosome& c : chromosomes_) c[locus].clear();
  remove_empty();
}

AncestralConfig pairmerge(AncestralConfig config, int i1, int i2) {
  config.pairmerge(i1, i2);
  return config;
}

AncestralConfig groupmerge(AncestralConfig config, const std::array<std::vector<int>, 4>& groups) {
  config.groupmerge(groups);
  return config;
}

AncestralConfig recomb(AncestralConfig config, int i, int split) {
  config.recomb(i, split);
  return config;
}

namespace {

// P(some colour repeats | j coloured blocks), j = 0..4; 1 for j >= 5.
constexpr double kCollision[5] = {0.0, 0.0, 0.25, 0.625, 29.0 / 32.0};

// Below this x the merger is a single pair up to a relative error of order b*x.
constexpr double kTinyX = 1e-100;

// Binomial(b, x) probabilities for j = 0..4 (x < 1).
std::array<double, 5> low_binomial(int b, double x) {
  std::array<double, 5> p{};
  p[0] = std::exp(b * std::log1p(-x));
  const double odds = x / (1.0 - x);
  for (int j = 0; j < 4 && j < b; ++j) p[j + 1] = p[j] * (b - j) / (j + 1) * odds;
  return p;
}

// P(Binomial(b, x) >= 5) by summing the upper tail; accurate when b*x < 1.
double upper_tail(int b, double x, double p5) {
  double term = p5;
  double sum = 0.0;
  const double odds = x / (1.0 - x);
  for (int j = 5; j <= b && term > 0.0; ++j) {
    sum += term;
    if (term < 1e-18 * sum) break;
    term *= static_cast<double>(b - j) / (j + 1) * odds;
  }
  return sum;
}

double binomial_point(int b, int j, double x) {
  return std::exp(log_choose(b, j) + j * std::log(x) + (b - j) * std::log1p(-x));
}

}  // namespace

double collision_probability(int b, double x) {
  if (b < 2 || x <= 0.0) return 0.0;
  if (x >= 1.0) return b <= 4 ? kCollision[b] : 1.0;
  const std::array<double, 5> p = low_binomial(b, x);
  if (b <= 4) {
    double q = 0.0;
    for (int j = 2; j <= b; ++j) q += kCollision[j] * p[j];
    return q;
  }
  if (b * x >= 1.0) {
    double none = 0.0;
    for (int j = 0; j <= 4; ++j) none += (1.0 - kCollision[j]) * p[j];
    return std::clamp(1.0 - none, 0.0, 1.0);
  }
  double q = 0.0;
  for (int j = 2; j <= 4; ++j) q += kCollision[j] * p[j];
  return q + upper_tail(b, x, binomial_point(b, 5, x));
}

std::array<std::vector<int>, 4> sample_collision(int b, double x, double q, Rng& rng,
                                                 std::vector<int>& scratch) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  // Number of coloured blocks, weighted by the collision probability.
  int coloured = 0;
  if (x >= 1.0) {
    coloured = b;
  } else {
    const std::array<double, 5> p = low_binomial(b, x);
    double u = uniform(rng) * q;
    for (int j = 2; j <= std::min(b, 4); ++j) {
      const double w = kCollision[j] * p[j];
      if (u < w) {
        coloured = j;
        break;
      }
      u -= w;
    }
    if (coloured == 0 && b < 5) {
      // Rounding pushed u past the total; take the heaviest class.
      coloured = b;
    } else if (coloured == 0) {
      if (b * x < 1.0) {
        double term = binomial_point(b, 5, x);
        double v = uniform(rng) * upper_tail(b, x, term);
        const double odds = x / (1.0 - x);
        coloured = 5;
        while (coloured < b && v >= term) {
          v -= term;
          term *= static_cast<double>(b - coloured) / (coloured + 1) * odds;
          ++coloured;
        }
      } else {
        std::binomial_distribution<int> draw(b, x);
        do {
          coloured = draw(rng);
        } while (coloured < 5);
      }
    }
  }

  scratch.resize(b);
  std::iota(scratch.begin(), scratch.end(), 0);
  for (int i = 0; i < coloured; ++i) {
    std::uniform_int_distribution<int> pick(i, b - 1);
    std::swap(scratch[i], scratch[pick(rng)]);
  }
  std::uniform_int_distribution<int> colour(0, 3);
  std::array<std::vector<int>, 4> groups;
  for (;;) {
    for (auto& g : groups) g.clear();
    for (int i = 0; i < coloured; ++i) groups[colour(rng)].push_back(scratch[i]);
    if (std::any_of(groups.begin(), groups.end(), [](const auto& g) { return g.size() >= 2; })) {
      break;
    }
  }
  for (auto& g : groups) {
    if (g.size() < 2) g.clear();
  }
  return groups;
}

XiArgSimulator::XiArgSimulator(const CoalescentModel& model, const ArgOptions& options)
    : model_(model), options_(options) {
  if (model.kind() != ModelKind::xi_four_fold && model.kind() != ModelKind::kingman_growth) {
    throw UnsupportedModelError("multi-locus simulation needs a four-fold Xi or growth model, got " +
                                model.to_string());
  }
  if (options.n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(options.n));
  if (options.loci < 1) {
    throw ArgumentError("locus count must be >= 1, got " + std::to_string(options.loci));
  }
  if (!options.unlinked && options.loci > 1 && model.kind() == ModelKind::xi_four_fold) {
    if (static_cast<int>(options.recombination.size()) != options.loci - 1) {
      throw ArgumentError("need " + std::to_string(options.loci - 1) +
                          " recombination rates, got " +
                          std::to_string(options.recombination.size()));
    }
    for (double r : options.recombination) {
      if (!(r >= 0.0) || !std::isfinite(r)) {
        throw DomainError("recombination rates must be finite and >= 0");
      }
    }
  }
  if (model.kind() == ModelKind::kingman_growth) {
    growth_ = std::make_shared<const GenealogySimulator>(model, options.n);
  }
}

XiArgSimulator::~XiArgSimulator() = default;

std::vector<FamilySizeLengths> XiArgSimulator::simulate(Rng& rng, std::vector<double>* level_times,
                                                        const ArgObserver& observer) const {
  if (growth_) return run_growth(rng, level_times);
  if (options_.unlinked || (options_.loci == 1 && !options_.check_invariants)) {
    return run_unlinked(rng, level_times, observer);
  }
  return run_linked(rng, level_times, observer);
}

std::vector<FamilySizeLengths> XiArgSimulator::run_growth(Rng& rng,
                                                          std::vector<double>* level_times) const {
  std::vector<FamilySizeLengths> out;
  out.reserve(options_.loci);
  for (int l = 0; l < options_.loci; ++l) {
    Genealogy g = growth_->simulate_genealogy(rng);
    if (l == 0 && level_times) *level_times = std::move(g.level_times);
    out.push_back(std::move(g.lengths));
  }
  return out;
}

namespace {

std::int64_t pair_count(std::int64_t b) { return b * (b - 1) / 2; }

// Replaces the blocks of each group by their merged block; returns the
// merged sizes in nonincreasing order.
std::vector<int> merge_groups(std::vector<int>& blocks, const std::array<std::vector<int>, 4>& groups,
                              LengthAccumulator& acc, double t) {
  std::vector<int> merged;
  std::vector<char> gone(blocks.size(), 0);
  std::vector<int> sizes;
  for (const auto& group : groups) {
    if (group.size() < 2) continue;
    int total = 0;
    for (int i : group) {
      total += blocks[i];
      acc.remove(blocks[i], 1, t);
      gone[i] = 1;
    }
    acc.add(total, 1, t);
    sizes.push_back(total);
    merged.push_back(static_cast<int>(group.size()));
  }
  std::size_t keep = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!gone[i]) blocks[keep++] = blocks[i];
  }
  blocks.resize(keep);
  blocks.insert(blocks.end(), sizes.begin(), sizes.end());
  std::sort(merged.rbegin(), merged.rend());
  return merged;
}

std::array<std::vector<int>, 4> random_pair(int b, Rng& rng) {
  std::uniform_int_distribution<int> first(0, b - 1);
  std::uniform_int_distribution<int> second(0, b - 2);
  const int i = first(rng);
  int j = second(rng);
  if (j >= i) ++j;
  return {std::vector<int>{i, j}, {}, {}, {}};
}

void check_blocks(const std::vector<int>& blocks, int n) {
  int total = 0;
  for (int s : blocks) {
    if (s <= 0) throw InvariantViolation("empty block in locus state");
    total += s;
  }
  if (total != n) throw InvariantViolation("locus blocks do not partition the sample");
}

}  // namespace

std::vector<FamilySizeLengths> XiArgSimulator::run_unlinked(Rng& rng,
                                                            std::vector<double>* level_times,
                                                            const ArgObserver& observer) const {
  const int n = options_.n;
  const int loci = options_.loci;
  const LambdaFamily& family = model_.family();
  const double atom = family.atom_at_zero();
  const double mass = family.non_atomic_mass();

  std::vector<std::vector<int>> blocks(loci, std::vector<int>(n, 1));
  std::vector<LengthAccumulator> acc(loci, LengthAccumulator(n));
  for (auto& a : acc) a.add(1, n, 0.0);
  std::int64_t pairs_total = loci * pair_count(n);
  if (level_times) level_times->assign(n + 1, 0.0);

  std::vector<double> q(loci);
  std::vector<double> none_after(loci + 1);
  std::vector<double> q_by_size(n + 1);
  std::vector<std::uint64_t> q_stamp(n + 1, 0);
  std::uint64_t proposal = 0;
  std::vector<int> scratch;
  std::exponential_distribution<double> unit(1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  auto apply = [&](int locus, const std::array<std::vector<int>, 4>& groups, ArgEvent::Kind kind,
                   double t) {
    std::vector<int>& v = blocks[locus];
    const int before = static_cast<int>(v.size());
    std::vector<int> sizes = merge_groups(v, groups, acc[locus], t);
    pairs_total += pair_count(static_cast<std::int64_t>(v.size())) - pair_count(before);
    if (options_.check_invariants) check_blocks(v, n);
    if (observer) observer(ArgEvent{kind, t, locus, before, std::move(sizes)});
  };
  auto pick_locus = [&]() {
    std::uniform_int_distribution<std::int64_t> draw(0, pairs_total - 1);
    std::int64_t u = draw(rng);
    for (int l = 0; l < loci; ++l) {
      const std::int64_t w = pair_count(static_cast<std::int64_t>(blocks[l].size()));
      if (u < w) return l;
      u -= w;
    }
    return loci - 1;
  };

  double t = 0.0;
  while (pairs_total > 0) {
    const double kingman_rate = atom * static_cast<double>(pairs_total);
    const double proposal_rate = mass * static_cast<double>(pairs_total);
    const double total = kingman_rate + proposal_rate;
    const double dt = unit(rng) / total;
    if (level_times && blocks[0].size() >= 2) (*level_times)[blocks[0].size()] += dt;
    t += dt;

    if (uniform(rng) * total < kingman_rate) {
      const int l = pick_locus();
      apply(l, random_pair(static_cast<int>(blocks[l].size()), rng), ArgEvent::Kind::kingman_pair, t);
      continue;
    }
    const double x = family.sample_non_atomic(rng);
    if (x < kTinyX) {
      const int l = pick_locus();
      apply(l, random_pair(static_cast<int>(blocks[l].size()), rng),
            ArgEvent::Kind::multiple_merger, t);
      continue;
    }
    ++proposal;
    double bound = 0.0;
    for (int l = 0; l < loci; ++l) {
      const int b = static_cast<int>(blocks[l].size());
      if (q_stamp[b] != proposal) {
        q_by_size[b] = collision_probability(b, x);
        q_stamp[b] = proposal;
      }
      q[l] = q_by_size[b];
      bound += static_cast<double>(pair_count(b));
    }
    bound *= x * x / 4.0;
    // none_after[l] = log P(no collision at loci l..L-1).
    none_after[loci] = 0.0;
    for (int l = loci - 1; l >= 0; --l) none_after[l] = none_after[l + 1] + std::log1p(-q[l]);
    const double q_any = -std::expm1(none_after[0]);
    if (uniform(rng) * bound >= q_any) continue;

    bool hit = false;
    for (int l = 0; l < loci; ++l) {
      if (q[l] <= 0.0) continue;
      const double p = hit ? q[l] : q[l] / -std::expm1(none_after[l]);
      if (p < 1.0 && uniform(rng) >= p) continue;
      hit = true;
      const int b = static_cast<int>(blocks[l].size());
      apply(l, sample_collision(b, x, q[l], rng, scratch), ArgEvent::Kind::multiple_merger, t);
    }
  }

  std::vector<FamilySizeLengths> out(loci, FamilySizeLengths(n));
  for (int l = 0; l < loci; ++l) acc[l].finish(t, out[l]);
  return out;
}

std::vector<FamilySizeLengths> XiArgSimulator::run_linked(Rng& rng,
                                                          std::vector<double>* level_times,
                                                          const ArgObserver& observer) const {
  const int n = options_.n;
  const int loci = options_.loci;
  const LambdaFamily& family = model_.family();
  const double atom = family.atom_at_zero();
  const double mass = family.non_atomic_mass();

  std::vector<double> prefix(loci, 0.0);
  for (int l = 1; l < loci; ++l) {
    const double r = options_.recombination.empty() ? 0.0 : options_.recombination[l - 1];
    prefix[l] = prefix[l - 1] + r;
  }

  AncestralConfig config(n, loci);
  std::vector<LengthAccumulator> acc(loci, LengthAccumulator(n));
  for (auto& a : acc) a.add(1, n, 0.0);
  std::vector<int> blocks(loci, n);
  int remaining = loci;
  if (level_times) level_times->assign(n + 1, 0.0);

  std::vector<double> recomb_rate;
  std::vector<std::pair<int, int>> span;
  std::vector<int> scratch;
  std::exponential_distribution<double> unit(1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  auto merge = [&](const std::array<std::vector<int>, 4>& groups, ArgEvent::Kind kind, double t) {
    const int before = config.size();
    std::vector<int> sizes;
    for (const auto& group : groups) {
      if (group.size() < 2) continue;
      sizes.push_back(static_cast<int>(group.size()));
      for (int l = 0; l < loci; ++l) {
        if (config.retired(l)) continue;
        int present = 0;
        int total = 0;
        for (int i : group) {
          const int c = config.chromosome(i)[l].count();
          if (c == 0) continue;
          ++present;
          total += c;
        }
        if (present < 2) continue;
        for (int i : group) {
          const int c = config.chromosome(i)[l].count();
          if (c > 0) acc[l].remove(c, 1, t);
        }
        acc[l].add(total, 1, t);
        blocks[l] -= present - 1;
      }
    }
    if (sizes.size() == 1 && sizes[0] == 2) {
      const auto& pair = *std::find_if(groups.begin(), groups.end(),
                                       [](const auto& g) { return g.size() >= 2; });
      config.pairmerge(pair[0], pair[1]);
    } else {
      config.groupmerge(groups);
    }
    for (int l = 0; l < loci; ++l) {
      if (!config.retired(l) && blocks[l] == 1) {
        config.retire_locus(l);
        --remaining;
      }
    }
    if (options_.check_invariants) config.check_invariants();
    std::sort(sizes.rbegin(), sizes.rend());
    if (observer) observer(ArgEvent{kind, t, -1, before, std::move(sizes)});
  };

  double t = 0.0;
  while (remaining > 0) {
    const int b = config.size();
    if (b < 2) throw InvariantViolation("unfinished loci but a single chromosome");
    recomb_rate.assign(b, 0.0);
    span.assign(b, {0, 0});
    double recomb_total = 0.0;
    for (int i = 0; i < b; ++i) {
      const Chromosome& c = config.chromosome(i);
      int first = -1;
      int last = -1;
      for (int l = 0; l < loci; ++l) {
        if (c[l].empty()) continue;
        if (first < 0) first = l;
        last = l;
      }
      span[i] = {first, last};
      recomb_rate[i] = prefix[last] - prefix[first];
      recomb_total += recomb_rate[i];
    }
    const double pairs_b = static_cast<double>(pair_count(b));
    const double kingman_rate = atom * pairs_b;
    const double proposal_rate = mass * pairs_b;
    const double total = kingman_rate + proposal_rate + recomb_total;
    const double dt = unit(rng) / total;
    if (level_times && !config.retired(0) && blocks[0] >= 2) (*level_times)[blocks[0]] += dt;
    t += dt;

    double u = uniform(rng) * total;
    if (u < kingman_rate) {
      merge(random_pair(b, rng), ArgEvent::Kind::kingman_pair, t);
      continue;
    }
    u -= kingman_rate;
    if (u < proposal_rate) {
      const double x = family.sample_non_atomic(rng);
      if (x < kTinyX) {
        merge(random_pair(b, rng), ArgEvent::Kind::multiple_merger, t);
        continue;
      }
      const double q = collision_probability(b, x);
      if (uniform(rng) * pairs_b * x * x / 4.0 >= q) continue;
      merge(sample_collision(b, x, q, rng, scratch), ArgEvent::Kind::multiple_merger, t);
      continue;
    }
    u -= proposal_rate;
    int chosen = b - 1;
    for (int i = 0; i < b; ++i) {
      if (u < recomb_rate[i]) {
        chosen = i;
        break;
      }
      u -= recomb_rate[i];
    }
    while (chosen > 0 && recomb_rate[chosen] <= 0.0) --chosen;
    const auto [first, last] = span[chosen];
    double v = uniform(rng) * recomb_rate[chosen];
    int split = last;
    for (int s = first + 1; s <= last; ++s) {
      const double r = prefix[s] - prefix[s - 1];
      if (v < r) {
        split = s;
        break;
      }
      v -= r;
    }
    const int before = config.size();
    config.recomb(chosen, split);
    if (options_.check_invariants) config.check_invariants();
    if (observer) observer(ArgEvent{ArgEvent::Kind::recombination, t, -1, before, {}});
  }

  std::vector<FamilySizeLengths> out(loci, FamilySizeLengths(n));
  for (int l = 0; l < loci; ++l) acc[l].finish(t, out[l]);
  return out;
}

}  // namespace coalstat
