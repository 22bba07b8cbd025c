#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "coalstat/model.hpp"
#include "coalstat/parallel.hpp"
#include "coalstat/sfs.hpp"

namespace coalstat {

class GenealogySimulator;

// Subset of the leaves {0, ..., n-1}.
class LeafSet {
 public:
  LeafSet() = default;
  explicit LeafSet(int n) : n_(n), words_((n + 63) / 64, 0) {}
  static LeafSet singleton(int n, int leaf);

  int universe() const { return n_; }
  void insert(int leaf) { words_[leaf >> 6] |= std::uint64_t{1} << (leaf & 63); }
  bool contains(int leaf) const { return (words_[leaf >> 6] >> (leaf & 63)) & 1U; }
  int count() const;
  bool empty() const;
  void clear();
  bool intersects(const LeafSet& other) const;
  LeafSet& operator|=(const LeafSet& other);
  std::vector<int> elements() const;

  friend bool operator==(const LeafSet&, const LeafSet&) = default;

 private:
  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

// One ancestral chromosome: the leaves it is ancestral to, per locus.
using Chromosome = std::vector<LeafSet>;

// State of the diploid multi-locus ancestry. For every locus the nonempty
// entries across chromosomes partition the sample; chromosomes with no
// ancestral material anywhere are removed. Indices are 0-based.
class AncestralConfig {
 public:
  // n chromosomes, chromosome i ancestral to leaf i at every locus.
  AncestralConfig(int n, int loci);
  AncestralConfig(int n, int loci, std::vector<Chromosome> chromosomes);

  int sample_size() const { return n_; }
  int loci() const { return loci_; }
  int size() const { return static_cast<int>(chromosomes_.size()); }
  const Chromosome& chromosome(int i) const { return chromosomes_[i]; }
  const std::vector<Chromosome>& chromosomes() const { return chromosomes_; }

  // Number of chromosomes carrying material at `locus`.
  int blocks_at(int locus) const;
  bool locus_complete(int locus) const;
  bool complete() const;

  // Throws InvariantViolation if a locus is not partitioned exactly or an
  // empty chromosome is present. Retired loci are skipped.
  void check_invariants() const;

  // Locus-wise union of chromosomes i1 and i2.
  void pairmerge(int i1, int i2);
  // Each nonempty group is unioned into one chromosome. Requires some group of
  // size >= 3 or at least two groups of size >= 2; groups must be disjoint.
  void groupmerge(const std::array<std::vector<int>, 4>& groups);
  // Splits chromosome i into loci [0, split) and [split, L). Returns false,
  // leaving the state unchanged, if either part would be empty.
  bool recomb(int i, int split);

  // Drops the material at a locus that has found its most recent common
  // ancestor; later checks ignore it.
  void retire_locus(int locus);
  bool retired(int locus) const { return retired_[locus]; }

 private:
  void merge_into(int target, int source);
  void remove_empty();

  int n_;
  int loci_;
  std::vector<Chromosome> chromosomes_;
  std::vector<bool> retired_;
};

AncestralConfig pairmerge(AncestralConfig config, int i1, int i2);
AncestralConfig groupmerge(AncestralConfig config, const std::array<std::vector<int>, 4>& groups);
AncestralConfig recomb(AncestralConfig config, int i, int split);

// Probability that, when each of b blocks independently takes one of four
// colours with probability x/4 each (else stays uncoloured), some colour is
// taken by two or more blocks.
double collision_probability(int b, double x);

// Colours of b blocks conditioned on a collision: returns the groups of
// block indices sharing a colour, keeping only groups with >= 2 members.
std::array<std::vector<int>, 4> sample_collision(int b, double x, double q, Rng& rng,
                                                 std::vector<int>& scratch);

struct ArgOptions {
  int n = 2;
  int loci = 1;
  // Recombination rate between locus l and l+1 per chromosome, size loci-1.
  std::vector<double> recombination;
  // Every locus keeps its own blocks; one shared clock of merger events
  // drives all loci with independent colourings per locus.
  bool unlinked = false;
  // Validate the configuration after every transition.
  bool check_invariants = false;
};

struct ArgEvent {
  enum class Kind { kingman_pair, multiple_merger, recombination };
  Kind kind;
  double time;
  int locus;          // -1 for events on whole chromosomes
  int blocks_before;  // blocks at `locus`, or chromosomes when locus == -1
  std::vector<int> groups;  // merged group sizes, nonincreasing
};

using ArgObserver = std::function<void(const ArgEvent&)>;

// Gillespie simulation of the multi-locus ancestry under a four-fold Xi model,
// or L independent trees for a growth model. Thread-safe after construction.
class XiArgSimulator {
 public:
  XiArgSimulator(const CoalescentModel& model, const ArgOptions& options);
  ~XiArgSimulator();

  const ArgOptions& options() const { return options_; }

  // Per-locus family-size lengths. If level_times is given it receives the
  // time spent with k blocks at locus 0 (index k).
  std::vector<FamilySizeLengths> simulate(Rng& rng, std::vector<double>* level_times = nullptr,
                                          const ArgObserver& observer = {}) const;

 private:
  std::vector<FamilySizeLengths> run_unlinked(Rng& rng, std::vector<double>* level_times,
                                              const ArgObserver& observer) const;
  std::vector<FamilySizeLengths> run_linked(Rng& rng, std::vector<double>* level_times,
                                            const ArgObserver& observer) const;
  std::vector<FamilySizeLengths> run_growth(Rng& rng, std::vector<double>* level_times) const;

  CoalescentModel model_;
  ArgOptions options_;
  std::shared_ptr<const GenealogySimulator> growth_;
};

}  // namespace coalstat
