#pragma once

#include <cstdint>
#include <vector>

#include "coalstat/model.hpp"

namespace coalstat {

// Dense square table indexed [0, size) x [0, size); the recursions use the
// natural 1-based level/count indices directly.
class Table2D {
 public:
  Table2D() = default;
  explicit Table2D(int size) : size_(size), data_(static_cast<std::size_t>(size) * size, 0.0) {}

  int size() const { return size_; }
  double& operator()(int row, int col) { return data_[static_cast<std::size_t>(row) * size_ + col]; }
  double operator()(int row, int col) const {
    return data_[static_cast<std::size_t>(row) * size_ + col];
  }

 private:
  int size_ = 0;
  std::vector<double> data_;
};

// Jump rates of the block-counting process out of level i.
struct JumpRates {
  int level = 0;
  std::vector<double> rates;     // q_{i,j}, j = 1..i-1 at index j-1
  std::vector<double> skeleton;  // q_{i,j} / (-q_{i,i})
  double total = 0.0;            // -q_{i,i}

  double rate(int j) const { return rates[j - 1]; }
  double probability(int j) const { return skeleton[j - 1]; }
};

// Lambda variants only; throws UnsupportedModelError otherwise.
JumpRates bc_jump_rates(const CoalescentModel& model, int i);

// g(n', m) for 2 <= m <= n' <= n, stored at (n', m). Lambda variants only.
Table2D green_function(const CoalescentModel& model, int n);

// p^{(n)}[k, b] at (k, b) together with which levels are reachable from n.
struct ProbabilityTable {
  int n = 0;
  Table2D p;
  std::vector<bool> reachable;  // indexed by level k, size n+1

  double operator()(int k, int b) const { return p(k, b); }
};

// Lambda variants use the first-jump recursion; growth-Kingman uses the
// Kingman closed form (topology does not depend on the time change).
ProbabilityTable p_table(const CoalescentModel& model, int n);

// Same recursion given a precomputed Green function (as built above).
ProbabilityTable p_table(const CoalescentModel& model, int n, const Table2D& green);

// Controls the Monte Carlo estimate of level times under exponential growth.
struct GrowthOptions {
  std::size_t replicates = 100000;
  std::uint64_t seed = 0x6C6576656C73ULL;
  int workers = 0;  // 0 = default_workers()
};

// E[T_k] and its standard error for k = 2..n, stored at index k.
struct LevelTimes {
  std::vector<double> mean;
  std::vector<double> standard_error;
};

LevelTimes expected_level_times_growth(double beta, int n, std::size_t replicates,
                                       std::uint64_t seed, int workers = 0);

// Everything the deterministic SFS machinery knows about (model, n).
class RecursionTables {
 public:
  int sample_size() const { return n_; }
  const CoalescentModel& model() const { return model_; }
  // Empty for growth models (time-inhomogeneous; no Green function).
  const Table2D& green() const { return green_; }
  bool has_green() const { return green_.size() > 0; }
  const ProbabilityTable& probabilities() const { return p_; }
  const LevelTimes& level_times() const { return level_times_; }
  // E[B_i], i = 1..n-1 at index i-1.
  const std::vector<double>& branch_lengths() const { return branch_lengths_; }
  const std::vector<double>& phi() const { return phi_; }
  double expected_total_length() const { return total_length_; }
  std::vector<double> expected_sfs(double theta) const;

 private:
  friend RecursionTables build_tables(const CoalescentModel&, int, const GrowthOptions&);

  RecursionTables(const CoalescentModel& model, int n) : n_(n), model_(model) {}

  int n_;
  CoalescentModel model_;
  Table2D green_;
  ProbabilityTable p_;
  LevelTimes level_times_;
  std::vector<double> branch_lengths_;
  std::vector<double> phi_;
  double total_length_ = 0.0;
};

// Lambda variants and growth-Kingman; Xi models throw UnsupportedModelError.
RecursionTables build_tables(const CoalescentModel& model, int n, const GrowthOptions& growth = {});

std::vector<double> expected_sfs(const CoalescentModel& model, int n, double theta,
                                 const GrowthOptions& growth = {});
std::vector<double> phi(const CoalescentModel& model, int n, const GrowthOptions& growth = {});
double expected_total_length(const CoalescentModel& model, int n, const GrowthOptions& growth = {});

}  // namespace coalstat
