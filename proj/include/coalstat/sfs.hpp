#pragma once

#include <cstdint>
#include <vector>

namespace coalstat {

// Total branch length subtending exactly i leaves, i = 1..n-1, for one
// genealogy. Stored 0-based: length(i) == values[i - 1].
class FamilySizeLengths {
 public:
  FamilySizeLengths() = default;
  explicit FamilySizeLengths(int n);

  int sample_size() const { return n_; }
  double length(int i) const { return values_[i - 1]; }
  void add(int i, double amount) { values_[i - 1] += amount; }
  const std::vector<double>& values() const { return values_; }
  double total() const;

 private:
  int n_ = 0;
  std::vector<double> values_;
};

// Unfolded site-frequency spectrum xi_1..xi_{n-1}; xi(i) == counts[i - 1].
class SfsVector {
 public:
  SfsVector() = default;
  explicit SfsVector(int n);
  explicit SfsVector(std::vector<std::int64_t> counts);

  int sample_size() const { return static_cast<int>(counts_.size()) + 1; }
  std::int64_t count(int i) const { return counts_[i - 1]; }
  void set(int i, std::int64_t value);
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t segregating_sites() const;
  // eta_i = xi_i + (1 - delta_{i,n-i}) xi_{n-i}, i = 1..floor(n/2).
  std::vector<std::int64_t> folded() const;

  friend bool operator==(const SfsVector&, const SfsVector&) = default;

 private:
  std::vector<std::int64_t> counts_;
};

// Folding for real-valued spectra (expected values).
std::vector<double> fold(const std::vector<double>& unfolded);

}  // namespace coalstat
