#pragma once

#include <vector>

#include "coalstat/sfs.hpp"

namespace coalstat {

// Accumulates family-size-indexed branch length lazily: the length of size
// class s only needs updating when the number of blocks of size s changes.
// Blocks of size n (the root) accrue nothing.
class LengthAccumulator {
 public:
  explicit LengthAccumulator(int n)
      : n_(n), count_(n + 1, 0), since_(n + 1, 0.0), length_(n + 1, 0.0) {}

  void add(int size, int how_many, double t) {
    if (size >= n_ || size <= 0) return;
    flush(size, t);
    count_[size] += how_many;
  }
  void remove(int size, int how_many, double t) { add(size, -how_many, t); }

  void finish(double t, FamilySizeLengths& out) {
    for (int s = 1; s < n_; ++s) {
      flush(s, t);
      out.add(s, length_[s]);
    }
  }

  int count(int size) const { return count_[size]; }

 private:
  void flush(int size, double t) {
    length_[size] += count_[size] * (t - since_[size]);
    since_[size] = t;
  }

  int n_;
  std::vector<int> count_;
  std::vector<double> since_;
  std::vector<double> length_;
};

}  // namespace coalstat
