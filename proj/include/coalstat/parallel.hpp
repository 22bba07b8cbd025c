#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

namespace coalstat {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed-splitting rule shared by every Monte Carlo routine: stream `index`
// of master seed `seed` is seeded with
//   splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019)).
// Streams depend only on (seed, index), never on the worker layout.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(stream_seed(seed, index));
}

// Worker count from COALSTAT_WORKERS, else hardware concurrency (>= 1).
int default_workers();

// Calls body(i) for i in [0, count) on up to `workers` threads. Bodies must
// write only to per-index state. Exceptions are rethrown on the caller.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Mean and standard error of the mean, accumulated in a fixed order.
class MeanAccumulator {
 public:
  void add(double x) {
    ++count_;
    sum_.add(x);
    sum_sq_.add(x * x);
  }
  std::size_t count() const { return count_; }
  double mean() const { return count_ ? sum_.value() / count_ : 0.0; }
  double standard_error() const;

 private:
  std::size_t count_ = 0;
  CompensatedSum sum_;
  CompensatedSum sum_sq_;
};

}  // namespace coalstat

#include <algorithm>
#include <vector>

namespace coalstat {

// Runs `simulate(rep, result&)` for rep in [0, reps) in blocks of fixed
// size, in parallel within a block, and hands every result to
// `consume(rep, const result&)` in replicate order. Output therefore does
// not depend on the worker count, and memory stays bounded by one block.
template <class Result, class Simulate, class Consume>
void ordered_replicates(std::size_t reps, int workers, Simulate&& simulate, Consume&& consume,
                        std::size_t block_size = 2048) {
  std::vector<Result> block(std::min(block_size, reps));
  for (std::size_t start = 0; start < reps; start += block_size) {
    const std::size_t count = std::min(block_size, reps - start);
    parallel_for(count, workers, [&](std::size_t j) { simulate(start + j, block[j]); });
    for (std::size_t j = 0; j < count; ++j) consume(start + j, block[j]);
  }
}

}  // namespace coalstat
