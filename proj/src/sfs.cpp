#include "coalstat/sfs.hpp"

#include <numeric>
#include <string>

#include "coalstat/error.hpp"

namespace coalstat {

FamilySizeLengths::FamilySizeLengths(int n) : n_(n), values_(n > 1 ? n - 1 : 0, 0.0) {
  if (n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(n));
}

double FamilySizeLengths::total() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

SfsVector::SfsVector(int n) : counts_(n > 1 ? n - 1 : 0, 0) {
  if (n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(n));
}

SfsVector::SfsVector(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw ArgumentError("SFS needs at least one frequency class");
  for (auto c : counts_) {
    if (c < 0) throw ArgumentError("SFS counts must be nonnegative");
  }
}

void SfsVector::set(int i, std::int64_t value) {
  if (value < 0) throw ArgumentError("SFS counts must be nonnegative");
  counts_.at(i - 1) = value;
}

std::int64_t SfsVector::segregating_sites() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::vector<std::int64_t> SfsVector::folded() const {
  const int n = sample_size();
  std::vector<std::int64_t> eta(n / 2, 0);
  for (int i = 1; i <= n / 2; ++i) {
    eta[i - 1] = count(i) + (i != n - i ? count(n - i) : 0);
  }
  return eta;
}

std::vector<double> fold(const std::vector<double>& unfolded) {
  const int n = static_cast<int>(unfolded.size()) + 1;
  std::vector<double> eta(n / 2, 0.0);
  for (int i = 1; i <= n / 2; ++i) {
    eta[i - 1] = unfolded[i - 1] + (i != n - i ? unfolded[n - i - 1] : 0.0);
  }
  return eta;
}

}  // namespace coalstat
