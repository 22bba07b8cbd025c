#pragma once

#include <span>
#include <vector>

#include "coalstat/model.hpp"

namespace coalstat {

// lambda_{m,k}: rate at which one specific set of k out of m blocks merges.
double lambda_rate(const LambdaFamily& family, int m, int k);

// C(m,k) * lambda_{m,k}, evaluated in log space where needed so that large m
// does not overflow the binomial.
double merger_size_rate(const LambdaFamily& family, int m, int k);

// lambda_m = sum_{k=2}^m C(m,k) lambda_{m,k}.
double total_merge_rate(const LambdaFamily& family, int m);

// Rate of one specific simultaneous merger of b blocks into groups of sizes
// `groups` (nonincreasing, each >= 2, at most four groups) with s blocks
// untouched, for the four-fold Xi-coalescent built from `family`.
double xi_fourfold_rate(const LambdaFamily& family, int b, std::span<const int> groups, int s);

inline double xi_fourfold_rate(const LambdaFamily& family, int b,
                               std::initializer_list<int> groups, int s) {
  return xi_fourfold_rate(family, b, std::span<const int>(groups.begin(), groups.size()), s);
}

}  // namespace coalstat
