#pragma once

#include <cmath>

namespace coalstat {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double log_factorial(double n) { return std::lgamma(n + 1.0); }

// log C(n, k) for 0 <= k <= n; -inf outside.
inline double log_choose(double n, double k) {
  if (k < 0.0 || k > n) return -INFINITY;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// C(n, k) exactly for small n, via log-gamma beyond 60.
inline double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n <= 60) {
    if (k > n - k) k = n - k;
    double result = 1.0;
    for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return std::round(result);
  }
  return std::exp(log_choose(n, k));
}

// (n)_j = n (n-1) ... (n-j+1)
inline double falling_factorial(int n, int j) {
  double result = 1.0;
  for (int i = 0; i < j; ++i) result *= n - i;
  return result;
}

inline double pairs(int b) { return 0.5 * b * (b - 1.0); }

}  // namespace coalstat
