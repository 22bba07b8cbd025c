#include "coalstat/measures.hpp"

#include <cmath>
#include <string>

#include "coalstat/error.hpp"
#include "coalstat/special.hpp"

namespace coalstat {

namespace {

void check_range(int m, int k) {
  if (m < 2 || k < 2 || k > m) {
    throw ArgumentError("merger rate needs 2 <= k <= m, got m=" + std::to_string(m) +
                        ", k=" + std::to_string(k));
  }
}

// log of lambda_{m,k} (-inf when zero).
double log_lambda_rate(const LambdaFamily& family, int m, int k) {
  const double psi = family.parameter();
  switch (family.kind()) {
    case LambdaKind::kingman:
      return k == 2 ? 0.0 : -INFINITY;
    case LambdaKind::star:
      return k == m ? 0.0 : -INFINITY;
    case LambdaKind::bolthausen_sznitman:
      return log_beta(k - 1.0, m - k + 1.0);
    case LambdaKind::beta:
      return log_beta(k - psi, m - k + psi) - log_beta(2.0 - psi, psi);
    case LambdaKind::point_mass: {
      if (psi == 1.0) return k == m ? 0.0 : -INFINITY;
      return (k - 2) * std::log(psi) + (m - k) * std::log1p(-psi);
    }
    case LambdaKind::two_atom: {
      // Mixture; only used through lambda_rate below.
      break;
    }
  }
  return -INFINITY;
}

}  // namespace

double lambda_rate(const LambdaFamily& family, int m, int k) {
  check_range(m, k);
  if (family.kind() == LambdaKind::two_atom) {
    const double psi = family.parameter();
    const double atom = family.atom_at_zero();
    const double kingman_part = k == 2 ? 1.0 : 0.0;
    const double point_part = std::exp(log_lambda_rate(LambdaFamily::point_mass(psi), m, k));
    return atom * kingman_part + (1.0 - atom) * point_part;
  }
  return std::exp(log_lambda_rate(family, m, k));
}

double merger_size_rate(const LambdaFamily& family, int m, int k) {
  check_range(m, k);
  if (family.kind() == LambdaKind::two_atom) {
    const double psi = family.parameter();
    const double atom = family.atom_at_zero();
    double rate = (1.0 - atom) * merger_size_rate(LambdaFamily::point_mass(psi), m, k);
    if (k == 2) rate += atom * pairs(m);
    return rate;
  }
  if (m <= 60) return choose(m, k) * std::exp(log_lambda_rate(family, m, k));
  return std::exp(log_choose(m, k) + log_lambda_rate(family, m, k));
}

double total_merge_rate(const LambdaFamily& family, int m) {
  if (m < 2) throw ArgumentError("total merge rate needs m >= 2, got " + std::to_string(m));
  double total = 0.0;
  for (int k = 2; k <= m; ++k) total += merger_size_rate(family, m, k);
  return total;
}

double xi_fourfold_rate(const LambdaFamily& family, int b, std::span<const int> groups, int s) {
  const int r = static_cast<int>(groups.size());
  if (r < 1 || r > 4) {
    throw ArgumentError("four-fold Xi rate needs 1 to 4 merging groups, got " + std::to_string(r));
  }
  int size = 0;
  for (int i = 0; i < r; ++i) {
    if (groups[i] < 2) throw ArgumentError("merging group sizes must be >= 2");
    if (i > 0 && groups[i] > groups[i - 1]) {
      throw ArgumentError("merging group sizes must be nonincreasing");
    }
    size += groups[i];
  }
  if (s < 0 || size + s != b) {
    throw ArgumentError("group sizes plus untouched blocks must equal b=" + std::to_string(b));
  }

  double rate = (r == 1 && groups[0] == 2) ? family.atom_at_zero() : 0.0;
  if (family.non_atomic_mass() == 0.0) return rate;

  double sum = 0.0;
  const int l_max = std::min(s, 4 - r);
  for (int l = 0; l <= l_max; ++l) {
    const double moment = family.non_atomic_moment(size + l - 2, s - l);
    if (moment == 0.0) continue;
    const double log_weight =
        log_choose(s, l) + std::log(falling_factorial(4, r + l)) - (size + l) * std::log(4.0);
    sum += std::exp(log_weight) * moment;
  }
  return rate + 4.0 * sum;
}

}  // namespace coalstat
