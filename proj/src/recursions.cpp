#include "coalstat/recursions.hpp"

#include <cmath>
#include <string>

#include "coalstat/error.hpp"
#include "coalstat/measures.hpp"
#include "coalstat/parallel.hpp"
#include "coalstat/special.hpp"

namespace coalstat {

namespace {

void require_lambda(const CoalescentModel& model, const char* what) {
  if (!model.is_lambda()) {
    throw UnsupportedModelError(std::string(what) + " is defined for Lambda-coalescents only, got " +
                                model.to_string());
  }
}

void require_sample_size(int n) {
  if (n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(n));
}

// Skeleton probabilities p_{i,j} for all 2 <= i <= n, stored at (i, j),
// plus the total rates -q_{i,i} at index i.
struct Skeleton {
  Table2D p;
  std::vector<double> total;
};

Skeleton skeleton_chain(const LambdaFamily& family, int n) {
  Skeleton chain{Table2D(n + 1), std::vector<double>(n + 1, 0.0)};
  for (int i = 2; i <= n; ++i) {
    double total = 0.0;
    for (int j = 1; j < i; ++j) {
      const double q = merger_size_rate(family, i, i - j + 1);
      chain.p(i, j) = q;
      total += q;
    }
    chain.total[i] = total;
    for (int j = 1; j < i; ++j) chain.p(i, j) /= total;
  }
  return chain;
}

Table2D green_from_skeleton(const Skeleton& chain, int n) {
  Table2D g(n + 1);
  for (int m = 2; m <= n; ++m) {
    g(m, m) = 1.0 / chain.total[m];
    for (int i = m + 1; i <= n; ++i) {
      double sum = 0.0;
      for (int k = m; k < i; ++k) sum += chain.p(i, k) * g(k, m);
      g(i, m) = sum;
    }
  }
  return g;
}

ProbabilityTable kingman_closed_form(int n) {
  ProbabilityTable table{n, Table2D(n + 1), std::vector<bool>(n + 1, false)};
  for (int k = 2; k <= n; ++k) {
    table.reachable[k] = true;
    const double log_denominator = log_choose(n - 1, k - 1);
    for (int b = 1; b <= n - k + 1; ++b) {
      table.p(k, b) = std::exp(log_choose(n - b - 1, k - 2) - log_denominator);
    }
  }
  return table;
}

ProbabilityTable lambda_recursion(const Skeleton& chain, const Table2D& g, int n) {
  ProbabilityTable table{n, Table2D(n + 1), std::vector<bool>(n + 1, false)};
  // rows[n'] holds p^{(n')}[k, b] for b = 1..n'-k+1 at index b-1.
  std::vector<std::vector<double>> rows(n + 1);
  for (int k = 2; k <= n; ++k) {
    rows[k].assign(1, 1.0);
    for (int level = k + 1; level <= n; ++level) {
      std::vector<double>& row = rows[level];
      row.assign(level - k + 1, 0.0);
      const double g_level = g(level, k);
      if (g_level == 0.0) continue;
      for (int next = k; next < level; ++next) {
        const double g_next = g(next, k);
        const double weight = chain.p(level, next) * g_next / g_level;
        if (weight == 0.0) continue;
        const int shift = level - next;
        const double inv_next = 1.0 / next;
        const std::vector<double>& source = rows[next];
        const int support = next - k + 1;
        double* target = row.data();
        for (int b = 1; b <= support; ++b) {
          const double value = weight * source[b - 1] * inv_next;
          // The split hit one of the b lineages below ours ...
          target[b + shift - 1] += value * b;
          // ... or one of the next - b others.
          target[b - 1] += value * (next - b);
        }
      }
    }
    table.reachable[k] = g(n, k) > 0.0;
    if (!table.reachable[k]) continue;
    const std::vector<double>& final_row = rows[n];
    for (int b = 1; b <= n - k + 1; ++b) table.p(k, b) = final_row[b - 1];
  }
  return table;
}

}  // namespace

JumpRates bc_jump_rates(const CoalescentModel& model, int i) {
  require_lambda(model, "block-counting jump rates");
  if (i < 2) throw ArgumentError("block-counting level must be >= 2, got " + std::to_string(i));
  JumpRates jumps;
  jumps.level = i;
  jumps.rates.resize(i - 1);
  for (int j = 1; j < i; ++j) {
    jumps.rates[j - 1] = merger_size_rate(model.family(), i, i - j + 1);
    jumps.total += jumps.rates[j - 1];
  }
  jumps.skeleton.resize(i - 1);
  for (int j = 1; j < i; ++j) jumps.skeleton[j - 1] = jumps.rates[j - 1] / jumps.total;
  return jumps;
}

Table2D green_function(const CoalescentModel& model, int n) {
  require_lambda(model, "Green function");
  require_sample_size(n);
  return green_from_skeleton(skeleton_chain(model.family(), n), n);
}

ProbabilityTable p_table(const CoalescentModel& model, int n) {
  require_sample_size(n);
  if (model.kind() == ModelKind::kingman_growth) return kingman_closed_form(n);
  require_lambda(model, "p-table recursion");
  const Skeleton chain = skeleton_chain(model.family(), n);
  return lambda_recursion(chain, green_from_skeleton(chain, n), n);
}

ProbabilityTable p_table(const CoalescentModel& model, int n, const Table2D& green) {
  require_sample_size(n);
  if (model.kind() == ModelKind::kingman_growth) return kingman_closed_form(n);
  require_lambda(model, "p-table recursion");
  if (green.size() < n + 1) throw ArgumentError("Green function table too small");
  return lambda_recursion(skeleton_chain(model.family(), n), green, n);
}

LevelTimes expected_level_times_growth(double beta, int n, std::size_t replicates,
                                       std::uint64_t seed, int workers) {
  require_sample_size(n);
  if (!(beta >= 0.0)) throw DomainError("growth rate must be >= 0");
  if (replicates < 1) throw ArgumentError("need at least one replicate");
  if (workers <= 0) workers = default_workers();

  std::vector<MeanAccumulator> acc(n + 1);
  ordered_replicates<std::vector<double>>(
      replicates, workers,
      [&](std::size_t rep, std::vector<double>& times) {
        Rng rng = make_stream(seed, rep);
        std::exponential_distribution<double> unit(1.0);
        times.assign(n + 1, 0.0);
        double t = 0.0;
        for (int k = n; k >= 2; --k) {
          const double e = unit(rng);
          const double rate = pairs(k);
          double next;
          if (beta == 0.0) {
            next = t + e / rate;
          } else {
            // Solve rate * (exp(beta t') - exp(beta t)) / beta = e.
            next = t + std::log1p(std::exp(std::log(beta * e / rate) - beta * t)) / beta;
          }
          times[k] = next - t;
          t = next;
        }
      },
      [&](std::size_t, const std::vector<double>& times) {
        for (int k = 2; k <= n; ++k) acc[k].add(times[k]);
      });

  LevelTimes result{std::vector<double>(n + 1, 0.0), std::vector<double>(n + 1, 0.0)};
  for (int k = 2; k <= n; ++k) {
    result.mean[k] = acc[k].mean();
    result.standard_error[k] = acc[k].standard_error();
  }
  return result;
}

std::vector<double> RecursionTables::expected_sfs(double theta) const {
  if (!(theta > 0.0)) throw DomainError("theta must be > 0");
  std::vector<double> sfs(branch_lengths_);
  for (double& v : sfs) v *= theta / 2.0;
  return sfs;
}

RecursionTables build_tables(const CoalescentModel& model, int n, const GrowthOptions& growth) {
  require_sample_size(n);
  if (model.kind() == ModelKind::xi_four_fold) {
    throw UnsupportedModelError(
        "expected SFS recursions are not available for Xi-coalescents; use simulation");
  }
  RecursionTables tables(model, n);
  if (model.is_lambda()) {
    const Skeleton chain = skeleton_chain(model.family(), n);
    tables.green_ = green_from_skeleton(chain, n);
    tables.p_ = lambda_recursion(chain, tables.green_, n);
    tables.level_times_.mean.assign(n + 1, 0.0);
    tables.level_times_.standard_error.assign(n + 1, 0.0);
    for (int k = 2; k <= n; ++k) tables.level_times_.mean[k] = tables.green_(n, k);
  } else {
    tables.p_ = kingman_closed_form(n);
    if (model.growth_rate() == 0.0) {
      tables.level_times_.mean.assign(n + 1, 0.0);
      tables.level_times_.standard_error.assign(n + 1, 0.0);
      for (int k = 2; k <= n; ++k) tables.level_times_.mean[k] = 1.0 / pairs(k);
    } else {
      tables.level_times_ = expected_level_times_growth(model.growth_rate(), n, growth.replicates,
                                                        growth.seed, growth.workers);
    }
  }

  tables.branch_lengths_.assign(n - 1, 0.0);
  for (int i = 1; i <= n - 1; ++i) {
    double sum = 0.0;
    for (int k = 2; k <= n - i + 1; ++k) {
      if (!tables.p_.reachable[k]) continue;
      sum += tables.p_(k, i) * k * tables.level_times_.mean[k];
    }
    tables.branch_lengths_[i - 1] = sum;
  }
  // Level 1 is absorbing and carries no branch length.
  double total = 0.0;
  for (int k = 2; k <= n; ++k) total += k * tables.level_times_.mean[k];
  tables.total_length_ = total;

  double branch_total = 0.0;
  for (double v : tables.branch_lengths_) branch_total += v;
  tables.phi_.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) tables.phi_[i] = tables.branch_lengths_[i] / branch_total;
  return tables;
}

std::vector<double> expected_sfs(const CoalescentModel& model, int n, double theta,
                                 const GrowthOptions& growth) {
  if (!(theta > 0.0)) throw DomainError("theta must be > 0");
  return build_tables(model, n, growth).expected_sfs(theta);
}

std::vector<double> phi(const CoalescentModel& model, int n, const GrowthOptions& growth) {
  return build_tables(model, n, growth).phi();
}

double expected_total_length(const CoalescentModel& model, int n, const GrowthOptions& growth) {
  return build_tables(model, n, growth).expected_total_length();
}

}  // namespace coalstat
