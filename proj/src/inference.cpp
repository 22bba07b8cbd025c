#include "coalstat/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "coalstat/error.hpp"
#include "coalstat/parallel.hpp"
#include "coalstat/simulator.hpp"
#include "coalstat/special.hpp"

namespace coalstat {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kPowerStream = 0x706F776572ULL;

// Nonzero classes of an observed spectrum with the model-free part of the
// multinomial / Poisson mass.
struct SparseCounts {
  std::vector<std::size_t> index;
  std::vector<double> count;
  double log_factorials = 0.0;  // sum ln k_i!
  std::int64_t total = 0;
};

SparseCounts sparse(const std::vector<std::int64_t>& counts) {
  SparseCounts out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw ArgumentError("SFS counts must be nonnegative");
    if (counts[i] == 0) continue;
    out.index.push_back(i);
    out.count.push_back(static_cast<double>(counts[i]));
    out.log_factorials += log_factorial(static_cast<double>(counts[i]));
    out.total += counts[i];
  }
  return out;
}

double fixed_s_sparse(const std::vector<double>& log_phi, const SparseCounts& k, std::int64_t s) {
  if (k.total != s) {
    throw ArgumentError("fixed-s likelihood needs sum of SFS (" + std::to_string(k.total) +
                        ") equal to s (" + std::to_string(s) + ")");
  }
  double sum = log_factorial(static_cast<double>(s)) - k.log_factorials;
  for (std::size_t j = 0; j < k.index.size(); ++j) {
    const double lp = log_phi[k.index[j]];
    if (lp == kNegInf) return kNegInf;
    sum += k.count[j] * lp;
  }
  return sum;
}

double poisson_sparse(const std::vector<double>& log_phi, double phi_sum, const SparseCounts& k,
                      std::int64_t s) {
  if (s < 0) throw ArgumentError("s must be >= 0");
  const double sd = static_cast<double>(s);
  double sum = -sd * phi_sum - k.log_factorials;
  if (k.index.empty()) return sum;
  if (s == 0) return kNegInf;
  const double log_s = std::log(sd);
  for (std::size_t j = 0; j < k.index.size(); ++j) {
    const double lp = log_phi[k.index[j]];
    if (lp == kNegInf) return kNegInf;
    sum += k.count[j] * (log_s + lp);
  }
  return sum;
}

std::vector<double> logs(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? std::log(v[i]) : kNegInf;
  return out;
}

double sum(const std::vector<double>& v) {
  CompensatedSum total;
  for (double x : v) total.add(x);
  return total.value();
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

CoalescentModel grid_point(const std::string& family, double value) {
  if (value == 2.0 && family == "beta") return CoalescentModel::lambda(LambdaFamily::kingman());
  if (value == 2.0 && family == "xibeta") return CoalescentModel::xi_four_fold(LambdaFamily::kingman());
  std::ostringstream text;
  text.precision(17);
  text << family << ':' << value;
  return parse_model(text.str());
}

double sanitize(double value) {
  // Undo accumulated decimal noise such as 1 + 40 * 0.025 = 2.0000000000000004.
  const double scaled = std::round(value * 1e12) / 1e12;
  return std::abs(scaled - value) < 1e-9 * std::max(1.0, std::abs(value)) ? scaled : value;
}

}  // namespace

double watterson(const CoalescentModel& model, int n, std::int64_t s, const GrowthOptions& growth) {
  if (n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(n));
  if (s < 0) throw ArgumentError("number of segregating sites must be >= 0");
  if (model.kind() == ModelKind::xi_four_fold) {
    if (s == 0) return 0.0;
    const GenealogySimulator simulator(model, n);
    const int workers = growth.workers > 0 ? growth.workers : default_workers();
    MeanAccumulator length;
    ordered_replicates<double>(
        growth.replicates, workers,
        [&](std::size_t rep, double& out) {
          Rng rng = make_stream(growth.seed, rep);
          out = simulator.simulate(rng).total();
        },
        [&](std::size_t, const double& total) { length.add(total); });
    return 2.0 * static_cast<double>(s) / length.mean();
  }
  const auto summary = cached_branch_summary(model, n, growth);
  return 2.0 * static_cast<double>(s) / summary->expected_total_length;
}

double real_time_unit(double theta_hat, double mu_per_year) {
  if (!(theta_hat > 0.0) || !(mu_per_year > 0.0)) {
    throw DomainError("theta and mutation rate must both be > 0");
  }
  return theta_hat / 2.0 / mu_per_year;
}

double pair_coalescence_probability(double mu_per_generation, double theta_hat) {
  if (!(theta_hat > 0.0) || !(mu_per_generation > 0.0)) {
    throw DomainError("theta and mutation rate must both be > 0");
  }
  return 2.0 * mu_per_generation / theta_hat;
}

ObservedSfs ObservedSfs::unfolded(const SfsVector& sfs) {
  return ObservedSfs{sfs.sample_size(), sfs.counts(), false};
}

ObservedSfs ObservedSfs::folded_from(int n, std::vector<std::int64_t> eta) {
  if (n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(n));
  if (static_cast<int>(eta.size()) != n / 2) {
    throw ArgumentError("folded SFS of n = " + std::to_string(n) + " needs " +
                        std::to_string(n / 2) + " classes, got " + std::to_string(eta.size()));
  }
  for (auto c : eta) {
    if (c < 0) throw ArgumentError("SFS counts must be nonnegative");
  }
  return ObservedSfs{n, std::move(eta), true};
}

std::int64_t ObservedSfs::total() const {
  std::int64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double fixed_s_loglik(const std::vector<double>& phi, const std::vector<std::int64_t>& counts,
                      std::int64_t s) {
  if (phi.size() != counts.size()) throw ArgumentError("phi and SFS lengths differ");
  return fixed_s_sparse(logs(phi), sparse(counts), s);
}

double poisson_approx_loglik(const std::vector<double>& phi,
                             const std::vector<std::int64_t>& counts, std::int64_t s) {
  if (phi.size() != counts.size()) throw ArgumentError("phi and SFS lengths differ");
  return poisson_sparse(logs(phi), sum(phi), sparse(counts), s);
}

double fixed_s_loglik(const CoalescentModel& model, int n, const SfsVector& sfs, std::int64_t s,
                      const GrowthOptions& growth) {
  if (sfs.sample_size() != n) throw ArgumentError("SFS length does not match n");
  return fixed_s_loglik(cached_branch_summary(model, n, growth)->phi, sfs.counts(), s);
}

double poisson_approx_loglik(const CoalescentModel& model, int n, const SfsVector& sfs,
                             std::int64_t s, const GrowthOptions& growth) {
  if (sfs.sample_size() != n) throw ArgumentError("SFS length does not match n");
  return poisson_approx_loglik(cached_branch_summary(model, n, growth)->phi, sfs.counts(), s);
}

LikelihoodKind parse_likelihood_kind(std::string_view text) {
  if (text == "fixed-s" || text == "fixed_s") return LikelihoodKind::fixed_s;
  if (text == "poisson") return LikelihoodKind::poisson;
  throw ParseError("unknown likelihood '" + std::string(text) + "' (expected fixed-s or poisson)");
}

std::string to_string(LikelihoodKind kind) {
  return kind == LikelihoodKind::fixed_s ? "fixed-s" : "poisson";
}

HypothesisGrid parse_grid(std::string_view spec, std::string label) {
  HypothesisGrid grid{std::move(label), {}};
  for (const std::string& term : split(spec, '+')) {
    if (term.empty()) throw ParseError("empty term in grid spec '" + std::string(spec) + "'");
    const std::vector<std::string> parts = split(term, ':');
    if (parts.size() <= 2) {
      grid.models.push_back(parse_model(term));
      continue;
    }
    if (parts.size() != 4) {
      throw ParseError("grid term '" + term + "' must be MODEL or FAMILY:START:STOP:STEP");
    }
    const double start = parse_number(parts[1]);
    const double stop = parse_number(parts[2]);
    const double step = parse_number(parts[3]);
    if (!(step > 0.0)) throw ParseError("grid step must be > 0 in '" + term + "'");
    if (stop < start) throw ParseError("grid stop below start in '" + term + "'");
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) throw ParseError("grid term '" + term + "' has too many points");
    for (long long i = 0; i < count; ++i) {
      grid.models.push_back(grid_point(parts[0], sanitize(start + static_cast<double>(i) * step)));
    }
  }
  if (grid.models.empty()) throw ParseError("grid spec '" + std::string(spec) + "' is empty");
  for (std::size_t i = 0; i < grid.models.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (grid.models[i] == grid.models[j]) {
        throw ParseError("duplicate model " + grid.models[i].to_string() + " in grid spec");
      }
    }
  }
  if (grid.label.empty()) grid.label = std::string(spec);
  return grid;
}

HypothesisGrid growth_grid_default() {
  return parse_grid("growth:0:10:1+growth:20:1000:10", "growth");
}

HypothesisGrid beta_grid_default() { return parse_grid("beta:1:2:0.025", "beta"); }

std::shared_ptr<const BranchSummary> cached_branch_summary(const CoalescentModel& model, int n,
                                                           const GrowthOptions& growth) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const BranchSummary>> cache;
  std::string key = model.to_string() + "|" + std::to_string(n);
  if (model.kind() == ModelKind::kingman_growth && model.growth_rate() > 0.0) {
    key += "|" + std::to_string(growth.replicates) + "|" + std::to_string(growth.seed);
  }
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const RecursionTables tables = build_tables(model, n, growth);
  auto summary = std::make_shared<const BranchSummary>(
      BranchSummary{tables.phi(), tables.expected_total_length()});
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(summary)).first->second;
}

GridTables::GridTables(const HypothesisGrid& grid, int n, const GrowthOptions& growth, int workers)
    : grid_(grid), n_(n) {
  if (grid.models.empty()) throw ArgumentError("hypothesis grid '" + grid.label + "' is empty");
  if (n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(n));
  if (workers <= 0) workers = default_workers();
  const std::size_t m = grid.models.size();
  std::vector<std::shared_ptr<const BranchSummary>> summaries(m);
  GrowthOptions inner = growth;
  if (workers > 1) inner.workers = 1;
  parallel_for(m, workers, [&](std::size_t i) {
    summaries[i] = cached_branch_summary(grid_.models[i], n, inner);
  });
  for (std::size_t i = 0; i < m; ++i) {
    phi_.push_back(summaries[i]->phi);
    log_phi_.push_back(logs(phi_.back()));
    folded_phi_.push_back(fold(phi_.back()));
    folded_log_phi_.push_back(logs(folded_phi_.back()));
    total_length_.push_back(summaries[i]->expected_total_length);
  }
}

double GridTables::loglik(std::size_t i, const ObservedSfs& sfs, std::int64_t s,
                          LikelihoodKind kind) const {
  if (sfs.n != n_) throw ArgumentError("SFS sample size does not match the grid tables");
  const SparseCounts k = sparse(sfs.counts);
  const auto& lp = log_phi(i, sfs.folded);
  if (kind == LikelihoodKind::fixed_s) return fixed_s_sparse(lp, k, s);
  return poisson_sparse(lp, sum(phi(i, sfs.folded)), k, s);
}

namespace {

struct GridMax {
  double value = kNegInf;
  std::size_t index = 0;
};

GridMax grid_sup(const GridTables& tables, const SparseCounts& k, bool folded, std::int64_t s,
                 LikelihoodKind kind) {
  GridMax best;
  bool any = false;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& lp = tables.log_phi(i, folded);
    const double v = kind == LikelihoodKind::fixed_s
                         ? fixed_s_sparse(lp, k, s)
                         : poisson_sparse(lp, 1.0, k, s);
    if (!any || v > best.value) {
      best = {v, i};
      any = true;
    }
  }
  if (best.value == kNegInf) {
    throw DegenerateDataError("every model of grid '" + tables.grid().label +
                              "' gives likelihood 0 for the data");
  }
  return best;
}

LrResult lr_sparse(const GridTables& null, const GridTables& alt, const SparseCounts& k, bool folded,
                   std::int64_t s, LikelihoodKind kind) {
  const GridMax a = grid_sup(null, k, folded, s, kind);
  const GridMax b = grid_sup(alt, k, folded, s, kind);
  return LrResult{a.value - b.value, a.value, b.value, a.index, b.index};
}

ObservedSfs observe(const SfsVector& sfs, bool folded) {
  if (folded) return ObservedSfs::folded_from(sfs.sample_size(), sfs.folded());
  return ObservedSfs::unfolded(sfs);
}

void validate_counts(const GridTables& null, const GridTables& alt, const ObservedSfs& sfs) {
  if (null.sample_size() != alt.sample_size()) {
    throw ArgumentError("null and alternative tables use different sample sizes");
  }
  if (sfs.n != null.sample_size()) {
    throw ArgumentError("SFS sample size " + std::to_string(sfs.n) + " does not match n = " +
                        std::to_string(null.sample_size()));
  }
}

}  // namespace

LrResult lr_statistic(const GridTables& null, const GridTables& alt, const ObservedSfs& sfs,
                      std::int64_t s, LikelihoodKind kind) {
  validate_counts(null, alt, sfs);
  // phi sums to one for every model, so the Poisson -s * sum(phi) term is shared.
  return lr_sparse(null, alt, sparse(sfs.counts), sfs.folded, s, kind);
}

LrResult lr_statistic(const HypothesisGrid& null, const HypothesisGrid& alt, const SfsVector& sfs,
                      std::int64_t s, LikelihoodKind kind, const GrowthOptions& growth) {
  const int n = sfs.sample_size();
  return lr_statistic(GridTables(null, n, growth), GridTables(alt, n, growth),
                      ObservedSfs::unfolded(sfs), s, kind);
}

double lower_quantile(std::vector<double> sample, double level) {
  if (sample.empty()) throw ArgumentError("quantile of an empty sample");
  std::sort(sample.begin(), sample.end());
  const auto allowed = static_cast<std::ptrdiff_t>(std::floor(level * sample.size() + 1e-12));
  std::ptrdiff_t idx = allowed - 1;
  while (idx >= 0) {
    const double v = sample[idx];
    const auto at_most = std::upper_bound(sample.begin(), sample.end(), v) - sample.begin();
    if (at_most <= allowed) return v;
    idx = (std::lower_bound(sample.begin(), sample.end(), v) - sample.begin()) - 1;
  }
  return kNegInf;
}

TestCalibration calibrate(const GridTables& null, const GridTables& alt, std::int64_t s,
                          double level, const CalibrationOptions& options) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("test level must lie in (0,1)");
  if (options.replicates < 100) throw ArgumentError("calibration needs at least 100 replicates");
  if (s < 0) throw ArgumentError("number of segregating sites must be >= 0");
  if (null.sample_size() != alt.sample_size()) {
    throw ArgumentError("null and alternative tables use different sample sizes");
  }
  const int n = null.sample_size();
  const int workers = options.workers > 0 ? options.workers : default_workers();
  const std::size_t models = null.size();
  const std::size_t reps = options.replicates;

  std::vector<std::unique_ptr<GenealogySimulator>> simulators(models);
  parallel_for(models, workers, [&](std::size_t m) {
    simulators[m] = std::make_unique<GenealogySimulator>(null.grid().models[m], n);
  });

  std::vector<double> rho(models * reps);
  parallel_for(models * reps, workers, [&](std::size_t job) {
    const std::size_t m = job / reps;
    const std::size_t r = job % reps;
    Rng rng = make_stream(stream_seed(options.seed, m), r);
    const FamilySizeLengths lengths = simulators[m]->simulate(rng);
    SfsVector sfs;
    std::int64_t used = s;
    if (options.poisson_simulation) {
      const double theta = 2.0 * static_cast<double>(s) / null.expected_total_length(m);
      sfs = theta > 0.0 ? drop_mutations_poisson(lengths, theta, rng) : SfsVector(n);
      used = sfs.segregating_sites();
    } else {
      sfs = drop_mutations_fixed_s(lengths, s, rng);
    }
    const ObservedSfs observed = observe(sfs, options.folded);
    rho[job] = lr_sparse(null, alt, sparse(observed.counts), options.folded, used, options.kind).rho;
  });

  TestCalibration result;
  result.null_grid = null.grid();
  result.alt_grid = alt.grid();
  result.n = n;
  result.s = s;
  result.level = level;
  result.replicates_used = reps;
  result.kind = options.kind;
  result.poisson_simulation = options.poisson_simulation;
  result.folded = options.folded;
  result.model_quantiles.resize(models);
  for (std::size_t m = 0; m < models; ++m) {
    result.model_quantiles[m] = lower_quantile(
        std::vector<double>(rho.begin() + m * reps, rho.begin() + (m + 1) * reps), level);
  }
  result.critical_value =
      *std::min_element(result.model_quantiles.begin(), result.model_quantiles.end());
  result.model_size.resize(models);
  for (std::size_t m = 0; m < models; ++m) {
    const auto first = rho.begin() + m * reps;
    const auto rejected = std::count_if(first, first + reps, [&](double v) {
      return v <= result.critical_value;
    });
    result.model_size[m] = static_cast<double>(rejected) / static_cast<double>(reps);
  }
  return result;
}

PowerEstimate power(const TestCalibration& calibration, const GridTables& null,
                    const GridTables& alt, const CoalescentModel& truth,
                    const CalibrationOptions& options) {
  if (options.replicates < 1) throw ArgumentError("power needs at least one replicate");
  const int n = calibration.n;
  if (null.sample_size() != n || alt.sample_size() != n) {
    throw ArgumentError("tables do not match the calibrated sample size");
  }
  const int workers = options.workers > 0 ? options.workers : default_workers();
  const std::int64_t s = calibration.s;
  const GenealogySimulator simulator(truth, n);
  const double theta = calibration.poisson_simulation && s > 0 ? watterson(truth, n, s) : 0.0;
  const std::uint64_t master = stream_seed(options.seed, kPowerStream);

  std::vector<char> rejected(options.replicates, 0);
  parallel_for(options.replicates, workers, [&](std::size_t r) {
    Rng rng = make_stream(master, r);
    const FamilySizeLengths lengths = simulator.simulate(rng);
    SfsVector sfs;
    std::int64_t used = s;
    if (calibration.poisson_simulation) {
      sfs = theta > 0.0 ? drop_mutations_poisson(lengths, theta, rng) : SfsVector(n);
      used = sfs.segregating_sites();
    } else {
      sfs = drop_mutations_fixed_s(lengths, s, rng);
    }
    const ObservedSfs observed = observe(sfs, calibration.folded);
    const double rho =
        lr_sparse(null, alt, sparse(observed.counts), calibration.folded, used, calibration.kind).rho;
    rejected[r] = rho <= calibration.critical_value ? 1 : 0;
  });

  const double reps = static_cast<double>(options.replicates);
  const double hits = static_cast<double>(std::count(rejected.begin(), rejected.end(), 1));
  const double p = hits / reps;
  return PowerEstimate{p, std::sqrt(p * (1.0 - p) / reps), options.replicates};
}

}  // namespace coalstat
