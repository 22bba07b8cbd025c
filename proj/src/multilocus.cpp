#include "coalstat/multilocus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "coalstat/error.hpp"
#include "coalstat/parallel.hpp"
#include "coalstat/simulator.hpp"
#include "coalstat/xi_arg.hpp"

namespace coalstat {

namespace {

constexpr std::uint64_t kPowerStream = 0x706F776572ULL;
constexpr std::uint64_t kBootstrapStream = 0x626F6F74ULL;
constexpr double kLowDensity = 1e-6;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void validate(const MultiLocusOptions& options) {
  if (options.n < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(options.n));
  if (options.loci < 1) throw ArgumentError("locus count must be >= 1");
  if (options.k < 2 || options.k > options.n - 1) {
    throw ArgumentError("cutoff k must lie in [2, n-1], got " + std::to_string(options.k));
  }
  if (options.replicates < 1) throw ArgumentError("need at least one replicate per model");
  if (options.targets.empty()) throw ArgumentError("need at least one segregating-site target");
  for (double t : options.targets) {
    if (!(t > 0.0)) throw DomainError("segregating-site targets must be > 0");
  }
}

ArgOptions arg_options(const MultiLocusOptions& options) {
  ArgOptions arg;
  arg.n = options.n;
  arg.loci = options.loci;
  arg.unlinked = options.unlinked;
  arg.recombination = options.recombination;
  return arg;
}

double log_sum_exp(const std::vector<double>& v) {
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - top);
  return top + std::log(sum);
}

std::vector<double> log_densities(const std::vector<MultiLocusFit>& fits, const Point2& x) {
  std::vector<double> out;
  out.reserve(fits.size());
  for (const auto& fit : fits) out.push_back(fit.kde.log_density(x));
  return out;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double statistic(const std::vector<MultiLocusFit>& null, const std::vector<MultiLocusFit>& alt,
                 const MultiLocusSummary& s) {
  const Point2 x{s.zeta1, s.zetabar};
  double best_null = -INFINITY;
  for (const auto& fit : null) best_null = std::max(best_null, fit.kde.log_density(x));
  double best_alt = -INFINITY;
  for (const auto& fit : alt) best_alt = std::max(best_alt, fit.kde.log_density(x));
  return best_null - best_alt;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y,
               const std::vector<std::size_t>& idx) {
  const double m = static_cast<double>(idx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i : idx) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i : idx) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

MultiLocusSummary summarize(const std::vector<SfsVector>& loci, int k) {
  if (loci.empty()) throw ArgumentError("summary needs at least one locus");
  const int n = loci.front().sample_size();
  if (k < 2 || k > n - 1) {
    throw ArgumentError("cutoff k must lie in [2, n-1] = [2, " + std::to_string(n - 1) + "], got " +
                        std::to_string(k));
  }
  MultiLocusSummary out;
  out.k = k;
  double z1 = 0.0;
  double zb = 0.0;
  for (const SfsVector& sfs : loci) {
    if (sfs.sample_size() != n) throw ArgumentError("loci have different sample sizes");
    const std::int64_t s = sfs.segregating_sites();
    if (s == 0) continue;
    std::int64_t high = 0;
    for (int j = k; j <= n - 1; ++j) high += sfs.count(j);
    z1 += static_cast<double>(sfs.count(1)) / static_cast<double>(s);
    zb += static_cast<double>(high) / static_cast<double>(s);
    ++out.loci_used;
  }
  if (out.loci_used == 0) throw DegenerateDataError("no locus has a segregating site");
  out.zeta1 = z1 / out.loci_used;
  out.zetabar = zb / out.loci_used;
  return out;
}

KdeModel::KdeModel(std::vector<Point2> points, const Sym2& bandwidth, bool fallback)
    : points_(std::move(points)), bandwidth_(bandwidth), fallback_(fallback) {
  if (points_.empty()) throw ArgumentError("KDE needs at least one point");
  const double det = bandwidth[0] * bandwidth[2] - bandwidth[1] * bandwidth[1];
  if (!(bandwidth[0] > 0.0) || !(bandwidth[2] > 0.0) || !(det > 0.0)) {
    throw DomainError("KDE bandwidth must be symmetric positive definite");
  }
  inverse_ = {bandwidth[2] / det, -bandwidth[1] / det, bandwidth[0] / det};
  log_norm_ = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det);
}

double KdeModel::log_density(const Point2& x) const {
  std::vector<double> terms(points_.size());
  for (std::size_t m = 0; m < points_.size(); ++m) {
    const double dx = x[0] - points_[m][0];
    const double dy = x[1] - points_[m][1];
    terms[m] = -0.5 * (inverse_[0] * dx * dx + 2.0 * inverse_[1] * dx * dy + inverse_[2] * dy * dy);
  }
  return log_sum_exp(terms) - std::log(static_cast<double>(points_.size())) + log_norm_;
}

double KdeModel::density(const Point2& x) const { return std::exp(log_density(x)); }

KdeModel kde_fit(std::vector<Point2> points, const std::optional<Sym2>& bandwidth) {
  if (points.empty()) throw ArgumentError("KDE needs at least one point");
  if (bandwidth) return KdeModel(std::move(points), *bandwidth, false);
  const double m = static_cast<double>(points.size());
  const double scale = std::pow(m, -1.0 / 3.0);
  double c11 = 0.0, c12 = 0.0, c22 = 0.0;
  if (points.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
      mx += p[0];
      my += p[1];
    }
    mx /= m;
    my /= m;
    for (const auto& p : points) {
      c11 += (p[0] - mx) * (p[0] - mx);
      c12 += (p[0] - mx) * (p[1] - my);
      c22 += (p[1] - my) * (p[1] - my);
    }
    c11 /= m - 1.0;
    c12 /= m - 1.0;
    c22 /= m - 1.0;
  }
  const double det = c11 * c22 - c12 * c12;
  if (c11 > 1e-12 && c22 > 1e-12 && det > 1e-10 * c11 * c22) {
    return KdeModel(std::move(points), {scale * c11, scale * c12, scale * c22}, false);
  }
  const Sym2 diagonal{scale * std::max(c11, 1e-6), 0.0, scale * std::max(c22, 1e-6)};
  return KdeModel(std::move(points), diagonal, true);
}

double kde_eval(const KdeModel& model, const Point2& x) { return model.density(x); }

std::vector<double> multilocus_thetas(const CoalescentModel& model, const MultiLocusOptions& options) {
  validate(options);
  double total_length = 0.0;
  if (model.kind() == ModelKind::xi_four_fold) {
    GrowthOptions pilot;
    pilot.replicates = options.pilot_replicates;
    pilot.seed = stream_seed(options.seed, fnv1a("pilot:" + model.to_string()));
    pilot.workers = options.workers;
    total_length = 2.0 / watterson(model, options.n, 1, pilot);
  } else {
    GrowthOptions growth;
    growth.workers = options.workers;
    total_length = cached_branch_summary(model, options.n, growth)->expected_total_length;
  }
  std::vector<double> thetas;
  for (double target : options.targets) thetas.push_back(2.0 * target / total_length);
  return thetas;
}

std::vector<MultiLocusSummary> simulate_summaries(const CoalescentModel& model,
                                                  const MultiLocusOptions& options,
                                                  const std::vector<double>& thetas,
                                                  std::size_t replicates, std::uint64_t seed) {
  validate(options);
  if (thetas.empty()) throw ArgumentError("need at least one theta");
  const XiArgSimulator simulator(model, arg_options(options));
  const int workers = options.workers > 0 ? options.workers : default_workers();
  std::vector<MultiLocusSummary> out;
  out.reserve(replicates);
  ordered_replicates<std::optional<MultiLocusSummary>>(
      replicates, workers,
      [&](std::size_t rep, std::optional<MultiLocusSummary>& result) {
        Rng rng = make_stream(seed, rep);
        const double theta = thetas[rep % thetas.size()];
        const auto lengths = simulator.simulate(rng);
        std::vector<SfsVector> loci;
        loci.reserve(lengths.size());
        for (const auto& l : lengths) loci.push_back(drop_mutations_poisson(l, theta, rng));
        try {
          result = summarize(loci, options.k);
        } catch (const DegenerateDataError&) {
          result.reset();
        }
      },
      [&](std::size_t, const std::optional<MultiLocusSummary>& result) {
        if (result) out.push_back(*result);
      },
      256);
  return out;
}

MultiLocusFit fit_multilocus(const CoalescentModel& model, const MultiLocusOptions& options) {
  std::vector<double> thetas = multilocus_thetas(model, options);
  const std::uint64_t seed = stream_seed(options.seed, fnv1a(model.to_string()));
  const auto summaries = simulate_summaries(model, options, thetas, options.replicates, seed);
  if (summaries.empty()) throw DegenerateDataError("no simulated replicate had segregating sites");
  std::vector<Point2> points;
  points.reserve(summaries.size());
  for (const auto& s : summaries) points.push_back({s.zeta1, s.zetabar});
  return MultiLocusFit{model, std::move(thetas), kde_fit(std::move(points), options.bandwidth),
                       options.replicates - summaries.size()};
}

std::vector<MultiLocusFit> fit_grid(const HypothesisGrid& grid, const MultiLocusOptions& options) {
  if (grid.models.empty()) throw ArgumentError("hypothesis grid '" + grid.label + "' is empty");
  std::vector<MultiLocusFit> fits;
  fits.reserve(grid.models.size());
  for (const auto& model : grid.models) fits.push_back(fit_multilocus(model, options));
  return fits;
}

MultiLocusLr multilocus_lr(const std::vector<MultiLocusFit>& null,
                           const std::vector<MultiLocusFit>& alt, const MultiLocusSummary& observed) {
  if (null.empty() || alt.empty()) throw ArgumentError("both grids must be nonempty");
  const Point2 x{observed.zeta1, observed.zetabar};
  MultiLocusLr out;
  out.null_log_density = log_densities(null, x);
  out.alt_log_density = log_densities(alt, x);
  out.argmax_null = argmax(out.null_log_density);
  out.argmax_alt = argmax(out.alt_log_density);
  const double best_null = out.null_log_density[out.argmax_null];
  const double best_alt = out.alt_log_density[out.argmax_alt];
  out.statistic = best_null - best_alt;
  const double floor = std::log(kLowDensity);
  out.low_density = best_null < floor || best_alt < floor;
  return out;
}

MultiLocusLr multilocus_lr(const HypothesisGrid& null, const HypothesisGrid& alt,
                           const MultiLocusSummary& observed, const MultiLocusOptions& options) {
  return multilocus_lr(fit_grid(null, options), fit_grid(alt, options), observed);
}

MultiLocusCalibration multilocus_calibrate(const std::vector<MultiLocusFit>& null,
                                           const std::vector<MultiLocusFit>& alt,
                                           const MultiLocusOptions& options, double level,
                                           std::size_t replicates, std::uint64_t seed) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("test level must lie in (0,1)");
  if (replicates < 1) throw ArgumentError("calibration needs at least one replicate");
  if (null.empty() || alt.empty()) throw ArgumentError("both grids must be nonempty");
  MultiLocusCalibration out;
  out.level = level;
  out.replicates = replicates;
  std::vector<std::vector<double>> stats(null.size());
  for (std::size_t m = 0; m < null.size(); ++m) {
    const auto data =
        simulate_summaries(null[m].model, options, null[m].thetas, replicates, stream_seed(seed, m));
    for (const auto& s : data) stats[m].push_back(statistic(null, alt, s));
    out.model_quantiles.push_back(lower_quantile(stats[m], level));
  }
  out.critical_value = *std::min_element(out.model_quantiles.begin(), out.model_quantiles.end());
  for (const auto& v : stats) {
    const auto hits = std::count_if(v.begin(), v.end(), [&](double x) {
      return x <= out.critical_value;
    });
    out.model_size.push_back(static_cast<double>(hits) / static_cast<double>(v.size()));
  }
  return out;
}

PowerEstimate multilocus_power(const MultiLocusCalibration& calibration,
                               const std::vector<MultiLocusFit>& null,
                               const std::vector<MultiLocusFit>& alt, const CoalescentModel& truth,
                               const MultiLocusOptions& options, std::size_t replicates,
                               std::uint64_t seed) {
  if (replicates < 1) throw ArgumentError("power needs at least one replicate");
  const auto thetas = multilocus_thetas(truth, options);
  const auto data =
      simulate_summaries(truth, options, thetas, replicates, stream_seed(seed, kPowerStream));
  std::size_t hits = 0;
  for (const auto& s : data) hits += statistic(null, alt, s) <= calibration.critical_value ? 1 : 0;
  const double reps = static_cast<double>(data.size());
  const double p = reps > 0 ? static_cast<double>(hits) / reps : 0.0;
  return PowerEstimate{p, reps > 0 ? std::sqrt(p * (1.0 - p) / reps) : 0.0, data.size()};
}

CorrelationEstimate locus_length_correlation(const CoalescentModel& model,
                                             const MultiLocusOptions& options,
                                             std::size_t replicates, std::size_t bootstrap,
                                             double confidence, std::uint64_t seed) {
  if (options.loci < 2) throw ArgumentError("correlation needs at least two loci");
  if (replicates < 3) throw ArgumentError("correlation needs at least three replicates");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0,1)");
  const XiArgSimulator simulator(model, arg_options(options));
  const int workers = options.workers > 0 ? options.workers : default_workers();
  const int loci = options.loci;
  std::vector<std::vector<double>> totals(loci, std::vector<double>(replicates));
  ordered_replicates<std::vector<double>>(
      replicates, workers,
      [&](std::size_t rep, std::vector<double>& out) {
        Rng rng = make_stream(seed, rep);
        const auto lengths = simulator.simulate(rng);
        out.clear();
        for (const auto& l : lengths) out.push_back(l.total());
      },
      [&](std::size_t rep, const std::vector<double>& out) {
        for (int l = 0; l < loci; ++l) totals[l][rep] = out[l];
      },
      256);

  auto mean_correlation = [&](const std::vector<std::size_t>& idx) {
    double sum = 0.0;
    int pairs = 0;
    for (int a = 0; a < loci; ++a) {
      for (int b = a + 1; b < loci; ++b) {
        sum += pearson(totals[a], totals[b], idx);
        ++pairs;
      }
    }
    return sum / pairs;
  };

  std::vector<std::size_t> idx(replicates);
  for (std::size_t i = 0; i < replicates; ++i) idx[i] = i;
  CorrelationEstimate out;
  out.replicates = replicates;
  out.value = mean_correlation(idx);
  if (bootstrap == 0) {
    out.lower = out.upper = out.value;
    return out;
  }
  Rng rng = make_stream(seed, kBootstrapStream);
  std::uniform_int_distribution<std::size_t> pick(0, replicates - 1);
  std::vector<double> boot(bootstrap);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    for (auto& i : idx) i = pick(rng);
    boot[b] = mean_correlation(idx);
  }
  std::sort(boot.begin(), boot.end());
  const double tail = (1.0 - confidence) / 2.0;
  auto at = [&](double q) {
    const auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(bootstrap - 1)));
    return boot[std::min(i, bootstrap - 1)];
  };
  out.lower = at(tail);
  out.upper = at(1.0 - tail);
  return out;
}

}  // namespace coalstat
