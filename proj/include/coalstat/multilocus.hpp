#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "coalstat/inference.hpp"
#include "coalstat/model.hpp"
#include "coalstat/sfs.hpp"

namespace coalstat {

// Locus-averaged proportions of singletons (zeta1) and of mutations in
// classes j >= k (zetabar). Loci without segregating sites are skipped.
struct MultiLocusSummary {
  double zeta1 = 0.0;
  double zetabar = 0.0;
  int k = 2;
  int loci_used = 0;
};

MultiLocusSummary summarize(const std::vector<SfsVector>& loci, int k);

using Point2 = std::array<double, 2>;
// Symmetric 2x2 matrix stored as {h11, h12, h22}.
using Sym2 = std::array<double, 3>;

// Gaussian kernel density estimate with a full bandwidth matrix H:
// f(x) = (1/M) sum_m N(x; p_m, H).
class KdeModel {
 public:
  KdeModel(std::vector<Point2> points, const Sym2& bandwidth, bool fallback);

  const std::vector<Point2>& points() const { return points_; }
  const Sym2& bandwidth() const { return bandwidth_; }
  // True when the sample covariance was degenerate and a diagonal bandwidth
  // was substituted.
  bool fallback() const { return fallback_; }

  double log_density(const Point2& x) const;
  double density(const Point2& x) const;

 private:
  std::vector<Point2> points_;
  Sym2 bandwidth_;
  Sym2 inverse_;
  double log_norm_;
  bool fallback_;
};

// Silverman's rule H = M^{-1/3} * sample covariance (d = 2), unless an
// explicit SPD bandwidth is given.
KdeModel kde_fit(std::vector<Point2> points, const std::optional<Sym2>& bandwidth = std::nullopt);
double kde_eval(const KdeModel& model, const Point2& x);

struct MultiLocusOptions {
  int n = 100;
  int loci = 23;
  int k = 15;
  // Replicates per model, shared equally between the targets.
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  int workers = 0;
  // theta of each share is set so that E[segregating sites per locus] hits
  // the target under the model being simulated.
  std::vector<double> targets = {10, 20, 30, 40, 50};
  bool unlinked = true;
  std::vector<double> recombination;
  // Genealogies used to estimate E[B] for Xi models.
  std::size_t pilot_replicates = 4000;
  std::optional<Sym2> bandwidth;
};

// theta per target for a model.
std::vector<double> multilocus_thetas(const CoalescentModel& model, const MultiLocusOptions& options);

// Replicate r uses target r mod T and stream make_stream(seed, r).
std::vector<MultiLocusSummary> simulate_summaries(const CoalescentModel& model,
                                                  const MultiLocusOptions& options,
                                                  const std::vector<double>& thetas,
                                                  std::size_t replicates, std::uint64_t seed);

struct MultiLocusFit {
  CoalescentModel model;
  std::vector<double> thetas;
  KdeModel kde;
  std::size_t dropped = 0;  // replicates without any segregating site
};

// Simulates options.replicates summaries under `model` with a seed derived
// from options.seed and the model name, and fits the KDE.
MultiLocusFit fit_multilocus(const CoalescentModel& model, const MultiLocusOptions& options);

struct MultiLocusLr {
  double statistic = 0.0;  // log sup density(null) - log sup density(alt)
  std::vector<double> null_log_density;
  std::vector<double> alt_log_density;
  std::size_t argmax_null = 0;
  std::size_t argmax_alt = 0;
  // Set when the best density of either grid is below 1e-6.
  bool low_density = false;
};

MultiLocusLr multilocus_lr(const std::vector<MultiLocusFit>& null,
                           const std::vector<MultiLocusFit>& alt, const MultiLocusSummary& observed);
MultiLocusLr multilocus_lr(const HypothesisGrid& null, const HypothesisGrid& alt,
                           const MultiLocusSummary& observed, const MultiLocusOptions& options);

std::vector<MultiLocusFit> fit_grid(const HypothesisGrid& grid, const MultiLocusOptions& options);

struct MultiLocusCalibration {
  double level = 0.05;
  double critical_value = 0.0;
  std::size_t replicates = 0;
  std::vector<double> model_quantiles;
  std::vector<double> model_size;
};

// Datasets simulated under each null model with seeds independent of the
// fits; critical value = min over null models of the level-quantile.
MultiLocusCalibration multilocus_calibrate(const std::vector<MultiLocusFit>& null,
                                           const std::vector<MultiLocusFit>& alt,
                                           const MultiLocusOptions& options, double level,
                                           std::size_t replicates, std::uint64_t seed);

PowerEstimate multilocus_power(const MultiLocusCalibration& calibration,
                               const std::vector<MultiLocusFit>& null,
                               const std::vector<MultiLocusFit>& alt, const CoalescentModel& truth,
                               const MultiLocusOptions& options, std::size_t replicates,
                               std::uint64_t seed);

struct CorrelationEstimate {
  double value = 0.0;
  double lower = 0.0;  // bootstrap percentile interval
  double upper = 0.0;
  std::size_t replicates = 0;
};

// Mean Pearson correlation over locus pairs of per-locus total branch
// length, with a percentile bootstrap over replicates.
CorrelationEstimate locus_length_correlation(const CoalescentModel& model,
                                             const MultiLocusOptions& options,
                                             std::size_t replicates, std::size_t bootstrap,
                                             double confidence, std::uint64_t seed);

}  // namespace coalstat
