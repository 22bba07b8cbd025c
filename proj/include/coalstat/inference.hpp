#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "coalstat/model.hpp"
#include "coalstat/recursions.hpp"
#include "coalstat/sfs.hpp"

namespace coalstat {

// theta_hat = 2 s / E[B^{(n)}]. Xi models use a Monte Carlo estimate of
// E[B^{(n)}] with `growth.replicates` genealogies.
double watterson(const CoalescentModel& model, int n, std::int64_t s,
                 const GrowthOptions& growth = {});

// Years per coalescent time unit, (theta_hat / 2) / mu_hat.
double real_time_unit(double theta_hat, double mu_per_year);
// c_N ~ 2 mu / theta_hat for a per-generation mutation rate mu.
double pair_coalescence_probability(double mu_per_generation, double theta_hat);

// Observed spectrum, unfolded (xi_1..xi_{n-1}) or folded (eta_1..eta_{n/2}).
struct ObservedSfs {
  int n = 0;
  std::vector<std::int64_t> counts;
  bool folded = false;

  static ObservedSfs unfolded(const SfsVector& sfs);
  static ObservedSfs folded_from(int n, std::vector<std::int64_t> eta);
  std::int64_t total() const;
};

// log of s!/(k_1!...k_m!) prod phi_i^{k_i}; -inf if k_i > 0 where phi_i = 0.
double fixed_s_loglik(const std::vector<double>& phi, const std::vector<std::int64_t>& counts,
                      std::int64_t s);
// sum_i [-s phi_i + k_i ln(s phi_i) - ln k_i!], with 0 ln 0 = 0.
double poisson_approx_loglik(const std::vector<double>& phi,
                             const std::vector<std::int64_t>& counts, std::int64_t s);

double fixed_s_loglik(const CoalescentModel& model, int n, const SfsVector& sfs, std::int64_t s,
                      const GrowthOptions& growth = {});
double poisson_approx_loglik(const CoalescentModel& model, int n, const SfsVector& sfs,
                             std::int64_t s, const GrowthOptions& growth = {});

enum class LikelihoodKind { fixed_s, poisson };
LikelihoodKind parse_likelihood_kind(std::string_view text);
std::string to_string(LikelihoodKind kind);

struct HypothesisGrid {
  std::string label;
  std::vector<CoalescentModel> models;
};

// Terms joined by '+'. A term is a single model spec (`beta:1.5`) or a range
// `family:start:stop:step` inclusive of both ends. beta:...:2 maps alpha = 2
// to Kingman, the alpha -> 2 limit. Duplicates are rejected.
HypothesisGrid parse_grid(std::string_view spec, std::string label = "");
HypothesisGrid growth_grid_default();
HypothesisGrid beta_grid_default();

// Normalised branch lengths for every model of a grid at one sample size,
// built once and shared read-only.
class GridTables {
 public:
  GridTables(const HypothesisGrid& grid, int n, const GrowthOptions& growth = {}, int workers = 0);

  const HypothesisGrid& grid() const { return grid_; }
  int sample_size() const { return n_; }
  std::size_t size() const { return grid_.models.size(); }
  const std::vector<double>& phi(std::size_t i, bool folded = false) const {
    return folded ? folded_phi_[i] : phi_[i];
  }
  const std::vector<double>& log_phi(std::size_t i, bool folded = false) const {
    return folded ? folded_log_phi_[i] : log_phi_[i];
  }
  double expected_total_length(std::size_t i) const { return total_length_[i]; }

  double loglik(std::size_t i, const ObservedSfs& sfs, std::int64_t s, LikelihoodKind kind) const;

 private:
  HypothesisGrid grid_;
  int n_;
  std::vector<std::vector<double>> phi_, log_phi_, folded_phi_, folded_log_phi_;
  std::vector<double> total_length_;
};

struct BranchSummary {
  std::vector<double> phi;
  double expected_total_length = 0.0;
};

// phi and E[B] for (model, n, growth options) from a process-wide cache.
std::shared_ptr<const BranchSummary> cached_branch_summary(const CoalescentModel& model, int n,
                                                           const GrowthOptions& growth = {});

struct LrResult {
  double rho = 0.0;  // sup loglik(null) - sup loglik(alt)
  double null_loglik = 0.0;
  double alt_loglik = 0.0;
  std::size_t argmax_null = 0;
  std::size_t argmax_alt = 0;
};

// Ties go to the smaller grid index. Throws DegenerateDataError if every
// model of a grid gives log-likelihood -inf.
LrResult lr_statistic(const GridTables& null, const GridTables& alt, const ObservedSfs& sfs,
                      std::int64_t s, LikelihoodKind kind);
LrResult lr_statistic(const HypothesisGrid& null, const HypothesisGrid& alt, const SfsVector& sfs,
                      std::int64_t s, LikelihoodKind kind, const GrowthOptions& growth = {});

struct CalibrationOptions {
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  int workers = 0;
  LikelihoodKind kind = LikelihoodKind::fixed_s;
  // Simulate with Poisson(theta_hat) mutations instead of exactly s; the
  // statistic then uses each dataset's own segregating-site count.
  bool poisson_simulation = false;
  bool folded = false;
};

struct TestCalibration {
  HypothesisGrid null_grid;
  HypothesisGrid alt_grid;
  int n = 0;
  std::int64_t s = 0;
  double level = 0.05;
  double critical_value = 0.0;
  std::size_t replicates_used = 0;
  LikelihoodKind kind = LikelihoodKind::fixed_s;
  bool poisson_simulation = false;
  bool folded = false;
  std::vector<double> model_quantiles;  // per null model
  std::vector<double> model_size;       // per null model, P(rho <= critical_value)
};

// Largest sample value v with #{x <= v} <= floor(level * size); -inf if none.
double lower_quantile(std::vector<double> sample, double level);

// Critical value = min over null models of their empirical level-quantile
// of rho, so that every null model rejects with frequency <= level.
TestCalibration calibrate(const GridTables& null, const GridTables& alt, std::int64_t s,
                          double level, const CalibrationOptions& options = {});

struct PowerEstimate {
  double power = 0.0;
  double standard_error = 0.0;
  std::size_t replicates = 0;
};

// Fraction of datasets simulated under `truth` with rho <= critical value.
PowerEstimate power(const TestCalibration& calibration, const GridTables& null,
                    const GridTables& alt, const CoalescentModel& truth,
                    const CalibrationOptions& options = {});

}  // namespace coalstat
