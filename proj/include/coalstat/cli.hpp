#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coalstat/inference.hpp"
#include "coalstat/model.hpp"
#include "coalstat/multilocus.hpp"

namespace coalstat {

// Bad command line: unknown flag, missing required flag, malformed value.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command {
  expected_sfs,
  tables,
  simulate,
  watterson,
  lr_test,
  power,
  arg_simulate,
  multilocus_lr,
  kde
};

std::string to_string(Command command);

struct RunConfig {
  Command command = Command::expected_sfs;

  std::optional<CoalescentModel> model;
  std::optional<HypothesisGrid> null_grid;
  std::optional<HypothesisGrid> alt_grid;
  std::vector<CoalescentModel> truths;

  std::optional<int> n;
  int loci = 1;
  std::optional<double> theta;
  std::optional<std::int64_t> s;
  std::size_t replicates = 1000;
  std::size_t power_replicates = 1000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = COALSTAT_WORKERS or hardware concurrency
  double level = 0.05;
  int k = 15;

  bool folded = false;
  bool summary = false;
  bool unlinked = false;
  std::vector<double> recombination;
  LikelihoodKind likelihood = LikelihoodKind::fixed_s;
  bool poisson_simulation = false;
  std::size_t growth_replicates = 100000;
  std::optional<double> mu_year;
  std::optional<double> mu_generation;

  std::vector<double> targets = {10, 20, 30, 40, 50};
  std::size_t pilot_replicates = 4000;
  std::size_t calibration_replicates = 0;
  std::optional<Sym2> bandwidth;
  int grid_size = 50;

  std::string input;   // --sfs, --obs or --in
  std::string output;  // empty = stdout
  std::string grid_output;
};

// args excludes the program name. Throws UsageError for command-line
// problems and the library's DomainError / ArgumentError / ParseError for
// invalid values. Returns nullopt when help was requested (text in `help`).
std::optional<RunConfig> parse_args(const std::vector<std::string>& args,
                                    std::string* help = nullptr);

// Executes a validated configuration, writing results to `out` unless an
// output path is set.
void run(const RunConfig& config, std::ostream& out);

// parse_args + run with exit codes 0 ok, 2 usage, 3 invalid value,
// 4 degenerate data.
int main_entry(int argc, char** argv);

}  // namespace coalstat
