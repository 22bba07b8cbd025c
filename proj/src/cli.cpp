#include "coalstat/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "coalstat/error.hpp"
#include "coalstat/io.hpp"
#include "coalstat/parallel.hpp"
#include "coalstat/recursions.hpp"
#include "coalstat/simulator.hpp"
#include "coalstat/xi_arg.hpp"
#include "json.hpp"

namespace coalstat {

namespace {

using nlohmann::json;

struct Raw {
  std::string model, null_grid, alt_grid, truth, family;
  std::string recomb, targets, bandwidth, likelihood = "fixed-s";
  int n = 0;
  int loci = 1;
  double theta = 0.0;
  long long s = 0;
  long long fixed_s = 0;
  long long reps = 1000;
  long long power_reps = 1000;
  long long growth_reps = 100000;
  long long pilot_reps = 4000;
  long long cal_reps = 0;
  std::uint64_t seed = 1;
  int workers = 0;
  double level = 0.05;
  int k = 15;
  double mu_year = 0.0;
  double mu_generation = 0.0;
  int grid_size = 50;
  bool folded = false, summary = false, unlinked = false, poisson_simulation = false;
  std::string input, output, grid_output;
};

const char* const kCommands[] = {"expected-sfs", "tables",       "simulate",      "watterson", "lr-test",
                                 "power",        "arg-simulate", "multilocus-lr", "kde"};

std::string join(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (!value.is_array()) return value.dump();
  std::string out;
  for (const auto& item : value) out += (out.empty() ? "" : ",") + join(item);
  return out;
}

// Splits off `--config FILE` and returns the remaining args plus the file.
std::vector<std::string> split_config(const std::vector<std::string>& args, json& config) {
  std::string path;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config: missing file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  config = json::object();
  if (path.empty()) return kept;

  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("--config: " + std::string(e.what()));
  }
  if (!config.is_object()) throw UsageError("--config: expected a JSON object");
  return kept;
}

// Appends `--key value` for every config entry that the chosen subcommand
// accepts and whose flag is absent from args. Keys of other subcommands are
// ignored; keys no subcommand knows are an error.
void merge_config(CLI::App& app, const json& config, std::vector<std::string>& args) {
  if (config.empty()) return;
  CLI::App* sub = nullptr;
  for (const auto& a : args) {
    if (a.empty() || a[0] == '-') continue;
    for (CLI::App* candidate : app.get_subcommands({})) {
      if (candidate->get_name() == a) sub = candidate;
    }
    break;
  }
  if (sub == nullptr) return;

  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));
  }
  for (const auto& [key, value] : config.items()) {
    if (sub->get_option_no_throw("--" + key) == nullptr) {
      bool known = false;
      for (CLI::App* other : app.get_subcommands({})) {
        known = known || other->get_option_no_throw("--" + key) != nullptr;
      }
      if (!known) throw UsageError("--config: unknown key '" + key + "'");
      continue;
    }
    if (given.count(key)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
    } else if (!value.is_null()) {
      args.push_back("--" + key);
      args.push_back(join(value));
    }
  }
}

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    try {
      out.push_back(parse_number(token));
    } catch (const ParseError& e) {
      throw ParseError(flag + ": " + e.what());
    }
  }
  return out;
}

template <class F>
auto with_flag(const std::string& flag, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw DomainError(flag + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(flag + ": " + e.what());
  }
}

CoalescentModel model_arg(const std::string& flag, const std::string& text) {
  return with_flag(flag, [&] { return parse_model(text); });
}

HypothesisGrid grid_arg(const std::string& flag, const std::string& text, const std::string& label) {
  return with_flag(flag, [&] { return parse_grid(text, label); });
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ArgumentError(message);
}

void check_n(int n) { require(n >= 2, "--n must be >= 2, got " + std::to_string(n)); }

std::size_t count_arg(const std::string& flag, long long value, long long minimum = 1) {
  require(value >= minimum, flag + " must be >= " + std::to_string(minimum) + ", got " +
                                std::to_string(value));
  return static_cast<std::size_t>(value);
}

double truth_parameter(const CoalescentModel& model) {
  if (model.kind() == ModelKind::kingman_growth) return model.growth_rate();
  switch (model.family().kind()) {
    case LambdaKind::kingman:
      return 2.0;
    case LambdaKind::beta:
    case LambdaKind::point_mass:
    case LambdaKind::two_atom:
      return model.family().parameter();
    default:
      return std::nan("");
  }
}

GrowthOptions growth_options(const RunConfig& config) {
  GrowthOptions g;
  g.replicates = config.growth_replicates;
  g.workers = config.workers;
  return g;
}

MultiLocusOptions multilocus_options(const RunConfig& config) {
  MultiLocusOptions o;
  o.n = config.n.value_or(2);
  o.loci = config.loci;
  o.k = config.k;
  o.replicates = config.replicates;
  o.seed = config.seed;
  o.workers = config.workers;
  o.targets = config.targets;
  o.unlinked = config.recombination.empty();
  o.recombination = config.recombination;
  o.pilot_replicates = config.pilot_replicates;
  o.bandwidth = config.bandwidth;
  return o;
}

CalibrationOptions calibration_options(const RunConfig& config) {
  CalibrationOptions o;
  o.replicates = config.replicates;
  o.seed = config.seed;
  o.workers = config.workers;
  o.kind = config.likelihood;
  o.poisson_simulation = config.poisson_simulation;
  o.folded = config.folded;
  return o;
}

void run_expected_sfs(const RunConfig& c, std::ostream& out) {
  std::vector<double> v = expected_sfs(*c.model, *c.n, *c.theta, growth_options(c));
  if (c.folded) v = fold(v);
  out << (c.folded ? "i,expected_folded_count\n" : "i,expected_count\n");
  for (std::size_t i = 0; i < v.size(); ++i) out << i + 1 << ',' << format_double(v[i]) << '\n';
}

void run_tables(const RunConfig& c, std::ostream& out) {
  out << to_json(build_tables(*c.model, *c.n, growth_options(c))).dump(2) << '\n';
}

void run_simulate(const RunConfig& c, std::ostream& out) {
  const MutationMode mode =
      c.theta ? MutationMode::poisson(*c.theta) : MutationMode::fixed(*c.s);
  BatchOptions batch{c.replicates, c.seed, c.workers};
  if (c.summary) {
    const SfsSummary summary = simulate_sfs_batch(*c.model, *c.n, mode, batch);
    out << "i,mean,se\n";
    for (std::size_t i = 0; i < summary.mean.size(); ++i) {
      out << i + 1 << ',' << format_double(summary.mean[i]) << ','
          << format_double(summary.standard_error[i]) << '\n';
    }
    return;
  }
  out << "rep,i,count\n";
  simulate_sfs_batch(*c.model, *c.n, mode, batch, [&](std::size_t rep, const SfsVector& sfs) {
    for (int i = 1; i < sfs.sample_size(); ++i) out << rep << ',' << i << ',' << sfs.count(i) << '\n';
  });
}

void run_watterson(const RunConfig& c, std::ostream& out) {
  const double theta = watterson(*c.model, *c.n, *c.s, growth_options(c));
  json j{{"model", c.model->to_string()}, {"n", *c.n}, {"s", *c.s}, {"theta", theta}};
  if (c.mu_year) j["years_per_time_unit"] = real_time_unit(theta, *c.mu_year);
  if (c.mu_generation) {
    j["pair_coalescence_probability"] = pair_coalescence_probability(*c.mu_generation, theta);
  }
  out << j.dump(2) << '\n';
}

void run_lr_test(const RunConfig& c, std::ostream& out) {
  const ObservedSfs sfs = read_sfs_csv(c.input, c.n, c.folded);
  require(sfs.total() == *c.s, "--s = " + std::to_string(*c.s) + " but the spectrum has " +
                                   std::to_string(sfs.total()) + " segregating sites");
  const GrowthOptions g = growth_options(c);
  const GridTables null(*c.null_grid, sfs.n, g, c.workers);
  const GridTables alt(*c.alt_grid, sfs.n, g, c.workers);
  const LrResult lr = lr_statistic(null, alt, sfs, *c.s, c.likelihood);
  const TestCalibration cal = calibrate(null, alt, *c.s, c.level, calibration_options(c));
  json j{{"rho", lr.rho},
         {"rho_star", cal.critical_value},
         {"reject", lr.rho <= cal.critical_value},
         {"argmax_null", c.null_grid->models[lr.argmax_null].to_string()},
         {"argmax_alt", c.alt_grid->models[lr.argmax_alt].to_string()},
         {"null_loglik", lr.null_loglik},
         {"alt_loglik", lr.alt_loglik},
         {"level", c.level},
         {"likelihood", to_string(c.likelihood)},
         {"replicates", cal.replicates_used}};
  out << j.dump(2) << '\n';
}

void run_power(const RunConfig& c, std::ostream& out) {
  const GrowthOptions g = growth_options(c);
  const GridTables null(*c.null_grid, *c.n, g, c.workers);
  const GridTables alt(*c.alt_grid, *c.n, g, c.workers);
  const TestCalibration cal = calibrate(null, alt, *c.s, c.level, calibration_options(c));
  CalibrationOptions options = calibration_options(c);
  options.replicates = c.power_replicates;
  options.seed = stream_seed(c.seed, 0x706F776572ULL);
  out << "truth_param,power,se\n";
  for (const CoalescentModel& truth : c.truths) {
    const PowerEstimate p = power(cal, null, alt, truth, options);
    out << format_double(truth_parameter(truth)) << ',' << format_double(p.power) << ','
        << format_double(p.standard_error) << '\n';
  }
}

void run_arg_simulate(const RunConfig& c, std::ostream& out) {
  ArgOptions options;
  options.n = *c.n;
  options.loci = c.loci;
  options.recombination = c.recombination;
  options.unlinked = c.unlinked;
  const XiArgSimulator simulator(*c.model, options);
  const double theta = *c.theta;
  out << "rep,locus,i,count\n";
  ordered_replicates<std::vector<SfsVector>>(
      c.replicates, c.workers,
      [&](std::size_t rep, std::vector<SfsVector>& loci) {
        Rng rng = make_stream(c.seed, rep);
        const auto lengths = simulator.simulate(rng);
        loci.clear();
        for (const auto& l : lengths) loci.push_back(drop_mutations_poisson(l, theta, rng));
      },
      [&](std::size_t rep, const std::vector<SfsVector>& loci) {
        write_locus_sfs_rows(out, static_cast<long long>(rep), loci);
      },
      256);
}

void run_multilocus_lr(const RunConfig& c, std::ostream& out) {
  const auto observed = read_locus_sfs_csv(c.input, c.n);
  if (observed.empty()) throw DegenerateDataError("--obs: no observations");
  RunConfig local = c;
  local.n = observed.begin()->second.front().sample_size();
  local.loci = static_cast<int>(observed.begin()->second.size());
  for (const auto& [rep, loci] : observed) {
    require(static_cast<int>(loci.size()) == local.loci,
            "--obs: replicate " + std::to_string(rep) + " has " + std::to_string(loci.size()) +
                " loci, expected " + std::to_string(local.loci));
  }
  require(c.recombination.empty() || static_cast<int>(c.recombination.size()) == local.loci - 1,
          "--recomb needs L - 1 = " + std::to_string(local.loci - 1) + " rates");
  require(c.k >= 2 && c.k <= *local.n - 1, "--k must lie in [2, n-1]");
  const MultiLocusOptions options = multilocus_options(local);
  const auto null = fit_grid(*c.null_grid, options);
  const auto alt = fit_grid(*c.alt_grid, options);

  std::optional<MultiLocusCalibration> cal;
  if (c.calibration_replicates > 0) {
    cal = multilocus_calibrate(null, alt, options, c.level, c.calibration_replicates,
                               stream_seed(c.seed, 0x63616CULL));
  }
  json results = json::array();
  for (const auto& [rep, loci] : observed) {
    const MultiLocusSummary summary = summarize(loci, c.k);
    if (summary.loci_used == 0) {
      throw DegenerateDataError("replicate " + std::to_string(rep) + " has no segregating sites");
    }
    const MultiLocusLr lr = multilocus_lr(null, alt, summary);
    json j{{"rep", rep},
           {"zeta1", summary.zeta1},
           {"zetabar", summary.zetabar},
           {"loci_used", summary.loci_used},
           {"statistic", lr.statistic},
           {"argmax_null", c.null_grid->models[lr.argmax_null].to_string()},
           {"argmax_alt", c.alt_grid->models[lr.argmax_alt].to_string()},
           {"low_density", lr.low_density}};
    if (cal) {
      j["critical_value"] = cal->critical_value;
      j["reject"] = lr.statistic <= cal->critical_value;
    }
    results.push_back(j);
  }
  json j{{"n", *local.n}, {"loci", local.loci}, {"k", c.k}, {"M", c.replicates},
         {"results", results}};
  out << j.dump(2) << '\n';
}

void run_kde(const RunConfig& c, std::ostream& out) {
  const std::vector<Point2> points = read_summaries_csv(c.input);
  if (points.size() < 2) throw DegenerateDataError("--in: need at least two summaries");
  const KdeModel model = kde_fit(points, c.bandwidth);
  json j = to_json(model);
  Point2 lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    for (int d = 0; d < 2; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  const double pad[2] = {3.0 * std::sqrt(model.bandwidth()[0]), 3.0 * std::sqrt(model.bandwidth()[2])};
  for (int d = 0; d < 2; ++d) {
    lo[d] -= pad[d];
    hi[d] += pad[d];
  }
  j["range"] = {{"zeta1", {lo[0], hi[0]}}, {"zetabar", {lo[1], hi[1]}}};
  out << j.dump(2) << '\n';

  if (c.grid_output.empty()) return;
  std::ofstream grid(c.grid_output);
  if (!grid) throw ArgumentError("--grid-out: cannot open '" + c.grid_output + "'");
  grid << "zeta1,zetabar,density\n";
  const int m = c.grid_size;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const Point2 x{lo[0] + (hi[0] - lo[0]) * a / (m - 1), lo[1] + (hi[1] - lo[1]) * b / (m - 1)};
      grid << format_double(x[0]) << ',' << format_double(x[1]) << ','
           << format_double(model.density(x)) << '\n';
    }
  }
}

}  // namespace

std::string to_string(Command command) { return kCommands[static_cast<int>(command)]; }

std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::string* help) {
  json config;
  std::vector<std::string> merged = split_config(args, config);

  CLI::App app{"Coalescent SFS computation, simulation and model testing", "coalstat"};
  app.require_subcommand(1, 1);
  Raw raw;

  auto model = [&](CLI::App* sub) {
    sub->add_option("--model", raw.model, "Model spec, e.g. beta:1.5 or growth:10")->required();
  };
  auto n = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--n", raw.n, "Sample size");
    if (required) o->required();
  };
  auto runtime = [&](CLI::App* sub) {
    sub->add_option("--seed", raw.seed, "Master seed");
    sub->add_option("--workers", raw.workers, "Worker threads (default: COALSTAT_WORKERS or all cores)");
  };
  auto out = [&](CLI::App* sub) { sub->add_option("--out", raw.output, "Output file (default stdout)"); };
  auto growth = [&](CLI::App* sub) {
    sub->add_option("--growth-reps", raw.growth_reps, "Genealogies behind growth-model level times");
  };
  auto grids = [&](CLI::App* sub, bool defaults) {
    auto* a = sub->add_option("--null", raw.null_grid, "Null grid spec");
    auto* b = sub->add_option("--alt", raw.alt_grid, "Alternative grid spec");
    if (!defaults) {
      a->required();
      b->required();
    }
  };
  auto test = [&](CLI::App* sub) {
    sub->add_option("--level", raw.level, "Test level a");
    sub->add_option("--reps", raw.reps, "Calibration replicates per null model");
    sub->add_option("--likelihood", raw.likelihood, "fixed-s or poisson");
    sub->add_flag("--poisson-sim", raw.poisson_simulation, "Simulate Poisson(theta) mutations");
    sub->add_flag("--folded", raw.folded, "Use the folded spectrum");
  };

  auto* expected = app.add_subcommand("expected-sfs", "Expected SFS from the recursions");
  model(expected);
  n(expected, true);
  expected->add_option("--theta", raw.theta, "Scaled mutation rate")->required();
  expected->add_flag("--folded", raw.folded, "Fold the spectrum");
  growth(expected);
  out(expected);

  auto* tables = app.add_subcommand("tables", "Dump recursion tables as JSON");
  model(tables);
  n(tables, true);
  growth(tables);
  out(tables);

  auto* simulate = app.add_subcommand("simulate", "Simulate site-frequency spectra");
  model(simulate);
  n(simulate, true);
  auto* theta_opt = simulate->add_option("--theta", raw.theta, "Poisson mutations at rate theta");
  auto* fixed_opt = simulate->add_option("--fixed-s", raw.fixed_s, "Exactly S mutations");
  theta_opt->excludes(fixed_opt);
  simulate->add_option("--reps", raw.reps, "Replicates");
  simulate->add_flag("--summary", raw.summary, "Write i,mean,se instead of replicate rows");
  runtime(simulate);
  out(simulate);

  auto* watterson_cmd = app.add_subcommand("watterson", "Watterson-type theta estimate");
  model(watterson_cmd);
  n(watterson_cmd, true);
  watterson_cmd->add_option("--s", raw.s, "Segregating sites")->required();
  watterson_cmd->add_option("--mu-year", raw.mu_year, "Mutation rate per year");
  watterson_cmd->add_option("--mu-generation", raw.mu_generation, "Mutation rate per generation");
  growth(watterson_cmd);
  watterson_cmd->add_option("--workers", raw.workers, "Worker threads");
  out(watterson_cmd);

  auto* lr = app.add_subcommand("lr-test", "Likelihood-ratio test on one spectrum");
  grids(lr, true);
  lr->add_option("--sfs", raw.input, "Observed SFS CSV")->required();
  lr->add_option("--s", raw.s, "Segregating sites")->required();
  n(lr, false);
  test(lr);
  growth(lr);
  runtime(lr);
  out(lr);

  auto* pw = app.add_subcommand("power", "Power of the LR test");
  grids(pw, true);
  pw->add_option("--truth", raw.truth, "True model or grid spec")->required();
  n(pw, true);
  pw->add_option("--s", raw.s, "Segregating sites")->required();
  pw->add_option("--power-reps", raw.power_reps, "Datasets per true model");
  test(pw);
  growth(pw);
  runtime(pw);
  out(pw);

  auto* arg = app.add_subcommand("arg-simulate", "Simulate multi-locus spectra");
  arg->add_option("--family", raw.family, "Measure, e.g. beta:1.0, or growth:B")->required();
  n(arg, true);
  arg->add_option("--L", raw.loci, "Loci");
  auto* recomb_opt = arg->add_option("--recomb", raw.recomb, "Recombination rates r1,...,r_{L-1}");
  auto* unlinked_opt = arg->add_flag("--unlinked", raw.unlinked, "Unlinked loci");
  recomb_opt->excludes(unlinked_opt);
  arg->add_option("--theta", raw.theta, "Scaled mutation rate per locus")->required();
  arg->add_option("--reps", raw.reps, "Replicates");
  runtime(arg);
  out(arg);

  auto* ml = app.add_subcommand("multilocus-lr", "Multi-locus KDE likelihood-ratio statistic");
  grids(ml, false);
  ml->add_option("--obs", raw.input, "Per-locus SFS CSV rep,locus,i,count")->required();
  n(ml, false);
  ml->add_option("--k", raw.k, "Cutoff for zetabar");
  ml->add_option("--M", raw.reps, "Simulated summaries per model");
  ml->add_option("--targets", raw.targets, "Target segregating sites per locus");
  ml->add_option("--pilot-reps", raw.pilot_reps, "Genealogies for E[B] under Xi models");
  ml->add_option("--recomb", raw.recomb, "Recombination rates (default unlinked)");
  ml->add_option("--bandwidth", raw.bandwidth, "KDE bandwidth h11,h12,h22");
  ml->add_option("--level", raw.level, "Test level");
  ml->add_option("--cal-reps", raw.cal_reps, "Calibration datasets per null model (0 = none)");
  runtime(ml);
  out(ml);

  auto* kde = app.add_subcommand("kde", "Fit a KDE to summary points");
  kde->add_option("--in", raw.input, "CSV zeta1,zetabar")->required();
  kde->add_option("--bandwidth", raw.bandwidth, "Bandwidth h11,h12,h22");
  kde->add_option("--grid-out", raw.grid_output, "Density on a grid as CSV");
  kde->add_option("--grid-size", raw.grid_size, "Grid points per axis");
  out(kde);

  merge_config(app, config, merged);
  std::vector<const char*> argv{"coalstat"};
  for (const auto& a : merged) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    if (help) *help = app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig c;
  CLI::App* sub = app.get_subcommands().front();
  for (int i = 0; i < 9; ++i) {
    if (sub->get_name() == kCommands[i]) c.command = static_cast<Command>(i);
  }
  auto given = [&](const std::string& flag) {
    const CLI::Option* o = sub->get_option_no_throw(flag);
    return o != nullptr && o->count() > 0;
  };

  if (given("--n")) {
    check_n(raw.n);
    c.n = raw.n;
  }
  if (given("--seed")) c.seed = raw.seed;
  require(raw.workers >= 0, "--workers must be >= 0");
  c.workers = raw.workers;
  c.output = raw.output;
  c.input = raw.input;
  c.grid_output = raw.grid_output;
  c.folded = raw.folded;
  c.summary = raw.summary;
  c.unlinked = raw.unlinked;
  c.poisson_simulation = raw.poisson_simulation;
  c.k = raw.k;
  c.growth_replicates = count_arg("--growth-reps", raw.growth_reps);
  c.pilot_replicates = count_arg("--pilot-reps", raw.pilot_reps);
  c.calibration_replicates = count_arg("--cal-reps", raw.cal_reps, 0);
  c.power_replicates = count_arg("--power-reps", raw.power_reps);
  c.grid_size = raw.grid_size;
  require(raw.grid_size >= 2, "--grid-size must be >= 2");

  if (given("--model")) c.model = model_arg("--model", raw.model);
  if (given("--theta")) {
    require(std::isfinite(raw.theta) && raw.theta >= 0.0, "--theta must be finite and >= 0");
    c.theta = raw.theta;
  }
  if (given("--s")) {
    require(raw.s >= 0, "--s must be >= 0");
    c.s = raw.s;
  }
  if (given("--fixed-s")) {
    require(raw.fixed_s >= 0, "--fixed-s must be >= 0");
    c.s = raw.fixed_s;
  }
  if (given("--mu-year")) {
    require(raw.mu_year > 0.0, "--mu-year must be > 0");
    c.mu_year = raw.mu_year;
  }
  if (given("--mu-generation")) {
    require(raw.mu_generation > 0.0, "--mu-generation must be > 0");
    c.mu_generation = raw.mu_generation;
  }
  require(raw.level > 0.0 && raw.level < 1.0, "--level must lie in (0,1)");
  c.level = raw.level;
  c.likelihood = with_flag("--likelihood", [&] { return parse_likelihood_kind(raw.likelihood); });
  if (given("--recomb")) {
    c.recombination = parse_list("--recomb", raw.recomb);
    for (double r : c.recombination) require(r >= 0.0, "--recomb rates must be >= 0");
  }
  if (given("--targets")) {
    c.targets = parse_list("--targets", raw.targets);
    require(!c.targets.empty(), "--targets must not be empty");
    for (double t : c.targets) require(t > 0.0, "--targets must be > 0");
  }
  if (given("--bandwidth")) {
    const auto h = parse_list("--bandwidth", raw.bandwidth);
    require(h.size() == 3, "--bandwidth needs h11,h12,h22");
    require(h[0] > 0.0 && h[2] > 0.0 && h[0] * h[2] - h[1] * h[1] > 0.0,
            "--bandwidth must be positive definite");
    c.bandwidth = Sym2{h[0], h[1], h[2]};
  }

  const bool inference = c.command == Command::lr_test || c.command == Command::power ||
                         c.command == Command::multilocus_lr;
  if (inference) {
    c.null_grid = given("--null") ? grid_arg("--null", raw.null_grid, "null") : growth_grid_default();
    c.alt_grid = given("--alt") ? grid_arg("--alt", raw.alt_grid, "alt") : beta_grid_default();
  }
  if (c.command == Command::lr_test || c.command == Command::power) {
    c.replicates = count_arg("--reps", raw.reps, 100);
  } else if (c.command == Command::multilocus_lr) {
    c.replicates = count_arg("--M", raw.reps, 2);
    require(c.k >= 2, "--k must be >= 2");
  } else {
    c.replicates = count_arg("--reps", raw.reps);
  }
  if (c.command == Command::power) {
    c.truths = grid_arg("--truth", raw.truth, "truth").models;
  }
  if (c.command == Command::simulate && !c.theta && !c.s) {
    throw UsageError("simulate: one of --theta or --fixed-s is required");
  }
  if (c.command == Command::arg_simulate) {
    c.model = with_flag("--family", [&] {
      const CoalescentModel m = parse_model(raw.family);
      return m.is_lambda() ? CoalescentModel::xi_four_fold(m.family()) : m;
    });
    require(raw.loci >= 1, "--L must be >= 1");
    c.loci = raw.loci;
    if (c.loci > 1 && !c.unlinked && c.recombination.empty()) {
      throw UsageError("arg-simulate: --recomb or --unlinked is required when --L > 1");
    }
    require(c.recombination.empty() || static_cast<int>(c.recombination.size()) == c.loci - 1,
            "--recomb needs L - 1 = " + std::to_string(c.loci - 1) + " rates");
  }
  return c;
}

void run(const RunConfig& config, std::ostream& out) {
  std::ofstream file;
  if (!config.output.empty()) {
    file.open(config.output);
    if (!file) throw ArgumentError("--out: cannot open '" + config.output + "'");
  }
  std::ostream& sink = config.output.empty() ? out : file;
  switch (config.command) {
    case Command::expected_sfs:
      return run_expected_sfs(config, sink);
    case Command::tables:
      return run_tables(config, sink);
    case Command::simulate:
      return run_simulate(config, sink);
    case Command::watterson:
      return run_watterson(config, sink);
    case Command::lr_test:
      return run_lr_test(config, sink);
    case Command::power:
      return run_power(config, sink);
    case Command::arg_simulate:
      return run_arg_simulate(config, sink);
    case Command::multilocus_lr:
      return run_multilocus_lr(config, sink);
    case Command::kde:
      return run_kde(config, sink);
  }
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::string help;
    const auto config = parse_args(args, &help);
    if (!config) {
      std::cout << help;
      return 0;
    }
    run(*config, std::cout);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun 'coalstat --help' for usage.\n";
    return 2;
  } catch (const DegenerateDataError& e) {
    std::cerr << "degenerate data: " << e.what() << '\n';
    return 4;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 3;
  } catch (const ArgumentError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 3;
  } catch (const UnsupportedModelError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace coalstat
