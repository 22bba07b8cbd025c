#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coalstat/error.hpp"
#include "coalstat/inference.hpp"
#include "coalstat/measures.hpp"
#include "coalstat/model.hpp"
#include "coalstat/multilocus.hpp"
#include "coalstat/recursions.hpp"
#include "coalstat/simulator.hpp"

namespace py = pybind11;
using namespace coalstat;

namespace {

GrowthOptions growth_options(std::size_t replicates) {
  GrowthOptions g;
  g.replicates = replicates;
  return g;
}

CoalescentModel lambda_only(const std::string& spec) {
  const CoalescentModel model = parse_model(spec);
  if (model.kind() != ModelKind::lambda) throw ArgumentError("expected a Lambda family, got " + spec);
  return model;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coalescent SFS recursions, simulation and likelihood-ratio tests.";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<UnsupportedModelError>(m, "UnsupportedModelError", PyExc_ValueError);
  py::register_exception<DegenerateDataError>(m, "DegenerateDataError", PyExc_ValueError);

  m.def("canonical_model", [](const std::string& spec) { return parse_model(spec).to_string(); },
        py::arg("spec"));

  m.def("lambda_rate",
        [](const std::string& family, int m_, int k) { return lambda_rate(lambda_only(family).family(), m_, k); },
        py::arg("family"), py::arg("m"), py::arg("k"));
  m.def("xi_fourfold_rate",
        [](const std::string& family, int b, const std::vector<int>& groups, int s) {
          return xi_fourfold_rate(lambda_only(family).family(), b, groups, s);
        },
        py::arg("family"), py::arg("b"), py::arg("groups"), py::arg("s"));

  m.def(
      "expected_sfs",
      [](const std::string& model, int n, double theta, bool folded, std::size_t growth_reps) {
        const auto sfs = expected_sfs(parse_model(model), n, theta, growth_options(growth_reps));
        return folded ? fold(sfs) : sfs;
      },
      py::arg("model"), py::arg("n"), py::arg("theta"), py::arg("folded") = false,
      py::arg("growth_reps") = 100000);
  m.def(
      "phi",
      [](const std::string& model, int n, std::size_t growth_reps) {
        return phi(parse_model(model), n, growth_options(growth_reps));
      },
      py::arg("model"), py::arg("n"), py::arg("growth_reps") = 100000);
  m.def(
      "expected_total_length",
      [](const std::string& model, int n, std::size_t growth_reps) {
        return expected_total_length(parse_model(model), n, growth_options(growth_reps));
      },
      py::arg("model"), py::arg("n"), py::arg("growth_reps") = 100000);
  m.def(
      "watterson",
      [](const std::string& model, int n, std::int64_t s, std::size_t growth_reps) {
        return watterson(parse_model(model), n, s, growth_options(growth_reps));
      },
      py::arg("model"), py::arg("n"), py::arg("s"), py::arg("growth_reps") = 100000);

  m.def(
      "simulate_sfs",
      [](const std::string& model, int n, std::optional<double> theta, std::optional<std::int64_t> s,
         std::size_t replicates, std::uint64_t seed, int workers) {
        if (theta.has_value() == s.has_value()) throw ArgumentError("give exactly one of theta and s");
        const MutationMode mode = theta ? MutationMode::poisson(*theta) : MutationMode::fixed(*s);
        std::vector<std::vector<std::int64_t>> out;
        out.reserve(replicates);
        {
          py::gil_scoped_release release;
          simulate_sfs_batch(parse_model(model), n, mode, BatchOptions{replicates, seed, workers},
                             [&](std::size_t, const SfsVector& sfs) { out.push_back(sfs.counts()); });
        }
        return out;
      },
      py::arg("model"), py::arg("n"), py::arg("theta") = py::none(), py::arg("s") = py::none(),
      py::arg("replicates") = 1000, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def(
      "loglik",
      [](const std::string& model, const std::vector<std::int64_t>& counts, const std::string& kind) {
        const SfsVector sfs(counts);
        const int n = static_cast<int>(counts.size()) + 1;
        const auto parsed = parse_model(model);
        return parse_likelihood_kind(kind) == LikelihoodKind::fixed_s
                   ? fixed_s_loglik(parsed, n, sfs, sfs.segregating_sites())
                   : poisson_approx_loglik(parsed, n, sfs, sfs.segregating_sites());
      },
      py::arg("model"), py::arg("counts"), py::arg("kind") = "fixed-s");

  m.def(
      "lr_test",
      [](const std::vector<std::int64_t>& counts, const std::string& null_grid, const std::string& alt_grid,
         double level, std::size_t replicates, const std::string& kind, std::uint64_t seed, int workers,
         std::size_t growth_reps) {
        const SfsVector sfs(counts);
        const int n = static_cast<int>(counts.size()) + 1;
        const GrowthOptions g = growth_options(growth_reps);
        CalibrationOptions o;
        o.replicates = replicates;
        o.seed = seed;
        o.workers = workers;
        o.kind = parse_likelihood_kind(kind);
        const HypothesisGrid null_models = parse_grid(null_grid, "null");
        const HypothesisGrid alt_models = parse_grid(alt_grid, "alt");
        LrResult lr;
        TestCalibration cal;
        {
          py::gil_scoped_release release;
          const GridTables null(null_models, n, g, workers);
          const GridTables alt(alt_models, n, g, workers);
          const ObservedSfs obs = ObservedSfs::unfolded(sfs);
          lr = lr_statistic(null, alt, obs, obs.total(), o.kind);
          cal = calibrate(null, alt, obs.total(), level, o);
        }
        py::dict out;
        out["rho"] = lr.rho;
        out["rho_star"] = cal.critical_value;
        out["reject"] = lr.rho <= cal.critical_value;
        out["argmax_null"] = null_models.models[lr.argmax_null].to_string();
        out["argmax_alt"] = alt_models.models[lr.argmax_alt].to_string();
        return out;
      },
      py::arg("counts"), py::arg("null") = "growth:0:10:1+growth:20:1000:10", py::arg("alt") = "beta:1:2:0.025",
      py::arg("level") = 0.05, py::arg("replicates") = 1000, py::arg("kind") = "fixed-s", py::arg("seed") = 1,
      py::arg("workers") = 0, py::arg("growth_reps") = 100000);

  m.def(
      "summarize",
      [](const std::vector<std::vector<std::int64_t>>& loci, int k) {
        std::vector<SfsVector> sfs;
        for (const auto& counts : loci) sfs.emplace_back(counts);
        const MultiLocusSummary s = summarize(sfs, k);
        return py::make_tuple(s.zeta1, s.zetabar);
      },
      py::arg("loci"), py::arg("k"));
}
