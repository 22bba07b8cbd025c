#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "coalstat/cli.hpp"
#include "coalstat/error.hpp"
#include "coalstat/io.hpp"

using namespace coalstat;

namespace {

ObservedSfs read(const std::string& text, std::optional<int> n = std::nullopt, bool folded = false) {
  std::istringstream in(text);
  return read_sfs_csv(in, n, folded);
}

RunConfig parse(std::initializer_list<std::string> args) {
  auto c = parse_args(std::vector<std::string>(args));
  REQUIRE(c.has_value());
  return *c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("coalstat_test_" + name)).string();
}

}  // namespace

TEST_CASE("SFS CSV input") {
  const ObservedSfs basic = read("i,count\n1,4\n2,2\n3,1\n4,0\n");
  CHECK(basic.n == 5);
  CHECK(basic.counts == std::vector<std::int64_t>{4, 2, 1, 0});
  CHECK(basic.total() == 7);

  const ObservedSfs sparse = read("i,count\n2,3\n", 6);
  CHECK(sparse.counts == std::vector<std::int64_t>{0, 3, 0, 0, 0});
  const ObservedSfs empty = read("i,count\n", 4);
  CHECK(empty.counts == std::vector<std::int64_t>{0, 0, 0});
  const ObservedSfs comments = read("# spectrum\ni,count\n\n1,2\n");
  CHECK(comments.counts == std::vector<std::int64_t>{2});

  CHECK_THROWS_AS(read("i,count\n1,2\n1,3\n"), ParseError);
  CHECK_THROWS_AS(read("i,count\n1,-2\n"), ParseError);
  CHECK_THROWS_AS(read("i,count\n1,2.5\n"), ParseError);
  CHECK_THROWS_AS(read("i,count\n0,2\n"), ParseError);
  CHECK_THROWS_AS(read("i,n\n1,2\n"), ParseError);
  CHECK_THROWS_AS(read("i,count\n"), ParseError);
  CHECK_THROWS_AS(read("i,count\n5,1\n", 4), ParseError);

  const ObservedSfs folded = read("i,folded_count\n1,5\n2,1\n", 5, true);
  CHECK(folded.folded);
  CHECK(folded.counts == std::vector<std::int64_t>{5, 1});
  CHECK_THROWS_AS(read("i,folded_count\n1,5\n", std::nullopt, true), ParseError);
}

TEST_CASE("round trips") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    SfsVector sfs(n);
    for (int i = 1; i < n; ++i) sfs.set(i, static_cast<std::int64_t>(rng() % 50));
    std::stringstream stream;
    write_sfs_csv(stream, sfs);
    const ObservedSfs back = read_sfs_csv(stream, n);
    CHECK(back.counts == sfs.counts());

    std::vector<MultiLocusSummary> summaries;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < 10; ++r) summaries.push_back({u(rng), u(rng) / 3.0, 2, 1});
    std::stringstream s2;
    write_summaries_csv(s2, summaries);
    const auto points = read_summaries_csv(s2);
    REQUIRE(points.size() == summaries.size());
    for (std::size_t r = 0; r < points.size(); ++r) {
      CHECK(points[r][0] == summaries[r].zeta1);
      CHECK(points[r][1] == summaries[r].zetabar);
    }

    std::vector<SfsVector> loci(3, sfs);
    std::stringstream s3;
    s3 << "rep,locus,i,count\n";
    write_locus_sfs_rows(s3, 7, loci);
    const auto grouped = read_locus_sfs_csv(s3, n);
    REQUIRE(grouped.count(7) == 1);
    CHECK(grouped.at(7) == loci);
  }
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("parse_args") {
  const RunConfig c = parse({"simulate", "--model", "beta:1.5", "--n", "20", "--theta", "2", "--reps",
                             "1000", "--seed", "7"});
  CHECK(c.command == Command::simulate);
  CHECK(*c.model == CoalescentModel::lambda(LambdaFamily::beta(1.5)));
  CHECK(*c.n == 20);
  CHECK(*c.theta == 2.0);
  CHECK(c.replicates == 1000);
  CHECK(c.seed == 7);

  try {
    parse({"simulate", "--model", "beta:2.5", "--n", "20", "--theta", "2"});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("(0,2)") != std::string::npos);
    CHECK(std::string(e.what()).find("--model") != std::string::npos);
  }
  CHECK_THROWS_AS(parse({"lr-test", "--sfs", "x.csv"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--model", "kingman", "--n", "5", "--bogus", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--model", "kingman", "--n", "5"}), UsageError);
  CHECK_THROWS_AS(parse({"simulate", "--model", "kingman", "--n", "1", "--theta", "1"}), ArgumentError);
  CHECK_THROWS_AS(parse({"simulate", "--model", "kingmn", "--n", "5", "--theta", "1"}), ParseError);
  CHECK_THROWS_AS(parse({"arg-simulate", "--family", "beta:1", "--n", "5", "--L", "3", "--theta", "1"}),
                  UsageError);
  CHECK_THROWS_AS(parse({"arg-simulate", "--family", "beta:1", "--n", "5", "--L", "3", "--recomb", "1",
                         "--theta", "1"}),
                  ArgumentError);
  CHECK_THROWS_AS(parse({}), UsageError);

  const RunConfig arg = parse({"arg-simulate", "--family", "beta:1", "--n", "5", "--L", "3", "--recomb",
                               "1,0.5", "--theta", "1"});
  CHECK(*arg.model == CoalescentModel::xi_four_fold(LambdaFamily::beta(1.0)));
  CHECK(arg.recombination == std::vector<double>{1.0, 0.5});

  const RunConfig power = parse({"power", "--truth", "beta:1:2:0.5", "--n", "50", "--s", "10"});
  CHECK(power.truths.size() == 3);
  CHECK(power.null_grid->models.size() == 110);
  CHECK(power.alt_grid->models.size() == 41);

  std::string help;
  CHECK_FALSE(parse_args({"--help"}, &help).has_value());
  CHECK(help.find("expected-sfs") != std::string::npos);
}

TEST_CASE("config files") {
  const std::string path = temp_path("config.json");
  {
    std::ofstream out(path);
    out << R"({"model": "bs", "n": 8, "theta": 3, "folded": true, "recomb": [0.5, 1]})";
  }
  const RunConfig c = parse({"expected-sfs", "--config", path, "--n", "10"});
  CHECK(*c.n == 10);
  CHECK(*c.theta == 3.0);
  CHECK(c.folded);
  CHECK(*c.model == CoalescentModel::lambda(LambdaFamily::bolthausen_sznitman()));
  std::remove(path.c_str());
  CHECK_THROWS_AS(parse({"expected-sfs", "--config", temp_path("missing.json")}), UsageError);
}

TEST_CASE("run writes the documented formats") {
  std::ostringstream out;
  run(parse({"expected-sfs", "--model", "kingman", "--n", "4", "--theta", "2"}), out);
  CHECK(out.str() == "i,expected_count\n1,2\n2,1\n3,0.6666666666666666\n");

  std::ostringstream folded;
  run(parse({"expected-sfs", "--model", "kingman", "--n", "4", "--theta", "6", "--folded"}), folded);
  CHECK(folded.str().rfind("i,expected_folded_count\n1,8\n2,3\n", 0) == 0);

  std::ostringstream sim;
  run(parse({"simulate", "--model", "kingman", "--n", "4", "--fixed-s", "5", "--reps", "3"}), sim);
  std::istringstream lines(sim.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "rep,i,count");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 9);

  const std::string sfs_path = temp_path("sfs.csv");
  {
    std::ofstream f(sfs_path);
    f << "i,count\n1,4\n2,2\n3,1\n4,0\n";
  }
  std::ostringstream lr;
  run(parse({"lr-test", "--null", "growth:0:4:2", "--alt", "beta:1:2:0.5", "--sfs", sfs_path, "--s", "7",
             "--reps", "200", "--growth-reps", "500"}),
      lr);
  const auto j = nlohmann::json::parse(lr.str());
  for (const char* key : {"rho", "rho_star", "reject", "argmax_null", "argmax_alt"}) CHECK(j.contains(key));
  CHECK_THROWS_AS(run(parse({"lr-test", "--sfs", sfs_path, "--s", "8", "--reps", "200"}), lr), ArgumentError);
  std::remove(sfs_path.c_str());
}
