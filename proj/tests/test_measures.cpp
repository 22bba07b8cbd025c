#include "doctest.h"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <vector>

#include "coalstat/error.hpp"
#include "coalstat/measures.hpp"
#include "coalstat/model.hpp"

using namespace coalstat;

namespace {

std::vector<LambdaFamily> families() {
  return {LambdaFamily::kingman(),        LambdaFamily::star(),
          LambdaFamily::bolthausen_sznitman(), LambdaFamily::beta(0.5),
          LambdaFamily::beta(1.0),        LambdaFamily::beta(1.5),
          LambdaFamily::beta(1.9),        LambdaFamily::point_mass(0.3),
          LambdaFamily::point_mass(1.0),  LambdaFamily::two_atom(0.5)};
}

// Integral of f(x, 1 - x) against Lambda, with f(0, 1) understood as the limit value.
template <class F>
double integrate(const LambdaFamily& family, F f) {
  boost::math::quadrature::tanh_sinh<double> quad;
  // The second quadrature argument is the signed distance to the nearer endpoint.
  const auto complement = [](double x, double xc) { return xc > 0.0 ? xc : 1.0 - x; };
  const double a = family.parameter();
  switch (family.kind()) {
    case LambdaKind::kingman:
      return f(0.0, 1.0);
    case LambdaKind::star:
      return f(1.0, 0.0);
    case LambdaKind::bolthausen_sznitman:
      return quad.integrate([&](double x, double xc) { return f(x, complement(x, xc)); }, 0.0, 1.0);
    case LambdaKind::beta: {
      const double norm = std::tgamma(2.0 - a) * std::tgamma(a) / std::tgamma(2.0);
      return quad.integrate(
          [&](double x, double xc) {
            const double c = complement(x, xc);
            const double v = f(x, c);
            return v == 0.0 ? 0.0 : v * std::pow(x, 1.0 - a) * std::pow(c, a - 1.0) / norm;
          },
          0.0, 1.0);
    }
    case LambdaKind::point_mass:
      return f(a, 1.0 - a);
    case LambdaKind::two_atom:
      return 2.0 / (2.0 + a * a) * f(0.0, 1.0) + a * a / (2.0 + a * a) * f(a, 1.0 - a);
  }
  return 0.0;
}

double lambda_oracle(const LambdaFamily& family, int m, int k) {
  return integrate(family, [&](double x, double xc) {
    if (x == 0.0) return k == 2 ? 1.0 : 0.0;
    return std::pow(x, k - 2) * std::pow(xc, m - k);
  });
}

double falling(int a, int r) {
  double out = 1.0;
  for (int i = 0; i < r; ++i) out *= a - i;
  return out;
}

double binom(int n, int k) { return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0))); }

// 4 x^-2 Lambda(dx) times the probability of one specific colouring pattern:
// the r groups take distinct colours, the s other blocks stay uncoloured or
// take distinct unused colours.
double xi_oracle(const LambdaFamily& family, int b, const std::vector<int>& groups, int s) {
  const int r = static_cast<int>(groups.size());
  int merged = 0;
  for (int g : groups) merged += g;
  REQUIRE(merged + s == b);
  return integrate(family, [&](double x, double xc) {
    if (x == 0.0) return (r == 1 && groups[0] == 2) ? 1.0 : 0.0;
    double rest = 0.0;
    for (int l = 0; l <= std::min(s, 4 - r); ++l) {
      rest += binom(s, l) * falling(4 - r, l) * std::pow(x / 4.0, l) * std::pow(xc, s - l);
    }
    return 4.0 * falling(4, r) * std::pow(x, merged - 2) / std::pow(4.0, merged) * rest;
  });
}

}  // namespace

TEST_CASE("lambda rates: documented values") {
  CHECK(lambda_rate(LambdaFamily::kingman(), 5, 2) == 1.0);
  CHECK(lambda_rate(LambdaFamily::kingman(), 5, 3) == 0.0);
  CHECK(lambda_rate(LambdaFamily::bolthausen_sznitman(), 3, 2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(lambda_rate(LambdaFamily::star(), 4, 4) == 1.0);
  CHECK(lambda_rate(LambdaFamily::star(), 4, 2) == 0.0);
  for (int m = 2; m <= 40; ++m) {
    for (int k = 2; k <= m; ++k) {
      CHECK(lambda_rate(LambdaFamily::beta(1.0), m, k) ==
            doctest::Approx(lambda_rate(LambdaFamily::bolthausen_sznitman(), m, k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("lambda rates match quadrature") {
  for (const auto& family : families()) {
    for (int m : {2, 3, 5, 10, 25}) {
      for (int k = 2; k <= m; ++k) {
        const double oracle = lambda_oracle(family, m, k);
        CAPTURE(family.to_string());
        CAPTURE(m);
        CAPTURE(k);
        CHECK(lambda_rate(family, m, k) == doctest::Approx(oracle).epsilon(1e-9).scale(1e-300));
      }
    }
  }
}

TEST_CASE("consistency: lambda_{m,k} = lambda_{m+1,k} + lambda_{m+1,k+1}") {
  for (const auto& family : families()) {
    for (int m = 2; m <= 60; ++m) {
      for (int k = 2; k <= m; ++k) {
        const double lhs = lambda_rate(family, m, k);
        const double rhs = lambda_rate(family, m + 1, k) + lambda_rate(family, m + 1, k + 1);
        CAPTURE(family.to_string());
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10).scale(1e-300));
      }
    }
  }
}

TEST_CASE("total merge rate") {
  for (int m = 2; m <= 30; ++m) {
    CHECK(total_merge_rate(LambdaFamily::kingman(), m) == doctest::Approx(m * (m - 1) / 2.0));
    CHECK(total_merge_rate(LambdaFamily::star(), m) == doctest::Approx(1.0));
  }
  CHECK(total_merge_rate(LambdaFamily::bolthausen_sznitman(), 3) == doctest::Approx(2.0));
  for (const auto& family : families()) {
    for (int m : {2, 7, 50, 400}) {
      double sum = 0.0;
      for (int k = 2; k <= m; ++k) sum += merger_size_rate(family, m, k);
      CHECK(total_merge_rate(family, m) == doctest::Approx(sum).epsilon(1e-10));
    }
  }
  CHECK(merger_size_rate(LambdaFamily::beta(1.5), 2000, 3) > 0.0);
  CHECK(std::isfinite(total_merge_rate(LambdaFamily::beta(1.2), 5000)));
}

TEST_CASE("four-fold Xi rates: documented values") {
  for (int b = 2; b <= 8; ++b) {
    CHECK(xi_fourfold_rate(LambdaFamily::kingman(), b, {2}, b - 2) == doctest::Approx(1.0));
    if (b >= 3) CHECK(xi_fourfold_rate(LambdaFamily::kingman(), b, {3}, b - 3) == 0.0);
    if (b >= 4) CHECK(xi_fourfold_rate(LambdaFamily::kingman(), b, {2, 2}, b - 4) == 0.0);
  }
  for (double psi : {0.1, 0.3, 0.9, 1.0}) {
    CHECK(xi_fourfold_rate(LambdaFamily::point_mass(psi), 2, {2}, 0) == doctest::Approx(1.0));
  }
  CHECK(xi_fourfold_rate(LambdaFamily::point_mass(1.0), 4, {2, 2}, 0) ==
        doctest::Approx(3.0 / 16.0));
}

TEST_CASE("four-fold Xi rates match colouring oracle") {
  const std::vector<std::pair<std::vector<int>, int>> patterns = {
      {{2}, 0}, {{2}, 1}, {{3}, 0}, {{2}, 5}, {{2, 2}, 0}, {{3, 2}, 2},
      {{2, 2, 2}, 1}, {{2, 2, 2, 2}, 0}, {{4, 3, 2, 2}, 3}, {{5}, 7}};
  for (const auto& family : families()) {
    for (const auto& [groups, s] : patterns) {
      int b = s;
      for (int g : groups) b += g;
      CAPTURE(family.to_string());
      CAPTURE(b);
      CHECK(xi_fourfold_rate(family, b, groups, s) ==
            doctest::Approx(xi_oracle(family, b, groups, s)).epsilon(1e-8).scale(1e-300));
    }
  }
}

TEST_CASE("rate arguments are validated") {
  CHECK_THROWS_AS(lambda_rate(LambdaFamily::kingman(), 3, 4), ArgumentError);
  CHECK_THROWS_AS(lambda_rate(LambdaFamily::kingman(), 3, 1), ArgumentError);
  CHECK_THROWS_AS(total_merge_rate(LambdaFamily::kingman(), 1), ArgumentError);
  CHECK_THROWS_AS(xi_fourfold_rate(LambdaFamily::kingman(), 10, {2, 2, 2, 2, 2}, 0), ArgumentError);
  CHECK_THROWS_AS(xi_fourfold_rate(LambdaFamily::kingman(), 3, {1, 2}, 0), ArgumentError);
  CHECK_THROWS_AS(xi_fourfold_rate(LambdaFamily::kingman(), 5, {2}, 0), ArgumentError);
}

TEST_CASE("model parameters and grammar") {
  CHECK_THROWS_AS(LambdaFamily::beta(2.5), DomainError);
  CHECK_THROWS_AS(LambdaFamily::beta(0.0), DomainError);
  CHECK_THROWS_AS(LambdaFamily::point_mass(0.0), DomainError);
  CHECK_THROWS_AS(LambdaFamily::point_mass(1.5), DomainError);
  CHECK_THROWS_AS(CoalescentModel::kingman_growth(-1.0), DomainError);
  CHECK_THROWS_AS(parse_model("beta:2.5"), DomainError);
  CHECK_THROWS_AS(parse_model("gamma:1"), ParseError);
  CHECK_THROWS_AS(parse_model("beta:x"), ParseError);
  CHECK_THROWS_AS(parse_model("beta"), ParseError);
  for (const char* spec : {"kingman", "star", "bs", "beta:1.5", "pointmass:0.3", "twoatom:0.5",
                           "growth:1000", "xibeta:1", "xipointmass:0.9", "xikingman"}) {
    CHECK(parse_model(parse_model(spec).to_string()) == parse_model(spec));
  }
  CHECK(parse_model("growth:1000").to_string() == "growth:1000");
  try {
    parse_model("beta:2.5");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("(0,2)") != std::string::npos);
  }
}

TEST_CASE("families are probability measures") {
  for (const auto& family : families()) {
    CHECK(family.atom_at_zero() + family.non_atomic_mass() == doctest::Approx(1.0));
  }
}
