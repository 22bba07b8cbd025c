#pragma once

#include <random>
#include <string>
#include <string_view>

namespace coalstat {

enum class LambdaKind { kingman, star, bolthausen_sznitman, beta, point_mass, two_atom };

// One of the named coalescent measures on [0,1]. Every family is a
// probability measure; parameters are validated on construction.
class LambdaFamily {
 public:
  static LambdaFamily kingman() { return LambdaFamily(LambdaKind::kingman, 0.0); }
  static LambdaFamily star() { return LambdaFamily(LambdaKind::star, 0.0); }
  static LambdaFamily bolthausen_sznitman() {
    return LambdaFamily(LambdaKind::bolthausen_sznitman, 0.0);
  }
  // Beta(2 - alpha, alpha), 0 < alpha < 2.
  static LambdaFamily beta(double alpha);
  // Dirac mass at psi, 0 < psi <= 1.
  static LambdaFamily point_mass(double psi);
  // 2/(2+psi^2) at 0 plus psi^2/(2+psi^2) at psi, 0 < psi <= 1.
  static LambdaFamily two_atom(double psi);

  LambdaKind kind() const { return kind_; }
  // alpha for Beta, psi for the atomic families, 0 otherwise.
  double parameter() const { return param_; }

  // Lambda({0}).
  double atom_at_zero() const;
  // Lambda((0,1]).
  double non_atomic_mass() const;
  // Integral of x^a (1-x)^b over (0,1] against Lambda, a > -1 + (alpha-1) for Beta.
  // Used with a = j - 2 >= 0 for all merger rates.
  double non_atomic_moment(int a, int b) const;
  // Draw x from Lambda restricted to (0,1] and renormalised.
  double sample_non_atomic(std::mt19937_64& rng) const;

  std::string to_string() const;

  friend bool operator==(const LambdaFamily&, const LambdaFamily&) = default;

 private:
  LambdaFamily(LambdaKind kind, double param) : kind_(kind), param_(param) {}

  LambdaKind kind_;
  double param_;
};

enum class ModelKind { lambda, kingman_growth, xi_four_fold };

// The closed set of model variants understood by every downstream module.
class CoalescentModel {
 public:
  static CoalescentModel lambda(LambdaFamily family) {
    return CoalescentModel(ModelKind::lambda, family, 0.0);
  }
  // Kingman coalescent with pair rate exp(beta * t), beta >= 0.
  static CoalescentModel kingman_growth(double beta);
  static CoalescentModel xi_four_fold(LambdaFamily family) {
    return CoalescentModel(ModelKind::xi_four_fold, family, 0.0);
  }

  ModelKind kind() const { return kind_; }
  bool is_lambda() const { return kind_ == ModelKind::lambda; }
  // Lambda model, or growth with beta == 0.
  bool is_kingman_equivalent() const;
  const LambdaFamily& family() const { return family_; }
  double growth_rate() const { return growth_; }

  // Canonical text form, parseable by parse_model.
  std::string to_string() const;

  friend bool operator==(const CoalescentModel&, const CoalescentModel&) = default;

 private:
  CoalescentModel(ModelKind kind, LambdaFamily family, double growth)
      : kind_(kind), family_(family), growth_(growth) {}

  ModelKind kind_;
  LambdaFamily family_;
  double growth_;
};

// Grammar: kingman | star | bs | beta:A | pointmass:P | twoatom:P | growth:B
//          | xibeta:A | xipointmass:P | xikingman | xibs | xitwoatom:P
// Throws ParseError naming the offending token, DomainError for bad values.
CoalescentModel parse_model(std::string_view spec);

// Parses a finite decimal number; throws ParseError otherwise.
double parse_number(std::string_view token);

}  // namespace coalstat
