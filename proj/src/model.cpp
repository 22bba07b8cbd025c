#include "coalstat/model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "coalstat/error.hpp"
#include "coalstat/special.hpp"

namespace coalstat {

namespace {

std::string format_param(double x) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, ptr);
}

}  // namespace

LambdaFamily LambdaFamily::beta(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw DomainError("Beta coalescent requires alpha in (0,2), got " + format_param(alpha));
  }
  return LambdaFamily(LambdaKind::beta, alpha);
}

LambdaFamily LambdaFamily::point_mass(double psi) {
  if (!(psi > 0.0 && psi <= 1.0)) {
    throw DomainError("point-mass coalescent requires psi in (0,1], got " + format_param(psi));
  }
  return LambdaFamily(LambdaKind::point_mass, psi);
}

LambdaFamily LambdaFamily::two_atom(double psi) {
  if (!(psi > 0.0 && psi <= 1.0)) {
    throw DomainError("two-atom coalescent requires psi in (0,1], got " + format_param(psi));
  }
  return LambdaFamily(LambdaKind::two_atom, psi);
}

double LambdaFamily::atom_at_zero() const {
  switch (kind_) {
    case LambdaKind::kingman:
      return 1.0;
    case LambdaKind::two_atom:
      return 2.0 / (2.0 + param_ * param_);
    default:
      return 0.0;
  }
}

double LambdaFamily::non_atomic_mass() const { return 1.0 - atom_at_zero(); }

double LambdaFamily::non_atomic_moment(int a, int b) const {
  switch (kind_) {
    case LambdaKind::kingman:
      return 0.0;
    case LambdaKind::star:
      return b == 0 ? 1.0 : 0.0;
    case LambdaKind::bolthausen_sznitman:
      return std::exp(log_beta(a + 1.0, b + 1.0));
    case LambdaKind::beta:
      return std::exp(log_beta(a + 2.0 - param_, b + param_) - log_beta(2.0 - param_, param_));
    case LambdaKind::point_mass:
      return std::pow(param_, a) * std::pow(1.0 - param_, b);
    case LambdaKind::two_atom:
      return non_atomic_mass() * std::pow(param_, a) * std::pow(1.0 - param_, b);
  }
  return 0.0;
}

double LambdaFamily::sample_non_atomic(std::mt19937_64& rng) const {
  switch (kind_) {
    case LambdaKind::kingman:
      throw UnsupportedModelError("Kingman measure has no mass on (0,1]");
    case LambdaKind::star:
      return 1.0;
    case LambdaKind::bolthausen_sznitman: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      double x = 0.0;
      while (x <= 0.0) x = 1.0 - unif(rng);
      return x;
    }
    case LambdaKind::beta: {
      std::gamma_distribution<double> left(2.0 - param_, 1.0);
      std::gamma_distribution<double> right(param_, 1.0);
      for (;;) {
        const double g1 = left(rng);
        const double g2 = right(rng);
        if (g1 > 0.0) return g1 / (g1 + g2);
      }
    }
    case LambdaKind::point_mass:
    case LambdaKind::two_atom:
      return param_;
  }
  return 0.0;
}

std::string LambdaFamily::to_string() const {
  switch (kind_) {
    case LambdaKind::kingman:
      return "kingman";
    case LambdaKind::star:
      return "star";
    case LambdaKind::bolthausen_sznitman:
      return "bs";
    case LambdaKind::beta:
      return "beta:" + format_param(param_);
    case LambdaKind::point_mass:
      return "pointmass:" + format_param(param_);
    case LambdaKind::two_atom:
      return "twoatom:" + format_param(param_);
  }
  return "?";
}

CoalescentModel CoalescentModel::kingman_growth(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw DomainError("growth rate beta must be a finite value >= 0, got " + format_param(beta));
  }
  return CoalescentModel(ModelKind::kingman_growth, LambdaFamily::kingman(), beta);
}

bool CoalescentModel::is_kingman_equivalent() const {
  if (kind_ == ModelKind::lambda) return family_.kind() == LambdaKind::kingman;
  if (kind_ == ModelKind::kingman_growth) return growth_ == 0.0;
  return false;
}

std::string CoalescentModel::to_string() const {
  switch (kind_) {
    case ModelKind::lambda:
      return family_.to_string();
    case ModelKind::kingman_growth:
      return "growth:" + format_param(growth_);
    case ModelKind::xi_four_fold:
      return "xi" + family_.to_string();
  }
  return "?";
}

double parse_number(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("invalid number '" + std::string(token) + "'");
  }
  return value;
}

CoalescentModel parse_model(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const bool has_param = colon != std::string_view::npos;
  const std::string_view tail = has_param ? spec.substr(colon + 1) : std::string_view{};

  auto no_param = [&](auto make) {
    if (has_param) throw ParseError("model '" + std::string(head) + "' takes no parameter in '" +
                                    std::string(spec) + "'");
    return make();
  };
  auto with_param = [&](auto make) {
    if (!has_param) throw ParseError("model '" + std::string(head) + "' requires a parameter");
    if (tail.find(':') != std::string_view::npos) {
      throw ParseError("unexpected token '" + std::string(tail) + "' in model spec");
    }
    double value = 0.0;
    try {
      value = parse_number(tail);
    } catch (const ParseError&) {
      throw ParseError("invalid parameter '" + std::string(tail) + "' in model spec '" +
                       std::string(spec) + "'");
    }
    return make(value);
  };

  using CM = CoalescentModel;
  using LF = LambdaFamily;
  if (head == "kingman") return no_param([] { return CM::lambda(LF::kingman()); });
  if (head == "star") return no_param([] { return CM::lambda(LF::star()); });
  if (head == "bs") return no_param([] { return CM::lambda(LF::bolthausen_sznitman()); });
  if (head == "beta") return with_param([](double a) { return CM::lambda(LF::beta(a)); });
  if (head == "pointmass") return with_param([](double p) { return CM::lambda(LF::point_mass(p)); });
  if (head == "twoatom") return with_param([](double p) { return CM::lambda(LF::two_atom(p)); });
  if (head == "growth") return with_param([](double b) { return CM::kingman_growth(b); });
  if (head == "xikingman") return no_param([] { return CM::xi_four_fold(LF::kingman()); });
  if (head == "xibs") return no_param([] { return CM::xi_four_fold(LF::bolthausen_sznitman()); });
  if (head == "xibeta") return with_param([](double a) { return CM::xi_four_fold(LF::beta(a)); });
  if (head == "xipointmass") {
    return with_param([](double p) { return CM::xi_four_fold(LF::point_mass(p)); });
  }
  if (head == "xitwoatom") {
    return with_param([](double p) { return CM::xi_four_fold(LF::two_atom(p)); });
  }
  throw ParseError("unknown model '" + std::string(head) + "'");
}

}  // namespace coalstat
