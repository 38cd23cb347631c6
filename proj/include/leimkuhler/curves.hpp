#pragma once

// Parametric Leimkuhler curve families, the generic quantile-integral
// construction, Lorenz duality, numeric mixtures over a shape parameter, and
// validity checks for properties K(0)=0, K(1)=1, monotone, concave.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "leimkuhler/errors.hpp"
#include "leimkuhler/numeric/quadrature.hpp"
#include "leimkuhler/specfun.hpp"

namespace leimkuhler {

enum class Family { Power, GP, Pareto, PG, PIG, GPG, GPIG, PaGB };

inline constexpr std::array<Family, 8> kAllFamilies = {
    Family::Power, Family::GP,  Family::Pareto, Family::PG,
    Family::PIG,   Family::GPG, Family::GPIG,   Family::PaGB};

/// Lowercase tag used on the command line and in reports.
inline std::string_view family_tag(Family f) {
  switch (f) {
    case Family::Power: return "power";
    case Family::GP: return "gp";
    case Family::Pareto: return "pareto";
    case Family::PG: return "pg";
    case Family::PIG: return "pig";
    case Family::GPG: return "gpg";
    case Family::GPIG: return "gpig";
    case Family::PaGB: return "pagb";
  }
  return "unknown";
}

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::Power: return "Power";
    case Family::GP: return "GP";
    case Family::Pareto: return "Pareto";
    case Family::PG: return "PG";
    case Family::PIG: return "PIG";
    case Family::GPG: return "GPG";
    case Family::GPIG: return "GPIG";
    case Family::PaGB: return "PaGB";
  }
  return "unknown";
}

inline std::optional<Family> parse_family(std::string_view tag) {
  for (Family f : kAllFamilies) {
    if (family_tag(f) == tag) return f;
  }
  return std::nullopt;
}

enum class ParamId { theta, kappa, alpha, beta, shift };

inline std::string_view param_name(ParamId id) {
  switch (id) {
    case ParamId::theta: return "theta";
    case ParamId::kappa: return "kappa";
    case ParamId::alpha: return "alpha";
    case ParamId::beta: return "beta";
    case ParamId::shift: return "shift";
  }
  return "unknown";
}

inline std::optional<ParamId> parse_param(std::string_view name) {
  for (ParamId id : {ParamId::theta, ParamId::kappa, ParamId::alpha, ParamId::beta, ParamId::shift}) {
    if (param_name(id) == name) return id;
  }
  return std::nullopt;
}

/// Named curve parameters. `kappa` is the generalized-power exponent, `shift`
/// the exponential tilt of the confluent hypergeometric mixing density.
struct ParamVector {
  std::optional<double> theta{}, kappa{}, alpha{}, beta{}, shift{};

  std::optional<double>& operator[](ParamId id) {
    switch (id) {
      case ParamId::theta: return theta;
      case ParamId::kappa: return kappa;
      case ParamId::alpha: return alpha;
      case ParamId::beta: return beta;
      case ParamId::shift: return shift;
    }
    return theta;
  }
  const std::optional<double>& operator[](ParamId id) const {
    return const_cast<ParamVector&>(*this)[id];
  }
  bool operator==(const ParamVector&) const = default;
};

enum class Transform { log, logit, identity };

/// Fitting box and multistart range of one parameter.
struct ParamSpec {
  ParamId id;
  double lower;
  double upper;
  Transform transform;
  double start_lo;
  double start_hi;
};

namespace detail {
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPositiveCap = 1e6;
inline constexpr ParamSpec kTheta{ParamId::theta, 0.0, kPositiveCap, Transform::log, 0.05, 20.0};
inline constexpr ParamSpec kParetoTheta{ParamId::theta, 0.0, 1.0 - 1e-9, Transform::logit, 0.05, 0.95};
inline constexpr ParamSpec kKappa{ParamId::kappa, 0.0, 1.0, Transform::logit, 0.05, 0.99};
inline constexpr ParamSpec kAlpha{ParamId::alpha, 0.0, kPositiveCap, Transform::log, 0.1, 20.0};
inline constexpr ParamSpec kBeta{ParamId::beta, 0.0, kPositiveCap, Transform::log, 0.02, 20.0};
inline constexpr ParamSpec kShift{ParamId::shift, -kInf, kInf, Transform::identity, -30.0, 10.0};
inline constexpr ParamSpec kMixAlpha{ParamId::alpha, 0.0, kPositiveCap, Transform::log, 0.2, 50.0};
inline constexpr ParamSpec kMixBeta{ParamId::beta, 0.0, kPositiveCap, Transform::log, 0.2, 50.0};

inline constexpr std::array<ParamSpec, 1> kPowerSpecs{kTheta};
inline constexpr std::array<ParamSpec, 2> kGpSpecs{kTheta, kKappa};
inline constexpr std::array<ParamSpec, 1> kParetoSpecs{kParetoTheta};
inline constexpr std::array<ParamSpec, 2> kMixSpecs{kAlpha, kBeta};
inline constexpr std::array<ParamSpec, 3> kGenMixSpecs{kKappa, kAlpha, kBeta};
inline constexpr std::array<ParamSpec, 3> kPagbSpecs{kShift, kMixAlpha, kMixBeta};
}  // namespace detail

/// Parameters of a family in canonical order, with their fitting boxes.
inline std::span<const ParamSpec> param_specs(Family f) {
  switch (f) {
    case Family::Power: return detail::kPowerSpecs;
    case Family::GP: return detail::kGpSpecs;
    case Family::Pareto: return detail::kParetoSpecs;
    case Family::PG:
    case Family::PIG: return detail::kMixSpecs;
    case Family::GPG:
    case Family::GPIG: return detail::kGenMixSpecs;
    case Family::PaGB: return detail::kPagbSpecs;
  }
  return {};
}

inline std::size_t param_count(Family f) { return param_specs(f).size(); }

/// A point of a Leimkuhler curve: cumulative source fraction u, cumulative citation fraction K.
struct CurvePoint {
  double u = 0.0;
  double k_value = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

/// An immutable, validated member of one of the eight curve families.
class CurveModel {
 public:
  CurveModel(Family family, ParamVector params) : family_(family), params_(std::move(params)) {
    validate();
    if (family_ == Family::PaGB) {
      log_pagb_norm_ = specfun::log_kummer_1f1(*params_.beta, *params_.alpha + *params_.beta,
                                               *params_.shift);
    }
  }

  static CurveModel power(double theta) { return {Family::Power, {.theta = theta}}; }
  static CurveModel gp(double theta, double kappa) {
    return {Family::GP, {.theta = theta, .kappa = kappa}};
  }
  static CurveModel pareto(double theta) { return {Family::Pareto, {.theta = theta}}; }
  static CurveModel pg(double alpha, double beta) {
    return {Family::PG, {.alpha = alpha, .beta = beta}};
  }
  static CurveModel pig(double alpha, double beta) {
    return {Family::PIG, {.alpha = alpha, .beta = beta}};
  }
  static CurveModel gpg(double kappa, double alpha, double beta) {
    return {Family::GPG, {.kappa = kappa, .alpha = alpha, .beta = beta}};
  }
  static CurveModel gpig(double kappa, double alpha, double beta) {
    return {Family::GPIG, {.kappa = kappa, .alpha = alpha, .beta = beta}};
  }
  static CurveModel pagb(double alpha, double beta, double shift) {
    return {Family::PaGB, {.alpha = alpha, .beta = beta, .shift = shift}};
  }

  /// Builds a model from parameter values in the canonical order of param_specs().
  static CurveModel from_values(Family family, std::span<const double> values) {
    const auto specs = param_specs(family);
    if (values.size() != specs.size()) {
      throw DomainError(std::string(family_name(family)) + " expects " +
                        std::to_string(specs.size()) + " parameters");
    }
    ParamVector p;
    for (std::size_t i = 0; i < specs.size(); ++i) p[specs[i].id] = values[i];
    return {family, p};
  }

  Family family() const { return family_; }
  const ParamVector& params() const { return params_; }

  std::vector<double> values() const {
    std::vector<double> out;
    for (const auto& s : param_specs(family_)) out.push_back(*params_[s.id]);
    return out;
  }

  /// K(u). Exact at the endpoints: K(0) = 0, K(1) = 1.
  double evaluate(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) {
      throw DomainError("curve argument must lie in [0, 1] (got " + std::to_string(u) + ")");
    }
    if (u == 0.0) return 0.0;
    if (u == 1.0) return 1.0;
    return core({u, 1.0 - u, std::log(u), std::log1p(-u)}).k;
  }

  double operator()(double u) const { return evaluate(u); }

  /// 1 - K(1 - v), computed from v without forming 1 - v first. Accurate for
  /// the tail near u = 1 where K is within rounding of 1.
  double complement_at(double v) const {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("curve argument must lie in [0, 1] (got " + std::to_string(v) + ")");
    }
    if (v == 0.0) return 0.0;
    if (v == 1.0) return 1.0;
    return core({1.0 - v, v, std::log1p(-v), std::log(v)}).complement;
  }

  std::string describe() const {
    std::string out(family_name(family_));
    out += '(';
    bool first = true;
    for (const auto& s : param_specs(family_)) {
      if (!first) out += ", ";
      first = false;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s=%.6g", std::string(param_name(s.id)).c_str(), *params_[s.id]);
      out += buf;
    }
    out += ')';
    return out;
  }

  bool operator==(const CurveModel& other) const {
    return family_ == other.family_ && params_ == other.params_;
  }

 private:
  struct Args {
    double u, ubar, log_u, log_ubar;
  };
  struct Pair {
    double k, complement;
  };

  static Pair from_log_complement(double log_c) {
    return {-std::expm1(log_c), std::exp(log_c)};
  }

  double log_gamma_psi(double log_ubar) const {
    return -*params_.alpha * std::log1p(-log_ubar / *params_.beta);
  }

  double ig_psi(double log_ubar) const {
    const double a = *params_.alpha, b = *params_.beta;
    const double y = -2.0 * a * a * log_ubar / b;
    return (b / a) * (-y / (1.0 + std::sqrt(1.0 + y)));
  }

  double log_one_minus_u_kappa(double log_u) const {
    return std::log(-std::expm1(*params_.kappa * log_u));
  }

  Pair core(const Args& x) const {
    switch (family_) {
      case Family::Power: return from_log_complement((1.0 + *params_.theta) * x.log_ubar);
      case Family::GP:
        return from_log_complement(log_one_minus_u_kappa(x.log_u) + *params_.theta * x.log_ubar);
      case Family::Pareto: {
        const double log_k = (1.0 - *params_.theta) * x.log_u;
        return {std::exp(log_k), -std::expm1(log_k)};
      }
      case Family::PG: return from_log_complement(x.log_ubar + log_gamma_psi(x.log_ubar));
      case Family::GPG:
        return from_log_complement(log_one_minus_u_kappa(x.log_u) + log_gamma_psi(x.log_ubar));
      case Family::PIG: return from_log_complement(x.log_ubar + ig_psi(x.log_ubar));
      case Family::GPIG:
        return from_log_complement(log_one_minus_u_kappa(x.log_u) + ig_psi(x.log_ubar));
      case Family::PaGB: {
        const double a = *params_.alpha, b = *params_.beta;
        double log_k = specfun::log_kummer_1f1(b, a + b, *params_.shift + x.log_u) - log_pagb_norm_;
        log_k = std::min(log_k, 0.0);
        return {std::exp(log_k), -std::expm1(log_k)};
      }
    }
    return {0.0, 1.0};
  }

  void require(ParamId id, bool (*ok)(double), const char* rule) const {
    const auto& v = params_[id];
    if (!v) {
      throw DomainError(std::string(family_name(family_)) + " requires parameter " +
                        std::string(param_name(id)));
    }
    if (!std::isfinite(*v) || !ok(*v)) {
      throw DomainError(std::string(family_name(family_)) + ": " + std::string(param_name(id)) +
                        " must satisfy " + rule + " (got " + std::to_string(*v) + ")");
    }
  }

  void validate() const {
    auto positive = [](double v) { return v > 0.0; };
    auto unit_open = [](double v) { return v > 0.0 && v < 1.0; };
    auto unit_half_open = [](double v) { return v > 0.0 && v <= 1.0; };
    auto any = [](double) { return true; };

    const auto specs = param_specs(family_);
    for (ParamId id : {ParamId::theta, ParamId::kappa, ParamId::alpha, ParamId::beta, ParamId::shift}) {
      const bool used = std::any_of(specs.begin(), specs.end(),
                                    [id](const ParamSpec& s) { return s.id == id; });
      if (!used && params_[id]) {
        throw DomainError(std::string(family_name(family_)) + " does not use parameter " +
                          std::string(param_name(id)));
      }
    }
    switch (family_) {
      case Family::Power: require(ParamId::theta, positive, "theta > 0"); break;
      case Family::GP:
        require(ParamId::theta, positive, "theta > 0");
        require(ParamId::kappa, unit_half_open, "0 < kappa <= 1");
        break;
      case Family::Pareto: require(ParamId::theta, unit_open, "0 < theta < 1"); break;
      case Family::GPG:
      case Family::GPIG:
        require(ParamId::kappa, unit_half_open, "0 < kappa <= 1");
        [[fallthrough]];
      case Family::PG:
      case Family::PIG:
        require(ParamId::alpha, positive, "alpha > 0");
        require(ParamId::beta, positive, "beta > 0");
        break;
      case Family::PaGB:
        require(ParamId::alpha, positive, "alpha > 0");
        require(ParamId::beta, positive, "beta > 0");
        require(ParamId::shift, any, "finite");
        break;
    }
  }

  Family family_;
  ParamVector params_;
  double log_pagb_norm_ = 0.0;
};

// ---------------------------------------------------------------------------
// Generic constructions

/// K(u) = (1/mean) * integral_{1-u}^{1} Q(y) dy by adaptive quadrature.
///
/// `quantile` is called either as Q(y) or, when it accepts two arguments, as
/// Q(y, 1 - y) with the complement passed exactly; quantiles singular at y = 1
/// (Pareto) need the two-argument form to resolve the tail.
template <class Quantile>
double leimkuhler_from_quantile(Quantile&& quantile, double mean, double u, double tol) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("quantile mean must be positive");
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("curve argument must lie in [0, 1]");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (u == 0.0) return 0.0;

  // Integrate in s = 1 - y over [0, u] so the upper-tail end keeps full resolution.
  auto integrand = [&quantile](double s) {
    if constexpr (std::is_invocable_r_v<double, Quantile, double, double>) {
      return quantile(1.0 - s, s);
    } else {
      return quantile(1.0 - s);
    }
  };
  const auto r = numeric::integrate(integrand, 0.0, u, tol * mean);
  return r.value / mean;
}

/// Leimkuhler curve from a Lorenz curve: K(u) = 1 - L(1 - u).
template <class Lorenz>
double lorenz_to_leimkuhler(Lorenz&& lorenz, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("curve argument must lie in [0, 1]");
  return 1.0 - lorenz(1.0 - u);
}

/// Base curve for a numeric mixture over its shape parameter theta.
struct BaseCurve {
  Family family = Family::Power;  // Power, GP or Pareto
  double kappa = 1.0;             // GP only

  CurveModel at(double theta) const {
    switch (family) {
      case Family::Power: return CurveModel::power(theta);
      case Family::GP: return CurveModel::gp(theta, kappa);
      case Family::Pareto: return CurveModel::pareto(theta);
      default: throw DomainError("mixture base must be Power, GP or Pareto");
    }
  }

  /// K(u; theta) given log u, log(1 - u) and 1 - theta. The Pareto exponent is
  /// taken from the exact complement so theta within rounding of 1 stays usable.
  double evaluate(double log_u, double log_ubar, double theta, double one_minus_theta) const {
    switch (family) {
      case Family::Power: return -std::expm1((1.0 + theta) * log_ubar);
      case Family::GP: return -std::expm1(std::log(-std::expm1(kappa * log_u)) + theta * log_ubar);
      case Family::Pareto: return std::exp(one_minus_theta * log_u);
      default: throw DomainError("mixture base must be Power, GP or Pareto");
    }
  }
};

/// Support of a mixing density; `upper` may be +infinity.
struct Interval {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

namespace detail {

/// Integrates f(theta, upper - theta) over the support. A finite support is
/// split at its midpoint and the upper half is integrated in s = upper - theta,
/// so singularities at the upper end get the same resolution as at the lower.
template <class F>
numeric::QuadratureResult integrate_over(F&& f, const Interval& support, double tol) {
  if (std::isinf(support.upper)) {
    const double inf = support.upper;
    return numeric::integrate_to_infinity([&](double t) { return f(t, inf); }, support.lower, tol);
  }
  const double a = support.lower, b = support.upper;
  const double mid = a + 0.5 * (b - a);
  const auto lo = numeric::integrate([&](double t) { return f(t, b - t); }, a, mid, 0.5 * tol);
  const auto hi = numeric::integrate([&](double s) { return f(b - s, s); }, 0.0, b - mid, 0.5 * tol);
  return {lo.value + hi.value, lo.abs_error + hi.abs_error, lo.intervals + hi.intervals};
}

/// Calls density(theta, upper - theta) when the density accepts the complement.
template <class Density>
double density_at(Density& density, double theta, double complement) {
  if constexpr (std::is_invocable_r_v<double, Density&, double, double>) {
    return density(theta, complement);
  } else {
    return density(theta);
  }
}

}  // namespace detail

/// integral K(u; theta) g(theta) dtheta over the support, the mixture curve by quadrature.
/// The density must integrate to one within `tol`. A density callable as
/// g(theta, upper - theta) receives the exact distance to the upper end.
template <class Density>
double mixture_curve_numeric(const BaseCurve& base, Density&& density, const Interval& support,
                             double u, double tol) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("curve argument must lie in [0, 1]");
  if (!std::isfinite(support.lower) || !(support.upper > support.lower)) {
    throw DomainError("mixture support must be a non-empty interval with finite lower end");
  }
  if (base.family != Family::Power && base.family != Family::GP && base.family != Family::Pareto) {
    throw DomainError("mixture base must be Power, GP or Pareto");
  }
  if (base.family == Family::Pareto && (support.lower < 0.0 || support.upper > 1.0)) {
    throw DomainError("Pareto mixture support must lie within [0, 1]");
  }
  if (base.family == Family::GP && !(base.kappa > 0.0 && base.kappa <= 1.0)) {
    throw DomainError("GP base needs 0 < kappa <= 1");
  }
  if (base.family != Family::Pareto && support.lower < 0.0) {
    throw DomainError("mixture support must lie in theta >= 0");
  }

  const auto norm = detail::integrate_over(
      [&](double t, double c) { return detail::density_at(density, t, c); }, support, 0.25 * tol);
  if (std::abs(norm.value - 1.0) > tol) {
    throw DomainError("mixing density integrates to " + std::to_string(norm.value) + ", not 1");
  }
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;

  const double log_u = std::log(u), log_ubar = std::log1p(-u);
  const double upper = support.upper;
  auto integrand = [&](double theta, double complement) {
    const double g = detail::density_at(density, theta, complement);
    if (g == 0.0) return 0.0;
    // On the lower half complement = upper - theta; only Pareto (upper = 1) uses it.
    const double one_minus = upper == 1.0 ? complement : 1.0 - theta;
    return base.evaluate(log_u, log_ubar, theta, one_minus) * g;
  };
  return detail::integrate_over(integrand, support, 0.5 * tol).value;
}

// ---------------------------------------------------------------------------
// Validation of properties (i)-(iii)

enum class CurveProperty { endpoints, range, nondecreasing, concave };

inline std::string_view to_string(CurveProperty p) {
  switch (p) {
    case CurveProperty::endpoints: return "endpoints";
    case CurveProperty::range: return "range";
    case CurveProperty::nondecreasing: return "nondecreasing";
    case CurveProperty::concave: return "concave";
  }
  return "unknown";
}

struct Violation {
  CurveProperty property;
  double u;        // location on the grid
  double amount;   // size of the violation
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
  bool flags(CurveProperty p) const {
    return std::any_of(violations.begin(), violations.end(),
                       [p](const Violation& v) { return v.property == p; });
  }
};

inline constexpr double kMonotoneSlack = 1e-12;
inline constexpr double kConcaveSlack = 1e-10;

/// Checks K(0)=0, K(1)=1, monotonicity and concavity of any curve u -> K(u)
/// on a uniform grid of `grid_size` points.
template <class Curve>
ValidationReport validate_curve_fn(Curve&& curve, std::size_t grid_size) {
  if (grid_size < 3) throw DomainError("validation grid needs at least 3 points");
  std::vector<double> k(grid_size);
  std::vector<double> u(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    u[i] = (i + 1 == grid_size) ? 1.0 : static_cast<double>(i) / static_cast<double>(grid_size - 1);
    k[i] = curve(u[i]);
  }
  ValidationReport report;
  if (k.front() != 0.0) report.violations.push_back({CurveProperty::endpoints, 0.0, std::abs(k.front())});
  if (k.back() != 1.0) report.violations.push_back({CurveProperty::endpoints, 1.0, std::abs(k.back() - 1.0)});
  for (std::size_t i = 0; i < grid_size; ++i) {
    if (!(k[i] >= 0.0 && k[i] <= 1.0)) {
      report.violations.push_back({CurveProperty::range, u[i], k[i] < 0.0 ? -k[i] : k[i] - 1.0});
    }
  }
  for (std::size_t i = 0; i + 1 < grid_size; ++i) {
    const double d = k[i + 1] - k[i];
    if (d < -kMonotoneSlack) report.violations.push_back({CurveProperty::nondecreasing, u[i], -d});
  }
  for (std::size_t i = 1; i + 1 < grid_size; ++i) {
    const double d2 = k[i + 1] - 2.0 * k[i] + k[i - 1];
    if (d2 > kConcaveSlack) report.violations.push_back({CurveProperty::concave, u[i], d2});
  }
  return report;
}

inline ValidationReport validate_curve(const CurveModel& model, std::size_t grid_size) {
  return validate_curve_fn([&model](double u) { return model.evaluate(u); }, grid_size);
}

}  // namespace leimkuhler
