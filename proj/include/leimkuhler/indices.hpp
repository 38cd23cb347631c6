#pragma once

// Concentration indices of Leimkuhler curves: Gini 2*int K - 1, the generalized
// Gini r(r+1) int (1-u)^(r-1) K - 1 and the Pietra index max (K(u) - u).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include "leimkuhler/curves.hpp"
#include "leimkuhler/empirical.hpp"
#include "leimkuhler/errors.hpp"
#include "leimkuhler/mixing.hpp"
#include "leimkuhler/numeric/golden_section.hpp"
#include "leimkuhler/numeric/quadrature.hpp"
#include "leimkuhler/specfun.hpp"

namespace leimkuhler {

enum class IndexMethod { closed_form, quadrature, search };

inline std::string_view to_string(IndexMethod m) {
  switch (m) {
    case IndexMethod::closed_form: return "closed_form";
    case IndexMethod::quadrature: return "quadrature";
    case IndexMethod::search: return "search";
  }
  return "unknown";
}

inline std::optional<IndexMethod> parse_index_method(std::string_view s) {
  for (auto m : {IndexMethod::closed_form, IndexMethod::quadrature, IndexMethod::search}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

struct IndexValue {
  double value = 0.0;
  IndexMethod method = IndexMethod::closed_form;
  bool operator==(const IndexValue&) const = default;
};

struct PietraValue {
  double value = 0.0;
  double argmax_u = 0.0;
  IndexMethod method = IndexMethod::closed_form;
  bool operator==(const PietraValue&) const = default;
};

struct GeneralizedGini {
  double r = 1.0;
  double value = 0.0;
  IndexMethod method = IndexMethod::closed_form;
  bool operator==(const GeneralizedGini&) const = default;
};

struct IndexReport {
  IndexValue gini;
  std::vector<GeneralizedGini> generalized_gini;
  PietraValue pietra;
  bool operator==(const IndexReport&) const = default;
};

inline const std::vector<double>& default_r_values() {
  static const std::vector<double> r{0.5, 1.0, 2.0};
  return r;
}

inline constexpr double kDefaultIndexTolerance = 1e-10;

namespace detail {

// Expectation of f over a mixing law with the given bulk location and spread.
// A narrow bulk is integrated as its own piece; a global adaptive rule can
// step over it entirely.
template <class F>
double mixture_expectation(F&& f, double lower, double upper, double center, double spread, double tol) {
  const bool peaked = spread < 0.1 * center;
  if (!peaked) {
    return std::isinf(upper) ? numeric::integrate_to_infinity(f, lower, tol).value
                             : numeric::integrate(f, lower, upper, tol).value;
  }
  const double a = std::max(lower, center - 20.0 * spread);
  const double b = std::min(upper, center + 20.0 * spread);
  double v = numeric::integrate(f, a, b, tol / 3.0).value;
  if (a > lower) v += numeric::integrate(f, lower, a, tol / 3.0).value;
  if (b < upper) {
    v += std::isinf(upper) ? numeric::integrate_to_infinity(f, b, tol / 3.0).value
                           : numeric::integrate(f, b, upper, tol / 3.0).value;
  }
  return v;
}

// Mode and curvature spread of theta^(a-1) (1-theta)^(b-1) e^(-shift theta) on
// (0,1) when both shapes exceed one; otherwise the beta mean and deviation.
inline std::pair<double, double> confluent_bulk(double a, double b, double shift) {
  if (a > 1.0 && b > 1.0) {
    auto slope = [&](double t) { return (a - 1.0) / t - (b - 1.0) / (1.0 - t) - shift; };
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-300; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    const double m = 0.5 * (lo + hi);
    const double curvature = (a - 1.0) / (m * m) + (b - 1.0) / ((1.0 - m) * (1.0 - m));
    return {m, 1.0 / std::sqrt(curvature)};
  }
  const double s = a + b;
  return {a / s, std::sqrt(a * b / (s * s * (s + 1.0)))};
}

inline void require_tol(double tol) {
  if (!(tol > 0.0)) throw DomainError("index tolerance must be positive");
}

// Clamp-check into [lo, hi]: rounding noise within tol is clamped, more is a bug.
inline double checked_unit(double v, double tol, const char* what, double lo = 0.0, double hi = 1.0) {
  if (!std::isfinite(v) || v < lo - tol || v > hi + tol) {
    throw ConsistencyError(std::string(what) + " = " + std::to_string(v) + " falls outside [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return std::clamp(v, lo, hi);
}

inline double gp_gini(double theta, double kappa) {
  const double lg = specfun::log_gamma(kappa + 1.0) + specfun::log_gamma(theta + 1.0) -
                    specfun::log_gamma(theta + kappa + 2.0);
  return 2.0 * std::exp(lg) + (theta - 1.0) / (theta + 1.0);
}

// alpha * Gamma(-alpha, x) x^alpha e^x, the building block of the PG indices.
inline double pg_index_term(double alpha, double x) {
  return alpha * specfun::upper_incomplete_gamma_scaled(-alpha, x).value;
}

inline double pareto_generalized_gini(double theta, double r) {
  return std::exp(specfun::log_gamma(2.0 + r) + specfun::log_gamma(2.0 - theta) -
                  specfun::log_gamma(2.0 + r - theta)) -
         1.0;
}

}  // namespace detail

/// r - r(r+1) int_0^1 v^(r-1) (1 - K(1 - v)) dv, by adaptive quadrature of the curve.
/// The complement form keeps precision near u = 1 and handles r < 1.
inline IndexValue generalized_gini_by_quadrature(const CurveModel& model, double r,
                                                 double tol = kDefaultIndexTolerance) {
  detail::require_tol(tol);
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("generalized Gini requires r > 0");
  auto integrand = [&](double v) {
    const double c = model.complement_at(v);
    return c == 0.0 ? 0.0 : std::pow(v, r - 1.0) * c;
  };
  const double scale = r * (r + 1.0);
  const auto q = numeric::integrate(integrand, 0.0, 1.0, tol / scale);
  // The generalized index of a concave curve lies in [0, r].
  const double v = detail::checked_unit(r - scale * q.value, tol, "generalized Gini", 0.0, std::max(1.0, r));
  return {v, IndexMethod::quadrature};
}

/// 2 int K - 1 by quadrature of the curve itself; the independent oracle for every family.
inline IndexValue gini_by_curve_quadrature(const CurveModel& model, double tol = kDefaultIndexTolerance) {
  auto g = generalized_gini_by_quadrature(model, 1.0, tol);
  g.value = detail::checked_unit(g.value, tol, "Gini");
  return g;
}

/// Gini of a mixture family as the expectation of the base Gini over the mixing law.
inline IndexValue gini_by_mixture_expectation(const CurveModel& model, double tol = kDefaultIndexTolerance) {
  detail::require_tol(tol);
  const auto& p = model.params();
  const double inf = std::numeric_limits<double>::infinity();
  const double ig_spread = p.alpha && p.beta ? std::sqrt(*p.alpha * *p.alpha * *p.alpha / *p.beta) : 0.0;
  double value = 0.0;
  switch (model.family()) {
    case Family::PG: {
      const mixing::GammaDensity g(*p.alpha, *p.beta);
      auto f = [&](double t) { return t / (2.0 + t) * g(t); };
      value = detail::mixture_expectation(f, 0.0, inf, g.mean(), std::sqrt(*p.alpha) / *p.beta, tol);
      break;
    }
    case Family::PIG: {
      const mixing::InverseGaussianDensity g(*p.alpha, *p.beta);
      auto f = [&](double t) { return t / (2.0 + t) * g(t); };
      value = detail::mixture_expectation(f, 0.0, inf, g.mean(), ig_spread, tol);
      break;
    }
    case Family::GPG: {
      const mixing::GammaDensity g(*p.alpha, *p.beta);
      const double kappa = *p.kappa;
      auto f = [&](double t) {
        const double w = g(t);
        return w == 0.0 ? 0.0 : detail::gp_gini(t, kappa) * w;
      };
      value = detail::mixture_expectation(f, 0.0, inf, g.mean(), std::sqrt(*p.alpha) / *p.beta, tol);
      break;
    }
    case Family::GPIG: {
      const mixing::InverseGaussianDensity g(*p.alpha, *p.beta);
      const double kappa = *p.kappa;
      auto f = [&](double t) {
        const double w = g(t);
        return w == 0.0 ? 0.0 : detail::gp_gini(t, kappa) * w;
      };
      value = detail::mixture_expectation(f, 0.0, inf, g.mean(), ig_spread, tol);
      break;
    }
    case Family::PaGB: {
      const mixing::ConfluentHypergeometricDensity g(*p.alpha, *p.beta, *p.shift);
      const auto [mode, spread] = detail::confluent_bulk(*p.alpha, *p.beta, *p.shift);
      if (spread < 0.1 * std::min(mode, 1.0 - mode)) {
        auto f = [&](double t) { return t / (2.0 - t) * g(t); };
        value = detail::mixture_expectation(f, 0.0, 1.0, mode, spread, tol);
      } else {
        auto f = [&](double t, double one_minus) { return t / (1.0 + one_minus) * g(t, one_minus); };
        value = detail::integrate_over(f, g.support(), tol).value;
      }
      break;
    }
    default: throw DomainError(std::string(family_name(model.family())) + " is not a mixture family");
  }
  return {detail::checked_unit(value, tol, "Gini"), IndexMethod::quadrature};
}

inline IndexValue gini(const CurveModel& model, double tol = kDefaultIndexTolerance) {
  detail::require_tol(tol);
  const auto& p = model.params();
  double v = 0.0;
  switch (model.family()) {
    case Family::Power: v = *p.theta / (2.0 + *p.theta); break;
    case Family::GP: v = detail::gp_gini(*p.theta, *p.kappa); break;
    case Family::Pareto: v = *p.theta / (2.0 - *p.theta); break;
    case Family::PG: v = detail::pg_index_term(*p.alpha, 2.0 * *p.beta); break;
    default: return gini_by_mixture_expectation(model, tol);
  }
  return {detail::checked_unit(v, tol, "Gini"), IndexMethod::closed_form};
}

inline IndexValue generalized_gini(const CurveModel& model, double r, double tol = kDefaultIndexTolerance) {
  detail::require_tol(tol);
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("generalized Gini requires r > 0");
  const auto& p = model.params();
  double v = 0.0;
  switch (model.family()) {
    case Family::Power: v = r * *p.theta / (1.0 + r + *p.theta); break;
    case Family::Pareto: v = detail::pareto_generalized_gini(*p.theta, r); break;
    case Family::PG: v = r * detail::pg_index_term(*p.alpha, (1.0 + r) * *p.beta); break;
    default: return generalized_gini_by_quadrature(model, r, tol);
  }
  return {detail::checked_unit(v, tol, "generalized Gini", 0.0, std::max(1.0, r)), IndexMethod::closed_form};
}

/// max_u K(u) - u by golden-section search; K concave makes the objective unimodal.
inline PietraValue pietra_by_search(const CurveModel& model, double tol = kDefaultIndexTolerance) {
  detail::require_tol(tol);
  const auto opt = numeric::golden_section_maximize([&](double u) { return model.evaluate(u) - u; }, 0.0,
                                                    1.0, tol);
  return {detail::checked_unit(opt.value, tol, "Pietra"), opt.argument, IndexMethod::search};
}

inline PietraValue pietra(const CurveModel& model, double tol = kDefaultIndexTolerance) {
  detail::require_tol(tol);
  const auto& p = model.params();
  switch (model.family()) {
    case Family::Power: {
      const double t = *p.theta;
      const double u = -std::expm1(-std::log1p(t) / t);
      const double v = t * std::exp((-1.0 / t - 1.0) * std::log1p(t));
      return {detail::checked_unit(v, tol, "Pietra"), u, IndexMethod::closed_form};
    }
    case Family::Pareto: {
      // Stationary point of u^(1-theta) - u.
      const double t = *p.theta;
      const double u = std::exp(std::log1p(-t) / t);
      const double v = t * std::exp((1.0 / t - 1.0) * std::log1p(-t));
      return {detail::checked_unit(v, tol, "Pietra"), u, IndexMethod::closed_form};
    }
    default: return pietra_by_search(model, tol);
  }
}

inline IndexReport index_report(const CurveModel& model, const std::vector<double>& r_values = default_r_values(),
                                double tol = kDefaultIndexTolerance) {
  IndexReport rep;
  rep.gini = gini(model, tol);
  for (double r : r_values) {
    const auto g = generalized_gini(model, r, tol);
    rep.generalized_gini.push_back({r, g.value, g.method});
  }
  rep.pietra = pietra(model, tol);
  return rep;
}

// ---------------------------------------------------------------------------
// Empirical polygon

/// r(r+1) int (1-u)^(r-1) K(u) du - 1 over the polygon. Each linear piece is
/// integrated exactly, which stays finite at u = 1 for r < 1 where the
/// trapezoid rule on the integrand would not. r = 1 reduces to the trapezoid
/// rule on K.
inline double empirical_generalized_gini(const EmpiricalCurve& curve, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("generalized Gini requires r > 0");
  const std::size_t n = curve.source_n();
  if (r == 1.0) {
    // Trapezoid rule with the K_0 = 0, K_n = 1 ends folded in.
    long double inner = 0.0L;
    for (std::size_t i = 1; i < n; ++i) inner += curve.k(i);
    const long double area = (inner + 0.5L) / static_cast<long double>(n);
    return static_cast<double>(2.0L * area - 1.0L);
  }
  // With v = 1 - u and K linear between knots, int v^(r-1) (a + b v) dv has a closed form.
  // Substituting K = 1 - C: result = r - r(r+1) int v^(r-1) C(v) dv.
  long double acc = 0.0L;
  const long double rr = r;
  for (std::size_t i = 0; i < n; ++i) {
    // piece between u_i and u_{i+1}; in v: from v1 = 1 - u_{i+1} to v0 = 1 - u_i
    const long double v0 = static_cast<long double>(n - i) / n;
    const long double v1 = static_cast<long double>(n - i - 1) / n;
    const long double c0 = 1.0L - curve.k(i);
    const long double c1 = 1.0L - curve.k(i + 1);
    const long double slope = (c0 - c1) * n;  // dC/dv on this piece
    const long double intercept = c1 - slope * v1;
    auto prim = [&](long double v) {
      if (v == 0.0L) return 0.0L;
      return intercept * std::pow(v, rr) / rr + slope * std::pow(v, rr + 1.0L) / (rr + 1.0L);
    };
    acc += prim(v0) - prim(v1);
  }
  return static_cast<double>(rr - rr * (rr + 1.0L) * acc);
}

inline IndexReport empirical_indices(const EmpiricalCurve& curve,
                                     const std::vector<double>& r_values = default_r_values()) {
  if (curve.size() < 2) throw DomainError("empirical indices need at least 2 points");
  IndexReport rep;
  rep.gini = {empirical_generalized_gini(curve, 1.0), IndexMethod::quadrature};
  for (double r : r_values) rep.generalized_gini.push_back({r, empirical_generalized_gini(curve, r), IndexMethod::quadrature});

  // K - u is piecewise linear, so its maximum sits on a vertex.
  double best = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double d = curve.k(i) - curve.u(i);
    if (d > best) {
      best = d;
      arg = i;
    }
  }
  rep.pietra = {best, curve.u(arg), IndexMethod::search};
  return rep;
}

}  // namespace leimkuhler
