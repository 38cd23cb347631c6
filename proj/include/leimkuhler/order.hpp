#pragma once

// Pointwise comparison of Leimkuhler curves and checks of the monotone
// parameter orderings of the mixture families.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "leimkuhler/curves.hpp"
#include "leimkuhler/errors.hpp"

namespace leimkuhler {

/// "Dominates" means the pointwise larger curve, i.e. more concentration.
enum class Dominance { first_dominates, second_dominates, crossing, equal };

inline std::string_view to_string(Dominance d) {
  switch (d) {
    case Dominance::first_dominates: return "first_dominates";
    case Dominance::second_dominates: return "second_dominates";
    case Dominance::crossing: return "crossing";
    case Dominance::equal: return "equal";
  }
  return "unknown";
}

struct DominanceResult {
  Dominance relation = Dominance::equal;
  double max_gap = 0.0;
  std::vector<double> crossing_points;
};

inline constexpr double kDefaultDeadBand = 1e-12;

/// Classifies the sign pattern of K_a - K_b on a uniform grid of `grid_size`
/// points. Differences within `tol` count as ties; sign changes are bisected
/// to a u-width of `tol`.
inline DominanceResult leimkuhler_compare(const CurveModel& a, const CurveModel& b, std::size_t grid_size = 257,
                                          double tol = kDefaultDeadBand) {
  if (grid_size < 16) throw DomainError("comparison grid needs at least 16 points");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  auto gap = [&](double u) { return a.evaluate(u) - b.evaluate(u); };
  auto sign = [tol](double d) { return d > tol ? 1 : (d < -tol ? -1 : 0); };

  DominanceResult out;
  const double step = 1.0 / static_cast<double>(grid_size - 1);
  bool pos = false, neg = false;
  int last_sign = 0;
  double last_u = 0.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double u = i + 1 == grid_size ? 1.0 : static_cast<double>(i) * step;
    const double d = gap(u);
    out.max_gap = std::max(out.max_gap, std::abs(d));
    const int s = sign(d);
    if (s == 0) continue;
    (s > 0 ? pos : neg) = true;
    if (last_sign != 0 && s != last_sign) {
      double lo = last_u, hi = u;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double dm = gap(mid);
        if ((dm > 0.0) == (last_sign > 0)) {
          lo = mid;
        } else {
          hi = mid;
        }
        if (mid == lo && mid == hi) break;
      }
      out.crossing_points.push_back(0.5 * (lo + hi));
    }
    last_sign = s;
    last_u = u;
  }
  if (pos && neg) {
    out.relation = Dominance::crossing;
  } else if (pos) {
    out.relation = Dominance::first_dominates;
  } else if (neg) {
    out.relation = Dominance::second_dominates;
  }
  return out;
}

/// Monotone orderings asserted for the mixture families, each stated for an
/// increase of one parameter:
///   pg_alpha     PG/GPG alpha up   -> K pointwise down
///   pg_beta      PG/GPG beta up    -> K pointwise up
///   pig_alpha    PIG/GPIG alpha up -> K pointwise down
///   pig_beta     PIG/GPIG beta up  -> K pointwise down
///   kappa        GPG/GPIG kappa up -> K pointwise up
enum class Proposition { pg_alpha, pg_beta, pig_alpha, pig_beta, kappa };

inline constexpr Proposition kAllPropositions[] = {Proposition::pg_alpha, Proposition::pg_beta,
                                                   Proposition::pig_alpha, Proposition::pig_beta,
                                                   Proposition::kappa};

inline std::string_view to_string(Proposition p) {
  switch (p) {
    case Proposition::pg_alpha: return "pg_alpha";
    case Proposition::pg_beta: return "pg_beta";
    case Proposition::pig_alpha: return "pig_alpha";
    case Proposition::pig_beta: return "pig_beta";
    case Proposition::kappa: return "kappa";
  }
  return "unknown";
}

inline std::optional<Proposition> parse_proposition(std::string_view s) {
  for (auto p : kAllPropositions) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

inline ParamId perturbed_parameter(Proposition p) {
  switch (p) {
    case Proposition::pg_alpha:
    case Proposition::pig_alpha: return ParamId::alpha;
    case Proposition::pg_beta:
    case Proposition::pig_beta: return ParamId::beta;
    case Proposition::kappa: return ParamId::kappa;
  }
  return ParamId::alpha;
}

/// +1 when the asserted curve rises with the parameter, -1 when it falls.
inline int asserted_direction(Proposition p) {
  switch (p) {
    case Proposition::pg_alpha:
    case Proposition::pig_alpha:
    case Proposition::pig_beta: return -1;
    case Proposition::pg_beta:
    case Proposition::kappa: return 1;
  }
  return 0;
}

inline bool applies_to(Proposition p, Family f) {
  switch (p) {
    case Proposition::pg_alpha:
    case Proposition::pg_beta: return f == Family::PG || f == Family::GPG;
    case Proposition::pig_alpha:
    case Proposition::pig_beta: return f == Family::PIG || f == Family::GPIG;
    case Proposition::kappa: return f == Family::GPG || f == Family::GPIG;
  }
  return false;
}

struct OrderingWitness {
  double u = 0.0;
  double k_base = 0.0;
  double k_perturbed = 0.0;
};

struct PropositionCheck {
  bool holds = true;
  std::optional<OrderingWitness> witness;  // the largest violation when !holds
  CurveModel base;
  CurveModel perturbed;
};

/// Compares `base` with the same model after raising the proposition's
/// parameter by `delta`, in the asserted direction, on `grid_size` points
/// with a dead band of `tol`.
inline PropositionCheck check_proposition(Proposition prop, const CurveModel& base, double delta,
                                          std::size_t grid_size = 257, double tol = kDefaultDeadBand) {
  if (!applies_to(prop, base.family())) {
    throw DomainError(std::string(to_string(prop)) + " does not apply to " +
                      std::string(family_name(base.family())));
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
  if (grid_size < 3) throw DomainError("ordering grid needs at least 3 points");
  ParamVector p = base.params();
  auto& slot = p[perturbed_parameter(prop)];
  *slot += delta;
  // The constructor rejects values outside the family's box (kappa > 1).
  PropositionCheck out{.holds = true, .witness = std::nullopt, .base = base, .perturbed = CurveModel(base.family(), p)};

  const int dir = asserted_direction(prop);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid_size; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(grid_size - 1);
    const double k0 = base.evaluate(u), k1 = out.perturbed.evaluate(u);
    const double violation = -dir * (k1 - k0);
    if (violation > tol && violation > worst) {
      worst = violation;
      out.holds = false;
      out.witness = OrderingWitness{u, k0, k1};
    }
  }
  return out;
}

}  // namespace leimkuhler
