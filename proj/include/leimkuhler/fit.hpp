#pragma once

// Non-linear least squares for Leimkuhler curves: Levenberg-Marquardt on an
// unconstrained reparameterization, seeded multistart, covariance-based
// standard errors and the model comparison metrics.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "leimkuhler/curves.hpp"
#include "leimkuhler/empirical.hpp"
#include "leimkuhler/errors.hpp"
#include "leimkuhler/indices.hpp"

namespace leimkuhler {

/// Divisor of the residual variance in the covariance estimate.
enum class ResidualDivisor { n, n_minus_p };

/// What k counts in CAIC = k (1 + log n) - 2 log L.
enum class CaicPenalty { curve_parameters, curve_parameters_plus_variance };

/// Coordinates the optimizer moves in.
enum class Parameterization { transformed, raw };

struct FitConfig {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-12;
  int multistart_count = 16;
  std::uint64_t seed = 1;
  ResidualDivisor variance_divisor = ResidualDivisor::n_minus_p;
  CaicPenalty caic_penalty = CaicPenalty::curve_parameters;
  Parameterization parameterization = Parameterization::transformed;
  bool parallel = true;  // compare_models only

  void validate() const {
    if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
    if (multistart_count < 1) throw DomainError("multistart_count must be at least 1");
    if (!(gradient_tolerance > 0.0) || !std::isfinite(gradient_tolerance)) {
      throw DomainError("gradient_tolerance must be positive");
    }
    if (!(step_tolerance > 0.0) || !std::isfinite(step_tolerance)) {
      throw DomainError("step_tolerance must be positive");
    }
  }
};

struct FitMetrics {
  double sse = 0.0;
  double mse = 0.0;
  double max_abs = 0.0;
  double mae = 0.0;
};

struct FitResult {
  CurveModel model;
  std::optional<std::vector<double>> std_errors{};  // nullopt when the Jacobian is rank deficient
  double sse = 0.0;
  double mse = 0.0;
  double max_abs = 0.0;
  double mae = 0.0;
  double caic = 0.0;  // -inf marks a perfect fit
  bool converged = false;
  bool at_boundary = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> objective_history{};
  std::size_t n = 0;
  int starts = 0;
  std::string message{};
};

inline double caic(double sse, std::size_t n, std::size_t p) {
  if (!(sse >= 0.0) || !std::isfinite(sse)) throw DomainError("caic needs a finite sse >= 0");
  if (n == 0 || p == 0) throw DomainError("caic needs n > 0 and p >= 1");
  if (sse == 0.0) return -std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  const double log_lik = -0.5 * nn * (std::log(2.0 * std::numbers::pi * sse / nn) + 1.0);
  return static_cast<double>(p) * (1.0 + std::log(nn)) - 2.0 * log_lik;
}

/// Residuals K_i - K(i/n) for i = 1..n.
inline std::vector<double> fit_residuals(const EmpiricalCurve& curve, const CurveModel& model) {
  const std::size_t n = curve.source_n();
  std::vector<double> r(n);
  for (std::size_t i = 1; i <= n; ++i) r[i - 1] = curve.k(i) - model.evaluate(curve.u(i));
  return r;
}

inline FitMetrics metrics_from_residuals(std::span<const double> r) {
  FitMetrics m;
  for (double x : r) {
    m.sse += x * x;
    m.mae += std::abs(x);
    m.max_abs = std::max(m.max_abs, std::abs(x));
  }
  const double n = static_cast<double>(r.size());
  m.mse = m.sse / n;
  m.mae /= n;
  return m;
}

inline FitMetrics fit_metrics(const EmpiricalCurve& curve, const CurveModel& model) {
  return metrics_from_residuals(fit_residuals(curve, model));
}

/// sqrt(diag(sigma^2 (J'J)^-1)) with sigma^2 = sse / (n - p) or sse / n. J is the
/// residual Jacobian in the model's own parameter coordinates.
inline std::optional<std::vector<double>> standard_errors(const Eigen::MatrixXd& jacobian, double sse,
                                                          std::size_t n, std::size_t p,
                                                          ResidualDivisor divisor = ResidualDivisor::n_minus_p) {
  if (static_cast<std::size_t>(jacobian.cols()) != p || static_cast<std::size_t>(jacobian.rows()) != n) {
    throw DomainError("jacobian shape does not match n x p");
  }
  if (n <= p) return std::nullopt;
  if (!jacobian.allFinite()) return std::nullopt;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jacobian);
  if (qr.rank() < static_cast<Eigen::Index>(p)) return std::nullopt;
  const double dof = divisor == ResidualDivisor::n ? static_cast<double>(n) : static_cast<double>(n - p);
  const double sigma2 = sse / dof;
  const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
  const Eigen::MatrixXd cov = sigma2 * jtj.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  std::vector<double> se(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double v = cov(j, j);
    if (!(v >= 0.0) || !std::isfinite(v)) return std::nullopt;
    se[j] = std::sqrt(v);
  }
  return se;
}

namespace detail {

// Optimizer coordinate z <-> parameter x for one box.
struct Coordinate {
  ParamSpec spec;
  bool raw = false;

  double to_param(double z) const {
    if (raw) return z;
    switch (spec.transform) {
      case Transform::log: return std::exp(z);
      case Transform::logit: {
        const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        return spec.lower + (spec.upper - spec.lower) * s;
      }
      case Transform::identity: return z;
    }
    return z;
  }

  double from_param(double x) const {
    if (raw) return x;
    switch (spec.transform) {
      case Transform::log: return std::log(x);
      case Transform::logit: {
        const double s = (x - spec.lower) / (spec.upper - spec.lower);
        return std::log(s) - std::log1p(-s);
      }
      case Transform::identity: return x;
    }
    return x;
  }

  // dz/dx, for carrying a Jacobian back to parameter coordinates.
  double dz_dx(double x) const {
    if (raw) return 1.0;
    switch (spec.transform) {
      case Transform::log: return 1.0 / x;
      case Transform::logit: return (spec.upper - spec.lower) / ((x - spec.lower) * (spec.upper - x));
      case Transform::identity: return 1.0;
    }
    return 1.0;
  }

  bool inside(double x) const {
    if (!std::isfinite(x)) return false;
    // kappa = 1 is a member of the family (the Power or PG/PIG limit).
    const bool closed_upper = spec.id == ParamId::kappa;
    return x > spec.lower && (x < spec.upper || (closed_upper && x == spec.upper));
  }

  // Within reach of a box edge, where the transformed gradient vanishes artificially.
  bool near_edge(double z) const {
    const double x = to_param(z);
    switch (spec.transform) {
      case Transform::log: return x < 1e-8 || x > 0.5 * spec.upper;
      case Transform::logit: {
        const double s = (x - spec.lower) / (spec.upper - spec.lower);
        return s < 1e-8 || s > 1.0 - 1e-8;
      }
      case Transform::identity: return std::abs(x) > 1e6;
    }
    return false;
  }
};

class Objective {
 public:
  Objective(const EmpiricalCurve& curve, Family family, bool raw) : curve_(curve), family_(family) {
    for (const auto& s : param_specs(family)) coords_.push_back({s, raw});
    n_ = curve.source_n();
  }

  std::size_t n() const { return n_; }
  std::size_t p() const { return coords_.size(); }
  const std::vector<Coordinate>& coords() const { return coords_; }

  std::optional<std::vector<double>> params(const Eigen::VectorXd& z) const {
    std::vector<double> x(p());
    for (std::size_t j = 0; j < p(); ++j) {
      x[j] = coords_[j].to_param(z[j]);
      if (!coords_[j].inside(x[j])) return std::nullopt;
    }
    return x;
  }

  Eigen::VectorXd to_z(std::span<const double> x) const {
    Eigen::VectorXd z(p());
    for (std::size_t j = 0; j < p(); ++j) z[j] = coords_[j].from_param(x[j]);
    return z;
  }

  // Residual vector, or nullopt outside the domain.
  std::optional<Eigen::VectorXd> residuals(const Eigen::VectorXd& z) const {
    const auto x = params(z);
    if (!x) return std::nullopt;
    try {
      const auto model = CurveModel::from_values(family_, *x);
      Eigen::VectorXd r(n_);
      for (std::size_t i = 1; i <= n_; ++i) r[i - 1] = curve_.k(i) - model.evaluate(curve_.u(i));
      if (!r.allFinite()) return std::nullopt;
      return r;
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  // Central differences with h = sqrt(eps) (1 + |z|); one-sided where a side
  // leaves the domain.
  std::optional<Eigen::MatrixXd> jacobian(const Eigen::VectorXd& z, const Eigen::VectorXd& r0) const {
    Eigen::MatrixXd jac(n_, p());
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    for (std::size_t j = 0; j < p(); ++j) {
      const double h = root_eps * (1.0 + std::abs(z[j]));
      Eigen::VectorXd zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      const auto rp = residuals(zp);
      const auto rm = residuals(zm);
      if (rp && rm) {
        jac.col(j) = (*rp - *rm) / (zp[j] - zm[j]);
      } else if (rp) {
        jac.col(j) = (*rp - r0) / (zp[j] - z[j]);
      } else if (rm) {
        jac.col(j) = (r0 - *rm) / (z[j] - zm[j]);
      } else {
        return std::nullopt;
      }
    }
    return jac;
  }

 private:
  const EmpiricalCurve& curve_;
  Family family_;
  std::vector<Coordinate> coords_;
  std::size_t n_ = 0;
};

struct LmRun {
  Eigen::VectorXd z;
  double sse = std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::vector<double> history;
  std::string stop;
};

// Levenberg-Marquardt with Nielsen's damping update. A step is accepted only
// when it strictly lowers the sum of squares; iteration continues until no
// step does, so the gradient tolerance only decides convergence afterwards.
inline LmRun levenberg_marquardt(const Objective& obj, Eigen::VectorXd z, const FitConfig& cfg) {
  LmRun run;
  const auto r0 = obj.residuals(z);
  if (!r0) {
    run.stop = "start outside the domain";
    return run;
  }
  Eigen::VectorXd r = *r0;
  double f = r.squaredNorm();
  run.z = z;
  run.sse = f;
  run.history.push_back(f);
  const double scale = 2.0 / static_cast<double>(obj.n());

  auto jac = obj.jacobian(z, r);
  if (!jac) {
    run.stop = "jacobian unavailable at start";
    return run;
  }
  Eigen::MatrixXd a = jac->transpose() * *jac;
  Eigen::VectorXd g = jac->transpose() * r;
  double mu = 1e-3 * std::max(a.diagonal().maxCoeff(), 1e-300);
  double nu = 2.0;

  run.stop = "iteration limit";
  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() == 0.0) {
      run.stop = "zero gradient";
      break;
    }
    run.iterations = it + 1;
    Eigen::MatrixXd damped = a;
    damped.diagonal().array() += mu;
    const Eigen::VectorXd step = damped.ldlt().solve(-g);
    if (!step.allFinite()) {
      mu *= nu;
      nu *= 2.0;
      if (mu > 1e100) {
        run.stop = "damping overflow";
        break;
      }
      continue;
    }
    if (step.norm() <= cfg.step_tolerance * (z.norm() + cfg.step_tolerance)) {
      run.stop = "step tolerance";
      break;
    }
    const Eigen::VectorXd z_new = z + step;
    const auto r_new = obj.residuals(z_new);
    const double f_new = r_new ? r_new->squaredNorm() : std::numeric_limits<double>::infinity();
    const double predicted = step.dot(mu * step - g);
    if (f_new < f && predicted > 0.0) {
      const double rho = (f - f_new) / predicted;
      z = z_new;
      r = *r_new;
      f = f_new;
      run.history.push_back(f);
      if (f == 0.0) {
        g.setZero();
        run.stop = "exact fit";
        break;
      }
      jac = obj.jacobian(z, r);
      if (!jac) {
        run.stop = "jacobian unavailable";
        break;
      }
      a = jac->transpose() * *jac;
      g = jac->transpose() * r;
      const double t = 2.0 * rho - 1.0;
      mu *= std::max(1.0 / 3.0, 1.0 - t * t * t);
      nu = 2.0;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (mu > 1e100) {
        run.stop = "no further decrease";
        break;
      }
    }
  }
  run.gradient_norm = scale * g.lpNorm<Eigen::Infinity>();
  run.z = z;
  run.sse = f;
  return run;
}

// Latin hypercube over the start boxes, in the optimizer's log/logit scale.
inline std::vector<std::vector<double>> latin_hypercube_starts(std::span<const ParamSpec> specs, int count,
                                                               std::uint64_t seed) {
  UniformSource uniform(seed);
  const auto m = static_cast<std::size_t>(count);
  std::vector<std::vector<double>> starts(m, std::vector<double>(specs.size()));
  for (std::size_t j = 0; j < specs.size(); ++j) {
    std::vector<std::size_t> strata(m);
    for (std::size_t i = 0; i < m; ++i) strata[i] = i;
    for (std::size_t i = m; i > 1; --i) {
      const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(i));
      std::swap(strata[i - 1], strata[std::min(k, i - 1)]);
    }
    const auto& s = specs[j];
    for (std::size_t i = 0; i < m; ++i) {
      const double t = (static_cast<double>(strata[i]) + uniform()) / static_cast<double>(m);
      if (s.transform == Transform::log) {
        starts[i][j] = std::exp(std::log(s.start_lo) + t * (std::log(s.start_hi) - std::log(s.start_lo)));
      } else {
        starts[i][j] = s.start_lo + t * (s.start_hi - s.start_lo);
      }
    }
  }
  return starts;
}

inline constexpr double kEmbeddedConcentration = 200.0;
inline constexpr double kEmbeddedKappa = 1.0 - 1e-6;

inline std::vector<double> embed_power(Family family, double theta) {
  const double c = kEmbeddedConcentration;
  switch (family) {
    case Family::Power: return {theta};
    case Family::GP: return {theta, kEmbeddedKappa};
    case Family::PG: return {c, c / theta};
    case Family::PIG: return {theta, c * theta};
    case Family::GPG: return {kEmbeddedKappa, c, c / theta};
    case Family::GPIG: return {kEmbeddedKappa, theta, c * theta};
    default: return {};
  }
}

inline FitResult fit_from_starts(const EmpiricalCurve& curve, Family family, const FitConfig& cfg,
                                 const std::vector<std::vector<double>>& starts) {
  const Objective obj(curve, family, cfg.parameterization == Parameterization::raw);
  std::optional<LmRun> best;
  int attempted = 0;
  for (const auto& x0 : starts) {
    bool ok = true;
    for (std::size_t j = 0; j < obj.p(); ++j) ok = ok && obj.coords()[j].inside(x0[j]);
    if (!ok) continue;
    ++attempted;
    auto run = levenberg_marquardt(obj, obj.to_z(x0), cfg);
    if (!std::isfinite(run.sse)) continue;
    if (!best || run.sse < best->sse) best = std::move(run);
  }
  if (!best) {
    throw ConvergenceError(std::string(family_name(family)) + ": no start produced a finite objective",
                           std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity());
  }

  const auto x = *obj.params(best->z);
  FitResult res{.model = CurveModel::from_values(family, x)};
  const auto r = *obj.residuals(best->z);
  const std::vector<double> rv(r.data(), r.data() + r.size());
  const auto m = metrics_from_residuals(rv);
  res.sse = m.sse;
  res.mse = m.mse;
  res.max_abs = m.max_abs;
  res.mae = m.mae;
  res.n = obj.n();
  const std::size_t k = obj.p() + (cfg.caic_penalty == CaicPenalty::curve_parameters_plus_variance ? 1 : 0);
  res.caic = caic(res.sse, res.n, k);
  res.iterations = best->iterations;
  res.gradient_norm = best->gradient_norm;
  res.objective_history = best->history;
  res.starts = attempted;
  for (std::size_t j = 0; j < obj.p(); ++j) {
    res.at_boundary = res.at_boundary || (!obj.coords()[j].raw && obj.coords()[j].near_edge(best->z[j]));
  }
  res.converged = res.gradient_norm <= cfg.gradient_tolerance && !res.at_boundary;
  res.message = best->stop;
  if (res.at_boundary) res.message += "; parameter at the edge of its box";

  if (const auto jz = obj.jacobian(best->z, r)) {
    Eigen::MatrixXd jx = *jz;
    for (std::size_t j = 0; j < obj.p(); ++j) jx.col(j) *= obj.coords()[j].dz_dx(x[j]);
    res.std_errors = standard_errors(jx, res.sse, res.n, obj.p(), cfg.variance_divisor);
  }
  return res;
}

}  // namespace detail

/// Least-squares fit of `family` to the polygon points i = 1..n. The best of a
/// seeded Latin-hypercube multistart plus one informed start is returned.
inline FitResult fit(const EmpiricalCurve& curve, Family family, const FitConfig& config = {}) {
  config.validate();
  const std::size_t p = param_count(family);
  if (curve.source_n() < p + 1) {
    throw DomainError(std::string(family_name(family)) + " needs at least " + std::to_string(p + 1) +
                      " curve points");
  }
  auto starts = detail::latin_hypercube_starts(param_specs(family), config.multistart_count,
                                               config.seed + static_cast<std::uint64_t>(family));

  // Informed start: invert the Power or Pareto Gini at the empirical Gini, then
  // embed the one-parameter solution in the richer family.
  const double g = empirical_generalized_gini(curve, 1.0);
  if (g > 0.0 && g < 1.0) {
    if (family == Family::Pareto || family == Family::PaGB) {
      double theta = std::clamp(2.0 * g / (1.0 + g), 1e-6, 1.0 - 1e-6);
      if (family == Family::Pareto) {
        starts.insert(starts.begin(), {theta});
      } else {
        FitConfig inner = config;
        inner.multistart_count = 1;
        theta = detail::fit_from_starts(curve, Family::Pareto, inner, {{theta}}).model.values()[0];
        const double c = detail::kEmbeddedConcentration;
        starts.insert(starts.begin(), {0.0, c * theta, c * (1.0 - theta)});
      }
    } else {
      double theta = 2.0 * g / (1.0 - g);
      if (family != Family::Power) {
        FitConfig inner = config;
        inner.multistart_count = 1;
        theta = detail::fit_from_starts(curve, Family::Power, inner, {{theta}}).model.values()[0];
      }
      starts.insert(starts.begin(), detail::embed_power(family, theta));
    }
  }
  return detail::fit_from_starts(curve, family, config, starts);
}

struct FitFailure {
  Family family;
  std::string message;
};

struct Comparison {
  std::vector<FitResult> ranked;
  std::vector<FitFailure> failures;
};

/// Every requested fit failed.
class ComparisonError : public Error {
 public:
  ComparisonError(const std::string& what, std::vector<FitFailure> failures)
      : Error(what), failures_(std::move(failures)) {}
  const std::vector<FitFailure>& failures() const { return failures_; }

 private:
  std::vector<FitFailure> failures_;
};

/// Fits each family and ranks by CAIC, then MSE, then fewer parameters.
inline Comparison compare_models(const EmpiricalCurve& curve, std::span<const Family> families,
                                 const FitConfig& config = {}) {
  if (families.empty()) throw DomainError("compare_models needs at least one family");
  config.validate();
  using Outcome = std::variant<FitResult, FitFailure>;
  auto run_one = [&curve, &config](Family f) -> Outcome {
    try {
      return fit(curve, f, config);
    } catch (const Error& e) {
      return FitFailure{f, e.what()};
    }
  };
  std::vector<Outcome> outcomes;
  if (config.parallel && families.size() > 1) {
    std::vector<std::future<Outcome>> jobs;
    for (Family f : families) jobs.push_back(std::async(std::launch::async, run_one, f));
    for (auto& j : jobs) outcomes.push_back(j.get());
  } else {
    for (Family f : families) outcomes.push_back(run_one(f));
  }

  Comparison out;
  for (auto& o : outcomes) {
    if (auto* r = std::get_if<FitResult>(&o)) {
      out.ranked.push_back(std::move(*r));
    } else {
      out.failures.push_back(std::get<FitFailure>(o));
    }
  }
  if (out.ranked.empty()) {
    std::string msg = "every fit failed:";
    for (const auto& f : out.failures) msg += " " + std::string(family_tag(f.family)) + " (" + f.message + ")";
    throw ComparisonError(msg, out.failures);
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const FitResult& a, const FitResult& b) {
    if (a.caic != b.caic) return a.caic < b.caic;
    if (a.mse != b.mse) return a.mse < b.mse;
    return param_count(a.model.family()) < param_count(b.model.family());
  });
  return out;
}

inline Comparison compare_models(const EmpiricalCurve& curve, std::initializer_list<Family> families,
                                 const FitConfig& config = {}) {
  return compare_models(curve, std::span<const Family>(families.begin(), families.size()), config);
}

}  // namespace leimkuhler
