#pragma once

// Densities of the shape-parameter mixing laws behind the mixture families.

#include <cmath>
#include <numbers>

#include "leimkuhler/curves.hpp"
#include "leimkuhler/errors.hpp"
#include "leimkuhler/specfun.hpp"

namespace leimkuhler::mixing {

/// Gamma(shape alpha, rate beta). Mixed over Power gives PG, over GP gives GPG.
class GammaDensity {
 public:
  GammaDensity(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("gamma density needs alpha, beta > 0");
    log_norm_ = alpha * std::log(beta) - specfun::log_gamma(alpha);
  }
  double operator()(double theta) const {
    if (theta <= 0.0) return 0.0;
    return std::exp(log_norm_ + (alpha_ - 1.0) * std::log(theta) - beta_ * theta);
  }
  Interval support() const { return {}; }
  double mean() const { return alpha_ / beta_; }

 private:
  double alpha_, beta_, log_norm_ = 0.0;
};

/// Inverse Gaussian with mean alpha and shape beta. Mixed over Power gives PIG.
class InverseGaussianDensity {
 public:
  InverseGaussianDensity(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
      throw DomainError("inverse Gaussian density needs alpha, beta > 0");
    }
  }
  double operator()(double theta) const {
    if (theta <= 0.0) return 0.0;
    const double d = theta - alpha_;
    return std::sqrt(beta_ / (2.0 * std::numbers::pi * theta * theta * theta)) *
           std::exp(-beta_ * d * d / (2.0 * alpha_ * alpha_ * theta));
  }
  Interval support() const { return {}; }
  double mean() const { return alpha_; }

 private:
  double alpha_, beta_;
};

/// theta^(alpha-1) (1-theta)^(beta-1) e^(-shift theta) on (0,1), normalized by
/// B(alpha,beta) 1F1(alpha; alpha+beta; -shift). Mixed over Pareto gives PaGB;
/// shift = 0 is the beta density.
class ConfluentHypergeometricDensity {
 public:
  ConfluentHypergeometricDensity(double alpha, double beta, double shift)
      : alpha_(alpha), beta_(beta), shift_(shift) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(shift)) {
      throw DomainError("confluent hypergeometric density needs alpha, beta > 0 and finite shift");
    }
    log_norm_ = specfun::log_gamma(alpha) + specfun::log_gamma(beta) -
                specfun::log_gamma(alpha + beta) +
                specfun::log_kummer_1f1(alpha, alpha + beta, -shift);
  }
  double operator()(double theta) const { return (*this)(theta, 1.0 - theta); }

  /// Density at theta with 1 - theta supplied exactly, for the upper-end singularity.
  double operator()(double theta, double one_minus_theta) const {
    if (theta <= 0.0 || one_minus_theta <= 0.0) return 0.0;
    return std::exp((alpha_ - 1.0) * std::log(theta) + (beta_ - 1.0) * std::log(one_minus_theta) -
                    shift_ * theta - log_norm_);
  }
  Interval support() const { return {0.0, 1.0}; }

 private:
  double alpha_, beta_, shift_, log_norm_ = 0.0;
};

}  // namespace leimkuhler::mixing
