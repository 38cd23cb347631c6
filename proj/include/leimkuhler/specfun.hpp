#pragma once

// Special functions used by the closed-form curves and indices: log-gamma,
// the upper incomplete gamma function for any real shape, the regularized
// incomplete beta function and Kummer's confluent hypergeometric 1F1.
//
// Every function is pure; results carry an absolute error estimate so that
// callers running quadrature on top of them can budget tolerances.

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "leimkuhler/errors.hpp"

namespace leimkuhler::specfun {

enum class Method { series, continued_fraction, recurrence, transform };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::series: return "series";
    case Method::continued_fraction: return "continued_fraction";
    case Method::recurrence: return "recurrence";
    case Method::transform: return "transform";
  }
  return "unknown";
}

struct SpecFunResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  Method method = Method::series;
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTiny = 1e-300;
inline const double kLogMax = std::log(std::numeric_limits<double>::max());
inline const double kLogMin = std::log(std::numeric_limits<double>::min());

// Taylor coefficients of 1/Gamma(1+a) about a = 0, orders 1..28.
inline constexpr std::array<double, 28> kRecipGammaCoeffs = {
    0.577215664901532860607,     -0.655878071520253881077,    -0.042002635034095235529,
    0.166538611382291489502,     -0.0421977345555443367482,   -0.00962197152787697356211,
    0.0072189432466630995424,    -0.00116516759185906511211,  -0.000215241674114950972816,
    0.000128050282388116186153,  -0.0000201348547807882386557, -0.00000125049348214267065735,
    0.00000113302723198169588237, -2.05633841697760710345e-7,  6.11609510448141581786e-9,
    5.00200764446922293006e-9,   -1.18127457048702014459e-9,  1.04342671169110051049e-10,
    7.78226343990507125405e-12,  -3.69680561864220570819e-12, 5.10037028745447597902e-13,
    -2.05832605356650678322e-14, -5.34812253942301798237e-15, 1.22677862823826079016e-15,
    -1.18125930169745876951e-16, 1.18669225475160033258e-18,  1.41238065531803178156e-18,
    -2.29874568443537020659e-19};

// (Gamma(1+a) - 1) / a for |a| <= 1/2, without cancellation near a = 0.
inline double gamma1p_minus_one_over_a(double a) {
  double q = 0.0;  // (1/Gamma(1+a) - 1) / a
  for (std::size_t k = kRecipGammaCoeffs.size(); k-- > 0;) q = q * a + kRecipGammaCoeffs[k];
  return -q / (1.0 + a * q);
}

inline double lgamma_pure(double a) {
#if defined(__GLIBC__) || defined(__APPLE__)
  int sign = 0;
  return ::lgamma_r(a, &sign);
#else
  return std::lgamma(a);
#endif
}

// Gamma(a, x) = exp(log_factor) * mantissa.
struct SplitValue {
  double log_factor;
  double mantissa;
  double rel_error;
  Method method;
};

// Legendre continued fraction, valid for every real a and x > 0; fast when x >= a + 1.
inline SplitValue incomplete_gamma_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  int i = 1;
  for (; i <= 20000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  if (i > 20000) {
    throw ConvergenceError("incomplete gamma continued fraction did not converge",
                           std::exp(a * std::log(x) - x) * h, std::abs(h) * 1e-8);
  }
  const double log_factor = a * std::log(x) - x;
  return {log_factor, h, (4.0 * std::sqrt(double(i)) + 2.0) * kEps, Method::continued_fraction};
}

// Gamma(a) - gamma(a, x) for a >= 1/2 and x < a + 1 (positive-term series for P(a, x)).
inline SplitValue incomplete_gamma_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  int n = 0;
  for (; n < 20000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  const double lg = lgamma_pure(a);
  const double p = sum * std::exp(-x + a * std::log(x) - lg);
  const double q = 1.0 - p;
  const double rel = (2.0 + std::abs(lg) + (std::abs(a * std::log(x)) + x) * p / q + n * p / q) * kEps;
  return {lg, q, rel, Method::series};
}

// Small-shape expansion, |a| <= 1/2 (a = 0 gives E1), x < 1.5:
// Gamma(a,x) = (Gamma(1+a)-1)/a - (x^a-1)/a - x^a * sum_{n>=1} (-x)^n / (n! (a+n)).
inline SplitValue incomplete_gamma_small_shape(double a, double x) {
  const double lx = std::log(x);
  const double g1 = gamma1p_minus_one_over_a(a);
  const double xa_m1 = (a == 0.0) ? lx : std::expm1(a * lx) / a;
  double term = 1.0;
  double sum = 0.0;
  double sum_abs = 0.0;
  for (int n = 1; n < 200; ++n) {
    term *= -x / n;
    const double t = term / (a + n);
    sum += t;
    sum_abs += std::abs(t);
    if (std::abs(t) < kEps * std::abs(sum) * 0.1) break;
  }
  const double xa = std::exp(a * lx);
  const double value = g1 - xa_m1 - xa * sum;
  const double scale = std::abs(g1) + std::abs(xa_m1) + xa * sum_abs;
  return {0.0, value, 4.0 * kEps * scale / std::abs(value), Method::series};
}

inline SplitValue upper_incomplete_gamma_split(double a, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("upper incomplete gamma requires x > 0 (got " + std::to_string(x) + ")");
  }
  if (!std::isfinite(a)) throw DomainError("upper incomplete gamma requires a finite shape");

  if (x >= 1.5 && x >= a + 1.0) return incomplete_gamma_cf(a, x);
  if (a >= 0.5) return incomplete_gamma_series(a, x);
  if (a > -0.5) return incomplete_gamma_small_shape(a, x);

  // Negative shape with small x: downward recurrence on the scaled value
  // S(a) = Gamma(a,x) x^-a e^x, which satisfies S(a) = (x S(a+1) - 1) / a.
  const int steps = static_cast<int>(std::floor(0.5 - a));
  const double a0 = a + steps;
  const auto start = incomplete_gamma_small_shape(a0, x);
  double s = start.mantissa * std::exp(x - a0 * std::log(x));
  double rel = start.rel_error + (std::abs(a0 * std::log(x)) + x) * kEps;
  for (int k = steps; k >= 1; --k) {
    const double shape = a0 - (steps - k) - 1.0;  // a0-1, a0-2, ..., a
    const double xs = x * s;
    const double next = (xs - 1.0) / shape;
    rel = (rel * std::abs(xs) + kEps * (std::abs(xs) + 1.0)) / std::abs(xs - 1.0) + kEps;
    s = next;
  }
  return {a * std::log(x) - x, s, rel, Method::recurrence};
}

inline double checked_exp(double log_value, const char* what) {
  if (log_value > kLogMax) throw OverflowError(std::string(what) + " overflows double range");
  if (log_value < kLogMin) throw OverflowError(std::string(what) + " underflows double range");
  return std::exp(log_value);
}

}  // namespace detail

/// Natural log of Gamma(a) for a > 0.
inline double log_gamma(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("log_gamma requires a > 0 (got " + std::to_string(a) + ")");
  }
  return detail::lgamma_pure(a);
}

/// Upper incomplete gamma Gamma(a, x) = integral_x^inf t^(a-1) e^-t dt for any real a, x > 0.
///
/// Shapes a <= 0 are the analytic continuation; for x < 1.5 they are reached by
/// downward recurrence from a shape in (-1/2, 1/2], for larger x the continued
/// fraction applies directly.
inline SpecFunResult upper_incomplete_gamma(double a, double x) {
  const auto split = detail::upper_incomplete_gamma_split(a, x);
  if (!(split.mantissa > 0.0)) {
    throw ConvergenceError("upper incomplete gamma lost all significance", split.mantissa, 1.0);
  }
  const double value =
      detail::checked_exp(split.log_factor + std::log(split.mantissa), "upper incomplete gamma");
  const double rel = split.rel_error + std::abs(split.log_factor) * detail::kEps;
  return {value, value * rel, split.method};
}

/// Gamma(a, x) * x^-a * e^x. Bounded where Gamma(a, x) itself would overflow,
/// e.g. large negative a with small x.
inline SpecFunResult upper_incomplete_gamma_scaled(double a, double x) {
  const auto split = detail::upper_incomplete_gamma_split(a, x);
  const double log_shift = split.log_factor - (a * std::log(x) - x);
  if (!(split.mantissa > 0.0)) {
    throw ConvergenceError("upper incomplete gamma lost all significance", split.mantissa, 1.0);
  }
  const double value = detail::checked_exp(log_shift + std::log(split.mantissa),
                                           "scaled upper incomplete gamma");
  const double rel = split.rel_error + std::abs(log_shift) * detail::kEps;
  return {value, value * rel, split.method};
}

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline SpecFunResult regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("incomplete beta requires a > 0 and b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return {0.0, 0.0, Method::continued_fraction};
  if (x == 1.0) return {1.0, 0.0, Method::continued_fraction};

  // Modified Lentz evaluation of the standard continued fraction.
  auto cf = [](double p, double q, double y) {
    const double qab = p + q, qap = p + 1.0, qam = p - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * y / qap;
    if (std::abs(d) < detail::kTiny) d = detail::kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
      const int m2 = 2 * m;
      double aa = m * (q - m) * y / ((qam + m2) * (p + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < detail::kTiny) d = detail::kTiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < detail::kTiny) c = detail::kTiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(p + m) * (qab + m) * y / ((p + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < detail::kTiny) d = detail::kTiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < detail::kTiny) c = detail::kTiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) <= detail::kEps) return std::pair{h, m};
    }
    throw ConvergenceError("incomplete beta continued fraction did not converge", h, 1e-8);
  };

  const double log_front = detail::lgamma_pure(a + b) - detail::lgamma_pure(a) -
                           detail::lgamma_pure(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const auto [h, m] = cf(a, b, x);
    const double v = front * h / a;
    return {v, v * (std::abs(log_front) + 4.0 * m + 4.0) * detail::kEps,
            Method::continued_fraction};
  }
  const auto [h, m] = cf(b, a, 1.0 - x);
  const double tail = front * h / b;
  const double v = 1.0 - tail;
  return {v, tail * (std::abs(log_front) + 4.0 * m + 4.0) * detail::kEps + detail::kEps,
          Method::continued_fraction};
}

namespace detail {

struct KummerSeries {
  double log_value;  // log of the sum; the sum is positive when all terms are
  double sum;        // scaled sum (value = sum * exp(log_scale))
  double log_scale;
  double sum_abs;
  int terms;
};

// Power series of 1F1(a; b; z) with periodic rescaling so large positive z
// does not overflow. Terms are exactly representable ratios of the previous one.
inline KummerSeries kummer_series(double a, double b, double z, int max_terms = 200000) {
  constexpr double kRescale = 1e280;
  const double log_rescale = std::log(kRescale);
  double term = 1.0, sum = 1.0, sum_abs = 1.0, log_scale = 0.0;
  int n = 0;
  for (; n < max_terms; ++n) {
    if (a + n == 0.0) break;  // terminating polynomial
    const double ratio = (a + n) / (b + n) * z / (n + 1);
    term *= ratio;
    sum += term;
    sum_abs += std::abs(term);
    if (std::abs(sum_abs) > kRescale) {
      term /= kRescale;
      sum /= kRescale;
      sum_abs /= kRescale;
      log_scale += log_rescale;
    }
    if (std::abs(ratio) < 0.5 && std::abs(term) <= kEps * 0.25 * std::abs(sum)) {
      ++n;
      break;
    }
  }
  if (n >= max_terms) {
    const double partial = sum * std::exp(std::min(log_scale, kLogMax));
    throw ConvergenceError("1F1 series did not converge within " + std::to_string(max_terms) +
                               " terms",
                           partial, std::abs(term) * std::exp(std::min(log_scale, kLogMax)));
  }
  const double log_value = sum > 0.0 ? std::log(sum) + log_scale
                                     : -std::numeric_limits<double>::infinity();
  return {log_value, sum, log_scale, sum_abs, n};
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond this ratio of sum |t_n| to |sum t_n| the double series keeps fewer than ~11 digits.
inline constexpr double kCancellationLimit = 1e4;

struct WideSeries {
  double sum;       // rounded to double, sign carrier
  double log_abs;   // log |sum|
  double rel_error;
};

// Same series summed in 400-bit binary floating point. Only reached when the
// double sum cancels, so speed matters less than reach.
inline WideSeries kummer_series_wide(double a, double b, double z, int max_terms = 200000) {
  using Wide = boost::multiprecision::number<
      boost::multiprecision::cpp_bin_float<400, boost::multiprecision::digit_base_2>,
      boost::multiprecision::et_off>;
  const Wide wa(a), wb(b), wz(z);
  Wide term(1), sum(1), sum_abs(1);
  const Wide tiny = boost::multiprecision::ldexp(Wide(1), -360);
  int n = 0;
  for (; n < max_terms; ++n) {
    if (a + n == 0.0) break;
    const Wide ratio = (wa + n) / (wb + n) * wz / (n + 1);
    term *= ratio;
    sum += term;
    sum_abs += boost::multiprecision::abs(term);
    if (boost::multiprecision::abs(ratio) < 0.5 && boost::multiprecision::abs(term) <= tiny * sum_abs) {
      ++n;
      break;
    }
  }
  if (n >= max_terms) {
    throw ConvergenceError("1F1 series did not converge within " + std::to_string(max_terms) + " terms",
                           static_cast<double>(sum), static_cast<double>(boost::multiprecision::abs(term)));
  }
  if (sum == 0) return {0.0, -kInf, 0.0};
  const Wide ratio = sum_abs / boost::multiprecision::abs(sum);
  // 2^-395 per operation, amplified by the cancellation ratio.
  const double rel = static_cast<double>(ratio * (4 * n + 4) * boost::multiprecision::ldexp(Wide(1), -395));
  if (!(rel < 1e-11)) {
    throw ConvergenceError("1F1 series cancels beyond working precision",
                           static_cast<double>(sum), static_cast<double>(sum_abs));
  }
  return {static_cast<double>(sum), static_cast<double>(boost::multiprecision::log(boost::multiprecision::abs(sum))),
          rel};
}

}  // namespace detail

/// Kummer's confluent hypergeometric function 1F1(a; b; z), b > 0.
///
/// Negative arguments go through 1F1(a; b; z) = e^z 1F1(b-a; b; -z), so for
/// 0 < a < b the summed series has only positive terms. Other sign patterns
/// cancel and fall back to a wide-precision sum.
inline SpecFunResult kummer_1f1(double a, double b, double z) {
  if (!(b > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z)) {
    throw DomainError("1F1 requires finite arguments and b > 0");
  }
  if (z == 0.0) return {1.0, 0.0, Method::series};

  const bool transformed = z < 0.0;
  const Method method = transformed ? Method::transform : Method::series;
  const double sa = transformed ? b - a : a;
  const double sz = transformed ? -z : z;
  const double shift = transformed ? z : 0.0;
  const auto s = detail::kummer_series(sa, b, sz);

  const double cancellation = s.sum == 0.0 ? detail::kInf : s.sum_abs / std::abs(s.sum);
  if (cancellation > detail::kCancellationLimit) {
    // Mixed-sign terms (a > b with z < 0, or a < 0) cancel; redo the sum wide.
    const auto w = detail::kummer_series_wide(sa, b, sz);
    if (w.sum == 0.0) return {0.0, detail::kEps, method};
    const double log_mag = w.log_abs + shift;
    const double magnitude = detail::checked_exp(log_mag, "1F1");
    const double rel = w.rel_error + (std::abs(log_mag) + 2.0) * detail::kEps;
    return {w.sum > 0.0 ? magnitude : -magnitude, magnitude * rel, method};
  }

  const double log_mag = std::log(std::abs(s.sum)) + s.log_scale + shift;
  const double magnitude = detail::checked_exp(log_mag, "1F1");
  const double value = s.sum > 0.0 ? magnitude : -magnitude;
  const double rel = (2.0 * s.terms * cancellation + std::abs(shift) + 2.0) * detail::kEps;
  return {value, magnitude * rel, method};
}

/// log 1F1(a; b; z) for 0 < a < b, any real z. Stays finite where the value itself
/// would overflow or underflow, which the Pareto-confluent curve needs at small u.
inline double log_kummer_1f1(double a, double b, double z) {
  if (!(a > 0.0) || !(b > a) || !std::isfinite(z)) {
    throw DomainError("log 1F1 requires 0 < a < b and finite z");
  }
  if (z == 0.0) return 0.0;
  if (z > 0.0) return detail::kummer_series(a, b, z).log_value;
  return z + detail::kummer_series(b - a, b, -z).log_value;
}

}  // namespace leimkuhler::specfun
