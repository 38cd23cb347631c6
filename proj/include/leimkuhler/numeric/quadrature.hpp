#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "leimkuhler/errors.hpp"

namespace leimkuhler::numeric {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21 tables).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208015259420, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error, resabs;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
double checked_eval(F& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    throw DomainError("integrand is not finite at x = " + std::to_string(x));
  }
  return y;
}

template <class F>
Segment gauss_kronrod_21(F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = checked_eval(f, centre);

  double res_gauss = 0.0;
  double res_kronrod = kKronrodWeights[10] * fc;
  double res_abs = std::abs(res_kronrod);
  std::array<double, 10> f1{}, f2{};

  for (int j = 0; j < 5; ++j) {
    const int k = 2 * j + 1;
    const double dx = half * kKronrodNodes[k];
    f1[k] = checked_eval(f, centre - dx);
    f2[k] = checked_eval(f, centre + dx);
    res_gauss += kGaussWeights[j] * (f1[k] + f2[k]);
    res_kronrod += kKronrodWeights[k] * (f1[k] + f2[k]);
    res_abs += kKronrodWeights[k] * (std::abs(f1[k]) + std::abs(f2[k]));
  }
  for (int j = 0; j < 5; ++j) {
    const int k = 2 * j;
    const double dx = half * kKronrodNodes[k];
    f1[k] = checked_eval(f, centre - dx);
    f2[k] = checked_eval(f, centre + dx);
    res_kronrod += kKronrodWeights[k] * (f1[k] + f2[k]);
    res_abs += kKronrodWeights[k] * (std::abs(f1[k]) + std::abs(f2[k]));
  }

  const double mean = 0.5 * res_kronrod;
  double res_asc = kKronrodWeights[10] * std::abs(fc - mean);
  for (int k = 0; k < 10; ++k) {
    res_asc += kKronrodWeights[k] * (std::abs(f1[k] - mean) + std::abs(f2[k] - mean));
  }

  const double width = std::abs(half);
  const double value = res_kronrod * half;
  res_abs *= width;
  res_asc *= width;
  double err = std::abs((res_kronrod - res_gauss) * half);
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * res_abs, err);
  }
  return {a, b, value, err, res_abs};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (G10/K21) integration of f over [a, b].
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate falls below `abs_tol`, or until the estimate is limited by rounding.
/// Throws ConvergenceError when the interval budget is exhausted first, and
/// DomainError when f returns a non-finite value.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol, int max_intervals = 8000) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (!(abs_tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("quadrature bounds must be finite");
  if (a == b) return {0.0, 0.0, 0};

  std::priority_queue<detail::Segment> heap;
  const auto first = detail::gauss_kronrod_21(f, a, b);
  double total = first.value;
  double error = first.error;
  double resabs = first.resabs;
  heap.push(first);
  int intervals = 1;

  while (error > abs_tol && error > 100.0 * eps * resabs) {
    if (intervals >= max_intervals) {
      throw ConvergenceError("adaptive quadrature exceeded " + std::to_string(max_intervals) +
                                 " subintervals",
                             total, error);
    }
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b)) {
      // Interval cannot be split further in double precision.
      throw ConvergenceError("adaptive quadrature reached the resolution limit", total, error);
    }
    heap.pop();
    const auto left = detail::gauss_kronrod_21(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    resabs += left.resabs + right.resabs - worst.resabs;
    heap.push(left);
    heap.push(right);
    ++intervals;

    if (error < 0.0 || intervals % 64 == 0) {
      // Re-sum to keep the running totals from drifting.
      auto copy = heap;
      total = error = resabs = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        resabs += copy.top().resabs;
        copy.pop();
      }
    }
  }
  return {total, error, intervals};
}

/// Integrates f over [a, +inf) through the substitution x = a + t / (1 - t).
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, double abs_tol, int max_intervals = 8000) {
  auto mapped = [&f, a](double t) {
    const double s = 1.0 - t;
    const double x = a + t / s;
    if (!std::isfinite(x)) return 0.0;
    const double y = f(x);
    return y == 0.0 ? 0.0 : y / (s * s);
  };
  return integrate(mapped, 0.0, 1.0, abs_tol, max_intervals);
}

}  // namespace leimkuhler::numeric
