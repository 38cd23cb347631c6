#pragma once

// Shared fixtures: one representative model per family and random parameter
// draws spread over each family's domain.

#include <cmath>
#include <random>
#include <vector>

#include "leimkuhler/curves.hpp"

namespace test_support {

inline std::vector<leimkuhler::CurveModel> representative_models() {
  using leimkuhler::CurveModel;
  return {CurveModel::power(3.832),         CurveModel::gp(2.0, 0.6),
          CurveModel::pareto(0.606),        CurveModel::pg(0.701, 0.102),
          CurveModel::pig(9.305, 2.227),    CurveModel::gpg(0.554, 1.514, 0.596),
          CurveModel::gpig(0.799, 10.765, 0.742), CurveModel::pagb(45.0, 41.0, -28.0)};
}

template <class Rng>
double log_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::exp(d(rng));
}

template <class Rng>
double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

template <class Rng>
leimkuhler::CurveModel random_model(leimkuhler::Family f, Rng& rng) {
  using leimkuhler::CurveModel;
  using leimkuhler::Family;
  switch (f) {
    case Family::Power: return CurveModel::power(log_uniform(rng, 0.01, 50.0));
    case Family::GP: return CurveModel::gp(log_uniform(rng, 0.01, 50.0), uniform(rng, 0.05, 1.0));
    case Family::Pareto: return CurveModel::pareto(uniform(rng, 0.01, 0.99));
    case Family::PG: return CurveModel::pg(log_uniform(rng, 0.05, 20.0), log_uniform(rng, 0.01, 20.0));
    case Family::PIG: return CurveModel::pig(log_uniform(rng, 0.1, 30.0), log_uniform(rng, 0.05, 30.0));
    case Family::GPG:
      return CurveModel::gpg(uniform(rng, 0.05, 1.0), log_uniform(rng, 0.05, 20.0),
                             log_uniform(rng, 0.01, 20.0));
    case Family::GPIG:
      return CurveModel::gpig(uniform(rng, 0.05, 1.0), log_uniform(rng, 0.1, 30.0),
                              log_uniform(rng, 0.05, 30.0));
    case Family::PaGB:
      return CurveModel::pagb(log_uniform(rng, 0.2, 50.0), log_uniform(rng, 0.2, 50.0),
                              uniform(rng, -30.0, 10.0));
  }
  return CurveModel::power(1.0);
}

}  // namespace test_support
