#include <gtest/gtest.h>

#include <cmath>

#include "leimkuhler/fit.hpp"

using namespace leimkuhler;

namespace {

EmpiricalCurve polygon_of(const CurveModel& m, std::size_t n) {
  std::vector<double> k(n + 1);
  k[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) k[i] = m.evaluate(static_cast<double>(i) / static_cast<double>(n));
  k[n] = 1.0;
  return EmpiricalCurve::from_values(std::move(k));
}

bool nonincreasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1]) return false;
  }
  return true;
}

}  // namespace

TEST(Fit, NoiselessPowerRecovery) {
  const auto r = fit(polygon_of(CurveModel::power(2.0), 500), Family::Power);
  EXPECT_NEAR(r.model.values()[0], 2.0, 1e-6);
  EXPECT_LE(r.sse, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.n, 500u);
  EXPECT_TRUE(nonincreasing(r.objective_history));
}

TEST(Fit, NoiselessRecoveryEveryFamily) {
  const CurveModel truth[] = {CurveModel::gp(2.0, 0.6),          CurveModel::pareto(0.645),
                              CurveModel::pg(0.701, 0.102),      CurveModel::pig(9.305, 2.227),
                              CurveModel::gpg(0.554, 1.514, 0.596), CurveModel::gpig(0.5, 2.0, 3.0),
                              CurveModel::pagb(2.0, 3.0, 1.5)};
  for (const auto& m : truth) {
    SCOPED_TRACE(m.describe());
    const auto r = fit(polygon_of(m, 200), m.family());
    EXPECT_LE(r.sse, 1e-12);
    const auto want = m.values(), got = r.model.values();
    for (std::size_t j = 0; j < want.size(); ++j) EXPECT_NEAR(got[j], want[j], 1e-6);
    EXPECT_TRUE(nonincreasing(r.objective_history));
  }
}

TEST(Fit, SyntheticPowerRoundTrip) {
  const auto ds = sample_synthetic(SyntheticPower{3.0}, 5000, 20240611);
  const auto r = fit(empirical_curve(ds), Family::Power);
  EXPECT_NEAR(r.model.values()[0], 3.0, 0.15);
  EXPECT_TRUE(r.converged);
}

TEST(Fit, PowerNestedInGpAtKappaOne) {
  const auto curve = polygon_of(CurveModel::gp(2.5, 1.0), 300);
  const auto power = fit(curve, Family::Power);
  const auto gp = fit(curve, Family::GP);
  EXPECT_NEAR(power.sse, gp.sse, 1e-12);
  EXPECT_GT(gp.model.values()[1], 0.999);
  EXPECT_TRUE(gp.at_boundary);
  EXPECT_FALSE(gp.converged);
}

TEST(Fit, NestedFamiliesNeverFitWorse) {
  const SyntheticFamily sources[] = {SyntheticPower{1.5}, SyntheticPG{0.7, 0.1}, SyntheticPIG{9.0, 2.0},
                                     SyntheticPareto{0.6, 1.0}};
  for (const auto& src : sources) {
    const auto curve = empirical_curve(sample_synthetic(src, 400, 8, {.scale = 100.0}));
    const double power = fit(curve, Family::Power).sse;
    EXPECT_GE(power, fit(curve, Family::GP).sse - 1e-10);

    // Exponential mixture = PG with alpha fixed at 1; a fine grid over beta
    // bounds its best SSE from above.
    double exp_best = std::numeric_limits<double>::infinity();
    for (double lb = -4.0; lb <= 4.0; lb += 0.01) {
      exp_best = std::min(exp_best, fit_metrics(curve, CurveModel::pg(1.0, std::exp(lb))).sse);
    }
    EXPECT_GE(exp_best, fit(curve, Family::PG).sse - 1e-10);
  }
}

TEST(Fit, DeterministicForFixedSeed) {
  const auto curve = empirical_curve(sample_synthetic(SyntheticPG{0.7, 0.1}, 300, 4, {.scale = 100.0}));
  const auto a = fit(curve, Family::GPG, {.seed = 9});
  const auto b = fit(curve, Family::GPG, {.seed = 9});
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.sse, b.sse);
  EXPECT_EQ(a.objective_history, b.objective_history);
}

TEST(Fit, ReparameterizationInvariance) {
  const auto curve = empirical_curve(sample_synthetic(SyntheticPower{2.0}, 400, 5, {.scale = 100.0}));
  for (Family f : {Family::Power, Family::Pareto, Family::PG}) {
    SCOPED_TRACE(std::string(family_tag(f)));
    const auto t = fit(curve, f);
    const auto r = fit(curve, f, {.parameterization = Parameterization::raw});
    EXPECT_TRUE(nonincreasing(r.objective_history));
    for (int i = 1; i < 100; ++i) {
      const double u = i / 100.0;
      EXPECT_NEAR(t.model.evaluate(u), r.model.evaluate(u), 1e-8);
    }
  }
}

TEST(Fit, HistoryNonincreasingAcrossFamilies) {
  const auto curve = empirical_curve(sample_synthetic(SyntheticPIG{9.3, 2.2}, 300, 6, {.scale = 100.0}));
  for (Family f : kAllFamilies) {
    SCOPED_TRACE(std::string(family_tag(f)));
    const auto r = fit(curve, f, {.multistart_count = 4});
    EXPECT_TRUE(nonincreasing(r.objective_history));
    EXPECT_NEAR(r.objective_history.back(), r.sse, 1e-12 * r.sse);
    if (r.converged) {
      EXPECT_LE(r.gradient_norm, 1e-8);
    }
    EXPECT_GE(r.max_abs, r.mae);
    EXPECT_DOUBLE_EQ(r.mse, r.sse / static_cast<double>(r.n));
  }
}

TEST(Fit, TooFewPoints) {
  const auto curve = empirical_curve(CitationDataset({3, 1}));
  EXPECT_THROW(fit(curve, Family::GPG), DomainError);
  EXPECT_NO_THROW(fit(curve, Family::Power));
}

TEST(Fit, ConfigValidation) {
  const auto curve = polygon_of(CurveModel::power(2.0), 20);
  EXPECT_THROW(fit(curve, Family::Power, {.max_iterations = 0}), DomainError);
  EXPECT_THROW(fit(curve, Family::Power, {.gradient_tolerance = 0.0}), DomainError);
  EXPECT_THROW(fit(curve, Family::Power, {.step_tolerance = -1.0}), DomainError);
  EXPECT_THROW(fit(curve, Family::Power, {.multistart_count = 0}), DomainError);
}

TEST(StandardErrors, LinearModelMatchesClosedForm) {
  // y = theta u: var(theta) = sigma^2 / sum u^2 with sigma^2 = sse / (n - 1).
  const std::vector<double> u{0.1, 0.4, 0.5, 0.9, 1.3}, y{0.22, 0.79, 1.05, 1.77, 2.61};
  double suu = 0, suy = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += u[i] * u[i];
    suy += u[i] * y[i];
  }
  const double theta = suy / suu;
  double sse = 0;
  Eigen::MatrixXd j(5, 1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    sse += (y[i] - theta * u[i]) * (y[i] - theta * u[i]);
    j(static_cast<Eigen::Index>(i), 0) = -u[i];
  }
  const auto se = standard_errors(j, sse, 5, 1);
  ASSERT_TRUE(se.has_value());
  EXPECT_NEAR((*se)[0], std::sqrt(sse / 4.0 / suu), 1e-15);
  const auto se_n = standard_errors(j, sse, 5, 1, ResidualDivisor::n);
  EXPECT_NEAR((*se_n)[0], std::sqrt(sse / 5.0 / suu), 1e-15);
}

TEST(StandardErrors, RankDeficientIsUnavailable) {
  Eigen::MatrixXd j(4, 2);
  j << 1, 1, 2, 2, 3, 3, 4, 4;  // the same parameter twice
  EXPECT_FALSE(standard_errors(j, 0.5, 4, 2).has_value());
  EXPECT_FALSE(standard_errors(Eigen::MatrixXd::Ones(2, 2), 0.5, 2, 2).has_value());
}

TEST(StandardErrors, ExactFitGivesZero) {
  const auto r = fit(polygon_of(CurveModel::pg(0.7, 0.1), 200), Family::PG);
  ASSERT_TRUE(r.std_errors.has_value());
  for (double s : *r.std_errors) EXPECT_LT(s, 1e-9);
}

TEST(StandardErrors, ChainRuleToParameterScale) {
  // Fitted in log theta; the reported error must be on theta itself, so it
  // matches a direct finite-difference Jacobian in theta.
  const auto curve = empirical_curve(sample_synthetic(SyntheticPower{2.0}, 300, 3, {.scale = 100.0}));
  const auto r = fit(curve, Family::Power);
  const double theta = r.model.values()[0], h = 1e-6;
  Eigen::MatrixXd j(static_cast<Eigen::Index>(r.n), 1);
  for (std::size_t i = 1; i <= r.n; ++i) {
    const double u = curve.u(i);
    j(static_cast<Eigen::Index>(i - 1), 0) =
        -(CurveModel::power(theta + h).evaluate(u) - CurveModel::power(theta - h).evaluate(u)) / (2 * h);
  }
  const auto direct = standard_errors(j, r.sse, r.n, 1);
  ASSERT_TRUE(r.std_errors && direct);
  EXPECT_NEAR((*r.std_errors)[0] / (*direct)[0], 1.0, 1e-5);
}

TEST(Caic, WorkedExample) {
  const double log_lik = -50.0 * (std::log(2.0 * std::numbers::pi / 100.0) + 1.0);
  EXPECT_NEAR(log_lik, 88.364, 1e-3);
  EXPECT_NEAR(caic(1.0, 100, 1), -171.12, 0.005);
}

TEST(Caic, MonotoneAndAdditive) {
  EXPECT_GT(caic(2.0, 100, 1), caic(1.0, 100, 1));
  EXPECT_NEAR(caic(1.0, 100, 2) - caic(1.0, 100, 1), 1.0 + std::log(100.0), 1e-12);
  EXPECT_EQ(caic(0.0, 10, 1), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(caic(-1.0, 10, 1), DomainError);
  EXPECT_THROW(caic(1.0, 0, 1), DomainError);
}

TEST(Caic, PenaltyConventionFlag) {
  const auto curve = empirical_curve(sample_synthetic(SyntheticPower{2.0}, 200, 3, {.scale = 100.0}));
  const auto a = fit(curve, Family::Power);
  const auto b = fit(curve, Family::Power, {.caic_penalty = CaicPenalty::curve_parameters_plus_variance});
  EXPECT_NEAR(b.caic - a.caic, 1.0 + std::log(200.0), 1e-9);
}

TEST(Metrics, HandArithmetic) {
  const std::vector<double> r{0.1, -0.1};
  const auto m = metrics_from_residuals(r);
  EXPECT_DOUBLE_EQ(m.mse, 0.01);
  EXPECT_DOUBLE_EQ(m.max_abs, 0.1);
  EXPECT_DOUBLE_EQ(m.mae, 0.1);
}

TEST(Metrics, ExactModelIsZero) {
  const auto m = CurveModel::gpig(0.5, 2.0, 3.0);
  const auto r = fit_metrics(polygon_of(m, 50), m);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_EQ(r.max_abs, 0.0);
  EXPECT_EQ(r.mae, 0.0);
}

TEST(Metrics, BruteForceRecomputation) {
  const auto curve = empirical_curve(CitationDataset({4, 3, 2, 1}));
  const auto r = fit(curve, Family::Power);
  const double t = r.model.values()[0];
  const double k[] = {0.4, 0.7, 0.9, 1.0};
  double sse = 0, mae = 0, mx = 0;
  for (int i = 1; i <= 4; ++i) {
    const double e = k[i - 1] - (1.0 - std::pow(1.0 - i / 4.0, t + 1.0));
    sse += e * e;
    mae += std::abs(e);
    mx = std::max(mx, std::abs(e));
  }
  EXPECT_NEAR(r.mse, sse / 4, 1e-15);
  EXPECT_NEAR(r.mae, mae / 4, 1e-15);
  EXPECT_NEAR(r.max_abs, mx, 1e-15);
  EXPECT_NEAR(r.caic, caic(sse, 4, 1), 1e-9);
}

TEST(Compare, GeneratingFamilyBeatsPower) {
  const auto curve = empirical_curve(sample_synthetic(SyntheticPG{0.7, 0.1}, 1000, 12, {.scale = 1000.0}));
  const Family fams[] = {Family::Power, Family::PG, Family::GPG};
  const auto cmp = compare_models(curve, fams);
  ASSERT_EQ(cmp.ranked.size(), 3u);
  EXPECT_NE(cmp.ranked.front().model.family(), Family::Power);
  EXPECT_EQ(cmp.ranked.back().model.family(), Family::Power);
}

TEST(Compare, SingletonAndBoundaryStillRanked) {
  const auto curve = polygon_of(CurveModel::power(2.0), 100);
  const auto one = compare_models(curve, {Family::GP});
  ASSERT_EQ(one.ranked.size(), 1u);
  EXPECT_TRUE(one.ranked[0].at_boundary);
  EXPECT_FALSE(one.ranked[0].converged);
}

TEST(Compare, OrderingRules) {
  const auto curve = empirical_curve(sample_synthetic(SyntheticPIG{9.3, 2.2}, 300, 2, {.scale = 100.0}));
  const auto cmp = compare_models(curve, {Family::PIG, Family::Power, Family::Pareto, Family::GPIG});
  for (std::size_t i = 1; i < cmp.ranked.size(); ++i) EXPECT_LE(cmp.ranked[i - 1].caic, cmp.ranked[i].caic);
}

TEST(Compare, ParallelMatchesSerial) {
  const auto curve = empirical_curve(sample_synthetic(SyntheticPG{0.7, 0.1}, 200, 3, {.scale = 100.0}));
  const Family fams[] = {Family::Power, Family::GP, Family::PG, Family::Pareto};
  const auto a = compare_models(curve, fams, {.parallel = true});
  const auto b = compare_models(curve, fams, {.parallel = false});
  ASSERT_EQ(a.ranked.size(), b.ranked.size());
  for (std::size_t i = 0; i < a.ranked.size(); ++i) {
    EXPECT_EQ(a.ranked[i].model, b.ranked[i].model);
    EXPECT_EQ(a.ranked[i].sse, b.ranked[i].sse);
  }
}

TEST(Compare, FailuresRecordedAndAggregate) {
  const auto curve = empirical_curve(CitationDataset({3, 1}));
  const auto mixed = compare_models(curve, {Family::Power, Family::GPG});
  EXPECT_EQ(mixed.ranked.size(), 1u);
  ASSERT_EQ(mixed.failures.size(), 1u);
  EXPECT_EQ(mixed.failures[0].family, Family::GPG);

  const auto tiny = empirical_curve(CitationDataset({5}));
  try {
    compare_models(tiny, {Family::Power, Family::PG});
    FAIL() << "expected ComparisonError";
  } catch (const ComparisonError& e) {
    EXPECT_EQ(e.failures().size(), 2u);
  }
  EXPECT_THROW(compare_models(curve, std::span<const Family>{}), DomainError);
}
