#include <gtest/gtest.h>

#include <random>

#include "leimkuhler/order.hpp"
#include "support.hpp"

using namespace leimkuhler;

TEST(Compare, PowerExponentsOrder) {
  const auto r = leimkuhler_compare(CurveModel::power(1.0), CurveModel::power(2.0));
  EXPECT_EQ(r.relation, Dominance::second_dominates);
  EXPECT_TRUE(r.crossing_points.empty());
  // max of (1-u)^2 - (1-u)^3 is 4/27 at 1-u = 2/3.
  EXPECT_NEAR(r.max_gap, 4.0 / 27.0, 1e-4);
}

TEST(Compare, IdenticalModels) {
  const auto m = CurveModel::gpig(0.8, 10.7, 0.74);
  const auto r = leimkuhler_compare(m, m);
  EXPECT_EQ(r.relation, Dominance::equal);
  EXPECT_LE(r.max_gap, kDefaultDeadBand);
}

TEST(Compare, CrossingLocatedAgainstDenseScan) {
  const auto a = CurveModel::power(1.0), b = CurveModel::pareto(0.9);
  const auto r = leimkuhler_compare(a, b, 64, 1e-12);
  ASSERT_EQ(r.relation, Dominance::crossing);
  ASSERT_EQ(r.crossing_points.size(), 1u);

  // Dense scan for the sign change of K_a - K_b.
  const int m = 1'000'000;
  double prev = a.evaluate(1e-9) - b.evaluate(1e-9), root = -1.0;
  for (int i = 1; i < m; ++i) {
    const double u = static_cast<double>(i) / m;
    const double d = a.evaluate(u) - b.evaluate(u);
    if ((d > 0) != (prev > 0)) {
      root = u;
      break;
    }
    prev = d;
  }
  ASSERT_GT(root, 0.0);
  EXPECT_NEAR(r.crossing_points[0], root, 2.0 / m);
}

TEST(Compare, AntisymmetricOnRandomPairs) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    const auto a = test_support::random_model(kAllFamilies[t % 8], rng);
    const auto b = test_support::random_model(kAllFamilies[(t * 3 + 1) % 8], rng);
    const auto ab = leimkuhler_compare(a, b, 65);
    const auto ba = leimkuhler_compare(b, a, 65);
    EXPECT_EQ(ab.max_gap, ba.max_gap);
    EXPECT_EQ(ab.crossing_points.size(), ba.crossing_points.size());
    switch (ab.relation) {
      case Dominance::first_dominates: EXPECT_EQ(ba.relation, Dominance::second_dominates); break;
      case Dominance::second_dominates: EXPECT_EQ(ba.relation, Dominance::first_dominates); break;
      default: EXPECT_EQ(ba.relation, ab.relation);
    }
    EXPECT_EQ(ab.relation == Dominance::crossing, !ab.crossing_points.empty());
  }
}

TEST(Compare, GridTooSmall) {
  EXPECT_THROW(leimkuhler_compare(CurveModel::power(1.0), CurveModel::power(2.0), 15), DomainError);
}

// The asserted orderings run against the sign of the parameter derivatives:
// for PG, psi(t) = (1 + t/beta)^-alpha falls with alpha and rises with beta,
// so K = 1 - (1-u) psi rises with alpha and falls with beta. The inverse
// Gaussian exponent -2 alpha t / (1 + sqrt(1 + 2 alpha^2 t / beta)) falls with
// both parameters, and 1 - u^kappa rises with kappa. Every stated direction
// therefore has a counterexample; the opposite direction holds everywhere.
TEST(Propositions, StatedDirectionsHaveCounterexamples) {
  struct Case {
    Proposition prop;
    CurveModel base;
    double delta;
  };
  const Case cases[] = {
      {Proposition::pg_alpha, CurveModel::pg(1.0, 1.0), 1.0},
      {Proposition::pg_beta, CurveModel::pg(1.0, 1.0), 1.0},
      {Proposition::pig_alpha, CurveModel::pig(1.0, 1.0), 1.0},
      {Proposition::pig_beta, CurveModel::pig(1.0, 1.0), 1.0},
      {Proposition::kappa, CurveModel::gpg(0.3, 1.0, 1.0), 0.3},
  };
  for (const auto& c : cases) {
    SCOPED_TRACE(std::string(to_string(c.prop)));
    const auto r = check_proposition(c.prop, c.base, c.delta);
    EXPECT_FALSE(r.holds);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_EQ(r.witness->k_base, c.base.evaluate(r.witness->u));
    EXPECT_EQ(r.witness->k_perturbed, r.perturbed.evaluate(r.witness->u));
    EXPECT_GT(asserted_direction(c.prop) * (r.witness->k_base - r.witness->k_perturbed), 0.0);
  }
}

TEST(Propositions, OppositeDirectionHoldsOnRandomDraws) {
  std::mt19937_64 rng(99);
  for (auto prop : kAllPropositions) {
    SCOPED_TRACE(std::string(to_string(prop)));
    for (int t = 0; t < 100; ++t) {
      const Family fam = prop == Proposition::kappa ? (t % 2 ? Family::GPG : Family::GPIG)
                         : (prop == Proposition::pg_alpha || prop == Proposition::pg_beta)
                             ? (t % 2 ? Family::PG : Family::GPG)
                             : (t % 2 ? Family::PIG : Family::GPIG);
      auto base = test_support::random_model(fam, rng);
      if (prop == Proposition::kappa && *base.params().kappa > 0.95) continue;
      const double delta = prop == Proposition::kappa ? 0.5 * (1.0 - *base.params().kappa)
                                                      : test_support::log_uniform(rng, 0.01, 5.0);
      const auto r = check_proposition(prop, base, delta, 257);
      const auto cmp = leimkuhler_compare(base, r.perturbed, 257);
      const Dominance expected =
          asserted_direction(prop) > 0 ? Dominance::first_dominates : Dominance::second_dominates;
      EXPECT_TRUE(cmp.relation == expected || cmp.relation == Dominance::equal) << base.describe();
      EXPECT_EQ(r.holds, cmp.relation == Dominance::equal) << base.describe();
    }
  }
}

TEST(Propositions, Preconditions) {
  EXPECT_THROW(check_proposition(Proposition::pg_alpha, CurveModel::pig(1, 1), 1.0), DomainError);
  EXPECT_THROW(check_proposition(Proposition::kappa, CurveModel::pg(1, 1), 0.1), DomainError);
  EXPECT_THROW(check_proposition(Proposition::pg_beta, CurveModel::pg(1, 1), 0.0), DomainError);
  EXPECT_THROW(check_proposition(Proposition::kappa, CurveModel::gpg(0.8, 1, 1), 0.3), DomainError);
  EXPECT_NO_THROW(check_proposition(Proposition::kappa, CurveModel::gpig(0.8, 1, 1), 0.2));
}

TEST(Propositions, Names) {
  for (auto p : kAllPropositions) EXPECT_EQ(parse_proposition(to_string(p)), p);
  EXPECT_FALSE(parse_proposition("p3").has_value());
}
