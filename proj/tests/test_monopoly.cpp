#include <doctest.h>

#include <cmath>
#include <random>

#include "margin/monopoly.hpp"
#include "test_support.hpp"

using namespace margin;
using testsupport::example_agent;
using testsupport::example_market;

TEST_CASE("demand curve of the stylized market") {
    const DemandCurve dc = demand_curve(example_market(), example_agent());
    CHECK(dc.intercept_q == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(dc.slope_q == doctest::Approx(-1.0 / 0.0225).epsilon(1e-12));
    CHECK(dc.choke_rate() == doctest::Approx(0.07875).epsilon(1e-12));
    CHECK(dc.quantity_at(dc.choke_rate()) == doctest::Approx(0.0).epsilon(1e-12));

    // Doubling gamma transforms the curve like doubling sigma.
    AgentParams averse = example_agent();
    averse.gamma = 2.0;
    const DemandCurve halved = demand_curve(example_market(), averse);
    MarketParams doubled = example_market();
    doubled.sigma *= 2.0;
    const DemandCurve doubled_sigma = demand_curve(doubled, example_agent());
    CHECK(halved.intercept_q == doctest::Approx(doubled_sigma.intercept_q).epsilon(1e-12));
    CHECK(halved.slope_q == doctest::Approx(doubled_sigma.slope_q).epsilon(1e-12));
}

TEST_CASE("elasticity along the demand curve") {
    const MarketParams market = example_market();
    const AgentParams agent = example_agent();
    CHECK(elasticity(market, agent, 1.0833333333333333) ==
          doctest::Approx(2.2307692307692308).epsilon(1e-10));
    const DemandCurve dc = demand_curve(market, agent);
    CHECK(elasticity(market, agent, dc.intercept_q / 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(elasticity(market, agent, dc.intercept_q) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)elasticity(market, agent, 0.0), invalid_input);
    CHECK_THROWS_AS((void)elasticity(market, agent, -0.5), invalid_input);
}

TEST_CASE("monopoly solution reproduces the worked example") {
    const MonopolyReport rep = monopoly_solution(example_market(), example_agent());
    CHECK(rep.r_m == doctest::Approx(0.054375).epsilon(1e-12));
    CHECK(rep.q_m == doctest::Approx(1.0833333333333333).epsilon(1e-12));
    CHECK(rep.b_m(0) == doctest::Approx(2.0833333333333333).epsilon(1e-12));
    CHECK(rep.profit_m == doctest::Approx(0.02640625).epsilon(1e-12));
    CHECK(rep.growth_m == doctest::Approx(0.103203125).epsilon(1e-12));
    CHECK(rep.consumer_surplus == doctest::Approx(0.013203125).epsilon(1e-12));
    CHECK(rep.deadweight_loss == doctest::Approx(0.013203125).epsilon(1e-12));
    // The printed closed form with variance (not volatility) in the numerator.
    const double mu = 0.10125, var = 0.0225, r = 0.03;
    CHECK(rep.profit_m ==
          doctest::Approx(std::pow((mu - var - r) / (2.0 * std::sqrt(var)), 2)).epsilon(1e-12));
}

TEST_CASE("no viable loan market at or below the choke rate") {
    const MarketParams market = example_market();
    AgentParams agent = example_agent();
    const double choke = 0.07875;

    agent.call_rate = choke;
    CHECK_THROWS_WITH_AS((void)monopoly_solution(market, agent), "no viable loan market",
                         infeasible);
    CHECK_THROWS_AS((void)monopoly_threat(market, agent), infeasible);

    agent.call_rate = choke + 0.01;
    CHECK_THROWS_AS((void)monopoly_solution(market, agent), infeasible);

    // Approaching the boundary from inside, the loan book empties and the
    // threat collapses to the unlevered outcome.
    agent.call_rate = choke - 1e-9;
    const MonopolyReport rep = monopoly_solution(market, agent);
    CHECK(std::abs(rep.q_m) < 1e-6);
    CHECK(std::abs(rep.profit_m) < 1e-12);
    const ThreatPoint t = monopoly_threat(market, agent);
    CHECK(t.growth_bar == doctest::Approx(0.09).epsilon(1e-8));
}

TEST_CASE("posted-price growth matches the direct quadratic form") {
    // Gamma_bar = rL + ((mu - rL)/sigma)^2 / 2 evaluated at the monopoly rate.
    const MonopolyReport rep = monopoly_solution(example_market(), example_agent());
    const double mu = 0.10125, vol = 0.15;
    const double direct = rep.r_m + 0.5 * std::pow((mu - rep.r_m) / vol, 2);
    CHECK(rep.growth_m == doctest::Approx(direct).epsilon(1e-12));
    CHECK(rep.growth_m == doctest::Approx(0.1032).epsilon(1e-4));
}

TEST_CASE("midpoint rule and on-curve invariants") {
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + trial % 3;
        const double gamma = (trial % 2) ? 1.0 : 2.0;
        auto s = testsupport::random_scenario(rng, n, gamma);
        const DemandCurve dc = demand_curve(s.market, s.agent);
        const MonopolyReport rep = monopoly_solution(s.market, s.agent);

        CHECK(rep.r_m == doctest::Approx((dc.choke_rate() + s.agent.call_rate) / 2.0).epsilon(1e-12));
        CHECK(rep.q_m == doctest::Approx(dc.quantity_at(rep.r_m)).epsilon(1e-12));
        CHECK(std::abs(rep.consumer_surplus - rep.deadweight_loss) < 1e-12);
        CHECK(rep.q_m > 0.0);
        CHECK(rep.profit_m > 0.0);
    }
}

TEST_CASE("posted monopoly price dominates every other posted price") {
    std::mt19937_64 rng(906);
    auto s = testsupport::random_scenario(rng, 2, 1.0);
    const DemandCurve dc = demand_curve(s.market, s.agent);
    const MonopolyReport rep = monopoly_solution(s.market, s.agent);
    std::uniform_real_distribution<double> rate(s.agent.call_rate, dc.choke_rate());
    for (int trial = 0; trial < 1000; ++trial) {
        const double rl = rate(rng);
        const double profit = dc.quantity_at(rl) * (rl - s.agent.call_rate);
        CHECK(profit <= rep.profit_m + 1e-15);
    }
}

TEST_CASE("cooperation improves on monopoly which improves on breakdown") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + trial % 3;
        auto s = testsupport::random_scenario(rng, n, 1.0);
        const ThreatPoint unlevered = breakdown_threat(s.market, s.agent);
        const ThreatPoint posted = monopoly_threat(s.market, s.agent);
        const BargainSolution sol = solve_nash(s.market, s.agent, posted);
        CHECK(posted.growth_bar >= unlevered.growth_bar - 1e-12);
        CHECK(sol.outcome.growth >= posted.growth_bar);
        CHECK(sol.outcome.profit >= posted.profit_bar);
    }
}

TEST_CASE("matrix-case monopoly agrees with a scalar grid over posted rates") {
    MarketParams two;
    two.mu = Vec(2);
    two.mu << 0.10, 0.08;
    two.sigma = Mat(2, 2);
    two.sigma << 0.04, 0.01, 0.01, 0.09;
    const AgentParams agent = example_agent();
    const DemandCurve dc = demand_curve(two, agent);
    const MonopolyReport rep = monopoly_solution(two, agent);

    double lo = agent.call_rate, hi = dc.choke_rate();
    double best_rate = lo, best = -1.0;
    for (int round = 0; round < 3; ++round) {
        const double step = (hi - lo) / 1000.0;
        for (int j = 0; j <= 1000; ++j) {
            const double rl = lo + j * step;
            const double profit = dc.quantity_at(rl) * (rl - agent.call_rate);
            if (profit > best) {
                best = profit;
                best_rate = rl;
            }
        }
        const double width = (hi - lo) / 20.0;
        lo = std::max(agent.call_rate, best_rate - width);
        hi = std::min(dc.choke_rate(), best_rate + width);
    }
    CHECK(std::abs(rep.r_m - best_rate) < 1e-4);
    CHECK(std::abs(rep.profit_m - best) < 1e-8);
    CHECK(std::abs(rep.q_m - dc.quantity_at(best_rate)) < 1e-3);
}
