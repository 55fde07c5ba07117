#include <doctest.h>

#include <cmath>

#include "margin/simulator.hpp"
#include "test_support.hpp"

using namespace margin;
using testsupport::example_agent;
using testsupport::example_market;

namespace {

Contract example_contract() {
    Contract c;
    c.weights = Vec::Constant(1, 3.1666666666666667);
    c.loan_rate = 0.0421875;
    return c;
}

} // namespace

TEST_CASE("vanishing noise recovers the deterministic drift") {
    const MarketParams market = MarketParams::univariate(0.08, 1e-12);
    Contract c;
    c.weights = Vec::Constant(1, 2.0);
    c.loan_rate = 0.04;
    SimConfig cfg;
    cfg.horizon_years = 5.0;
    cfg.dt_years = 1.0 / 52.0;
    cfg.n_paths = 64;
    cfg.seed = 7;
    const SimResult res = simulate(market, example_agent(), c, cfg);
    CHECK(std::abs(res.mean_growth - log_drift(market, c)) < 1e-5);
}

TEST_CASE("realized growth converges to the analytic rate") {
    SimConfig cfg;
    cfg.horizon_years = 20.0;
    cfg.dt_years = 1.0 / 52.0;
    cfg.n_paths = 400;
    cfg.seed = 12345;
    const SimResult res = simulate(example_market(), example_agent(), example_contract(), cfg);
    CHECK(std::abs(res.mean_growth - 0.11640625) < 3.0 * res.stderr_growth);
    CHECK(res.stderr_growth > 0.0);
    CHECK(res.mean_broker_income_rate == doctest::Approx(0.02640625).epsilon(1e-12));
    CHECK(res.mean_discounted_income > 0.0);
}

TEST_CASE("buy-and-hold grows at the index rate") {
    Contract hold;
    hold.weights = Vec::Ones(1);
    hold.loan_rate = 0.2; // irrelevant with no loan
    SimConfig cfg;
    cfg.horizon_years = 50.0;
    cfg.dt_years = 1.0 / 52.0;
    cfg.n_paths = 300;
    cfg.seed = 99;
    const SimResult res = simulate(example_market(), example_agent(), hold, cfg);
    CHECK(std::abs(res.mean_growth - 0.09) < 3.0 * res.stderr_growth);
    CHECK(res.mean_broker_income_rate == 0.0);
}

TEST_CASE("simulation is deterministic and path counts are honored") {
    SimConfig cfg;
    cfg.horizon_years = 3.0;
    cfg.dt_years = 1.0 / 12.0;
    cfg.n_paths = 37;
    cfg.seed = 4242;
    const SimResult a = simulate(example_market(), example_agent(), example_contract(), cfg);
    const SimResult b = simulate(example_market(), example_agent(), example_contract(), cfg);
    REQUIRE(a.terminal_log_growth.size() == 37);
    REQUIRE(b.terminal_log_growth.size() == 37);
    for (std::size_t i = 0; i < a.terminal_log_growth.size(); ++i)
        CHECK(a.terminal_log_growth[i] == b.terminal_log_growth[i]);
    CHECK(a.mean_growth == b.mean_growth);
    CHECK(a.stderr_growth == b.stderr_growth);
    CHECK(a.mean_discounted_income == b.mean_discounted_income);
}

TEST_CASE("identical contracts compared twice give bitwise-equal results") {
    SimConfig cfg;
    cfg.horizon_years = 2.0;
    cfg.dt_years = 1.0 / 24.0;
    cfg.n_paths = 16;
    cfg.seed = 5;
    const auto results = compare_contracts(example_market(), example_agent(),
                                           {example_contract(), example_contract()}, cfg);
    REQUIRE(results.size() == 2);
    for (int p = 0; p < cfg.n_paths; ++p)
        CHECK(results[0].terminal_log_growth[p] == results[1].terminal_log_growth[p]);
}

TEST_CASE("a single path with a fixed seed is one reproducible number") {
    SimConfig cfg;
    cfg.horizon_years = 1.0;
    cfg.dt_years = 1.0 / 52.0;
    cfg.n_paths = 1;
    cfg.seed = 777;
    const SimResult a = simulate(example_market(), example_agent(), example_contract(), cfg);
    const SimResult b = simulate(example_market(), example_agent(), example_contract(), cfg);
    REQUIRE(a.terminal_log_growth.size() == 1);
    CHECK(a.mean_growth == b.mean_growth);
    CHECK(a.stderr_growth == 0.0);
}

TEST_CASE("a single-contract comparison yields a single row") {
    SimConfig cfg;
    cfg.horizon_years = 1.0;
    cfg.dt_years = 0.25;
    cfg.n_paths = 3;
    cfg.seed = 1;
    const auto results =
        compare_contracts(example_market(), example_agent(), {example_contract()}, cfg);
    CHECK(results.size() == 1);
    CHECK_THROWS_AS((void)compare_contracts(example_market(), example_agent(), {}, cfg),
                    invalid_input);
}

TEST_CASE("common random numbers cancel shared noise") {
    Contract cheap = example_contract();
    Contract dear = example_contract();
    dear.loan_rate += 0.01; // same exposure, different rate
    SimConfig cfg;
    cfg.horizon_years = 10.0;
    cfg.dt_years = 1.0 / 52.0;
    cfg.n_paths = 50;
    cfg.seed = 31;
    const auto results =
        compare_contracts(example_market(), example_agent(), {cheap, dear}, cfg);
    const double drift_gap =
        log_drift(example_market(), cheap) - log_drift(example_market(), dear);
    for (int p = 0; p < cfg.n_paths; ++p) {
        const double gap = results[0].terminal_log_growth[p] - results[1].terminal_log_growth[p];
        CHECK(gap == doctest::Approx(drift_gap).epsilon(1e-9));
    }
}

TEST_CASE("step variance matches the portfolio quadratic form") {
    // 10^4 paths x 100 steps pools 10^6 increments; terminal variance over a
    // one-year horizon is b'Sigma b to within sampling error.
    SimConfig cfg;
    cfg.horizon_years = 1.0;
    cfg.dt_years = 0.01;
    cfg.n_paths = 10000;
    cfg.seed = 2718;
    const Contract c = example_contract();
    const SimResult res = simulate(example_market(), example_agent(), c, cfg);
    double mean = res.mean_growth, ss = 0.0;
    for (double g : res.terminal_log_growth) ss += (g - mean) * (g - mean);
    const double var_growth = ss / (cfg.n_paths - 1);
    const double expected = c.weights.dot(example_market().sigma * c.weights); // / T with T=1
    CHECK(std::abs(var_growth - expected) / expected < 0.05);
}

TEST_CASE("no growth bias across seeds") {
    // The transition is exact, so the 4-sigma band should essentially never
    // fail; allow one excursion in thirty.
    const double analytic = 0.11640625;
    int excursions = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        SimConfig cfg;
        cfg.horizon_years = 5.0;
        cfg.dt_years = 1.0 / 52.0;
        cfg.n_paths = 200;
        cfg.seed = seed;
        const SimResult res = simulate(example_market(), example_agent(), example_contract(), cfg);
        if (std::abs(res.mean_growth - analytic) > 4.0 * res.stderr_growth) ++excursions;
    }
    CHECK(excursions <= 1);
}

TEST_CASE("log-space evolution keeps wealth positive and finite") {
    SimConfig cfg;
    cfg.horizon_years = 30.0;
    cfg.dt_years = 1.0 / 252.0;
    cfg.n_paths = 32;
    cfg.seed = 13;
    const SimResult res = simulate(example_market(), example_agent(), example_contract(), cfg);
    for (double g : res.terminal_log_growth) CHECK(std::isfinite(g));
}

TEST_CASE("path substreams differ and config errors are rejected") {
    CHECK(path_stream_seed(1, 0) != path_stream_seed(1, 1));
    CHECK(path_stream_seed(1, 0) != path_stream_seed(2, 0));

    SimConfig bad;
    bad.horizon_years = 1.0;
    bad.dt_years = 2.0;
    bad.n_paths = 1;
    CHECK_THROWS_AS((void)simulate(example_market(), example_agent(), example_contract(), bad),
                    invalid_input);
    bad.dt_years = 0.5;
    bad.n_paths = 0;
    CHECK_THROWS_AS((void)simulate(example_market(), example_agent(), example_contract(), bad),
                    invalid_input);
}
