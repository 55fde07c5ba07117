#pragma once

#include <cstdint>
#include <vector>

#include "margin/market.hpp"

namespace margin {

struct SimConfig {
    double horizon_years = 1.0;
    double dt_years = 1.0 / 252.0;
    int n_paths = 1;
    std::uint64_t seed = 0;
};

struct SimResult {
    std::vector<double> terminal_log_growth; // (1/T) log(V_T / V_0), one per path
    double mean_growth = 0.0;
    double stderr_growth = 0.0;
    // pi accrued per unit time per dollar of running equity. The accrual is a
    // constant fraction of equity, so the time average equals q * nim exactly.
    double mean_broker_income_rate = 0.0;
    // Diagnostic: mean of integral e^{-rt} pi V_t dt, per dollar of initial equity.
    double mean_discounted_income = 0.0;
};

// Per-path engine seed: splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15).
// Paths are reproducible in isolation and independent of thread count.
std::uint64_t path_stream_seed(std::uint64_t seed, int path_index);

// Simulates client wealth under a fixed contract with the exact log-normal
// transition: per step, log V grows by the gamma-independent log drift plus
// sqrt(dt) times a portfolio shock built from a Cholesky factor of sigma.
// dt therefore controls only the sampling resolution of broker income, never
// the growth-rate bias. Paths run in parallel; reduction is in path order.
SimResult simulate(const MarketParams& market, const AgentParams& agent,
                   const Contract& contract, const SimConfig& config);

// One SimResult per contract under common random numbers (identical per-path
// shock streams), for low-variance contrasts such as monopoly vs negotiated.
std::vector<SimResult> compare_contracts(const MarketParams& market, const AgentParams& agent,
                                         const std::vector<Contract>& contracts,
                                         const SimConfig& config);

} // namespace margin
