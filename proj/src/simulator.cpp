#include "margin/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace margin {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void require_config(const SimConfig& config) {
    if (!(config.horizon_years > 0.0) || !(config.dt_years > 0.0))
        throw invalid_input("simulation horizon and step must be positive");
    if (config.dt_years > config.horizon_years)
        throw invalid_input("simulation step exceeds the horizon");
    if (config.n_paths < 1) throw invalid_input("need at least one path");
}

} // namespace

std::uint64_t path_stream_seed(std::uint64_t seed, int path_index) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(path_index) + 1));
}

SimResult simulate(const MarketParams& market, const AgentParams& agent,
                   const Contract& contract, const SimConfig& config) {
    require_valid(market, agent);
    require_config(config);

    const int n = market.n();
    const long long steps = std::max<long long>(1, std::llround(config.horizon_years / config.dt_years));
    const double dt = config.dt_years;
    const double horizon = static_cast<double>(steps) * dt;
    const double sqrt_dt = std::sqrt(dt);

    const double drift = log_drift(market, contract);
    const double income_rate = profit_rate(contract, agent);
    const double r = agent.call_rate;

    // Portfolio shock weights: with L L' = sigma and z ~ N(0, I), the step
    // noise is b'(L z) = (L'b)'z, with variance b' sigma b.
    const Mat lower = cholesky_lower(market.sigma);
    const Vec shock_weights = lower.transpose() * contract.weights;

    SimResult result;
    result.terminal_log_growth.assign(config.n_paths, 0.0);
    result.mean_broker_income_rate = income_rate;
    std::vector<double> discounted(config.n_paths, 0.0);

    const auto run_path = [&](int path) {
        std::mt19937_64 engine(path_stream_seed(config.seed, path));
        std::normal_distribution<double> normal(0.0, 1.0);
        double log_wealth = 0.0;
        double income_integral = 0.0;
        for (long long k = 0; k < steps; ++k) {
            income_integral += std::exp(log_wealth - r * (static_cast<double>(k) * dt)) * dt;
            double shock = 0.0;
            for (int i = 0; i < n; ++i) shock += shock_weights(i) * normal(engine);
            log_wealth += drift * dt + sqrt_dt * shock;
        }
        result.terminal_log_growth[path] = log_wealth / horizon;
        discounted[path] = income_rate * income_integral;
    };

    const int workers = std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()),
                                                  config.n_paths));
    if (workers == 1) {
        for (int p = 0; p < config.n_paths; ++p) run_path(p);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int p = w; p < config.n_paths; p += workers) run_path(p);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Reduction in path-index order keeps results independent of thread count.
    double sum = 0.0;
    for (double g : result.terminal_log_growth) sum += g;
    result.mean_growth = sum / config.n_paths;
    double ss = 0.0;
    for (double g : result.terminal_log_growth) {
        const double d = g - result.mean_growth;
        ss += d * d;
    }
    result.stderr_growth =
        config.n_paths > 1 ? std::sqrt(ss / (config.n_paths - 1) / config.n_paths) : 0.0;
    double income_sum = 0.0;
    for (double d : discounted) income_sum += d;
    result.mean_discounted_income = income_sum / config.n_paths;
    return result;
}

std::vector<SimResult> compare_contracts(const MarketParams& market, const AgentParams& agent,
                                         const std::vector<Contract>& contracts,
                                         const SimConfig& config) {
    if (contracts.empty()) throw invalid_input("need at least one contract to compare");
    std::vector<SimResult> results;
    results.reserve(contracts.size());
    for (const Contract& c : contracts) results.push_back(simulate(market, agent, c, config));
    return results;
}

} // namespace margin
