#include "margin/bargaining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace margin {

namespace {

constexpr double kEgalitarianTol = 1e-10;

struct SolvedMarket {
    Mat lower;        // Cholesky factor of sigma
    Vec kelly_r;      // S^-1 (mu - r 1)
    double lever;     // 1'S^-1(mu - r 1)
    double quad;      // (mu - r 1)'S^-1(mu - r 1)
    double mu_s_mu;   // mu'S^-1 mu
    double one_s_one; // 1'S^-1 1
};

SolvedMarket factor(const MarketParams& market, const AgentParams& agent) {
    require_valid(market, agent);
    SolvedMarket s;
    s.lower = cholesky_lower(market.sigma);
    const Vec excess = market.mu.array() - agent.call_rate;
    s.kelly_r = cholesky_solve(s.lower, excess);
    s.lever = s.kelly_r.sum();
    s.quad = excess.dot(s.kelly_r);
    s.mu_s_mu = market.mu.dot(cholesky_solve(s.lower, market.mu));
    s.one_s_one = cholesky_solve(s.lower, Vec::Ones(market.mu.size())).sum();
    return s;
}

void require_threat(const ThreatPoint& threat) {
    if (!std::isfinite(threat.profit_bar) || !std::isfinite(threat.growth_bar))
        throw invalid_input("threat point must be finite");
}

void require_gain_region(const SolvedMarket& s, const AgentParams& agent,
                         const ThreatPoint& threat) {
    if (!(s.lever > agent.gamma))
        throw infeasible("corner: no mutually beneficial loan");
    const double intercept = agent.call_rate + s.quad / (2.0 * agent.gamma);
    if (!(threat.profit_bar + threat.growth_bar < intercept))
        throw infeasible("threat dominates cooperation");
}

double negotiated_rate(const SolvedMarket& s, const AgentParams& agent,
                       const ThreatPoint& threat) {
    const double r = agent.call_rate;
    const double delta = threat.growth_bar - threat.profit_bar;
    const double numer = s.mu_s_mu - r * r * s.one_s_one - 2.0 * agent.gamma * delta;
    return r / 2.0 + numer / (4.0 * (s.lever - agent.gamma));
}

} // namespace

double nash_product(const MarketParams& market, const AgentParams& agent,
                    const Contract& contract, const ThreatPoint& threat) {
    const Outcome out = evaluate(market, agent, contract);
    return (out.profit - threat.profit_bar) * (out.growth - threat.growth_bar);
}

BargainSolution solve_nash(const MarketParams& market, const AgentParams& agent,
                           const ThreatPoint& threat) {
    require_threat(threat);
    const SolvedMarket s = factor(market, agent);
    if (!(s.lever > agent.gamma))
        throw infeasible("corner: no mutually beneficial loan");

    BargainSolution sol;
    sol.threat = threat;
    sol.contract.weights = s.kelly_r / agent.gamma;
    sol.contract.loan_rate = negotiated_rate(s, agent, threat);
    sol.outcome = evaluate(market, agent, sol.contract);
    sol.surplus_gambler = sol.outcome.growth - threat.growth_bar;
    sol.surplus_broker = sol.outcome.profit - threat.profit_bar;

    if (!std::isfinite(sol.outcome.growth) || !std::isfinite(sol.outcome.profit))
        throw numeric_error("non-finite bargaining outcome");
    if (std::abs(sol.surplus_gambler - sol.surplus_broker) > kEgalitarianTol)
        throw numeric_error("egalitarian surplus split violated");
    if (!(sol.surplus_gambler > 0.0 && sol.surplus_broker > 0.0))
        throw infeasible("threat dominates cooperation");
    return sol;
}

double rule_of_thumb_rate(const MarketParams& market, const AgentParams& agent) {
    if (market.mu.size() != 1 || agent.gamma != 1.0)
        throw invalid_input("rule of thumb requires n = 1 and gamma = 1");
    require_valid(market, agent);
    return (market.mu(0) + 3.0 * agent.call_rate - market.sigma(0, 0)) / 4.0;
}

ThreatPoint breakdown_threat(const MarketParams& market, const AgentParams& agent) {
    require_valid(market, agent);
    const Mat lower = cholesky_lower(market.sigma);
    const Vec ones = Vec::Ones(market.mu.size());
    // argmax of mu'b - (gamma/2) b'S b subject to 1'b = 1:
    //   b = (1/gamma) S^-1 (mu - lambda 1),  lambda = (1'S^-1 mu - gamma) / 1'S^-1 1.
    const double one_s_mu = cholesky_solve(lower, market.mu).sum();
    const double one_s_one = cholesky_solve(lower, ones).sum();
    const double lambda = (one_s_mu - agent.gamma) / one_s_one;
    const Vec b = cholesky_solve(lower, Vec(market.mu.array() - lambda)) / agent.gamma;
    ThreatPoint t;
    t.profit_bar = 0.0;
    t.growth_bar = market.mu.dot(b) - 0.5 * agent.gamma * b.dot(market.sigma * b);
    return t;
}

FrontierLine efficient_frontier(const MarketParams& market, const AgentParams& agent) {
    const SolvedMarket s = factor(market, agent);
    FrontierLine line;
    line.intercept = agent.call_rate + s.quad / (2.0 * agent.gamma);
    line.slope = -1.0;
    return line;
}

FinalUtilities final_utilities(const MarketParams& market, const AgentParams& agent,
                               const ThreatPoint& threat) {
    require_threat(threat);
    const SolvedMarket s = factor(market, agent);
    require_gain_region(s, agent, threat);
    const double r = agent.call_rate;
    const double delta = threat.growth_bar - threat.profit_bar;
    const double quarter_quad = s.quad / (4.0 * agent.gamma);
    FinalUtilities u;
    u.growth = (r + delta) / 2.0 + quarter_quad;
    u.profit = (r - delta) / 2.0 + quarter_quad;
    return u;
}

Contract oracle_solve(const MarketParams& market, const AgentParams& agent,
                      const ThreatPoint& threat, const OracleConfig& config) {
    require_threat(threat);
    if (config.localization_points < 3 || config.refine_points < 5 || config.refine_rounds < 1 ||
        !(config.shrink > 1.0) || !(config.box_hi > config.box_lo))
        throw invalid_input("oracle configuration out of range");
    const SolvedMarket s = factor(market, agent);
    require_gain_region(s, agent, threat);

    const int n = market.n();
    const int axes = n + 1;
    const double r = agent.call_rate;
    const double gamma = agent.gamma;

    // Axis 0..n-1: bet components, scaled off the call-rate Kelly bet.
    // Axis n: the loan rate, from r up to the largest per-asset or aggregate
    // choke rate.
    std::vector<double> lo0(axes), hi0(axes);
    const Vec kelly = s.kelly_r / gamma;
    for (int i = 0; i < n; ++i) {
        const double unit = std::max(std::abs(kelly(i)), 0.25);
        lo0[i] = config.box_lo * unit;
        hi0[i] = config.box_hi * unit;
    }
    // Aggregate demand chokes at r + (1'S^-1(mu - r 1) - gamma) / 1'S^-1 1.
    const double aggregate_choke = r + (s.lever - gamma) / s.one_s_one;
    lo0[n] = r;
    hi0[n] = std::max({market.mu.maxCoeff(), aggregate_choke, r + 1e-3});

    // The bargaining program maximizes the product over the gain region
    // (both surpluses positive). The raw product is also large and positive
    // where both parties lose; flipping its sign there rejects that quadrant
    // while the negative scores still steer the scan toward the region.
    const auto score_at = [&](const std::vector<double>& point) {
        const double rl = point[n];
        double sum_b = 0.0, excess = 0.0, quad = 0.0;
        for (int i = 0; i < n; ++i) {
            const double bi = point[i];
            sum_b += bi;
            excess += (market.mu(i) - rl) * bi;
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += market.sigma(i, j) * point[j];
            quad += bi * row;
        }
        const double growth = rl + excess - 0.5 * gamma * quad;
        const double profit = (sum_b - 1.0) * (rl - r);
        const double gain_broker = profit - threat.profit_bar;
        const double gain_gambler = growth - threat.growth_bar;
        const double product = gain_broker * gain_gambler;
        return (gain_broker < 0.0 && gain_gambler < 0.0) ? -product : product;
    };

    // Evaluates the full joint grid of `points` per axis over [lo, hi],
    // keeping the incumbent on strict improvement (first point wins ties).
    std::vector<double> x(axes), point(axes);
    double best = -std::numeric_limits<double>::infinity();
    const auto scan_grid = [&](const std::vector<double>& lo, const std::vector<double>& hi,
                               int points) {
        std::vector<int> idx(axes, 0);
        for (;;) {
            for (int a = 0; a < axes; ++a)
                point[a] = lo[a] + idx[a] * (hi[a] - lo[a]) / (points - 1);
            const double value = score_at(point);
            if (value > best) {
                best = value;
                x = point;
            }
            int a = 0;
            while (a < axes && ++idx[a] == points) idx[a++] = 0;
            if (a == axes) break;
        }
    };

    // Round 1 localizes the gain region with a joint grid over every axis
    // (the region can be a thin diagonal sliver that per-axis sweeps from a
    // cold start never intersect). Density backs off with dimension.
    const int loc_points = std::min(config.localization_points, axes <= 3 ? 101 : 41);
    scan_grid(lo0, hi0, loc_points);

    // Refinement: joint grids centered on the incumbent, shrinking each round.
    // Joint scans track the diagonal ridge that defeats per-axis sweeps, and
    // a shrink factor at most (refine_points - 1)/4 keeps the optimum inside
    // the next box.
    std::vector<double> lo(axes), hi(axes);
    std::vector<double> half(axes);
    for (int a = 0; a < axes; ++a) half[a] = 2.0 * (hi0[a] - lo0[a]) / (loc_points - 1);
    for (int round = 0; round < config.refine_rounds; ++round) {
        for (int a = 0; a < axes; ++a) {
            lo[a] = std::max(lo0[a], x[a] - half[a]);
            hi[a] = std::min(hi0[a], x[a] + half[a]);
            half[a] /= config.shrink;
        }
        scan_grid(lo, hi, config.refine_points);
    }

    Contract out;
    out.weights = Vec::Zero(n);
    for (int i = 0; i < n; ++i) out.weights(i) = x[i];
    out.loan_rate = x[n];
    return out;
}

} // namespace margin
