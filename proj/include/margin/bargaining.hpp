#pragma once

#include "margin/market.hpp"

namespace margin {

// Utilities that obtain on disagreement: broker profit rate and client growth
// rate, both per year. Free inputs everywhere; the two canonical threats are
// breakdown_threat() below and monopoly_threat() in monopoly.hpp.
struct ThreatPoint {
    double profit_bar = 0.0;
    double growth_bar = 0.0;
};

// The efficient growth-profit frontier Gamma = intercept - pi. A straight
// line with slope -1: the bargaining problem has transferable utility.
struct FrontierLine {
    double intercept = 0.0; // r + (1/(2 gamma)) (mu - r 1)'S^-1(mu - r 1)
    double slope = -1.0;

    double growth_at(double profit) const { return intercept + slope * profit; }
};

struct BargainSolution {
    Contract contract;   // (b*, rL*)
    Outcome outcome;     // recomputed via the market functionals
    ThreatPoint threat;
    double surplus_gambler = 0.0; // Gamma* - Gamma_bar
    double surplus_broker = 0.0;  // pi* - pi_bar; equals surplus_gambler
};

struct FinalUtilities {
    double profit = 0.0;
    double growth = 0.0;
};

// Grid-refinement search settings for the verification oracle. A first pass
// localizes the gain region with a joint grid over every axis (b components
// and rL together; density backs off with dimension), then each refinement
// round re-grids a box around the incumbent and shrinks it by `shrink`.
// b-axis ranges are [box_lo, box_hi] scaled by the per-component call-rate
// Kelly magnitude; the rate axis is [r, choke]. The defaults resolve the
// maximizer well below 1e-4 per coordinate for n <= 3.
struct OracleConfig {
    int localization_points = 101; // per-axis cap for the joint first pass
    int refine_points = 11;        // per-axis grid in each refinement round
    int refine_rounds = 19;
    double shrink = 2.0;
    double box_lo = -5.0;
    double box_hi = 10.0;
};

// (pi - pi_bar)(Gamma - Gamma_bar); negative outside the gain region.
double nash_product(const MarketParams& market, const AgentParams& agent,
                    const Contract& contract, const ThreatPoint& threat);

// Closed-form Nash bargaining solution:
//   b*  = (1/gamma) S^-1 (mu - r 1)                       (threat-independent)
//   rL* = r/2 + [mu'S^-1 mu - r^2 1'S^-1 1 - 2 gamma (Gbar - pibar)]
//             / (4 [1'S^-1(mu - r 1) - gamma])
// Throws infeasible on the no-loan corner or when the threat dominates
// cooperation; throws numeric_error if the recomputed surpluses are unequal.
BargainSolution solve_nash(const MarketParams& market, const AgentParams& agent,
                           const ThreatPoint& threat);

// (mu + 3r - sigma^2)/4: the negotiated rate under total non-cooperation.
// Defined for n = 1, gamma = 1 only.
double rule_of_thumb_rate(const MarketParams& market, const AgentParams& agent);

// Total non-cooperation: no loan (pi_bar = 0), client picks the best
// unlevered portfolio, Gamma_bar = max{1'b=1} mu'b - (gamma/2) b'S b.
ThreatPoint breakdown_threat(const MarketParams& market, const AgentParams& agent);

FrontierLine efficient_frontier(const MarketParams& market, const AgentParams& agent);

// Closed forms for the bargained (pi*, Gamma*); agrees with solve_nash's
// recomputed outcome. Same failure modes as solve_nash.
FinalUtilities final_utilities(const MarketParams& market, const AgentParams& agent,
                               const ThreatPoint& threat);

// Independent maximizer of the Nash product by deterministic coordinate grid
// refinement. Ties keep the first incumbent. Matches solve_nash within 1e-4
// per coordinate for small n at the default settings.
Contract oracle_solve(const MarketParams& market, const AgentParams& agent,
                      const ThreatPoint& threat, const OracleConfig& config = {});

} // namespace margin
