#pragma once

#include "margin/bargaining.hpp"
#include "margin/market.hpp"

namespace margin {

// Instantaneous demand for margin loans per dollar of client equity, induced
// by the Kelly reaction to a posted rate:
//   q(rL) = 1'(gamma S)^-1 mu - 1 - (1'(gamma S)^-1 1) rL.
struct DemandCurve {
    double intercept_q = 0.0; // loans demanded at rL = 0
    double slope_q = 0.0;     // dq/drL, negative

    double choke_rate() const { return intercept_q / (-slope_q); }
    double quantity_at(double loan_rate) const { return intercept_q + slope_q * loan_rate; }
    // Inverse demand (marginal value of the q-th loaned dollar).
    double rate_at(double q) const { return (q - intercept_q) / slope_q; }
};

// Take-it-or-leave-it benchmark: midpoint price, quantity, implied portfolio,
// realized profit and growth, consumer surplus and deadweight loss.
struct MonopolyReport {
    double q_m = 0.0;
    double r_m = 0.0;
    Vec b_m;
    double profit_m = 0.0;
    double growth_m = 0.0;
    double consumer_surplus = 0.0;
    double deadweight_loss = 0.0;
};

DemandCurve demand_curve(const MarketParams& market, const AgentParams& agent);

// (intercept_q)/q - 1, the instantaneous price elasticity of loan demand.
double elasticity(const MarketParams& market, const AgentParams& agent, double q);

// MR = MC midpoint solution. Throws infeasible ("no viable loan market")
// unless choke_rate > r.
MonopolyReport monopoly_solution(const MarketParams& market, const AgentParams& agent);

// The monopoly outcome as a disagreement point for solve_nash.
ThreatPoint monopoly_threat(const MarketParams& market, const AgentParams& agent);

} // namespace margin
