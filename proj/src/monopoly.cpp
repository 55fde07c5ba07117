#include "margin/monopoly.hpp"

#include <cmath>

namespace margin {

DemandCurve demand_curve(const MarketParams& market, const AgentParams& agent) {
    require_valid(market, agent);
    const Mat lower = cholesky_lower(market.sigma);
    const Vec ones = Vec::Ones(market.mu.size());
    DemandCurve dc;
    dc.intercept_q = cholesky_solve(lower, market.mu).sum() / agent.gamma - 1.0;
    dc.slope_q = -cholesky_solve(lower, ones).sum() / agent.gamma;
    return dc;
}

double elasticity(const MarketParams& market, const AgentParams& agent, double q) {
    if (!(q > 0.0)) throw invalid_input("elasticity requires a positive loan quantity");
    return demand_curve(market, agent).intercept_q / q - 1.0;
}

MonopolyReport monopoly_solution(const MarketParams& market, const AgentParams& agent) {
    const DemandCurve dc = demand_curve(market, agent);
    const double r = agent.call_rate;
    if (!(dc.choke_rate() > r)) throw infeasible("no viable loan market");

    MonopolyReport rep;
    // MR(q) crosses MC = r at half the competitive quantity (linear demand).
    rep.q_m = dc.quantity_at(r) / 2.0;
    rep.r_m = dc.rate_at(rep.q_m);
    rep.b_m = optimal_bet(market, agent, rep.r_m);

    Contract posted;
    posted.weights = rep.b_m;
    posted.loan_rate = rep.r_m;
    rep.profit_m = profit_rate(posted, agent);
    rep.growth_m = growth_rate(market, agent, posted);

    // Triangles of the aggregate linear demand curve in (q, rL) space.
    rep.consumer_surplus = 0.5 * rep.q_m * (dc.choke_rate() - rep.r_m);
    rep.deadweight_loss = 0.5 * (dc.quantity_at(r) - rep.q_m) * (rep.r_m - r);
    return rep;
}

ThreatPoint monopoly_threat(const MarketParams& market, const AgentParams& agent) {
    const MonopolyReport rep = monopoly_solution(market, agent);
    ThreatPoint t;
    t.profit_bar = rep.profit_m;
    t.growth_bar = rep.growth_m;
    return t;
}

} // namespace margin
