#include "margin/market.hpp"

#include <cmath>
#include <sstream>

namespace margin {

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

void require_contract_shape(const MarketParams& market, const Contract& contract) {
    if (contract.weights.size() != market.mu.size())
        throw invalid_input("contract weight vector does not match the asset count");
    if (!all_finite(contract.weights) || !std::isfinite(contract.loan_rate))
        throw invalid_input("contract contains non-finite entries");
}

} // namespace

MarketParams MarketParams::univariate(double drift, double variance) {
    MarketParams m;
    m.mu = Vec::Constant(1, drift);
    m.sigma = Mat::Constant(1, 1, variance);
    return m;
}

MarketParams MarketParams::from_growth(double nu, double vol) {
    return univariate(nu + vol * vol / 2.0, vol * vol);
}

Mat cholesky_lower(const Mat& sigma, double pivot_rel_tol) {
    const auto n = sigma.rows();
    if (n == 0 || sigma.cols() != n)
        throw invalid_input("invalid covariance: matrix is empty or not square");
    const double max_diag = sigma.diagonal().maxCoeff();
    if (!(max_diag > 0.0))
        throw invalid_input("invalid covariance: not positive definite");
    const double pivot_floor = pivot_rel_tol * max_diag;

    Mat lower = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = sigma(j, j);
        for (Eigen::Index k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
        if (!(pivot > pivot_floor))
            throw invalid_input("invalid covariance: not positive definite");
        lower(j, j) = std::sqrt(pivot);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = sigma(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / lower(j, j);
        }
    }
    return lower;
}

Vec cholesky_solve(const Mat& chol_lower, const Vec& rhs) {
    Vec y = chol_lower.triangularView<Eigen::Lower>().solve(rhs);
    return chol_lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Validation validate(const MarketParams& market, const AgentParams& agent) {
    Validation v;

    v.dimensions_ok = market.mu.size() >= 1 && market.sigma.rows() == market.mu.size() &&
                      market.sigma.cols() == market.mu.size() && all_finite(market.mu) &&
                      all_finite(market.sigma);
    if (!v.dimensions_ok) {
        v.message = "dimension mismatch between mu and sigma, or non-finite entries";
        return v;
    }

    const double max_abs = market.sigma.cwiseAbs().maxCoeff();
    const double asym = (market.sigma - market.sigma.transpose()).cwiseAbs().maxCoeff();
    v.symmetric = asym <= kSymmetryRelTol * std::max(max_abs, 1e-300);
    if (!v.symmetric) {
        v.message = "invalid covariance: asymmetric";
        return v;
    }

    Mat lower;
    try {
        lower = cholesky_lower(market.sigma);
        v.positive_definite = true;
    } catch (const invalid_input& e) {
        v.message = e.what();
        return v;
    }

    v.agent_ok = std::isfinite(agent.call_rate) && agent.call_rate >= 0.0 &&
                 std::isfinite(agent.gamma) && agent.gamma > 0.0;
    if (!v.agent_ok) {
        v.message = "invalid agent: require finite r >= 0 and gamma > 0";
        return v;
    }

    const Vec excess = market.mu.array() - agent.call_rate;
    v.leverage_score = cholesky_solve(lower, excess).sum();
    v.willing_to_lever = v.leverage_score > agent.gamma;
    if (v.willing_to_lever) {
        v.message = "ok";
    } else {
        std::ostringstream os;
        os << "ok (no-loan corner: 1'S^-1(mu - r 1) = " << v.leverage_score
           << " <= gamma = " << agent.gamma << ")";
        v.message = os.str();
    }
    return v;
}

void require_valid(const MarketParams& market, const AgentParams& agent) {
    const Validation v = validate(market, agent);
    if (!v.ok()) throw invalid_input(v.message);
}

double growth_rate(const MarketParams& market, const AgentParams& agent, const Contract& contract) {
    require_valid(market, agent);
    require_contract_shape(market, contract);
    const Vec& b = contract.weights;
    const double rl = contract.loan_rate;
    const Vec net_drift = market.mu.array() - rl;
    return rl + net_drift.dot(b) - 0.5 * agent.gamma * b.dot(market.sigma * b);
}

double profit_rate(const Contract& contract, const AgentParams& agent) {
    return contract.loan_quantity() * (contract.loan_rate - agent.call_rate);
}

Vec optimal_bet(const MarketParams& market, const AgentParams& agent, double loan_rate) {
    require_valid(market, agent);
    if (!std::isfinite(loan_rate)) throw invalid_input("loan rate must be finite");
    const Mat lower = cholesky_lower(market.sigma);
    const Vec excess = market.mu.array() - loan_rate;
    return cholesky_solve(lower, excess) / agent.gamma;
}

Outcome evaluate(const MarketParams& market, const AgentParams& agent, const Contract& contract) {
    Outcome out;
    out.q = contract.loan_quantity();
    out.nim = contract.loan_rate - agent.call_rate;
    out.profit = out.q * out.nim;
    out.growth = growth_rate(market, agent, contract);
    return out;
}

double log_drift(const MarketParams& market, const Contract& contract) {
    require_contract_shape(market, contract);
    const Vec& b = contract.weights;
    const double rl = contract.loan_rate;
    const Vec net_drift = market.mu.array() - rl;
    return rl + net_drift.dot(b) - 0.5 * b.dot(market.sigma * b);
}

double cc_from_apr(double apr) {
    if (!(apr > -1.0)) throw invalid_input("annual rate must exceed -100%");
    return std::log1p(apr);
}

double apr_from_cc(double cc) { return std::expm1(cc); }

} // namespace margin
