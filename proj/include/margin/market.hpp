#pragma once

#include <Eigen/Dense>

#include <string>

#include "margin/errors.hpp"

namespace margin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Tolerances of the covariance gate, relative to the largest diagonal entry
// (Cholesky pivots) and the largest absolute entry (symmetry).
inline constexpr double kCholeskyPivotRelTol = 1e-10;
inline constexpr double kSymmetryRelTol = 1e-12;

// Risky-asset universe: per-year continuous drift vector mu and covariance of
// instantaneous returns sigma. n = 1 is the single-index special case.
struct MarketParams {
    Vec mu;
    Mat sigma;

    int n() const { return static_cast<int>(mu.size()); }

    static MarketParams univariate(double drift, double variance);
    // From (geometric growth nu, volatility): mu = nu + vol^2 / 2.
    static MarketParams from_growth(double nu, double vol);
};

struct AgentParams {
    double call_rate = 0.0; // broker cost of funds r, per-year continuous
    double gamma = 1.0;     // relative risk aversion; 1 = log utility (Kelly)
};

// The object under negotiation: portfolio weight vector b and margin rate rL.
// The loan quantity q = 1'b - 1 is derived, never stored.
struct Contract {
    Vec weights;
    double loan_rate = 0.0;

    double loan_quantity() const { return weights.sum() - 1.0; }
};

// Realized analytics of a contract, all per year.
struct Outcome {
    double growth = 0.0; // Gamma, log-growth (CRRA-weighted when gamma != 1)
    double profit = 0.0; // pi = q * nim, per dollar of client equity
    double q = 0.0;      // margin loans per dollar of client equity
    double nim = 0.0;    // net interest margin rL - r
};

// Diagnostic verdict of the input gate. Symmetry/positive-definiteness and
// dimension failures are hard; the leverage-willingness inequality
// 1'S^-1(mu - r 1) > gamma is a soft warning (no-loan corner).
struct Validation {
    bool dimensions_ok = false;
    bool symmetric = false;
    bool positive_definite = false;
    bool agent_ok = false;
    bool willing_to_lever = false;
    double leverage_score = 0.0; // 1'S^-1(mu - r 1)
    std::string message;

    bool ok() const { return dimensions_ok && symmetric && positive_definite && agent_ok; }
};

Validation validate(const MarketParams& market, const AgentParams& agent);

// Throws invalid_input unless the hard checks of validate() pass.
void require_valid(const MarketParams& market, const AgentParams& agent);

// Gamma = rL + (mu - rL 1)'b - (gamma/2) b'S b.
double growth_rate(const MarketParams& market, const AgentParams& agent, const Contract& contract);

// pi = (1'b - 1)(rL - r). May be negative when rL < r; that is data, not an error.
double profit_rate(const Contract& contract, const AgentParams& agent);

// (1/gamma) S^-1 (mu - rL 1): the unconstrained growth-optimal levered
// portfolio at posted rate rL. Never clamped; corner handling is the
// caller's policy.
Vec optimal_bet(const MarketParams& market, const AgentParams& agent, double loan_rate);

Outcome evaluate(const MarketParams& market, const AgentParams& agent, const Contract& contract);

// Log-wealth drift rL + (mu - rL 1)'b - b'S b / 2. Wealth dynamics are
// gamma-independent; this is the rate realized paths converge to.
double log_drift(const MarketParams& market, const Contract& contract);

// Lower Cholesky factor of sigma. Pivots are required to stay above
// pivot_rel_tol times the largest diagonal entry; throws invalid_input
// ("invalid covariance") otherwise.
Mat cholesky_lower(const Mat& sigma, double pivot_rel_tol = kCholeskyPivotRelTol);

// x = Sigma^-1 rhs given the lower factor from cholesky_lower.
Vec cholesky_solve(const Mat& chol_lower, const Vec& rhs);

// Annual-compounded APR a <-> continuous rate log(1 + a).
double cc_from_apr(double apr);
double apr_from_cc(double cc);

} // namespace margin
