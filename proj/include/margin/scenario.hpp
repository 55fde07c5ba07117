#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "margin/bargaining.hpp"
#include "margin/market.hpp"
#include "margin/simulator.hpp"

namespace margin {

// Disagreement point selector: the two canonical threats are computed from
// the market; an explicit threat carries its own (pi_bar, Gamma_bar).
struct ThreatSpec {
    enum class Kind { breakdown, monopoly, explicit_point };
    Kind kind = Kind::breakdown;
    double profit_bar = 0.0;
    double growth_bar = 0.0;

    bool operator==(const ThreatSpec&) const = default;
};

// A parsed scenario file. The market uses exactly one encoding: the scalar
// pair (nu, sigma) for a single index with mu = nu + sigma^2/2, or an
// explicit drift vector plus covariance matrix.
//
// File grammar (line oriented, '#' comments):
//   key = value          values may end in '%', meaning divide by 100
//   r_apr = 3.9%         annual-compounded alternative to r; stored as log(1+a)
//   mu = 10%, 8%         vectors split on commas or whitespace
//   sigma =              an empty value opens a matrix block: one row per
//     0.04 0.01          line, whitespace separated, ending at the next
//     0.01 0.09          'key = value' line or end of file
// Scalar keys: nu, sigma, r (alias r_cc), r_apr, gamma, threat
// (breakdown|monopoly|explicit), threat_profit, threat_growth,
// horizon_years, dt_years, n_paths, seed.
struct ScenarioConfig {
    bool scalar_market = false;
    double nu = 0.0;  // scalar encoding
    double vol = 0.0; // scalar encoding
    Vec mu;           // matrix encoding
    Mat cov;          // matrix encoding

    AgentParams agent;
    ThreatSpec threat;
    std::optional<SimConfig> sim;

    MarketParams market() const;

    bool operator==(const ScenarioConfig& other) const;
};

ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig parse_scenario_file(const std::string& path);

// Canonical text form; parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& config);

// Materializes the configured threat (computing breakdown or monopoly
// outcomes as needed).
ThreatPoint resolve_threat(const ScenarioConfig& config);

} // namespace margin
