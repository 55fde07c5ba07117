#include "margin/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "margin/monopoly.hpp"

namespace margin {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
    throw config_error("line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string strip_comment(const std::string& s) {
    const auto pos = s.find('#');
    return pos == std::string::npos ? s : s.substr(0, pos);
}

// One number, optionally suffixed with '%'.
double parse_number(const std::string& token, int line) {
    std::string body = trim(token);
    if (body.empty()) fail(line, "expected a number");
    double scale = 1.0;
    if (body.back() == '%') {
        scale = 0.01;
        body = trim(body.substr(0, body.size() - 1));
    }
    char* end = nullptr;
    const double value = std::strtod(body.c_str(), &end);
    if (end != body.c_str() + body.size() || body.empty())
        fail(line, "malformed number '" + token + "'");
    return value * scale;
}

std::vector<double> parse_number_list(const std::string& value, int line) {
    std::string normalized = value;
    for (char& c : normalized)
        if (c == ',') c = ' ';
    std::istringstream is(normalized);
    std::vector<double> out;
    std::string token;
    while (is >> token) out.push_back(parse_number(token, line));
    if (out.empty()) fail(line, "expected at least one number");
    return out;
}

struct RawEntry {
    std::string value;
    int line = 0;
};

} // namespace

MarketParams ScenarioConfig::market() const {
    if (scalar_market) return MarketParams::from_growth(nu, vol);
    MarketParams m;
    m.mu = mu;
    m.sigma = cov;
    return m;
}

bool ScenarioConfig::operator==(const ScenarioConfig& other) const {
    const bool sim_equal =
        sim.has_value() == other.sim.has_value() &&
        (!sim || (sim->horizon_years == other.sim->horizon_years &&
                  sim->dt_years == other.sim->dt_years && sim->n_paths == other.sim->n_paths &&
                  sim->seed == other.sim->seed));
    return scalar_market == other.scalar_market && nu == other.nu && vol == other.vol &&
           mu.size() == other.mu.size() && mu == other.mu && cov.rows() == other.cov.rows() &&
           cov.cols() == other.cov.cols() && cov == other.cov &&
           agent.call_rate == other.agent.call_rate && agent.gamma == other.agent.gamma &&
           threat == other.threat && sim_equal;
}

ScenarioConfig parse_scenario(std::istream& in) {
    std::map<std::string, RawEntry> entries;
    std::vector<std::vector<double>> matrix_rows;
    bool have_matrix = false;
    bool collecting_matrix = false;
    int matrix_line = 0;

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (collecting_matrix) {
                matrix_rows.push_back(parse_number_list(line, line_no));
                continue;
            }
            fail(line_no, "expected 'key = value'");
        }
        collecting_matrix = false;

        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "missing key");

        if (key == "sigma" && value.empty()) {
            if (have_matrix) fail(line_no, "duplicate key 'sigma'");
            have_matrix = true;
            collecting_matrix = true;
            matrix_line = line_no;
            continue;
        }
        if (value.empty()) fail(line_no, "missing value for '" + key + "'");
        if (entries.count(key)) fail(line_no, "duplicate key '" + key + "'");
        entries[key] = RawEntry{value, line_no};
    }

    const auto take = [&](const std::string& key) -> std::optional<RawEntry> {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        RawEntry e = it->second;
        entries.erase(it);
        return e;
    };

    ScenarioConfig cfg;

    // Market: scalar {nu, sigma} or explicit {mu, sigma matrix block}.
    const auto nu_entry = take("nu");
    const auto mu_entry = take("mu");
    const auto sigma_entry = take("sigma");
    if (nu_entry && mu_entry)
        fail(mu_entry->line, "give either nu (scalar market) or mu (vector market), not both");
    if (nu_entry) {
        if (have_matrix) fail(matrix_line, "scalar market takes 'sigma = <volatility>', not a matrix");
        if (!sigma_entry) throw config_error("field 'sigma': missing volatility for the scalar market");
        cfg.scalar_market = true;
        cfg.nu = parse_number(nu_entry->value, nu_entry->line);
        cfg.vol = parse_number(sigma_entry->value, sigma_entry->line);
        if (!(cfg.vol > 0.0)) fail(sigma_entry->line, "volatility must be positive");
    } else if (mu_entry) {
        if (sigma_entry) fail(sigma_entry->line, "vector market takes a 'sigma =' matrix block");
        if (!have_matrix) throw config_error("field 'sigma': missing covariance matrix block");
        const std::vector<double> drift = parse_number_list(mu_entry->value, mu_entry->line);
        const auto n = drift.size();
        if (matrix_rows.size() != n)
            fail(matrix_line, "covariance must be " + std::to_string(n) + "x" + std::to_string(n));
        cfg.mu = Vec(n);
        for (std::size_t i = 0; i < n; ++i) cfg.mu(static_cast<Eigen::Index>(i)) = drift[i];
        cfg.cov = Mat(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            if (matrix_rows[i].size() != n)
                fail(matrix_line, "covariance must be " + std::to_string(n) + "x" + std::to_string(n));
            for (std::size_t j = 0; j < n; ++j)
                cfg.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = matrix_rows[i][j];
        }
    } else {
        throw config_error("field 'nu' or 'mu': no market given");
    }

    // Broker rate: continuous ('r' / 'r_cc'), or annual-compounded via 'r_apr'.
    auto r_entry = take("r");
    if (const auto alias = take("r_cc")) {
        if (r_entry) fail(alias->line, "give 'r' or 'r_cc', not both");
        r_entry = alias;
    }
    const auto r_apr = take("r_apr");
    if (r_entry && r_apr) fail(r_apr->line, "give a continuous 'r' or 'r_apr', not both");
    if (r_entry) {
        cfg.agent.call_rate = parse_number(r_entry->value, r_entry->line);
    } else if (r_apr) {
        const double apr = parse_number(r_apr->value, r_apr->line);
        if (!(apr > -1.0)) fail(r_apr->line, "annual rate must exceed -100%");
        cfg.agent.call_rate = cc_from_apr(apr);
    } else {
        throw config_error("field 'r': missing broker call rate");
    }

    if (const auto g = take("gamma")) {
        cfg.agent.gamma = parse_number(g->value, g->line);
        if (!(cfg.agent.gamma > 0.0)) fail(g->line, "gamma must be positive");
    }

    const auto threat = take("threat");
    const auto threat_profit = take("threat_profit");
    const auto threat_growth = take("threat_growth");
    if (threat) {
        if (threat->value == "breakdown") {
            cfg.threat.kind = ThreatSpec::Kind::breakdown;
        } else if (threat->value == "monopoly") {
            cfg.threat.kind = ThreatSpec::Kind::monopoly;
        } else if (threat->value == "explicit") {
            cfg.threat.kind = ThreatSpec::Kind::explicit_point;
        } else {
            fail(threat->line, "threat must be breakdown, monopoly, or explicit");
        }
    }
    if (cfg.threat.kind == ThreatSpec::Kind::explicit_point) {
        if (!threat_profit || !threat_growth)
            throw config_error("field 'threat_profit'/'threat_growth': an explicit threat requires both numbers");
        cfg.threat.profit_bar = parse_number(threat_profit->value, threat_profit->line);
        cfg.threat.growth_bar = parse_number(threat_growth->value, threat_growth->line);
    } else if (threat_profit || threat_growth) {
        const auto& extra = threat_profit ? *threat_profit : *threat_growth;
        fail(extra.line, "threat_profit/threat_growth are only valid with threat = explicit");
    }

    const auto horizon = take("horizon_years");
    const auto dt = take("dt_years");
    const auto n_paths = take("n_paths");
    const auto seed = take("seed");
    if (horizon || dt || n_paths || seed) {
        if (!horizon || !dt || !n_paths)
            throw config_error(
                "fields 'horizon_years', 'dt_years', 'n_paths': all are required to simulate");
        SimConfig sim;
        sim.horizon_years = parse_number(horizon->value, horizon->line);
        sim.dt_years = parse_number(dt->value, dt->line);
        const double paths = parse_number(n_paths->value, n_paths->line);
        if (!(paths >= 1.0) || paths != std::floor(paths))
            fail(n_paths->line, "n_paths must be a positive integer");
        sim.n_paths = static_cast<int>(paths);
        if (!(sim.horizon_years > 0.0) || !(sim.dt_years > 0.0))
            fail(dt->line, "horizon and step must be positive");
        if (sim.dt_years > sim.horizon_years) fail(dt->line, "dt_years exceeds horizon_years");
        if (seed) {
            char* end = nullptr;
            const std::string body = seed->value;
            const unsigned long long v = std::strtoull(body.c_str(), &end, 10);
            if (end != body.c_str() + body.size() || body.empty() || body[0] == '-')
                fail(seed->line, "seed must be a nonnegative integer");
            sim.seed = v;
        }
        cfg.sim = sim;
    }

    if (!entries.empty()) {
        const auto& [key, entry] = *entries.begin();
        fail(entry.line, "unknown key '" + key + "'");
    }
    return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    return parse_scenario(in);
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string serialize_scenario(const ScenarioConfig& config) {
    std::ostringstream os;
    if (config.scalar_market) {
        os << "nu = " << num(config.nu) << "\n";
        os << "sigma = " << num(config.vol) << "\n";
    } else {
        os << "mu = ";
        for (Eigen::Index i = 0; i < config.mu.size(); ++i)
            os << (i ? ", " : "") << num(config.mu(i));
        os << "\n";
        os << "sigma =\n";
        for (Eigen::Index i = 0; i < config.cov.rows(); ++i) {
            os << " ";
            for (Eigen::Index j = 0; j < config.cov.cols(); ++j) os << " " << num(config.cov(i, j));
            os << "\n";
        }
    }
    os << "r = " << num(config.agent.call_rate) << "\n";
    os << "gamma = " << num(config.agent.gamma) << "\n";
    switch (config.threat.kind) {
        case ThreatSpec::Kind::breakdown: os << "threat = breakdown\n"; break;
        case ThreatSpec::Kind::monopoly: os << "threat = monopoly\n"; break;
        case ThreatSpec::Kind::explicit_point:
            os << "threat = explicit\n";
            os << "threat_profit = " << num(config.threat.profit_bar) << "\n";
            os << "threat_growth = " << num(config.threat.growth_bar) << "\n";
            break;
    }
    if (config.sim) {
        os << "horizon_years = " << num(config.sim->horizon_years) << "\n";
        os << "dt_years = " << num(config.sim->dt_years) << "\n";
        os << "n_paths = " << config.sim->n_paths << "\n";
        os << "seed = " << config.sim->seed << "\n";
    }
    return os.str();
}

ThreatPoint resolve_threat(const ScenarioConfig& config) {
    switch (config.threat.kind) {
        case ThreatSpec::Kind::breakdown: return breakdown_threat(config.market(), config.agent);
        case ThreatSpec::Kind::monopoly: return monopoly_threat(config.market(), config.agent);
        case ThreatSpec::Kind::explicit_point: break;
    }
    ThreatPoint t;
    t.profit_bar = config.threat.profit_bar;
    t.growth_bar = config.threat.growth_bar;
    return t;
}

} // namespace margin
