#include "margin/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "margin/monopoly.hpp"
#include "margin/simulator.hpp"

namespace margin::cli {

namespace {

// Human tables show percent per year; machine records carry full-precision
// decimals with a unit column. Exact decimal rates land a hair below their
// decimal tie in binary (4.21875 stores as 4.218749...), so bias half-away
// rounding with a relative nudge far below display precision.
std::string pct(double x, int decimals = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << x * 100.0 * (1.0 + 1e-12);
    return os.str();
}

std::string mnum(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

std::string weights_str(const Vec& b, int decimals = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals);
    for (Eigen::Index i = 0; i < b.size(); ++i) os << (i ? ", " : "") << b(i);
    return os.str();
}

const char* threat_label(ThreatSpec::Kind kind) {
    switch (kind) {
        case ThreatSpec::Kind::breakdown: return "breakdown";
        case ThreatSpec::Kind::monopoly: return "monopoly";
        case ThreatSpec::Kind::explicit_point: return "explicit";
    }
    return "?";
}

void csv_row(std::ostream& os, const std::string& quantity, double value, const char* unit) {
    os << quantity << "," << mnum(value) << "," << unit << "\n";
}

} // namespace

void cmd_solve(const ScenarioConfig& config, std::ostream& out, std::ostream* csv) {
    const MarketParams market = config.market();
    const ThreatPoint threat = resolve_threat(config);
    const BargainSolution sol = solve_nash(market, config.agent, threat);

    out << "Nash bargain (threat: " << threat_label(config.threat.kind) << ")\n";
    out << "  threat point   pi_bar = " << pct(threat.profit_bar) << " %/yr, Gamma_bar = "
        << pct(threat.growth_bar) << " %/yr\n";
    out << "  b*             " << weights_str(sol.contract.weights) << "\n";
    out << "  rL*            " << pct(sol.contract.loan_rate) << " %/yr\n";
    out << "  q*             " << std::fixed << std::setprecision(4) << sol.outcome.q
        << " $ loan / $ equity\n";
    out << "  nim            " << pct(sol.outcome.nim) << " %/yr\n";
    out << "  Gamma*         " << pct(sol.outcome.growth) << " %/yr\n";
    out << "  pi*            " << pct(sol.outcome.profit) << " %/yr\n";
    out << "  surplus each   " << pct(sol.surplus_gambler) << " %/yr\n";
    out.unsetf(std::ios::floatfield);

    if (csv) {
        *csv << "quantity,value,unit\n";
        for (Eigen::Index i = 0; i < sol.contract.weights.size(); ++i)
            csv_row(*csv, "b_" + std::to_string(i + 1), sol.contract.weights(i), "weight");
        csv_row(*csv, "rl_star", sol.contract.loan_rate, "per_year");
        csv_row(*csv, "q_star", sol.outcome.q, "loans_per_equity");
        csv_row(*csv, "nim", sol.outcome.nim, "per_year");
        csv_row(*csv, "growth_star", sol.outcome.growth, "per_year");
        csv_row(*csv, "profit_star", sol.outcome.profit, "per_year");
        csv_row(*csv, "threat_profit", threat.profit_bar, "per_year");
        csv_row(*csv, "threat_growth", threat.growth_bar, "per_year");
        csv_row(*csv, "surplus_gambler", sol.surplus_gambler, "per_year");
        csv_row(*csv, "surplus_broker", sol.surplus_broker, "per_year");
    }
}

void cmd_monopoly(const ScenarioConfig& config, std::ostream& out, std::ostream* csv) {
    const MarketParams market = config.market();
    const DemandCurve dc = demand_curve(market, config.agent);
    const MonopolyReport rep = monopoly_solution(market, config.agent);
    const double eps = elasticity(market, config.agent, rep.q_m);

    out << "Monopoly benchmark (posted take-it-or-leave-it rate)\n";
    out << std::fixed << std::setprecision(4);
    out << "  demand           q(rL) = " << dc.intercept_q << " - " << -dc.slope_q
        << " rL,  choke " << pct(dc.choke_rate()) << " %/yr\n";
    out << "  q_M              " << rep.q_m << " $ loan / $ equity\n";
    out.unsetf(std::ios::floatfield);
    out << "  r_M              " << pct(rep.r_m) << " %/yr\n";
    out << "  b_M              " << weights_str(rep.b_m) << "\n";
    out << "  pi_M             " << pct(rep.profit_m) << " %/yr\n";
    out << "  Gamma_M          " << pct(rep.growth_m) << " %/yr\n";
    out << "  consumer surplus " << pct(rep.consumer_surplus) << " %/yr\n";
    out << "  deadweight loss  " << pct(rep.deadweight_loss) << " %/yr\n";
    out << "  elasticity(q_M)  " << std::fixed << std::setprecision(4) << eps << "\n";
    out.unsetf(std::ios::floatfield);

    if (csv) {
        *csv << "quantity,value,unit\n";
        csv_row(*csv, "intercept_q", dc.intercept_q, "loans_per_equity");
        csv_row(*csv, "slope_q", dc.slope_q, "loans_per_equity_per_rate");
        csv_row(*csv, "choke_rate", dc.choke_rate(), "per_year");
        csv_row(*csv, "q_m", rep.q_m, "loans_per_equity");
        csv_row(*csv, "r_m", rep.r_m, "per_year");
        for (Eigen::Index i = 0; i < rep.b_m.size(); ++i)
            csv_row(*csv, "b_m_" + std::to_string(i + 1), rep.b_m(i), "weight");
        csv_row(*csv, "profit_m", rep.profit_m, "per_year");
        csv_row(*csv, "growth_m", rep.growth_m, "per_year");
        csv_row(*csv, "consumer_surplus", rep.consumer_surplus, "per_year");
        csv_row(*csv, "deadweight_loss", rep.deadweight_loss, "per_year");
        csv_row(*csv, "elasticity_at_qm", eps, "dimensionless");
    }
}

void cmd_frontier(const ScenarioConfig& config, int grid, std::ostream& out, std::ostream* csv) {
    if (grid < 1) throw invalid_input("frontier grid must be positive");
    const MarketParams market = config.market();
    const FrontierLine line = efficient_frontier(market, config.agent);
    const ThreatPoint threat = resolve_threat(config);
    const BargainSolution sol = solve_nash(market, config.agent, threat);

    std::ostream& records = csv ? *csv : out;
    records << "pi,gamma,label\n";
    const double pi_max = line.intercept - config.agent.call_rate;
    for (int i = 0; i < grid; ++i) {
        const double pi = grid == 1 ? pi_max / 2.0 : i * pi_max / (grid - 1);
        records << mnum(pi) << "," << mnum(line.growth_at(pi)) << ",frontier\n";
    }
    records << mnum(threat.profit_bar) << "," << mnum(threat.growth_bar) << ",threat\n";
    records << mnum(sol.outcome.profit) << "," << mnum(sol.outcome.growth) << ",nash\n";

    if (csv)
        out << "efficient frontier: Gamma = " << pct(line.intercept) << " %/yr - pi ("
            << grid << " grid points written)\n";
}

void cmd_table(const ScenarioConfig& config, const std::vector<double>& apr_percents,
               std::ostream& out, std::ostream* csv) {
    const MarketParams market = config.market();
    if (market.n() != 1) throw invalid_input("the rate table is defined for single-index markets");
    if (apr_percents.empty()) throw invalid_input("no rates given");

    out << "posted margin rates and the bets they induce\n";
    out << "  APR %/yr   continuous %/yr   Kelly bet\n";
    if (csv) *csv << "apr_pct,cc_pct,kelly_bet\n";
    for (double apr_pct : apr_percents) {
        const double cc = cc_from_apr(apr_pct / 100.0);
        const double bet = optimal_bet(market, config.agent, cc)(0);
        // Human rows round to two decimals; the csv keeps full precision.
        out << "  " << std::fixed << std::setprecision(2) << std::setw(7) << apr_pct << "   "
            << std::setw(15) << cc * 100.0 << "   " << std::setw(9) << bet << "\n";
        out.unsetf(std::ios::floatfield);
        if (csv) *csv << mnum(apr_pct) << "," << mnum(cc * 100.0) << "," << mnum(bet) << "\n";
    }
}

void cmd_simulate(const ScenarioConfig& config, std::ostream& out, std::ostream* csv) {
    if (!config.sim)
        throw config_error("fields 'horizon_years', 'dt_years', 'n_paths': simulate needs them");
    const MarketParams market = config.market();
    const ThreatPoint threat = resolve_threat(config);
    const BargainSolution sol = solve_nash(market, config.agent, threat);

    std::vector<Contract> contracts{sol.contract};
    if (config.threat.kind == ThreatSpec::Kind::monopoly) {
        const MonopolyReport rep = monopoly_solution(market, config.agent);
        Contract posted;
        posted.weights = rep.b_m;
        posted.loan_rate = rep.r_m;
        contracts.push_back(posted);
    }
    const std::vector<SimResult> results =
        compare_contracts(market, config.agent, contracts, *config.sim);

    const SimConfig& sim = *config.sim;
    out << "Monte Carlo (exact log-normal steps): " << sim.n_paths << " paths, horizon "
        << sim.horizon_years << " yr, dt " << sim.dt_years << " yr, seed " << sim.seed << "\n";
    const auto report_one = [&](const char* label, const Contract& c, const SimResult& res) {
        out << "  " << label << ": realized growth " << pct(res.mean_growth) << " +/- "
            << pct(res.stderr_growth) << " %/yr  (analytic " << pct(log_drift(market, c))
            << " %/yr)\n";
        out << "    broker income " << pct(res.mean_broker_income_rate)
            << " %/yr, discounted " << std::setprecision(6) << res.mean_discounted_income
            << " $ / $ initial equity\n";
        if (csv) {
            *csv << label << "," << mnum(res.mean_growth) << "," << mnum(res.stderr_growth) << ","
                 << mnum(log_drift(market, c)) << "," << mnum(res.mean_broker_income_rate) << ","
                 << mnum(res.mean_discounted_income) << "\n";
        }
    };

    if (csv) *csv << "label,mean_growth,stderr_growth,analytic_growth,income_rate,discounted_income\n";
    report_one("negotiated", sol.contract, results[0]);
    if (results.size() > 1) {
        report_one("monopoly", contracts[1], results[1]);
        // Paired per-path differences: common random numbers make this a
        // low-variance estimate of the growth gap.
        const int n_paths = sim.n_paths;
        double mean_d = 0.0;
        for (int p = 0; p < n_paths; ++p)
            mean_d += results[0].terminal_log_growth[p] - results[1].terminal_log_growth[p];
        mean_d /= n_paths;
        double ss = 0.0;
        for (int p = 0; p < n_paths; ++p) {
            const double d =
                results[0].terminal_log_growth[p] - results[1].terminal_log_growth[p] - mean_d;
            ss += d * d;
        }
        const double se_d = n_paths > 1 ? std::sqrt(ss / (n_paths - 1) / n_paths) : 0.0;
        const double analytic_gap =
            log_drift(market, sol.contract) - log_drift(market, contracts[1]);
        out << "  paired gap (negotiated - monopoly): " << pct(mean_d) << " +/- " << pct(se_d)
            << " %/yr  (analytic " << pct(analytic_gap) << " %/yr)\n";
        if (csv)
            *csv << "paired_gap," << mnum(mean_d) << "," << mnum(se_d) << ","
                 << mnum(analytic_gap) << ",,\n";
    }
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
    try {
        const ScenarioConfig config = parse_scenario_file(inv.config_path);
        std::ofstream csv_file;
        std::ostream* csv = nullptr;
        if (!inv.csv_path.empty()) {
            csv_file.open(inv.csv_path);
            if (!csv_file) throw config_error("cannot open csv output '" + inv.csv_path + "'");
            csv = &csv_file;
        }
        if (inv.command == "solve") {
            cmd_solve(config, out, csv);
        } else if (inv.command == "monopoly") {
            cmd_monopoly(config, out, csv);
        } else if (inv.command == "frontier") {
            cmd_frontier(config, inv.grid, out, csv);
        } else if (inv.command == "table") {
            cmd_table(config, inv.apr_percents, out, csv);
        } else if (inv.command == "simulate") {
            cmd_simulate(config, out, csv);
        } else {
            throw config_error("unknown command '" + inv.command + "'");
        }
        return 0;
    } catch (const config_error& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const infeasible& e) {
        err << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const invalid_input& e) {
        err << "invalid input: " << e.what() << "\n";
        return 2;
    }
}

} // namespace margin::cli
