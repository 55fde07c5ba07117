#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "margin/scenario.hpp"

namespace margin::cli {

struct Invocation {
    std::string command; // solve | monopoly | frontier | table | simulate
    std::string config_path;
    std::string csv_path;             // empty: no machine output
    int grid = 41;                    // frontier point count
    std::vector<double> apr_percents; // table rates, in percent
};

// Loads the config, runs the command, and maps failures to exit codes:
// 0 success, 2 config error, 3 economic infeasibility, 4 numeric failure.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

// Individual commands; `csv` may be null. Human report goes to `out`,
// machine records to `csv` (cmd_frontier streams records to `out` when no
// csv sink is given).
void cmd_solve(const ScenarioConfig& config, std::ostream& out, std::ostream* csv);
void cmd_monopoly(const ScenarioConfig& config, std::ostream& out, std::ostream* csv);
void cmd_frontier(const ScenarioConfig& config, int grid, std::ostream& out, std::ostream* csv);
void cmd_table(const ScenarioConfig& config, const std::vector<double>& apr_percents,
               std::ostream& out, std::ostream* csv);
void cmd_simulate(const ScenarioConfig& config, std::ostream& out, std::ostream* csv);

} // namespace margin::cli
