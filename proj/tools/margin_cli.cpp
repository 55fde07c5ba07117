#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "margin/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Negotiated margin-loan analytics: Nash-bargained contracts, monopoly "
                 "benchmarks, growth-profit frontiers, and Monte Carlo checks"};
    app.require_subcommand(1);

    margin::cli::Invocation inv;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", inv.config_path, "Scenario config file")->required();
        cmd->add_option("--csv", inv.csv_path, "Write machine-readable records to this file");
    };

    add_common(app.add_subcommand("solve", "Nash-bargained contract for the configured threat"));
    add_common(app.add_subcommand("monopoly", "Posted-price monopoly benchmark"));
    auto* frontier = app.add_subcommand("frontier", "Efficient growth-profit frontier records");
    add_common(frontier);
    frontier->add_option("--grid", inv.grid, "Number of frontier points")->default_val(41);
    auto* table = app.add_subcommand("table", "Kelly bets induced by posted annual rates");
    add_common(table);
    table->add_option("--rates", inv.apr_percents, "Annual-compounded rates, in percent")
        ->required()
        ->delimiter(',');
    add_common(app.add_subcommand("simulate", "Monte Carlo wealth paths for the bargain"));

    CLI11_PARSE(app, argc, argv);

    inv.command = app.get_subcommands().front()->get_name();
    return margin::cli::run(inv, std::cout, std::cerr);
}
