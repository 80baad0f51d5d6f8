// bergman: batch front end. Defaults < config file < --set < flags.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "bergman/cli.hpp"
#include "bergman/errors.hpp"

namespace cli = bergman::cli;

int main(int argc, char** argv) {
    CLI::App app{"Numerics for Toeplitz and little Hankel operators on the Bergman space"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    bool print_config = false;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--set", sets, "extra key=value assignment (repeatable)");
    app.add_flag("--print-config", print_config, "print the canonical config and exit");

    // flag -> config key
    const std::vector<std::pair<std::string, std::string>> flags = {
        {"--symbol", "symbol"},       {"--mmin", "m_min"},       {"--mmax", "m_max"},
        {"--nmax", "n_max"},          {"--zeta-grid", "zeta_grid"}, {"--grid-angles", "grid_angles"},
        {"--grid-radii", "grid_radii"}, {"--op", "op"},          {"--rho", "rho"},
        {"--f", "f"},                 {"--tol", "tol"},           {"--cauchy-eps", "cauchy_eps"},
        {"--section", "section"},     {"--b", "b"},               {"--output,-o", "output"},
        {"--format", "format"},
    };
    std::vector<std::string> values(flags.size());
    std::vector<CLI::Option*> options;
    for (std::size_t i = 0; i < flags.size(); ++i)
        options.push_back(app.add_option(flags[i].first, values[i], "sets " + flags[i].second));
    bool transpose = false;
    auto* transpose_flag = app.add_flag("--transpose", transpose, "apply the transpose (conjugate symbol)");

    const std::pair<const char*, const char*> commands[] = {
        {"decompose", "dyadic boxes up to m_max"},
        {"avg", "sup of the averaging functional over the delta ladder"},
        {"carleson", "Carleson means over the delta ladder"},
        {"apply", "truncated Toeplitz/Hankel operator or box series on a grid"},
        {"converge", "rho ladder of truncated operators"},
        {"spectrum", "eigenvalue sequence of a radial symbol"},
        {"reproduce-prop15", "dichotomy pipeline for a_b and |a_b| with a verdict table"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitConfig;
    }

    cli::RunConfig config;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw bergman::ParseError("cannot read config file " + config_path, 0, 0);
            std::ostringstream text;
            text << in.rdbuf();
            cli::apply_config_text(config, text.str());
        }
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw bergman::ParseError("--set expects key=value", 0, 0);
            cli::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
        }
        config.command = cli::parse_command(app.get_subcommands().front()->get_name());
        for (std::size_t i = 0; i < flags.size(); ++i)
            if (options[i]->count() > 0) cli::apply_setting(config, flags[i].second, values[i]);
        if (transpose_flag->count() > 0) config.transpose = transpose;
        cli::validate(config);
    } catch (const bergman::ParseError& e) {
        std::cerr << "error: " << e.what();
        std::cerr << '\n';
        return cli::kExitConfig;
    }

    if (print_config) {
        std::cout << cli::canonical_text(config);
        return cli::kExitOk;
    }
    return cli::run(config, std::cout, std::cerr);
}
