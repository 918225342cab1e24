#include "cantorlap/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Spectra, heat kernels and harmonic representatives on Bratteli path spaces"};
    app.require_subcommand(1);

    std::string config_path;
    cantorlap::RunOptions options;
    for (const char* name : {"spectrum", "weyl", "heat", "cohomology", "hodge", "gibbs"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config document")->required();
        sub->add_option("--out", options.out_dir, "output directory");
        sub->add_flag("--exact", options.exact, "rational arithmetic (spectrum, psi = 0, integer lambda and gamma)");
        sub->add_option("--threads", options.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--cap", options.cap, "maximum number of paths per level")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto command = cantorlap::parse_command(app.get_subcommands().front()->get_name());
        const auto config = cantorlap::load_config(config_path);
        const auto result = cantorlap::run_command(command, config, options);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
        std::cout << result.report;
        for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    } catch (const cantorlap::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cantorlap::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
