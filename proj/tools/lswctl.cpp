#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Coarsening scenario runner"};
    app.require_subcommand(1);

    std::string config_path, output_root;
    std::size_t jobs = 0;
    auto* run = app.add_subcommand("run", "Run every scenario of a config file");
    run->add_option("config", config_path, "Scenario file")->required();
    run->add_option("-j,--jobs", jobs, "Scenarios to run at once (default: config value)");
    run->add_option("-o,--output-root", output_root, "Output root (overrides LSW_OUTPUT_ROOT)");

    auto* families = app.add_subcommand("families", "List built-in initial data");

    std::string a, b;
    auto* compare = app.add_subcommand("compare", "Relative differences between two trace CSVs");
    compare->add_option("a", a, "Reference trace")->required();
    compare->add_option("b", b, "Trace interpolated onto the reference times")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*families) {
            std::cout << lswctl::families_text();
            return 0;
        }
        if (*compare) {
            std::cout << lswctl::compare_text(a, b);
            return 0;
        }
        const lswctl::Config cfg = lswctl::load_config(config_path);
        std::string root = cfg.output_root;
        if (const char* env = std::getenv("LSW_OUTPUT_ROOT"); env && *env) root = env;
        if (!output_root.empty()) root = output_root;
        const auto results = lswctl::run_batch(cfg, root, jobs ? jobs : cfg.jobs);
        std::cout << lswctl::summary_table(results);
        for (const auto& r : results)
            if (!r.ok()) return 1;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lswctl: " << e.what() << '\n';
        return 2;
    }
}
