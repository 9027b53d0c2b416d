#pragma once

#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lsw/errors.hpp"
#include "lsw/io.hpp"

namespace lswctl {

struct ConfigError : lsw::Error {
    using lsw::Error::Error;
};

struct Scenario {
    std::string name;
    std::string model;  // lsw, linear, map_iteration, self_similar, analysis
    int line = 0;       // of the section header

    std::string family;
    std::map<std::string, double> family_params;
    std::string profile_path;  // CSV with columns x,w; replaces `family`
    std::size_t nodes = 4096;

    double delta = 0.05;
    double T_final = 1.0;
    double tau_final = std::numeric_limits<double>::infinity();
    double tol = 1e-10;
    std::size_t max_picard = 50;
    std::vector<double> snapshots;
    double reseed_gap = 1.0 / 256.0;

    std::string map = "cube-root";
    double lambda = 0.5;
    std::size_t steps = 100;
    double rho = 1.0 / 3.0;
    double K = 1.0;

    double alpha = 0.05;
    std::size_t samples = 2048;

    double expect_p = std::numeric_limits<double>::quiet_NaN();

    std::vector<std::string> checks;
    std::string output;  // subdirectory; defaults to the name
};

struct Config {
    std::string output_root = "lsw-out";
    std::size_t jobs = 1;
    std::vector<Scenario> scenarios;
};

// `key = value` lines; `[name]` opens a scenario; `#` and `;` start comments.
// Keys before the first section set output_root and jobs.
Config parse_config(std::istream& is);
Config load_config(const std::string& path);

// Checks each model understands, in the order they run.
const std::vector<std::string>& known_checks(const std::string& model);

using CheckResult = lsw::io::CheckRecord;

struct ScenarioResult {
    std::string name;
    std::string model;
    std::vector<CheckResult> checks;
    std::string error;  // a scenario that threw: counts as failed
    double seconds = 0.0;
    bool ok() const;
};

ScenarioResult run_scenario(const Scenario& scenario, const std::string& output_root);
// Runs up to `jobs` scenarios at a time; results keep the config order.
std::vector<ScenarioResult> run_batch(const Config& config, const std::string& output_root,
                                      std::size_t jobs);

std::string summary_table(const std::vector<ScenarioResult>& results);
std::string families_text();
std::string compare_text(const std::string& a, const std::string& b);

}  // namespace lswctl
