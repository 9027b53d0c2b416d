#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "scenario.hpp"

namespace fs = std::filesystem;

namespace {

lswctl::Config parse(const std::string& text) {
    std::istringstream is(text);
    return lswctl::parse_config(is);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const lswctl::ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

const char* quick_config = R"(output_root = unused
jobs = 2

[block]
model = lsw
family = indicator
T_final = 2
checks = mass, identity

[cp]
model = linear
family = constant-beta
beta = 0.5
T_final = 20
checks = mass, affine

[map]
model = map_iteration
family = exponential
steps = 4
checks = pointwise, sup-beta

[ss]
model = self_similar
alpha = 0.1
samples = 256
checks = z4, g-endpoints

[analysis]
model = analysis
family = constant-beta
beta = 0.5
expect_p = 1
checks = closed-form, regular-variation
)";

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("lswctl-test-" + name);
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config sections, comments and family parameters") {
    const lswctl::Config c = parse(R"(# leading comment
output_root = out
jobs = 3
[a]
model = analysis   ; trailing comment
family = constant-beta
beta = 0.25
checks = closed-form, fisher
[b]
model = lsw
family = exponential
tau_final = 1
snapshots = 0.5, 1
)");
    CHECK(c.output_root == "out");
    CHECK(c.jobs == 3);
    REQUIRE(c.scenarios.size() == 2);
    CHECK(c.scenarios[0].family_params.at("beta") == 0.25);
    CHECK(c.scenarios[0].checks == std::vector<std::string>{"closed-form", "fisher"});
    CHECK(c.scenarios[0].output == "a");
    CHECK(c.scenarios[1].line == 9);
    CHECK(std::isinf(c.scenarios[1].T_final));
    CHECK(c.scenarios[1].snapshots == std::vector<double>{0.5, 1.0});
}

TEST_CASE("config errors carry line numbers") {
    CHECK(error_of("[a]\nfamily = exponential\n").find("line 2") == 0);
    CHECK(error_of("[a]\nmodel = lsw\nfamily = exponential\nT_final = soon\n").find("line 4") == 0);
    CHECK(error_of("[a]\nmodel = lsw\nfamily = nowhere\n").find("line 3") == 0);
    CHECK(error_of("[a]\nmodel = lsw\nfamily = exponential\nsteps = 3\n").find("line 4") == 0);
    CHECK(error_of("[a]\nmodel = lsw\nfamily = exponential\nchecks = z4\n").find("line 4") == 0);
    CHECK(error_of("bogus = 1\n").find("line 1") == 0);
    CHECK(error_of("[a]\nmodel = lsw\n").find("line 1") == 0);
    CHECK(error_of("[a\n").find("line 1") == 0);
    CHECK(error_of("[a]\nmodel = lsw\nfamily = indicator\n[a]\nmodel = lsw\n").find("line 4") == 0);
}

TEST_CASE("families listing") {
    const std::string t = lswctl::families_text();
    for (const char* id : {"constant-beta", "exponential", "indicator", "example1", "example2", "power-tail",
                           "self-similar"})
        CHECK(t.find(id) != std::string::npos);
}

TEST_CASE("runs are deterministic across worker counts") {
    const lswctl::Config c = parse(quick_config);
    const fs::path a = fresh_dir("a"), b = fresh_dir("b");
    const auto ra = lswctl::run_batch(c, a.string(), 1);
    const auto rb = lswctl::run_batch(c, b.string(), 2);
    REQUIRE(ra.size() == c.scenarios.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CAPTURE(ra[i].name);
        CHECK(ra[i].name == rb[i].name);
        CHECK(ra[i].error.empty());
        CHECK(ra[i].ok());
    }
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a);
        CAPTURE(rel.string());
        CHECK(slurp(entry.path()) == slurp(b / rel));
        ++files;
    }
    CHECK(files >= 10);
    CHECK(fs::exists(a / "block" / "trace.csv"));
    CHECK(fs::exists(a / "map" / "history.csv"));
    CHECK(fs::exists(a / "ss" / "profile.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("a failing check fails the scenario") {
    const lswctl::Config c = parse("[x]\nmodel = linear\nfamily = example1\nT_final = 5\nchecks = stability\n");
    const fs::path d = fresh_dir("fail");
    const auto r = lswctl::run_batch(c, d.string(), 1);
    REQUIRE(r.size() == 1);
    CHECK_FALSE(r[0].ok());
    fs::remove_all(d);
}

TEST_CASE("a scenario that throws is reported, not fatal") {
    const lswctl::Config c = parse("[x]\nmodel = analysis\nprofile = /nonexistent/profile.csv\nchecks = fisher\n");
    const fs::path d = fresh_dir("throw");
    const auto r = lswctl::run_batch(c, d.string(), 1);
    CHECK_FALSE(r[0].error.empty());
    CHECK_FALSE(r[0].ok());
    fs::remove_all(d);
}

}
