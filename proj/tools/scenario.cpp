#include "scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "lsw/families.hpp"
#include "lsw/jensen.hpp"
#include "lsw/linear_model.hpp"
#include "lsw/lsw_solver.hpp"
#include "lsw/map_iteration.hpp"
#include "lsw/self_similar.hpp"

namespace lswctl {

namespace fs = std::filesystem;
using lsw::io::format_double;

namespace {

const std::vector<std::string> kModels{"lsw", "linear", "map_iteration", "self_similar", "analysis"};

const std::map<std::string, std::vector<std::string>>& check_table() {
    static const std::map<std::string, std::vector<std::string>> t{
        {"lsw",
         {"mass", "identity", "upper-bound", "energy", "gamma", "picard", "slopes", "monotone", "dyadic",
          "flow", "stationarity"}},
        {"linear", {"mass", "identity", "affine", "beta-boundary", "stability", "stability-inapplicable"}},
        {"map_iteration", {"pointwise", "equality", "sup-beta", "jensen-lower"}},
        {"self_similar", {"z4", "g-endpoints", "g-monotone", "g-lower", "ode", "ac4", "mass"}},
        {"analysis",
         {"closed-form", "roundtrip", "jensen", "reverse", "sharp", "gap", "tail-bounds", "support-bounds",
          "regular-variation", "fisher"}},
    };
    return t;
}

const std::map<std::string, std::set<std::string>>& model_keys() {
    static const std::map<std::string, std::set<std::string>> t{
        {"lsw", {"delta", "T_final", "tau_final", "tol", "max_picard", "snapshots", "reseed_gap"}},
        {"linear", {"delta", "T_final"}},
        {"map_iteration", {"map", "lambda", "steps", "rho", "K"}},
        {"self_similar", {"alpha", "samples"}},
        {"analysis", {"expect_p"}},
    };
    return t;
}

std::set<std::string> family_param_names() {
    std::set<std::string> names;
    for (const auto& f : lsw::family_catalog()) {
        std::istringstream ss(f.params);
        std::string pair;
        while (std::getline(ss, pair, ','))
            if (auto eq = pair.find('='); eq != std::string::npos) names.insert(pair.substr(0, eq));
    }
    return names;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double to_number(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(line, key + ": '" + v + "' is not a number");
    }
}

double positive(const std::string& v, int line, const std::string& key) {
    const double d = to_number(v, line, key);
    if (!(d > 0.0)) fail(line, key + " must be positive");
    return d;
}

std::size_t count(const std::string& v, int line, const std::string& key) {
    const double d = positive(v, line, key);
    if (d != std::floor(d) || d > 1e9) fail(line, key + " must be a whole number");
    return static_cast<std::size_t>(d);
}

void finish_scenario(Scenario& s, const std::set<std::string>& given) {
    if (s.model.empty()) fail(s.line, "scenario '" + s.name + "' has no model");
    const bool needs_data = s.model != "self_similar";
    if (needs_data && s.family.empty() && s.profile_path.empty())
        fail(s.line, "scenario '" + s.name + "' needs a family or a profile");
    if (!s.family.empty() && !s.profile_path.empty())
        fail(s.line, "scenario '" + s.name + "': family and profile are exclusive");
    if (s.output.empty()) s.output = s.name;
    if (s.model == "lsw" && !given.count("T_final") && std::isfinite(s.tau_final))
        s.T_final = std::numeric_limits<double>::infinity();
    if (s.model == "map_iteration" && s.map != "cube-root" && s.map != "linear")
        fail(s.line, "map must be cube-root or linear");
}

}  // namespace

const std::vector<std::string>& known_checks(const std::string& model) {
    static const std::vector<std::string> none;
    auto it = check_table().find(model);
    return it == check_table().end() ? none : it->second;
}

Config parse_config(std::istream& is) {
    Config cfg;
    const std::set<std::string> fparams = family_param_names();
    std::set<std::string> families;
    for (const auto& f : lsw::family_catalog()) families.insert(f.id);

    Scenario* cur = nullptr;
    std::set<std::string> given, names;
    std::vector<std::pair<int, std::string>> pending_checks;
    std::string raw;
    int line = 0;
    auto close = [&] {
        if (!cur) return;
        finish_scenario(*cur, given);
        for (const auto& [at, id] : pending_checks) {
            const auto& ok = known_checks(cur->model);
            if (std::find(ok.begin(), ok.end(), id) == ok.end())
                fail(at, "check '" + id + "' is not available for model " + cur->model);
        }
        pending_checks.clear();
        given.clear();
    };

    while (std::getline(is, raw)) {
        ++line;
        std::string text = raw;
        if (auto c = text.find_first_of("#;"); c != std::string::npos) text.erase(c);
        text = trim(text);
        if (text.empty()) continue;

        if (text.front() == '[') {
            if (text.back() != ']') fail(line, "unterminated section header");
            close();
            const std::string name = trim(text.substr(1, text.size() - 2));
            if (name.empty()) fail(line, "empty scenario name");
            if (!names.insert(name).second) fail(line, "duplicate scenario '" + name + "'");
            cfg.scenarios.emplace_back();
            cur = &cfg.scenarios.back();
            cur->name = name;
            cur->line = line;
            continue;
        }

        const auto eq = text.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        const std::string key = trim(text.substr(0, eq)), value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty()) fail(line, "expected key = value");

        if (!cur) {
            if (key == "output_root") cfg.output_root = value;
            else if (key == "jobs") cfg.jobs = count(value, line, key);
            else fail(line, "unknown global key '" + key + "'");
            continue;
        }
        if (!given.insert(key).second) fail(line, "duplicate key '" + key + "'");
        Scenario& s = *cur;

        if (key == "model") {
            if (std::find(kModels.begin(), kModels.end(), value) == kModels.end())
                fail(line, "unknown model '" + value + "'");
            if (given.size() > 1) fail(line, "model must be the first key of a scenario");
            s.model = value;
            continue;
        }
        if (s.model.empty()) fail(line, "model must be the first key of a scenario");

        if (key == "family") {
            if (!families.count(value)) fail(line, "unknown family '" + value + "'");
            s.family = value;
        } else if (key == "profile") {
            s.profile_path = value;
        } else if (key == "nodes") {
            s.nodes = count(value, line, key);
            if (s.nodes < 64) fail(line, "nodes must be at least 64");
        } else if (key == "output") {
            s.output = value;
        } else if (key == "checks") {
            for (const auto& id : split_list(value)) {
                s.checks.push_back(id);
                pending_checks.emplace_back(line, id);
            }
        } else if (fparams.count(key) && !(s.model == "self_similar" && key == "alpha")) {
            s.family_params[key] = to_number(value, line, key);
        } else if (!model_keys().at(s.model).count(key)) {
            fail(line, "unknown key '" + key + "' for model " + s.model);
        } else if (key == "delta") {
            s.delta = positive(value, line, key);
        } else if (key == "T_final") {
            s.T_final = positive(value, line, key);
        } else if (key == "tau_final") {
            s.tau_final = positive(value, line, key);
        } else if (key == "tol") {
            s.tol = positive(value, line, key);
        } else if (key == "max_picard") {
            s.max_picard = count(value, line, key);
        } else if (key == "reseed_gap") {
            s.reseed_gap = positive(value, line, key);
        } else if (key == "snapshots") {
            for (const auto& v : split_list(value)) s.snapshots.push_back(positive(v, line, key));
        } else if (key == "map") {
            s.map = value;
        } else if (key == "lambda") {
            s.lambda = positive(value, line, key);
        } else if (key == "steps") {
            s.steps = count(value, line, key);
        } else if (key == "rho") {
            s.rho = positive(value, line, key);
        } else if (key == "K") {
            s.K = positive(value, line, key);
        } else if (key == "alpha") {
            s.alpha = positive(value, line, key);
        } else if (key == "samples") {
            s.samples = count(value, line, key);
        } else if (key == "expect_p") {
            s.expect_p = to_number(value, line, key);
        }
    }
    close();
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    try {
        return parse_config(f);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

bool ScenarioResult::ok() const {
    if (!error.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

std::string num(double v) { return format_double(v); }

CheckResult check(const std::string& id, bool pass, double value, std::string detail) {
    return {id, pass, value, std::move(detail)};
}

struct Output {
    fs::path dir;
    void text(const std::string& name, const std::string& body) const {
        std::ofstream f(dir / name);
        if (!f) throw lsw::Error("cannot write " + (dir / name).string());
        f << body << '\n';
    }
    template <class Writer>
    void csv(const std::string& name, Writer&& w) const {
        std::ofstream f(dir / name);
        if (!f) throw lsw::Error("cannot write " + (dir / name).string());
        w(f);
    }
};

lsw::SurvivalProfile initial_data(const Scenario& s) {
    if (!s.profile_path.empty()) return lsw::io::profile_from_table(lsw::io::read_csv_file(s.profile_path));
    lsw::GridOptions grid;
    grid.nodes = s.nodes;
    return lsw::make_family(s.family, s.family_params, grid);
}

using CheckFn = std::function<CheckResult()>;

std::vector<CheckResult> run_checks(const Scenario& s, const std::map<std::string, CheckFn>& available) {
    std::vector<CheckResult> out;
    for (const auto& id : s.checks) {
        auto it = available.find(id);
        if (it == available.end()) {
            out.push_back(check(id, false, 0.0, "not available here"));
            continue;
        }
        out.push_back(it->second());
    }
    return out;
}

void write_snapshots(const Output& out, const std::vector<lsw::EnsembleSnapshot>& snaps) {
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        std::ostringstream name;
        name << "snapshot_" << std::setw(3) << std::setfill('0') << i << ".csv";
        out.csv(name.str(), [&](std::ostream& os) { lsw::io::write_profile_csv(os, snaps[i].profile); });
    }
}

lsw::io::RunSummary summary_of(const Scenario& s, const lsw::CoarseningTrace& tr) {
    lsw::io::RunSummary sum;
    sum.scenario = s.name;
    sum.model = s.model;
    sum.T_final = tr.samples.empty() ? 0.0 : tr.samples.back().t;
    sum.steps = tr.steps;
    sum.picard_iters_total = tr.picard_iters_total;
    sum.violations = tr.violations;
    sum.stop_reason = tr.stop_reason;
    return sum;
}

std::vector<CheckResult> run_lsw(const Scenario& s, const Output& out) {
    const lsw::SurvivalProfile w0 = initial_data(s);
    const double sup_beta0 = lsw::beta_from_profile(w0).sup();
    auto e = lsw::CharacteristicEnsemble::from_profile(w0);
    lsw::SolverOptions opt;
    opt.delta = s.delta;
    opt.tol = s.tol;
    opt.max_picard = s.max_picard;
    opt.T_final = s.T_final;
    opt.tau_final = s.tau_final;
    opt.snapshot_times = s.snapshots;
    opt.reseed_gap = s.reseed_gap;
    const lsw::CoarseningTrace tr = lsw::advance_global(e, opt);

    out.csv("trace.csv", [&](std::ostream& os) { lsw::io::write_trace_csv(os, tr); });
    write_snapshots(out, tr.snapshots);

    std::map<std::string, CheckFn> fns;
    fns["mass"] = [&] {
        return check("mass", tr.max_mass_drift <= 1e-4, tr.max_mass_drift, "max |mass - 1|, limit 1e-4");
    };
    fns["identity"] = [&] {
        const auto r = lsw::coarsening_identity_check(tr, sup_beta0);
        return check("identity", r.samples > 0 && r.fraction_within >= 0.95, r.fraction_within,
                     "dLambda/dt vs beta(0,t) within 2% at " + std::to_string(r.within) + "/" +
                         std::to_string(r.samples) + " samples, max rel " + num(r.max_rel_error));
    };
    fns["upper-bound"] = [&] {
        const auto r = lsw::coarsening_identity_check(tr, sup_beta0);
        return check("upper-bound", r.upper_bound_ok, r.worst_upper_margin,
                     "Lambda(T) <= Lambda(0) + " + num(sup_beta0) + " T");
    };
    fns["energy"] = [&] {
        const auto r = lsw::coarsening_identity_check(tr, sup_beta0);
        return check("energy", r.energy_bound_ok, r.worst_energy_margin, "E <= Lambda^{-1/3}");
    };
    fns["gamma"] = [&] {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& q : tr.samples) lo = std::min(lo, q.gamma);
        return check("gamma", lo >= 1.0 - 1e-9, lo, "min Lambda/L");
    };
    fns["picard"] = [&] {
        std::size_t most = 0;
        for (const auto& q : tr.samples) most = std::max(most, q.picard_iters);
        return check("picard", most <= 10 && tr.max_contraction < 1.0, tr.max_contraction,
                     "max ratio; most iterations " + std::to_string(most) + " (limit 10)");
    };
    fns["slopes"] = [&] {
        return check("slopes", tr.max_slope_violation <= 1e-2, tr.max_slope_violation,
                     "F' in (0, 1] and nondecreasing, relative limit 1e-2");
    };
    fns["monotone"] = [&] {
        const auto r = lsw::beta_evolution_diagnostics(tr);
        const bool pass = r.g_nonnegative && r.sup_beta_nonincreasing && r.g_monotone && r.beta_monotone;
        std::string d = "g>=0 " + std::to_string(r.g_nonnegative) + ", sup beta nonincreasing " +
                        std::to_string(r.sup_beta_nonincreasing) + ", g decreasing " +
                        std::to_string(r.g_monotone) + ", beta increasing " + std::to_string(r.beta_monotone);
        if (!r.monotone_hypothesis) d += " (hypothesis sup beta0 <= 1 not met)";
        return check("monotone", pass, static_cast<double>(r.violations.size()), d);
    };
    fns["dyadic"] = [&] {
        const auto r = lsw::dyadic_diagnostics(tr);
        if (r.insufficient_resolution || r.ratio_at_zero.size() < 10)
            return check("dyadic", false, 0.0, "not enough resolved levels");
        const double q = r.ratio_at_zero[9];
        const double rel = std::fabs(q / r.predicted_ratio - 1.0);
        return check("dyadic", rel <= 0.05 && r.ratio_nondecreasing, rel,
                     "|I_10|/|I_11| = " + num(q) + " vs " + num(r.predicted_ratio) +
                         ", nondecreasing in tau " + std::to_string(r.ratio_nondecreasing));
    };
    fns["flow"] = [&] {
        const auto fb = lsw::beta_along_flow(tr.snapshots.back(), w0);
        return check("flow", fb.discrepancy <= 10.0 * fb.grid_spacing, fb.discrepancy,
                     "transported vs direct beta, limit 10 x spacing " + num(fb.grid_spacing));
    };
    fns["stationarity"] = [&] {
        if (s.family != "self-similar") return check("stationarity", false, 0.0, "needs the self-similar family");
        const auto it = s.family_params.find("alpha");
        const double alpha = it == s.family_params.end() ? 0.05 : it->second;
        const double ag = alpha * lsw::build_self_similar(alpha).gamma();
        const auto r = lsw::stationarity(tr.snapshots.front(), tr.snapshots.back());
        const bool pass = r.sup_diff <= 1e-2 && std::fabs(r.beta_later - ag) <= 1e-2;
        return check("stationarity", pass, r.sup_diff,
                     "sup |w*(y,tau) - w*(y,0)| (limit 1e-2; " + num(r.sup_diff_interior) +
                         " below 99% of the support), beta*(0) " + num(r.beta_later) + " vs " + num(ag));
    };
    auto results = run_checks(s, fns);
    auto sum = summary_of(s, tr);
    sum.checks = results;
    out.text("summary.json", lsw::io::summary_json(sum));
    return results;
}

std::vector<CheckResult> run_linear(const Scenario& s, const Output& out) {
    lsw::LinearRunConfig cfg;
    cfg.initial = initial_data(s);
    cfg.T_final = s.T_final;
    cfg.delta = s.delta;
    const lsw::LinearRun run = lsw::advance_linear(cfg);
    const auto& tr = run.trace;
    out.csv("trace.csv", [&](std::ostream& os) { lsw::io::write_trace_csv(os, tr); });
    write_snapshots(out, tr.snapshots);

    const lsw::LimitingBeta limit = lsw::limiting_beta(cfg.initial);
    std::map<std::string, CheckFn> fns;
    fns["mass"] = [&] {
        return check("mass", tr.max_mass_drift <= 1e-4, tr.max_mass_drift, "max |mass - 1|, limit 1e-4");
    };
    fns["identity"] = [&] {
        const auto r = lsw::coarsening_identity_check(tr, lsw::beta_from_profile(cfg.initial).sup());
        return check("identity", r.samples > 0 && r.fraction_within >= 0.95, r.fraction_within,
                     "dLambda/dt vs beta(0,t) within 2%, max rel " + num(r.max_rel_error));
    };
    fns["affine"] = [&] {
        return check("affine", run.max_affine_error <= 1e-10, run.max_affine_error,
                     "probe characteristics vs F0 + k x, limit 1e-10");
    };
    fns["beta-boundary"] = [&] {
        return check("beta-boundary", run.max_beta_gap <= 1e-6, run.max_beta_gap,
                     "sup |beta(0,t) - beta0(F(0,t))|, limit 1e-6");
    };
    fns["stability"] = [&] {
        const auto r = lsw::stability_check(run, limit);
        if (!r.applicable) return check("stability", false, 0.0, "inapplicable: " + r.note);
        return check("stability", r.pass, r.ratio_final,
                     "Lambda(T)/T at T=" + num(r.T) + " vs " + num(r.beta_limit) + " (limit 0.05), fit " +
                         num(r.ratio_fit));
    };
    fns["stability-inapplicable"] = [&] {
        const auto r = lsw::stability_check(run, limit);
        return check("stability-inapplicable", !r.applicable, 0.0,
                     r.applicable ? "hypotheses hold" : "flagged: " + r.note);
    };
    auto results = run_checks(s, fns);
    auto sum = summary_of(s, tr);
    sum.checks = results;
    out.text("summary.json", lsw::io::summary_json(sum));
    return results;
}

std::vector<CheckResult> run_map_iteration(const Scenario& s, const Output& out) {
    const lsw::SurvivalProfile w0 = initial_data(s);
    const lsw::MapF F = s.map == "linear" ? lsw::MapF::linear(s.lambda) : lsw::MapF::cube_root();
    lsw::IterateOptions opt;
    opt.rho = s.rho;
    opt.K = s.K;
    opt.steps = s.steps;
    opt.grid.nodes = s.nodes;
    const lsw::IterationState st = lsw::iterate(w0, F, opt);
    out.csv("history.csv", [&](std::ostream& os) { lsw::io::write_history_csv(os, st.history); });
    out.csv("profile.csv", [&](std::ostream& os) { lsw::io::write_profile_csv(os, st.profile); });
    out.csv("beta.csv", [&](std::ostream& os) { lsw::io::write_beta_csv(os, st.beta); });

    double excess = -std::numeric_limits<double>::infinity(), deficit = excess, rise = excess;
    for (std::size_t i = 0; i < st.history.size(); ++i) {
        excess = std::max(excess, st.history[i].l2_excess_formula);
        deficit = std::max(deficit, st.history[i].l2_deficit_formula);
        if (i > 0) rise = std::max(rise, st.history[i].sup_beta - st.history[i - 1].sup_beta);
    }
    std::map<std::string, CheckFn> fns;
    fns["pointwise"] = [&] {
        return check("pointwise", excess <= 1e-5, excess, "max T_F beta - beta(F), limit 1e-5");
    };
    fns["equality"] = [&] {
        const double gap = std::max(excess, deficit);
        return check("equality", gap <= 1e-6, gap, "max |T_F beta - beta(F)|, limit 1e-6");
    };
    fns["sup-beta"] = [&] {
        return check("sup-beta", rise <= 1e-3, rise, "largest step increase of sup beta, limit 1e-3");
    };
    fns["jensen-lower"] = [&] {
        const auto c = lsw::reverse_jensen(w0, 1.0 / 3.0);
        if (!c.applicable) return check("jensen-lower", false, 0.0, "inapplicable: " + c.note);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& r : st.history) worst = std::min(worst, r.ratio_third - c.C_used);
        return check("jensen-lower", worst >= 0.0, worst,
                     "min <X^(1/3)>/<X>^(1/3) - C, C = " + num(c.C_used));
    };
    auto results = run_checks(s, fns);
    lsw::io::RunSummary sum;
    sum.scenario = s.name;
    sum.model = s.model;
    sum.steps = st.n;
    sum.checks = results;
    out.text("summary.json", lsw::io::summary_json(sum));
    return results;
}

std::vector<CheckResult> run_self_similar(const Scenario& s, const Output& out) {
    const lsw::SelfSimilarProfile p = lsw::build_self_similar(s.alpha);
    const lsw::GAlphaReport g = lsw::g_alpha_report(p, s.samples);
    out.csv("profile.csv", [&](std::ostream& os) { lsw::io::write_self_similar_csv(os, p, s.samples); });
    out.text("profile.json", lsw::io::self_similar_json(p));

    std::map<std::string, CheckFn> fns;
    fns["z4"] = [&] {
        const double r = std::fabs(p.z4_residual());
        return check("z4", r <= 1e-5, r, "|int z^{-2/3} e^{-alpha Gamma} - 3|, limit 1e-5");
    };
    fns["g-endpoints"] = [&] {
        const double e = std::max(std::fabs(g.g0 - g.g0_expected), std::fabs(g.g_end - g.g_end_expected));
        return check("g-endpoints", e <= 1e-4, e, "g(0) vs alpha gamma, g(a) vs 3 alpha a^{2/3}, limit 1e-4");
    };
    fns["g-monotone"] = [&] {
        return check("g-monotone", g.max_decrease <= 1e-8, g.max_decrease, "largest decrease, limit 1e-8");
    };
    fns["g-lower"] = [&] {
        return check("g-lower", g.min_lower_margin >= -1e-10, g.min_lower_margin, "min g - 3 alpha z^{2/3}");
    };
    fns["ode"] = [&] {
        return check("ode", g.ode_residual <= 1e-6, g.ode_residual, "[f g] - alpha int (g - 1) per unit length, limit 1e-6");
    };
    fns["ac4"] = [&] {
        const double r = std::max(g.ac4_residual_zero, g.ac4_residual_half);
        return check("ac4", r <= 1e-6, r, "tail identity at z = 0 and a/2, limit 1e-6");
    };
    fns["mass"] = [&] {
        const double m = std::fabs(lsw::mass(lsw::seed_solver(p)) - 1.0);
        return check("mass", m <= 1e-6, m, "|int w* - 1|, limit 1e-6");
    };
    auto results = run_checks(s, fns);
    lsw::io::RunSummary sum;
    sum.scenario = s.name;
    sum.model = s.model;
    sum.checks = results;
    out.text("summary.json", lsw::io::summary_json(sum));
    return results;
}

std::vector<CheckResult> run_analysis(const Scenario& s, const Output& out) {
    const lsw::SurvivalProfile w0 = initial_data(s);
    const lsw::BetaProfile beta = lsw::beta_from_profile(w0);
    const double spacing = lsw::max_spacing(w0);
    out.csv("profile.csv", [&](std::ostream& os) { lsw::io::write_profile_csv(os, w0); });
    out.text("profile.json", lsw::io::profile_sidecar_json(w0));
    out.csv("beta.csv", [&](std::ostream& os) { lsw::io::write_beta_csv(os, beta); });

    const std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<lsw::JensenCertificate> rev, sharp;
    for (double a : alphas) {
        rev.push_back(lsw::reverse_jensen(w0, a));
        sharp.push_back(lsw::sharp_jensen(w0, a));
    }
    {
        std::string body = "[\n";
        for (std::size_t i = 0; i < rev.size(); ++i)
            body += lsw::io::certificate_json(rev[i]) + ",\n" + lsw::io::certificate_json(sharp[i]) +
                    (i + 1 < rev.size() ? ",\n" : "\n");
        out.text("certificates.json", body + "]");
    }

    std::map<std::string, CheckFn> fns;
    fns["closed-form"] = [&] {
        double err = 0.0;
        if (s.family == "constant-beta") {
            const auto it = s.family_params.find("beta");
            const double b = it == s.family_params.end() ? 0.5 : it->second;
            for (std::size_t i = 0; i < beta.trusted(); ++i) err = std::max(err, std::fabs(beta.beta[i] - b));
        } else if (s.family == "example1") {
            const auto it = s.family_params.find("eps");
            const double eps = it == s.family_params.end() ? 0.3 : it->second;
            for (std::size_t i = 0; i < beta.trusted(); ++i)
                err = std::max(err, std::fabs(beta.beta[i] - lsw::example1_beta(eps, beta.x[i])));
        } else {
            return check("closed-form", false, 0.0, "no closed form for this family");
        }
        return check("closed-form", err <= 10.0 * spacing, err, "sup |beta - closed form|, limit 10 x " + num(spacing));
    };
    fns["roundtrip"] = [&] {
        const auto back = lsw::beta_from_profile(lsw::profile_from_beta(beta, lsw::mean(w0)));
        double err = 0.0;
        for (std::size_t i = 0; i < std::min(beta.trusted(), back.trusted()); ++i)
            err = std::max(err, std::fabs(back.eval(beta.x[i]) - beta.beta[i]));
        return check("roundtrip", err <= 10.0 * spacing, err, "beta -> w -> beta, limit 10 x " + num(spacing));
    };
    fns["jensen"] = [&] {
        const double m = lsw::mean(w0);
        double worst = -std::numeric_limits<double>::infinity();
        for (double a : alphas) worst = std::max(worst, lsw::moment(w0, a) / std::pow(m, a) - 1.0);
        return check("jensen", worst <= 1e-12, worst, "max <X^a>/<X>^a - 1 over a = 0.1..0.9");
    };
    fns["reverse"] = [&] {
        std::size_t bad = 0;
        for (const auto& c : rev) bad += c.applicable && !c.pass;
        const bool applicable = rev.front().applicable;
        return check("reverse", applicable && bad == 0, static_cast<double>(bad),
                     applicable ? "failed certificates" : "inapplicable: " + rev.front().note);
    };
    fns["sharp"] = [&] {
        std::size_t bad = 0;
        for (const auto& c : sharp) bad += !c.pass;
        return check("sharp", bad == 0, static_cast<double>(bad), "failed certificates");
    };
    fns["gap"] = [&] {
        std::size_t bad = 0;
        double worst = 0.0;
        for (double a : alphas) {
            const auto r = lsw::quantitative_jensen_gap(w0, a);
            if (!r.asserted) continue;
            bad += !r.pass;
            worst = std::max(worst, r.g_expectation - r.g_bound);
        }
        return check("gap", bad == 0, worst, "max E[g(X/<X>)] - (1/a - 1) for a <= 1/2");
    };
    fns["tail-bounds"] = [&] {
        const auto r = lsw::tail_and_conditional_bounds(w0);
        return check("tail-bounds", r.pass, std::max(r.conditional_violation, r.tail_violation),
                     "conditional mean and tail bounds from inf beta = " + num(r.beta0));
    };
    fns["support-bounds"] = [&] {
        const double sb = beta.sup();
        if (!w0.compact() || !(sb < 1.0))
            return check("support-bounds", false, 0.0, "needs compact support and sup beta < 1");
        const double m = lsw::mean(w0), end = w0.support_end();
        const bool pass = m <= end * (1.0 + 1e-12) && end <= m / (1.0 - sb) * (1.0 + 1e-12);
        return check("support-bounds", pass, end / m, "<X> <= |X| <= <X>/(1 - " + num(sb) + ")");
    };
    fns["regular-variation"] = [&] {
        const auto rv = lsw::regular_variation_exponent(w0);
        if (std::isnan(s.expect_p))
            return check("regular-variation", !rv.oscillating, rv.p, "end exponent, residual " + num(rv.residual));
        const double e = std::fabs(rv.p - s.expect_p);
        return check("regular-variation", e <= 0.05 && !rv.oscillating, rv.p,
                     "end exponent vs " + num(s.expect_p) + " (limit 0.05)");
    };
    fns["fisher"] = [&] {
        const auto f = lsw::fisher_information(lsw::integrate_tail(w0));
        const double rel = std::fabs(f.direct - f.beta_form) / std::max(std::fabs(f.direct), 1e-300);
        return check("fisher", rel <= 1e-3, rel, "direct vs beta form, relative limit 1e-3");
    };
    auto results = run_checks(s, fns);
    lsw::io::RunSummary sum;
    sum.scenario = s.name;
    sum.model = s.model;
    sum.checks = results;
    out.text("summary.json", lsw::io::summary_json(sum));
    return results;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s, const std::string& output_root) {
    ScenarioResult r;
    r.name = s.name;
    r.model = s.model;
    const auto start = std::chrono::steady_clock::now();
    try {
        Output out{fs::path(output_root) / s.output};
        fs::create_directories(out.dir);
        if (s.model == "lsw") r.checks = run_lsw(s, out);
        else if (s.model == "linear") r.checks = run_linear(s, out);
        else if (s.model == "map_iteration") r.checks = run_map_iteration(s, out);
        else if (s.model == "self_similar") r.checks = run_self_similar(s, out);
        else r.checks = run_analysis(s, out);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<ScenarioResult> run_batch(const Config& cfg, const std::string& output_root, std::size_t jobs) {
    std::vector<ScenarioResult> results(cfg.scenarios.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.scenarios.size(); i = next++)
            results[i] = run_scenario(cfg.scenarios[i], output_root);
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(jobs, cfg.scenarios.size()));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return results;
}

std::string summary_table(const std::vector<ScenarioResult>& results) {
    std::ostringstream os;
    std::size_t width = 8;
    for (const auto& r : results) width = std::max(width, r.name.size());
    os << std::left << std::setw(static_cast<int>(width)) << "scenario" << "  " << std::setw(14) << "model"
       << std::setw(8) << "result" << "seconds\n";
    for (const auto& r : results) {
        os << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::setw(14) << r.model
           << std::setw(8) << (r.ok() ? "pass" : "FAIL") << std::fixed << std::setprecision(2) << r.seconds
           << '\n';
        if (!r.error.empty()) os << "    error: " << r.error << '\n';
        for (const auto& c : r.checks)
            os << "    " << (c.pass ? "pass " : "FAIL ") << std::setw(24) << c.id << format_double(c.value)
               << "  " << c.detail << '\n';
    }
    return os.str();
}

std::string families_text() {
    std::ostringstream os;
    for (const auto& f : lsw::family_catalog()) {
        os << std::left << std::setw(16) << f.id << std::setw(16) << (f.params.empty() ? "-" : f.params)
           << f.summary << '\n';
    }
    return os.str();
}

std::string compare_text(const std::string& a, const std::string& b) {
    const auto d = lsw::io::compare_traces(lsw::io::read_csv_file(a), lsw::io::read_csv_file(b));
    std::ostringstream os;
    os << "rows " << d.compared << " over t in [" << format_double(d.t_lo) << ", " << format_double(d.t_hi)
       << "]\n";
    os << std::left << std::setw(10) << "column" << std::setw(26) << "max_rel" << "mean_rel\n";
    for (const auto& c : d.columns)
        os << std::left << std::setw(10) << c.name << std::setw(26) << format_double(c.max_rel)
           << format_double(c.mean_rel) << '\n';
    return os.str();
}

}  // namespace lswctl
