#include "lsw/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace lsw::io {

namespace {

// NaN and infinities in the spelling std::from_chars accepts back.
std::string special(double v) {
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return special(v);
}

void row(std::ostream& os, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) os << ',';
        os << format_double(v);
        first = false;
    }
    os << '\n';
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cell.erase(0, cell.find_first_not_of(" \t\r"));
        cell.erase(cell.find_last_not_of(" \t\r") + 1);
        out.push_back(cell);
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    if (!std::isfinite(v)) return special(v);
    char buf[32];
    // Plain shortest form writes large integers out in full, past 17 digits.
    auto res = std::fabs(v) >= 1e17 ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific)
                                    : std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& os, const CoarseningTrace& trace) {
    os << "t,tau,L,Lambda,E,beta0,mass,gamma\n";
    for (const auto& s : trace.samples) row(os, {s.t, s.tau, s.L, s.Lambda, s.E, s.beta0, s.mass, s.gamma});
}

void write_profile_csv(std::ostream& os, const SurvivalProfile& profile) {
    os << "x,w\n";
    for (std::size_t i = 0; i < profile.size(); ++i) row(os, {profile.x[i], profile.w[i]});
}

std::string profile_sidecar_json(const SurvivalProfile& profile) {
    nlohmann::json j;
    j["tail_model"] = tail_name(profile.tail.kind);
    j["params"] = {{"rate", profile.tail.rate}, {"p", profile.tail.p}, {"shift", profile.tail.shift}};
    j["mass"] = number(mass(profile));
    return j.dump(2);
}

void write_beta_csv(std::ostream& os, const BetaProfile& beta) {
    os << "x,beta\n";
    for (std::size_t i = 0; i < beta.x.size(); ++i) row(os, {beta.x[i], beta.beta[i]});
}

void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history) {
    os << "n,lambda,mean,sup_beta,inf_beta,ratio_third,ratio_half,ratio_two_thirds\n";
    for (const auto& r : history)
        row(os, {static_cast<double>(r.n), r.lambda, r.mean, r.sup_beta, r.inf_beta, r.ratio_third,
                 r.ratio_half, r.ratio_two_thirds});
}

void write_self_similar_csv(std::ostream& os, const SelfSimilarProfile& p, std::size_t samples) {
    os << "z,Gamma,w_star,g_alpha\n";
    std::vector<double> z(samples);
    for (std::size_t i = 0; i < samples; ++i) z[i] = p.a() * static_cast<double>(i) / static_cast<double>(samples);
    const std::vector<double> g = p.g_alpha(z);
    for (std::size_t i = 0; i < samples; ++i) row(os, {z[i], p.Gamma(z[i]), p.w_star(z[i] / p.gamma()), g[i]});
}

std::string self_similar_json(const SelfSimilarProfile& p) {
    nlohmann::json j;
    j["alpha"] = p.alpha();
    j["a_alpha"] = p.a();
    j["gamma"] = p.gamma();
    j["z4_residual"] = p.z4_residual();
    return j.dump(2);
}

std::string certificate_json(const JensenCertificate& c) {
    nlohmann::json j;
    j["alpha"] = c.alpha;
    j["lhs"] = number(c.lhs);
    j["rhs_reverse"] = number(c.rhs_reverse);
    j["rhs_sharp"] = number(c.rhs_sharp);
    j["C_used"] = number(c.C_used);
    j["eta_used"] = number(c.eta_used);
    j["pass"] = c.pass;
    if (!c.applicable) j["note"] = c.note;
    return j.dump(2);
}

std::string summary_json(const RunSummary& s) {
    nlohmann::json j;
    j["scenario"] = s.scenario;
    j["model"] = s.model;
    j["T_final"] = number(s.T_final);
    j["steps"] = s.steps;
    j["picard_iters_total"] = s.picard_iters_total;
    j["violations"] = s.violations;
    j["stop_reason"] = s.stop_reason;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : s.checks)
        j["checks"].push_back({{"id", c.id}, {"pass", c.pass}, {"value", number(c.value)}, {"detail", c.detail}});
    return j.dump(2);
}

std::size_t Table::column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error("no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

Table read_csv(std::istream& is) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (t.columns.empty()) {
            t.columns = std::move(cells);
            continue;
        }
        if (cells.size() != t.columns.size())
            throw Error("line " + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                        " fields, got " + std::to_string(cells.size()));
        std::vector<double> r(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& c = cells[i];
            auto res = std::from_chars(c.data(), c.data() + c.size(), r[i]);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                throw Error("line " + std::to_string(lineno) + ": bad number '" + c + "'");
        }
        t.rows.push_back(std::move(r));
    }
    if (t.columns.empty()) throw Error("empty CSV");
    return t;
}

Table read_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path);
    try {
        return read_csv(f);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

SurvivalProfile profile_from_table(const Table& table) {
    const std::size_t ix = table.column("x"), iw = table.column("w");
    SurvivalProfile p;
    for (const auto& r : table.rows) {
        p.x.push_back(r[ix]);
        p.w.push_back(r[iw]);
    }
    p.validate();
    return p;
}

TraceDiff compare_traces(const Table& a, const Table& b) {
    if (a.columns != b.columns) throw Error("trace schemas differ");
    const std::size_t it = a.column("t");
    if (a.rows.empty() || b.rows.empty()) throw Error("empty trace");
    TraceDiff d;
    d.t_lo = std::max(a.rows.front()[it], b.rows.front()[it]);
    d.t_hi = std::min(a.rows.back()[it], b.rows.back()[it]);
    if (d.t_lo > d.t_hi) throw Error("time ranges do not overlap");

    for (std::size_t c = 0; c < a.columns.size(); ++c)
        if (c != it) d.columns.push_back({a.columns[c], 0.0, 0.0});

    std::size_t j = 0;
    for (const auto& ra : a.rows) {
        const double t = ra[it];
        if (t < d.t_lo || t > d.t_hi) continue;
        while (j + 1 < b.rows.size() && b.rows[j + 1][it] < t) ++j;
        const auto& r0 = b.rows[j];
        const auto& r1 = j + 1 < b.rows.size() ? b.rows[j + 1] : r0;
        const double span = r1[it] - r0[it];
        const double s = span > 0.0 ? std::clamp((t - r0[it]) / span, 0.0, 1.0) : 0.0;
        ++d.compared;
        std::size_t k = 0;
        for (std::size_t c = 0; c < a.columns.size(); ++c) {
            if (c == it) continue;
            const double vb = r0[c] + s * (r1[c] - r0[c]);
            const double va = ra[c];
            const double scale = std::max({std::fabs(va), std::fabs(vb), 1e-300});
            double rel = va == vb ? 0.0 : std::fabs(va - vb) / scale;
            if (std::isnan(rel)) rel = std::isnan(va) && std::isnan(vb) ? 0.0 : 1.0;
            d.columns[k].max_rel = std::max(d.columns[k].max_rel, rel);
            d.columns[k].mean_rel += rel;
            ++k;
        }
    }
    for (auto& c : d.columns)
        if (d.compared) c.mean_rel /= static_cast<double>(d.compared);
    return d;
}

}  // namespace lsw::io
