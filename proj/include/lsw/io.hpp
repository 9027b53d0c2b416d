#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lsw/jensen.hpp"
#include "lsw/lsw_solver.hpp"
#include "lsw/map_iteration.hpp"
#include "lsw/profile.hpp"
#include "lsw/self_similar.hpp"

namespace lsw::io {

// Shortest decimal that reads back to the same double (at most 17 digits).
std::string format_double(double v);

void write_trace_csv(std::ostream& os, const CoarseningTrace& trace);
void write_profile_csv(std::ostream& os, const SurvivalProfile& profile);
std::string profile_sidecar_json(const SurvivalProfile& profile);
void write_beta_csv(std::ostream& os, const BetaProfile& beta);
void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history);
void write_self_similar_csv(std::ostream& os, const SelfSimilarProfile& profile, std::size_t samples);
std::string self_similar_json(const SelfSimilarProfile& profile);
std::string certificate_json(const JensenCertificate& cert);

struct CheckRecord {
    std::string id;
    bool pass = false;
    double value = 0.0;
    std::string detail;
};

struct RunSummary {
    std::string scenario;
    std::string model;
    double T_final = 0.0;
    std::size_t steps = 0;
    std::size_t picard_iters_total = 0;
    std::vector<std::string> violations;
    std::string stop_reason;
    std::vector<CheckRecord> checks;
};
std::string summary_json(const RunSummary& summary);

// Numeric CSV with a single header line.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::size_t column(const std::string& name) const;  // throws Error when absent
};
Table read_csv(std::istream& is);
Table read_csv_file(const std::string& path);

// A compact profile from a table with columns x and w.
SurvivalProfile profile_from_table(const Table& table);

struct ColumnDiff {
    std::string name;
    double max_rel = 0.0;
    double mean_rel = 0.0;
};
struct TraceDiff {
    std::size_t compared = 0;  // rows of `a` inside the common time range
    double t_lo = 0.0, t_hi = 0.0;
    std::vector<ColumnDiff> columns;
};
// Interpolates b linearly in t onto the samples of a. Throws Error when the
// headers differ or the time ranges do not overlap.
TraceDiff compare_traces(const Table& a, const Table& b);

}  // namespace lsw::io
