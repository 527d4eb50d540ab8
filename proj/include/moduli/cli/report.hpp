#pragma once

#include "moduli/cli/config.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace moduli::cli {

/// One CSV row. `seconds` is wall clock and never enters report.json.
struct TableRow {
    int cutoff = 0;
    long long dim = 0;
    double residual = 0.0;
    double seconds = 0.0;
};

struct Table {
    std::string name;
    std::string dim_label;
    std::string residual_label;
    std::vector<TableRow> rows;
};

/// Pass/fail flag tied to a named invariant.
struct Flag {
    std::string name;
    std::string invariant;
    double value = 0.0;
    std::string op; // "<=", ">=", "==", ">", "<"
    double threshold = 0.0;
    bool pass = false;
};

struct Report {
    std::string experiment;
    std::vector<int> cutoffs;
    std::uint64_t seed = 0;
    double tol_scale = 1.0;
    std::vector<Table> tables;
    std::vector<Flag> flags;
    std::vector<std::pair<std::string, double>> metrics;
    /// Norms of the parts of nonlinear evaluations beyond the truncation.
    std::vector<std::pair<std::string, double>> tail_norms;
    std::vector<std::string> notes;
    double seconds = 0.0;

    Flag& check(const std::string& name, const std::string& invariant, double value, const std::string& op,
                double threshold);
    void metric(const std::string& name, double value) { metrics.emplace_back(name, value); }
    [[nodiscard]] bool passed() const;
    [[nodiscard]] std::vector<std::string> failing() const;
    [[nodiscard]] const Flag* flag(const std::string& name) const;
};

/// Deterministic JSON (no timings).
nlohmann::ordered_json to_json(const Report& r);
nlohmann::ordered_json suite_json(const std::string& command, const std::vector<Report>& reports);
/// Serialized report.json text.
std::string report_text(const std::string& command, const std::vector<Report>& reports);

/// CSV with header cutoff,dim,residual,time.
std::string table_csv(const Table& t);

/// Writes report.json and one <experiment>_<table>.csv per table into dir.
/// Returns the written paths.
std::vector<std::string> write_outputs(const std::string& dir, const std::string& command,
                                       const std::vector<Report>& reports);

} // namespace moduli::cli
