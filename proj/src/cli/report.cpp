#include "moduli/cli/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace moduli::cli {

namespace {

bool compare(double v, const std::string& op, double t) {
    if (std::isnan(v)) return false;
    if (op == "<=") return v <= t;
    if (op == ">=") return v >= t;
    if (op == "==") return v == t;
    if (op == "<") return v < t;
    if (op == ">") return v > t;
    throw std::invalid_argument("unknown comparison " + op);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

} // namespace

Flag& Report::check(const std::string& name, const std::string& invariant, double value, const std::string& op,
                    double threshold) {
    flags.push_back({name, invariant, value, op, threshold, compare(value, op, threshold)});
    return flags.back();
}

bool Report::passed() const {
    for (const auto& f : flags)
        if (!f.pass) return false;
    return true;
}

std::vector<std::string> Report::failing() const {
    std::vector<std::string> out;
    for (const auto& f : flags)
        if (!f.pass) out.push_back(experiment + "/" + f.name);
    return out;
}

const Flag* Report::flag(const std::string& name) const {
    for (const auto& f : flags)
        if (f.name == name) return &f;
    return nullptr;
}

nlohmann::ordered_json to_json(const Report& r) {
    nlohmann::ordered_json j;
    j["experiment"] = r.experiment;
    j["cutoffs"] = r.cutoffs;
    j["seed"] = r.seed;
    j["tol_scale"] = r.tol_scale;
    j["passed"] = r.passed();
    auto& tables = j["tables"] = nlohmann::ordered_json::array();
    for (const auto& t : r.tables) {
        nlohmann::ordered_json tj;
        tj["name"] = t.name;
        tj["dim"] = t.dim_label;
        tj["residual"] = t.residual_label;
        auto& rows = tj["rows"] = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) rows.push_back({{"cutoff", row.cutoff}, {"dim", row.dim}, {"residual", row.residual}});
        tables.push_back(tj);
    }
    auto& flags = j["flags"] = nlohmann::ordered_json::array();
    for (const auto& f : r.flags)
        flags.push_back({{"name", f.name},
                         {"invariant", f.invariant},
                         {"value", f.value},
                         {"op", f.op},
                         {"threshold", f.threshold},
                         {"pass", f.pass}});
    auto& metrics = j["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = v;
    auto& tails = j["tail_norms"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.tail_norms) tails[k] = v;
    j["notes"] = r.notes;
    return j;
}

nlohmann::ordered_json suite_json(const std::string& command, const std::vector<Report>& reports) {
    nlohmann::ordered_json j;
    j["command"] = command;
    bool all = true;
    std::vector<std::string> failing;
    for (const auto& r : reports) {
        all = all && r.passed();
        for (auto& f : r.failing()) failing.push_back(f);
    }
    j["passed"] = all;
    j["failing"] = failing;
    auto& ex = j["experiments"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) ex.push_back(to_json(r));
    return j;
}

std::string report_text(const std::string& command, const std::vector<Report>& reports) {
    return suite_json(command, reports).dump(2) + "\n";
}

std::string table_csv(const Table& t) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "cutoff,dim,residual,time\n";
    for (const auto& r : t.rows) out << r.cutoff << ',' << r.dim << ',' << r.residual << ',' << r.seconds << '\n';
    return out.str();
}

std::vector<std::string> write_outputs(const std::string& dir, const std::string& command,
                                       const std::vector<Report>& reports) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    fs::create_directories(root);
    std::vector<std::string> written;
    const fs::path rp = root / "report.json";
    write_file(rp, report_text(command, reports));
    written.push_back(rp.string());
    for (const auto& r : reports)
        for (const auto& t : r.tables) {
            const fs::path p = root / (r.experiment + "_" + t.name + ".csv");
            write_file(p, table_csv(t));
            written.push_back(p.string());
        }
    return written;
}

} // namespace moduli::cli
