#include "moduli/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace moduli::cli {

namespace {

struct ExperimentSpec {
    std::string name;
    std::vector<int> cutoffs;
    int max_cutoff;
};

const std::vector<ExperimentSpec>& specs() {
    static const std::vector<ExperimentSpec> s = {
        {"slice-toy", {2}, 4},
        {"torus-complex", {2, 4}, 6},
        {"torus-metric", {1, 2, 3, 4}, 6},
        {"s3-verify", {3}, 5},
        {"s3-contact", {1, 2, 3}, 4},
        {"s3-general", {1, 2, 3}, 3},
        {"s3-einstein", {1}, 3},
        {"adjoint-audit", {2}, 4},
    };
    return s;
}

const ExperimentSpec& spec(const std::string& name) {
    for (const auto& s : specs())
        if (s.name == name) return s;
    throw UsageError("unknown experiment '" + name + "'");
}

} // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& s : specs()) n.push_back(s.name);
        return n;
    }();
    return names;
}

bool is_experiment(const std::string& name) {
    const auto& n = experiment_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

std::vector<int> default_cutoffs(const std::string& experiment) { return spec(experiment).cutoffs; }

int max_cutoff(const std::string& experiment) { return spec(experiment).max_cutoff; }

const std::vector<ToleranceSpec>& tolerance_specs() {
    static const std::vector<ToleranceSpec> t = {
        {"adjoint", 1e-10, true, "|<Pu,w> - <u,P*w>| / (||P|| ||u|| ||w||)"},
        {"linear_identity", 1e-10, true, "relative residual of exact linear identities"},
        {"echar", 1e-12, true, "Echar residuals (1)-(4) of the standard structure"},
        {"einstein", 1e-12, true, "|Ric - 2g| of the round metric"},
        {"einstein_squashed", 0.1, false, "lower bound of |Ric - 2g| for the squashed metric"},
        {"round_trip", 1e-8, true, "slice_invert after slice_chart"},
        {"idempotence", 1e-9, true, "Xi after Xi"},
        {"symbol", 1e-6, false, "lower bound of the smallest symbol singular value"},
        {"pullback_slope", 2.7, false, "lower bound of the pull-back residual slope"},
        {"orbit_slope", 1.9, false, "lower bound of the orbit-tangency error slope"},
    };
    return t;
}

double ExperimentConfig::tol(const std::string& name) const {
    for (const auto& t : tolerance_specs()) {
        if (t.name != name) continue;
        const auto it = tolerances.find(name);
        const double v = it == tolerances.end() ? t.value : it->second;
        return t.scaled ? v * tol_scale : v;
    }
    throw UsageError("unknown tolerance '" + name + "'");
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    static const std::set<std::string> keys = {"experiment", "cutoffs", "seed", "tolerances", "output_dir"};
    for (const auto& [k, v] : j.items())
        if (!keys.count(k)) throw UsageError("unknown config key '" + k + "'");

    ExperimentConfig c;
    if (!j.contains("experiment") || !j["experiment"].is_string())
        throw UsageError("config needs a string 'experiment'");
    c.experiment = j["experiment"].get<std::string>();
    if (!is_experiment(c.experiment)) throw UsageError("unknown experiment '" + c.experiment + "'");

    if (j.contains("cutoffs")) {
        const auto& cs = j["cutoffs"];
        if (!cs.is_array()) throw UsageError("'cutoffs' must be a list");
        if (cs.empty()) throw UsageError("'cutoffs' must not be empty");
        for (const auto& v : cs) {
            if (!v.is_number_integer()) throw UsageError("cutoffs must be integers");
            const long long x = v.get<long long>();
            if (x <= 0) throw UsageError("cutoffs must be positive");
            if (x > max_cutoff(c.experiment))
                throw UsageError("cutoff " + std::to_string(x) + " exceeds the maximum " +
                                 std::to_string(max_cutoff(c.experiment)) + " for " + c.experiment);
            if (!c.cutoffs.empty() && x <= c.cutoffs.back())
                throw UsageError("cutoffs must be strictly ascending");
            c.cutoffs.push_back(static_cast<int>(x));
        }
    } else {
        c.cutoffs = default_cutoffs(c.experiment);
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
            throw UsageError("'seed' must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw UsageError("'output_dir' must be a string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object()) throw UsageError("'tolerances' must be an object");
        for (const auto& [k, v] : t.items()) {
            const bool known = std::any_of(tolerance_specs().begin(), tolerance_specs().end(),
                                           [&](const ToleranceSpec& s) { return s.name == k; });
            if (!known) throw UsageError("unknown tolerance '" + k + "'");
            if (!v.is_number() || v.get<double>() < 0.0) throw UsageError("tolerance '" + k + "' must be >= 0");
            c.tolerances[k] = v.get<double>();
        }
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

ExperimentConfig default_config(const std::string& experiment, std::uint64_t seed) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.cutoffs = default_cutoffs(experiment);
    c.seed = seed;
    return c;
}

} // namespace moduli::cli
