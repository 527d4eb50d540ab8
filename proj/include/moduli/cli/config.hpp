#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace moduli::cli {

/// Malformed configuration or command line (exit code 2).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixed experiment set, in the order `verify` runs them.
const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);

/// Cutoffs used when the config gives none, and the largest accepted cutoff.
std::vector<int> default_cutoffs(const std::string& experiment);
int max_cutoff(const std::string& experiment);

/// Named tolerance with its default and whether --tol-scale applies to it.
struct ToleranceSpec {
    std::string name;
    double value = 0.0;
    bool scaled = true;
    std::string meaning;
};
const std::vector<ToleranceSpec>& tolerance_specs();

struct ExperimentConfig {
    std::string experiment;
    std::vector<int> cutoffs;
    std::uint64_t seed = 1;
    std::map<std::string, double> tolerances; // overrides
    std::string output_dir = "moduli-out";
    double tol_scale = 1.0;

    /// Effective tolerance: override or default, times tol_scale for scaled entries.
    [[nodiscard]] double tol(const std::string& name) const;
};

/// Throws UsageError on unknown keys, unknown experiment, empty, non-positive,
/// non-ascending or too large cutoffs, and unknown tolerance names.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
/// Default configuration of one experiment.
ExperimentConfig default_config(const std::string& experiment, std::uint64_t seed);

} // namespace moduli::cli
