#pragma once

#include "moduli/cli/config.hpp"
#include "moduli/cli/report.hpp"

#include <string>
#include <vector>

namespace moduli::cli {

/// Runs one experiment. Deterministic in (config, seed) apart from timings.
Report run(const ExperimentConfig& config);

/// Runs several experiments on up to `threads` workers; results keep the input order.
std::vector<Report> run_all(const std::vector<ExperimentConfig>& configs, int threads);

/// Default configurations of every experiment (the `verify` suite).
std::vector<ExperimentConfig> verify_suite(std::uint64_t seed, double tol_scale);

/// MODULI_THREADS if set and positive, else the hardware concurrency (at least 1).
int thread_limit();

/// Experiments, what each exercises, their default cutoffs and the default tolerances.
std::string describe();

/// Least-squares slope of log r against log t.
double fit_slope(const std::vector<double>& t, const std::vector<double>& r);

} // namespace moduli::cli
