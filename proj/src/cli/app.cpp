#include "moduli/cli/app.hpp"

#include "moduli/cli/experiments.hpp"

#include <CLI11.hpp>

#include <optional>

namespace moduli::cli {

namespace {

int finish(const std::string& command, const std::vector<Report>& reports, const std::string& dir, std::ostream& out,
           std::ostream& err) {
    for (const auto& p : write_outputs(dir, command, reports)) out << "wrote " << p << "\n";
    int failed = 0;
    for (const auto& r : reports) {
        for (const auto& f : r.flags) {
            if (f.pass) continue;
            err << "FAIL " << r.experiment << "/" << f.name << ": " << f.invariant << " (value " << f.value << ' '
                << "required " << f.op << ' ' << f.threshold << ")\n";
            ++failed;
        }
        for (const auto& n : r.notes) out << r.experiment << ": " << n << "\n";
        out << (r.passed() ? "PASS " : "FAIL ") << r.experiment << " (" << r.flags.size() << " flags)\n";
    }
    return failed == 0 ? kExitOk : kExitFailed;
}

} // namespace

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Batch runner for the deformation experiments", "moduli"};
    app.require_subcommand(1);
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out_dir;
    double tol_scale = 1.0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { seed = s; seed_given = true; }, "random seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--tol-scale", tol_scale, "multiplier for the upper-bound tolerances")
            ->check(CLI::PositiveNumber);
    };
    std::string config_path;
    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment from a JSON config");
    run_cmd->add_option("config", config_path, "config file")->required();
    add_common(run_cmd);
    CLI::App* describe_cmd = app.add_subcommand("describe", "list experiments and default tolerances");
    CLI::App* verify_cmd = app.add_subcommand("verify", "run every experiment at its defaults");
    add_common(verify_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (describe_cmd->parsed()) {
            out << describe();
            return kExitOk;
        }
        if (run_cmd->parsed()) {
            ExperimentConfig c = load_config(config_path);
            if (seed_given) c.seed = seed;
            if (!out_dir.empty()) c.output_dir = out_dir;
            c.tol_scale = tol_scale;
            return finish("run", run_all({c}, 1), c.output_dir, out, err);
        }
        if (verify_cmd->parsed()) {
            const auto reports = run_all(verify_suite(seed, tol_scale), thread_limit());
            return finish("verify", reports, out_dir.empty() ? "moduli-verify" : out_dir, out, err);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailed;
    }
    return kExitUsage;
}

} // namespace moduli::cli
