#include "moduli/cli/app.hpp"
#include "moduli/cli/config.hpp"
#include "moduli/cli/experiments.hpp"
#include "moduli/cli/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace moduli::cli;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("moduli_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "moduli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("describe lists the experiments") {
    const std::string d = describe();
    CHECK_FALSE(d.empty());
    CHECK(d.find("s3-general") != std::string::npos);
    CHECK(d.find("torus-metric") != std::string::npos);
    for (const auto& name : experiment_names()) CHECK(d.find(name) != std::string::npos);
    CHECK(d.find("1e-10") != std::string::npos);
    std::string out;
    CHECK(invoke({"describe"}, &out) == kExitOk);
    CHECK(out == d);
}

TEST_CASE("config validation") {
    using nlohmann::json;
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "torus-complex", "cutoffs": []})")), UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "torus-complex", "cutoffs": [4, 2]})")), UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "torus-complex", "cutoffs": [2, 2]})")), UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "torus-complex", "cutoffs": [0]})")), UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "torus-complex", "cutoffs": [1.5]})")), UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "s3-general", "cutoffs": [9]})")), UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "k3-surface"})")), UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"cutoffs": [1]})")), UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "s3-verify", "colour": 1})")), UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "s3-verify", "tolerances": {"nope": 1}})")),
                    UsageError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "s3-verify", "seed": -3})")), UsageError);

    const ExperimentConfig c = parse_config(json::parse(
        R"({"experiment": "torus-metric", "cutoffs": [1, 3], "seed": 9, "tolerances": {"adjoint": 1e-9},
            "output_dir": "x"})"));
    CHECK(c.cutoffs == std::vector<int>{1, 3});
    CHECK(c.seed == 9);
    CHECK(c.output_dir == "x");
    CHECK(c.tol("adjoint") == 1e-9);
    CHECK(c.tol("echar") == 1e-12);
    ExperimentConfig scaled = c;
    scaled.tol_scale = 10.0;
    CHECK(scaled.tol("adjoint") == doctest::Approx(1e-8));
    // lower bounds are not scaled
    CHECK(scaled.tol("pullback_slope") == 2.7);
    CHECK(parse_config(json::parse(R"({"experiment": "s3-contact"})")).cutoffs == default_cutoffs("s3-contact"));
}

TEST_CASE("exit code 2 on malformed configs and usage") {
    const fs::path dir = temp_dir("usage");
    std::string err;
    CHECK(invoke({"run", write_config(dir, R"({"experiment": "torus-complex", "cutoffs": []})").string()}, nullptr,
                 &err) == kExitUsage);
    CHECK(err.find("cutoffs") != std::string::npos);
    CHECK(invoke({"run", write_config(dir, R"({"experiment": "moduli-of-k3"})").string()}) == kExitUsage);
    CHECK(invoke({"run", write_config(dir, "{not json").string()}) == kExitUsage);
    CHECK(invoke({"run", (dir / "missing.json").string()}) == kExitUsage);
    CHECK(invoke({}) == kExitUsage);
    CHECK(invoke({"frobnicate"}) == kExitUsage);
    CHECK(invoke({"verify", "--tol-scale", "-1"}) == kExitUsage);
}

TEST_CASE("torus-complex example: n = 2 dimensions are cutoff independent") {
    const fs::path dir = temp_dir("torus");
    const fs::path cfg = write_config(dir, R"({"experiment": "torus-complex", "cutoffs": [2, 4], "seed": 3})");
    std::string out;
    CHECK(invoke({"run", cfg.string(), "--out", (dir / "a").string()}, &out) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
    CHECK(j["passed"] == true);
    const auto& ex = j["experiments"][0];
    CHECK(ex["experiment"] == "torus-complex");
    bool found = false;
    for (const auto& t : ex["tables"]) {
        if (t["name"] != "kuranishi_n2") continue;
        found = true;
        REQUIRE(t["rows"].size() == 2);
        CHECK(t["rows"][0]["dim"] == 4);
        CHECK(t["rows"][1]["dim"] == 4);
    }
    CHECK(found);
    // CSV: header, one row per cutoff, '.' decimals
    const std::string csv = slurp(dir / "a" / "torus-complex_kuranishi_n2.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "cutoff,dim,residual,time");
    std::getline(lines, line);
    CHECK(line.rfind("2,4,", 0) == 0);
    std::getline(lines, line);
    CHECK(line.rfind("4,4,", 0) == 0);
    CHECK_FALSE(std::getline(lines, line));

    // identical config and seed: byte-identical report
    CHECK(invoke({"run", cfg.string(), "--out", (dir / "b").string()}) == kExitOk);
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    CHECK(slurp(dir / "a" / "report.json").find("time") == std::string::npos);
}

TEST_CASE("s3-einstein example: round metric passes") {
    const Report r = run(default_config("s3-einstein", 1));
    CHECK(r.passed());
    REQUIRE(r.flag("round") != nullptr);
    CHECK(r.flag("round")->value <= 1e-12);
    CHECK(r.flag("squashed")->value > 0.1);
}

TEST_CASE("exit code 1 names the failing flag") {
    const fs::path dir = temp_dir("fail");
    // a zero tolerance cannot be met by a floating-point adjoint defect
    const fs::path cfg = write_config(dir, R"({"experiment": "torus-metric", "cutoffs": [1],
                                              "tolerances": {"adjoint": 0}})");
    std::string err;
    CHECK(invoke({"run", cfg.string(), "--out", (dir / "o").string()}, nullptr, &err) == kExitFailed);
    CHECK(err.find("torus-metric/adjoint_n2@1") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir / "o" / "report.json"));
    CHECK(j["passed"] == false);
    CHECK_FALSE(j["failing"].empty());
}

TEST_CASE("every flag names an invariant") {
    const Report r = run(default_config("s3-verify", 5));
    CHECK_FALSE(r.flags.empty());
    for (const auto& f : r.flags) {
        CHECK_FALSE(f.name.empty());
        CHECK_FALSE(f.invariant.empty());
    }
    CHECK(r.passed());
}

TEST_CASE("run_all keeps the input order and matches serial runs") {
    std::vector<ExperimentConfig> cs{default_config("s3-einstein", 2), default_config("s3-verify", 2),
                                     default_config("torus-metric", 2)};
    const auto par = run_all(cs, 3);
    REQUIRE(par.size() == 3);
    for (size_t i = 0; i < cs.size(); ++i) {
        CHECK(par[i].experiment == cs[i].experiment);
        CHECK(report_text("run", {par[i]}) == report_text("run", {run(cs[i])}));
    }
}

TEST_CASE("MODULI_THREADS caps parallelism") {
    setenv("MODULI_THREADS", "3", 1);
    CHECK(thread_limit() == 3);
    setenv("MODULI_THREADS", "zero", 1);
    CHECK(thread_limit() >= 1);
    unsetenv("MODULI_THREADS");
    CHECK(thread_limit() >= 1);
}

TEST_CASE("fit_slope recovers a power law") {
    const std::vector<double> t{1e-2, 5e-3, 2.5e-3};
    std::vector<double> r;
    for (double x : t) r.push_back(7.0 * x * x * x);
    CHECK(fit_slope(t, r) == doctest::Approx(3.0).epsilon(1e-12));
}
