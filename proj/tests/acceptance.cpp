// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.

#include "moduli/cli/app.hpp"
#include "moduli/cli/experiments.hpp"
#include "moduli/numerics/random.hpp"
#include "moduli/sasaki/deform.hpp"
#include "moduli/sasaki/nonlinear.hpp"
#include "moduli/sasaki/structure.hpp"
#include "moduli/slice/toys.hpp"
#include "moduli/su2/geometry.hpp"
#include "moduli/torus/complex_torus.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace moduli;
using numerics::Complex;
using numerics::Index;
using numerics::Rng;

namespace {

constexpr Complex kI(0.0, 1.0);
const std::vector<double> kTimes{1e-2, 5e-3, 2.5e-3};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

sasaki::ComplexFrameSpan span_of(std::initializer_list<Eigen::Vector3cd> cols) {
    sasaki::ComplexFrameSpan e(3, static_cast<Eigen::Index>(cols.size()));
    Eigen::Index i = 0;
    for (const auto& c : cols) e.col(i++) = c;
    return e;
}

Outcome adjoint_audit() {
    const cli::Report r = cli::run(cli::default_config("adjoint-audit", 11));
    double worst = 0.0;
    for (const auto& f : r.flags) worst = std::max(worst, f.value);
    return {r.passed() && !r.flags.empty(),
            std::to_string(r.flags.size()) + " operator pairs x 100 samples, max defect " + fmt(worst)};
}

Outcome torus_kuranishi() {
    bool ok = true;
    std::string d;
    for (int c : {2, 4}) {
        const Index d1 = torus::kuranishi_torus(1, c).K_tangent.dim();
        const Index d2 = torus::kuranishi_torus(2, c).K_tangent.dim();
        ok = ok && d1 == 1 && d2 == 4;
        if (!d.empty()) d += "; ";
        d += "cutoff " + std::to_string(c) + ": n=1 " + std::to_string(d1) + ", n=2 " + std::to_string(d2);
    }
    return {ok, d};
}

Outcome mc_constant() {
    const torus::ComplexTorus t = torus::complex_torus(2, 2);
    Rng rng(21);
    const Index m0 = t.mode_index.at(torus::Mode(4, 0));
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(t.forms->dim());
        w.segment(t.form_index(m0, 0, 0), 4) = numerics::random_vector<Complex>(rng, 4);
        worst = std::max(worst, torus::mc_residual(t, w).total_norm());
    }
    return {worst == 0.0, "max residual over 20 constant structures " + fmt(worst)};
}

Outcome pullback() {
    const torus::ComplexTorus t = torus::complex_torus(2, 4);
    std::vector<torus::TrigPoly> v(2, torus::TrigPoly(4));
    v[0].add_term({1, 0, 0, 0}, Complex(0.3, 0.1));
    v[0].add_term({0, 0, 0, -1}, Complex(-0.2, 0.05));
    v[1].add_term({0, 1, 1, 0}, Complex(0.1, -0.25));
    v[1].add_term({-1, 0, 0, 0}, Complex(0.15, 0.0));
    std::vector<double> res;
    for (double s : kTimes) res.push_back(torus::mc_residual(t, torus::pullback_structure(t, v, s)).total_norm());
    const double torus_slope = cli::fit_slope(kTimes, res);

    const sasaki::DeformationSetup s = sasaki::make_setup(2);
    Rng rng(31);
    double su2_slope = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k)
        su2_slope = std::min(su2_slope, sasaki::pullback_oracle(s, sasaki::random_field(s, rng, 2), kTimes).min_slope);
    return {torus_slope >= 2.7 && su2_slope >= 2.7,
            "torus slope " + fmt(torus_slope) + ", SU(2) min slope over 3 fields " + fmt(su2_slope)};
}

Outcome symbol() {
    const sasaki::SymbolReport r = sasaki::symbol_check(sasaki::make_setup(6), 1000, 41);
    return {r.samples == 1000 && r.min_sigma > 1e-6, "sigma_min over 1000 covectors " + fmt(r.min_sigma)};
}

Outcome keta_growth() {
    Index prev = -1;
    bool ok = true;
    std::string d = "dims";
    for (int j : {1, 2, 3}) {
        const sasaki::DeformationSetup s = sasaki::make_setup(2 * j);
        const sasaki::KetaResult k = sasaki::keta_tangent(s, j <= 2);
        ok = ok && k.dim > prev;
        if (j <= 2) {
            ok = ok && k.dim == k.dense_dim;
            d += " " + std::to_string(k.dim) + " (dense " + std::to_string(k.dense_dim) + ")";
        } else {
            d += " " + std::to_string(k.dim);
        }
        prev = k.dim;
    }
    return {ok, d};
}

Outcome echar() {
    const auto frame = su2::InvariantFrame::su2();
    const su2::SasakiData st = su2::standard_sasaki(frame);
    const sasaki::EcharReport rep = sasaki::echar_verify(frame, st.E, st.eta);
    bool ok = rep.passed() && !rep.positivity_vacuous && rep.residual[4] > 0.0;
    for (size_t i = 0; i < 4; ++i) ok = ok && rep.residual[i] <= 1e-12;
    const su2::OneForm eta = su2::OneForm::coframe(2);
    const Eigen::Vector3cd e3(0, 0, 1);
    const std::vector<std::pair<sasaki::ComplexFrameSpan, int>> mutations{
        {span_of({e3}), 1},
        {span_of({Eigen::Vector3cd(1, -2.0 * kI, 0), e3}), 3},
        {span_of({Eigen::Vector3cd(1, kI, 0), e3}), 5},
    };
    std::string d = "standard positivity " + fmt(rep.residual[4]) + "; mutations fail";
    for (const auto& [E, target] : mutations) {
        const auto f = sasaki::echar_verify(frame, E, eta).failing();
        ok = ok && f == std::vector<int>{target};
        d += " {";
        for (size_t i = 0; i < f.size(); ++i) d += (i ? "," : "") + std::to_string(f[i]);
        d += "}";
    }
    return {ok, d};
}

Outcome einstein() {
    const double round = su2::einstein_residual(su2::LeftInvariantMetric::round());
    const double squashed = su2::einstein_residual(su2::LeftInvariantMetric{1.0, 1.0, 2.0});
    return {round <= 1e-12 && squashed > 0.1, "round " + fmt(round) + ", squashed " + fmt(squashed)};
}

Outcome toys() {
    using namespace moduli::slice;
    double rt = 0.0, idem = 0.0;
    for (const auto& sys : {so2_plane(), so3_symmetric(), translation(3), trivial_action(3, 2)}) {
        const auto m = build_slice(sys);
        rt = std::max(rt, round_trip_defect(sys, m, 50, 0.1, 7));
        idem = std::max(idem, retraction_idempotence(sys, m, 50, 0.1, 9));
    }
    const auto sys = so3_symmetric(Eigen::Vector3d(1.0, 2.0, 3.0));
    const auto rep = mc2_probe(sys, build_slice(sys), 10000, 0.1, 2024);
    return {rt <= 1e-8 && idem <= 1e-9 && rep.violations == 0 && rep.samples == 10000,
            "round trip " + fmt(rt) + ", idempotence " + fmt(idem) + ", mc2 violations " +
                std::to_string(rep.violations) + "/" + std::to_string(rep.samples)};
}

Outcome orbit_tangency() {
    const sasaki::DeformationSetup s = sasaki::make_setup(2);
    Rng rng(61);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10; ++k)
        worst = std::min(worst, sasaki::orbit_tangency(s, sasaki::random_field(s, rng, 2), kTimes, 6).min_slope);
    return {worst >= 1.9, "min slope over 10 fields " + fmt(worst)};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "moduli_acceptance_verify";
    fs::remove_all(root);
    std::vector<std::string> texts;
    int rc_all = 0;
    for (const char* sub : {"a", "b"}) {
        const std::string dir = (root / sub).string();
        const char* argv[] = {"moduli", "verify", "--seed", "12345", "--out", dir.c_str()};
        std::ostringstream out, err;
        rc_all |= cli::main_entry(6, argv, out, err);
        std::ifstream in(root / sub / "report.json", std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        texts.push_back(s.str());
    }
    const bool same = !texts[0].empty() && texts[0] == texts[1];
    return {same && rc_all == 0, std::string(same ? "identical" : "different") + " report.json (" +
                                     std::to_string(texts[0].size()) + " bytes), verify exit " +
                                     std::to_string(rc_all)};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"adjoint audit", adjoint_audit},
        {"complex torus Kuranishi dimension", torus_kuranishi},
        {"Maurer-Cartan vanishing for constant structures", mc_constant},
        {"pull-back oracle for brackets", pullback},
        {"ellipticity", symbol},
        {"keta growth with dense cross-check", keta_growth},
        {"Sasaki verification", echar},
        {"Einstein residual", einstein},
        {"slice engine on toys", toys},
        {"orbit tangency", orbit_tangency},
        {"verify determinism", determinism},
    };
    int failed = 0;
    int i = 0;
    for (const auto& [name, fn] : criteria) {
        ++i;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::cout << "criterion " << i << " [" << (o.pass ? "PASS" : "FAIL") << "] " << name << ": " << o.detail
                  << " (" << fmt(sec) << " s)" << std::endl;
    }
    std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " criteria failed")
              << std::endl;
    return failed == 0 ? 0 : 1;
}
