#include "moduli/cli/experiments.hpp"

#include "moduli/error.hpp"
#include "moduli/numerics/random.hpp"
#include "moduli/sasaki/deform.hpp"
#include "moduli/sasaki/nonlinear.hpp"
#include "moduli/sasaki/structure.hpp"
#include "moduli/slice/toys.hpp"
#include "moduli/su2/geometry.hpp"
#include "moduli/torus/complex_torus.hpp"
#include "moduli/torus/metric.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <sstream>
#include <thread>

namespace moduli::cli {

namespace {

using numerics::Complex;
using numerics::Index;
using numerics::Rng;
using Clock = std::chrono::steady_clock;

constexpr Complex kI(0.0, 1.0);
const std::vector<double> kFlowTimes{1e-2, 5e-3, 2.5e-3};
constexpr int kAdjointSamples = 100;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Independent stream per (seed, purpose).
std::uint64_t stream(std::uint64_t seed, std::uint64_t salt) {
    return seed * 0x9E3779B97F4A7C15ULL + salt * 0xBF58476D1CE4E5B9ULL + 1;
}

std::string at(const std::string& base, int cutoff) { return base + "@" + std::to_string(cutoff); }

double bool_value(bool b) { return b ? 1.0 : 0.0; }

sasaki::ComplexFrameSpan span_of(std::initializer_list<Eigen::Vector3cd> cols) {
    sasaki::ComplexFrameSpan e(3, static_cast<Eigen::Index>(cols.size()));
    Eigen::Index i = 0;
    for (const auto& c : cols) e.col(i++) = c;
    return e;
}

// ---------------------------------------------------------------------------

void slice_toy(const ExperimentConfig& c, Report& r) {
    using namespace moduli::slice;
    const std::vector<ActionSystem> toys{so2_plane(), so3_symmetric(Eigen::Vector3d(1.0, 2.0, 3.0)), translation(3),
                                         trivial_action(3, 2)};
    std::uint64_t salt = 1;
    for (const auto& sys : toys) {
        const auto m = build_slice(sys);
        r.metric(sys.name + "/dim_K", static_cast<double>(m.K_tangent.dim()));
        r.check(sys.name + "/round_trip", "slice_invert inverts slice_chart",
                round_trip_defect(sys, m, 50, 0.1, stream(c.seed, salt++)), "<=", c.tol("round_trip"));
        r.check(sys.name + "/idempotence", "the retraction Xi is idempotent",
                retraction_idempotence(sys, m, 50, 0.1, stream(c.seed, salt++)), "<=", c.tol("idempotence"));
    }
    {
        const auto sys = so3_symmetric(Eigen::Vector3d(1.0, 2.0, 3.0));
        const auto m = build_slice(sys);
        const auto rep = mc2_probe(sys, m, 10000, 0.1, stream(c.seed, 100));
        r.metric("mc2/samples", rep.samples);
        r.metric("mc2/outside_chart", rep.outside_chart);
        r.metric("mc2/max_retraction", rep.max_retraction);
        r.check("mc2/violations", "orbit points near J0 on the slice retract to J0", rep.violations, "==", 0.0);
    }
    Table t{"beltrami", "dim F_perp", "round-trip defect", {}};
    for (int cut : c.cutoffs) {
        const auto t0 = Clock::now();
        const auto sys = torus::torus_beltrami_action(cut);
        const auto m = build_slice(sys);
        const double rt = round_trip_defect(sys, m, 20, 0.01, stream(c.seed, 200 + static_cast<std::uint64_t>(cut)));
        r.check(at("beltrami/round_trip", cut), "slice_invert inverts slice_chart on the Beltrami action", rt, "<=",
                c.tol("round_trip"));
        r.check(at("beltrami/dim_F_perp", cut), "constant Beltrami coefficients span the slice",
                static_cast<double>(m.F_perp.dim()), "==", 2.0);
        t.rows.push_back({cut, static_cast<long long>(m.F_perp.dim()), rt, seconds_since(t0)});
    }
    r.tables.push_back(std::move(t));
}

// ---------------------------------------------------------------------------

void torus_complex(const ExperimentConfig& c, Report& r) {
    using namespace moduli::torus;
    Table t1{"kuranishi_n1", "dim K_tangent", "adjoint defect dbar/dbar*", {}};
    Table t2{"kuranishi_n2", "dim K_tangent", "adjoint defect dbar/dbar*", {}};
    for (int cut : c.cutoffs) {
        for (int n : {1, 2}) {
            const auto t0 = Clock::now();
            const auto m = kuranishi_torus(n, cut);
            const ComplexTorus t = complex_torus(n, cut);
            const double adj = numerics::adjoint_defect(dbar_on_fields(t), dbar_star(t), kAdjointSamples,
                                                        stream(c.seed, static_cast<std::uint64_t>(10 * n + cut)));
            const std::string tag = "n" + std::to_string(n);
            r.check(at("dim_K_" + tag, cut), "only constant Beltrami coefficients survive dbar and dbar*",
                    static_cast<double>(m.K_tangent.dim()), "==", n * n);
            r.check(at("adjoint_" + tag, cut), "dbar* is the adjoint of dbar", adj, "<=", c.tol("adjoint"));
            (n == 1 ? t1 : t2).rows.push_back({cut, static_cast<long long>(m.K_tangent.dim()), adj, seconds_since(t0)});
        }
    }
    r.tables.push_back(std::move(t1));
    r.tables.push_back(std::move(t2));

    // Maurer-Cartan residual of constant structures
    {
        const ComplexTorus t = complex_torus(2, c.cutoffs.front());
        Rng rng(stream(c.seed, 300));
        const Index m0 = t.mode_index.at(Mode(4, 0));
        double worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            Eigen::VectorXcd w = Eigen::VectorXcd::Zero(t.forms->dim());
            w.segment(t.form_index(m0, 0, 0), 4) = numerics::random_vector<Complex>(rng, 4);
            worst = std::max(worst, mc_residual(t, w).total_norm());
        }
        r.check("mc_constant", "constant Beltrami coefficients are integrable", worst, "==", 0.0);
    }

    // pull-back of the flat structure by a flow
    Table tp{"pullback", "dim forms", "MC residual at t = 1e-2", {}};
    for (int cut : c.cutoffs) {
        const auto t0 = Clock::now();
        const ComplexTorus t = complex_torus(2, cut);
        Rng rng(stream(c.seed, 400));
        auto coef = [&] {
            std::normal_distribution<double> g(0.0, 0.2);
            const double re = g(rng);
            const double im = g(rng);
            return Complex(re, im);
        };
        std::vector<TrigPoly> v(2, TrigPoly(4));
        v[0].add_term({1, 0, 0, 0}, coef());
        v[0].add_term({0, 0, 0, -1}, coef());
        v[1].add_term({0, 1, 1, 0}, coef());
        v[1].add_term({-1, 0, 0, 0}, coef());
        const auto q = dbar_on_forms(t);
        std::vector<double> full, linear;
        double tail = 0.0;
        for (double s : kFlowTimes) {
            const Eigen::VectorXcd w = pullback_structure(t, v, s);
            const McResidual mr = mc_residual(t, w);
            if (s == kFlowTimes.front()) tail = mr.tail_norm;
            full.push_back(mr.total_norm());
            linear.push_back(q.apply(w).norm());
        }
        const double slope = fit_slope(kFlowTimes, full);
        r.check(at("pullback_slope", cut), "pulled-back integrable structures solve MC to third order", slope, ">=",
                c.tol("pullback_slope"));
        r.metric(at("pullback_linear_slope", cut), fit_slope(kFlowTimes, linear));
        r.tail_norms.emplace_back(at("pullback_mc_t=1e-2", cut), tail);
        tp.rows.push_back({cut, static_cast<long long>(t.forms->dim()), full.front(), seconds_since(t0)});
    }
    r.tables.push_back(std::move(tp));
}

// ---------------------------------------------------------------------------

void torus_metric(const ExperimentConfig& c, Report& r) {
    using namespace moduli::torus;
    for (int n : {1, 2, 3}) {
        Table t{"slice_n" + std::to_string(n), "dim Ker P*", "adjoint defect", {}};
        Index prev = -1;
        bool increasing = true;
        for (int cut : c.cutoffs) {
            const auto t0 = Clock::now();
            const RealTorus rt = real_torus(n, cut);
            const auto p = metric_slice_operator(rt);
            const Index d = metric_slice_dim(n, cut);
            const double adj = numerics::adjoint_defect(p, numerics::gram_adjoint(p), kAdjointSamples,
                                                        stream(c.seed, static_cast<std::uint64_t>(100 * n + cut)));
            const std::string tag = "n" + std::to_string(n);
            r.check(at("dim_formula_" + tag, cut), "kernel dimension equals the Fourier count",
                    static_cast<double>(d - metric_slice_dim_formula(n, cut)), "==", 0.0);
            r.check(at("killing_" + tag, cut), "Killing fields of the flat torus are the constants",
                    static_cast<double>(numerics::kernel_basis(p).dim()), "==", n);
            r.check(at("adjoint_" + tag, cut), "P* is the adjoint of P", adj, "<=", c.tol("adjoint"));
            if (n > 1 && d <= prev) increasing = false;
            prev = d;
            t.rows.push_back({cut, static_cast<long long>(d), adj, seconds_since(t0)});
        }
        if (n > 1 && c.cutoffs.size() > 1)
            r.check("increasing_n" + std::to_string(n), "the slice grows with the cutoff", bool_value(increasing),
                    "==", 1.0);
        r.tables.push_back(std::move(t));
    }
}

// ---------------------------------------------------------------------------

void s3_verify(const ExperimentConfig& c, Report& r) {
    using namespace moduli::sasaki;
    const InvariantFrame frame = InvariantFrame::su2();
    const SasakiData st = su2::standard_sasaki(frame);
    const EcharReport rep = echar_verify(frame, st.E, st.eta);
    for (size_t i = 0; i < 4; ++i)
        r.check("echar_" + std::to_string(i + 1), "Echar condition " + std::to_string(i + 1) + " (standard)",
                rep.residual[i], "<=", c.tol("echar"));
    r.check("echar_5", "Echar positivity (standard)", rep.residual[4], ">", 0.0);
    r.check("echar_5_nonvacuous", "D^{0,1} is a line", bool_value(!rep.positivity_vacuous), "==", 1.0);

    const OneForm eta = OneForm::coframe(2);
    const Eigen::Vector3cd e3(0, 0, 1);
    struct Mutation {
        std::string name;
        ComplexFrameSpan E;
        int target;
    };
    const std::vector<Mutation> mutations{
        {"mutation_span", span_of({e3}), 1},
        {"mutation_involutive", span_of({Eigen::Vector3cd(1, -2.0 * kI, 0), e3}), 3},
        {"mutation_positivity", span_of({Eigen::Vector3cd(1, kI, 0), e3}), 5},
    };
    for (const auto& m : mutations) {
        const auto f = echar_verify(frame, m.E, eta).failing();
        r.check(m.name, "fails exactly condition " + std::to_string(m.target),
                bool_value(f == std::vector<int>{m.target}), "==", 1.0);
    }

    const ReebField reeb = reeb_solve(frame, st.eta);
    r.check("reeb", "i_xi eta = 1 and i_xi d eta = 0", std::max(reeb.eta_residual, reeb.deta_residual), "<=",
            c.tol("echar"));
    {
        const PointFrame& p = st.base();
        const Eigen::Matrix3d phi2 = p.phi * p.phi + Eigen::Matrix3d::Identity() - p.xi * p.eta.transpose();
        r.check("phi_squared", "Phi^2 = -Id + xi (x) eta", phi2.cwiseAbs().maxCoeff(), "<=", c.tol("echar"));
        r.check("round_metric", "the standard metric is the round one",
                (p.metric - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), "<=", c.tol("echar"));
    }
    {
        // contact form with a basic, non-constant conformal factor
        const OneForm pert = eta.times(su2::WignerPoly::constant(1.0) + su2::WignerPoly::single({2, 0, 0}) * Complex(0.2));
        const ReebField rp = reeb_solve(frame, pert);
        r.metric("reeb_basic_points", static_cast<double>(rp.points.size()));
        r.check("reeb_basic", "Reeb equations at sample points (basic perturbation)",
                std::max(rp.eta_residual, rp.deta_residual), "<=", c.tol("linear_identity"));
    }

    Table t{"orbit_integrability", "dim vector fields", "max |Q_lin o P|", {}};
    for (int cut : c.cutoffs) {
        const auto t0 = Clock::now();
        const DeformationSetup s = make_setup(2 * cut, frame);
        const FrameOperator p = general_P_operator(s);
        const FrameOperator q = integrability_linear(s);
        double worst = 0.0;
        for (int tj = 0; tj <= s.two_j_max(); ++tj) {
            const Eigen::MatrixXd pb = p.block(*s.w, tj);
            const Eigen::MatrixXd qb = q.block(*s.w, tj);
            const double scale = std::max(1.0, pb.norm() * qb.norm());
            worst = std::max(worst, (qb * pb).cwiseAbs().maxCoeff() / scale);
        }
        r.check(at("integrability_of_orbits", cut), "linearized integrability vanishes on P(vector fields)", worst,
                "<=", c.tol("linear_identity"));
        t.rows.push_back({cut, static_cast<long long>(s.vf->dim()), worst, seconds_since(t0)});
    }
    r.tables.push_back(std::move(t));
}

// ---------------------------------------------------------------------------

void s3_contact(const ExperimentConfig& c, Report& r) {
    using namespace moduli::sasaki;
    Table tk{"keta", "dim keta", "adjoint defect contact P/P*", {}};
    Table tp{"keta_prime", "dim keta'", "containment defect in keta", {}};
    Table tx{"xn", "dim holomorphic transverse fields", "dim S (exact i_chi d eta)", {}};
    Index prev = -1;
    bool strictly = true;
    for (int cut : c.cutoffs) {
        const auto t0 = Clock::now();
        const DeformationSetup s = make_setup(2 * cut);
        const bool dense = cut <= 2;
        const KetaResult k = keta_tangent(s, dense);
        const KetaResult kp = keta_prime_tangent(s, dense);
        const ContactProblem cp = contact_problem(s);
        const double adj = numerics::adjoint_defect(cp.P, cp.P_star, kAdjointSamples,
                                                    stream(c.seed, static_cast<std::uint64_t>(cut)));
        r.check(at("adjoint", cut), "contact P* (projected formula) is the adjoint of P", adj, "<=", c.tol("adjoint"));
        if (dense) {
            r.check(at("keta_dense", cut), "keta dimension equals the dense SVD count",
                    static_cast<double>(k.dim - k.dense_dim), "==", 0.0);
            r.check(at("keta_prime_dense", cut), "keta' dimension equals the dense SVD count",
                    static_cast<double>(kp.dim - kp.dense_dim), "==", 0.0);
        }
        const Index defect = containment_defect(*s.form, kp.model.K_tangent.dense(), k.model.K_tangent.dense());
        r.check(at("keta_prime_in_keta", cut), "keta' is contained in keta", static_cast<double>(defect), "==", 0.0);
        if (k.dim <= prev) strictly = false;
        prev = k.dim;
        const double sec = seconds_since(t0);
        tk.rows.push_back({cut, static_cast<long long>(k.dim), adj, sec});
        tp.rows.push_back({cut, static_cast<long long>(kp.dim), static_cast<double>(defect), sec});

        const XnReport xn = xn_report(s);
        tx.rows.push_back({cut, static_cast<long long>(xn.dim_xn), static_cast<double>(xn.dim_s), sec});
        r.metric(at("dim_xn_prime", cut), static_cast<double>(xn.dim_xn_prime));
        if (xn.local_moduli_regime) r.notes.push_back(at("holomorphic transverse fields vanish", cut));

        const BasicFormReport b = basic_11_forms(s);
        r.metric(at("basic_11_forms", cut), static_cast<double>(b.dim_basic_11));
        r.metric(at("basic_11_in_ker_P_star", cut), static_cast<double>(b.dim_in_kernel));
    }
    if (c.cutoffs.size() > 1)
        r.check("keta_strictly_increasing", "keta grows strictly with the cutoff", bool_value(strictly), "==", 1.0);
    r.tables.push_back(std::move(tk));
    r.tables.push_back(std::move(tp));
    r.tables.push_back(std::move(tx));
}

// ---------------------------------------------------------------------------

void s3_general(const ExperimentConfig& c, Report& r) {
    using namespace moduli::sasaki;
    Table tg{"kuranishi_general", "dim Kuranishi tangent", "adjoint defect general P/P*", {}};
    Index prev = -1;
    bool monotone = true;
    for (int cut : c.cutoffs) {
        const auto t0 = Clock::now();
        const DeformationSetup s = make_setup(2 * cut);
        const bool dense = cut <= 1;
        const KetaResult g = kuranishi_general(s, dense);
        const GeneralProblem gp = general_problem(s);
        const double adj = numerics::adjoint_defect(gp.P, gp.P_star, kAdjointSamples,
                                                    stream(c.seed, static_cast<std::uint64_t>(cut)));
        r.check(at("adjoint", cut), "general P* (projected formula) is the adjoint of P", adj, "<=", c.tol("adjoint"));
        if (dense)
            r.check(at("kuranishi_dense", cut), "Kuranishi dimension equals the dense SVD count",
                    static_cast<double>(g.dim - g.dense_dim), "==", 0.0);
        if (g.dim < prev) monotone = false;
        prev = g.dim;
        tg.rows.push_back({cut, static_cast<long long>(g.dim), adj, seconds_since(t0)});
    }
    if (c.cutoffs.size() > 1)
        r.check("kuranishi_monotone", "the truncated tangent space does not shrink", bool_value(monotone), "==", 1.0);
    r.tables.push_back(std::move(tg));

    {
        const DeformationSetup s = make_setup(2 * c.cutoffs.back());
        const SymbolReport sym = symbol_check(s, 1000, stream(c.seed, 500));
        r.check("symbol_min", "the principal symbol of P is injective", sym.min_sigma, ">", c.tol("symbol"));
        r.check("symbol_formula", "assembled symbol equals (v^E chi^{1,0}, (i_chi eta) v)", sym.formula_defect,
                "<=", c.tol("linear_identity"));
        r.metric("symbol_max", sym.max_sigma);
    }

    // flow oracles use fields with j <= 1
    const DeformationSetup s = make_setup(2);
    {
        Rng rng(stream(c.seed, 600));
        double min_slope = std::numeric_limits<double>::infinity();
        double max_linear = -std::numeric_limits<double>::infinity();
        double first_order = 0.0;
        double mc_tail = 0.0;
        double q_tail = 0.0;
        for (int k = 0; k < 3; ++k) {
            const Eigen::VectorXd chi = random_field(s, rng, 2);
            const PullbackSeries ser = pullback_series(s, chi);
            first_order = std::max(first_order, (ser.first.coords(s) - general_P(s, chi)).norm());
            const PullbackReport pr = pullback_oracle(s, chi, kFlowTimes);
            min_slope = std::min(min_slope, pr.min_slope);
            max_linear = std::max(max_linear, pr.min_linear_slope);
            const DeformationPair p = ser.at(kFlowTimes.front());
            mc_tail = std::max(mc_tail, mc_sasaki_residual(s, p).tail_norm);
            q_tail = std::max(q_tail, integrability_Q(s, p).tail_norm);
        }
        r.check("pullback_first_order", "first-order pull-back equals P(chi)", first_order, "<=",
                c.tol("linear_identity"));
        r.check("pullback_slope", "pulled-back structures satisfy MC and Q to third order", min_slope, ">=",
                c.tol("pullback_slope"));
        r.metric("pullback_linear_only_slope", max_linear);
        r.tail_norms.emplace_back("pullback_mc_t=1e-2", mc_tail);
        r.tail_norms.emplace_back("pullback_q_t=1e-2", q_tail);
    }
    {
        Rng rng(stream(c.seed, 700));
        double min_slope = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 10; ++k) {
            const Eigen::VectorXd chi = random_field(s, rng, 2);
            min_slope = std::min(min_slope, orbit_tangency(s, chi, kFlowTimes, 6).min_slope);
        }
        r.check("orbit_tangency_slope", "flow pull-backs are tangent to t P(chi) to second order", min_slope, ">=",
                c.tol("orbit_slope"));
    }
}

// ---------------------------------------------------------------------------

void s3_einstein(const ExperimentConfig& c, Report& r) {
    using namespace moduli::sasaki;
    const double round = su2::einstein_residual(su2::LeftInvariantMetric::round());
    const double squashed = su2::einstein_residual(su2::LeftInvariantMetric{1.0, 1.0, 2.0});
    r.check("round", "Ric = 2g for the round metric", round, "<=", c.tol("einstein"));
    r.check("squashed", "the squashed metric is not Einstein", squashed, ">", c.tol("einstein_squashed"));

    Table t{"se_filter", "kept candidates", "Einstein residual of the standard structure", {}};
    for (int cut : c.cutoffs) {
        const auto t0 = Clock::now();
        const DeformationSetup s = make_setup(2 * cut);
        std::vector<DeformationPair> cands(2);
        cands[1].alpha = OneForm::coframe(2) * 0.5;
        Rng rng(stream(c.seed, static_cast<std::uint64_t>(cut)));
        std::normal_distribution<double> g(0.0, 0.05);
        for (int k = 0; k < 4; ++k) {
            DeformationPair p;
            const double a = g(rng), b = g(rng), d = g(rng), e = g(rng);
            p.omega1 = su2::WignerPoly::constant(Complex(a, b));
            p.omega3 = su2::WignerPoly::constant(Complex(d, e));
            cands.push_back(p);
        }
        std::vector<SeCandidate> details;
        const auto kept = se_filter(s, cands, &details);
        r.check(at("standard_kept", cut), "the standard structure is Sasaki-Einstein", bool_value(details[0].kept),
                "==", 1.0);
        r.check(at("scaled_rejected", cut), "eta/2 scaling is not Einstein with constant 2",
                bool_value(!details[1].kept), "==", 1.0);
        r.metric(at("scaled_residual", cut), details[1].einstein_residual);
        t.rows.push_back({cut, static_cast<long long>(kept.size()), details[0].einstein_residual, seconds_since(t0)});
    }
    r.tables.push_back(std::move(t));
}

// ---------------------------------------------------------------------------

void adjoint_audit(const ExperimentConfig& c, Report& r) {
    using namespace moduli::sasaki;
    Table t{"adjoint", "operator pairs", "max adjoint defect", {}};
    for (int cut : c.cutoffs) {
        const auto t0 = Clock::now();
        std::uint64_t salt = 1000 * static_cast<std::uint64_t>(cut);
        double worst = 0.0;
        int pairs = 0;
        auto audit = [&](const std::string& name, double defect) {
            r.check(at(name, cut), "adjoint pair " + name, defect, "<=", c.tol("adjoint"));
            worst = std::max(worst, defect);
            ++pairs;
        };
        auto defect = [&](const auto& p, const auto& q) {
            return numerics::adjoint_defect(p, q, kAdjointSamples, stream(c.seed, salt++));
        };

        for (int n : {1, 2}) {
            const torus::ComplexTorus tt = torus::complex_torus(n, cut);
            audit("torus_dbar_fields_n" + std::to_string(n), defect(torus::dbar_on_fields(tt), torus::dbar_star(tt)));
            if (n == 2) {
                const auto q = torus::dbar_on_forms(tt);
                audit("torus_dbar_forms_n2", defect(q, numerics::gram_adjoint(q)));
            }
        }
        for (int n : {1, 2, 3}) {
            const auto p = torus::metric_slice_operator(torus::real_torus(n, cut));
            audit("torus_metric_n" + std::to_string(n), defect(p, numerics::gram_adjoint(p)));
        }

        const DeformationSetup s = make_setup(2 * cut);
        for (int a = 0; a < 3; ++a) {
            const auto e = su2::frame_derivative_blocks(*s.w, a);
            auto minus = e;
            for (auto& b : minus.blocks) b.entries = -b.entries;
            audit("su2_frame_e" + std::to_string(a + 1), defect(e, minus));
        }
        audit("su2_d_codifferential",
              defect(exterior_d(s).assemble(*s.fun, *s.form), codifferential(s).assemble(*s.form, *s.fun)));
        struct Named {
            std::string name;
            FrameOperator op;
            const SectionSpace* dom;
            const SectionSpace* cod;
        };
        const std::vector<Named> frame_ops{
            {"su2_dbar_t", dbar_t(s), s.vf.get(), s.omega.get()},
            {"su2_mc_linear", mc_linear(s), s.omega.get(), s.cfun.get()},
            {"su2_q_linear", q_linear(s), s.structure.get(), s.cfun.get()},
            {"su2_integrability_linear", integrability_linear(s), s.structure.get(), s.equations.get()},
        };
        for (const auto& f : frame_ops)
            audit(f.name, defect(f.op.assemble(*f.dom, *f.cod),
                                 f.op.formal_adjoint(f.dom->weights(), f.cod->weights()).assemble(*f.cod, *f.dom)));
        const ContactProblem cp = contact_problem(s);
        audit("su2_contact_P", defect(cp.P, cp.P_star));
        const GeneralProblem gp = general_problem(s);
        audit("su2_general_P", defect(gp.P, gp.P_star));
        t.rows.push_back({cut, pairs, worst, seconds_since(t0)});
    }
    r.tables.push_back(std::move(t));
}

using Runner = std::function<void(const ExperimentConfig&, Report&)>;

Runner runner(const std::string& name) {
    if (name == "slice-toy") return slice_toy;
    if (name == "torus-complex") return torus_complex;
    if (name == "torus-metric") return torus_metric;
    if (name == "s3-verify") return s3_verify;
    if (name == "s3-contact") return s3_contact;
    if (name == "s3-general") return s3_general;
    if (name == "s3-einstein") return s3_einstein;
    if (name == "adjoint-audit") return adjoint_audit;
    throw UsageError("unknown experiment '" + name + "'");
}

} // namespace

double fit_slope(const std::vector<double>& t, const std::vector<double>& r) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(t.size());
    for (size_t i = 0; i < t.size(); ++i) {
        const double x = std::log(t[i]);
        const double y = std::log(r[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Report run(const ExperimentConfig& config) {
    const Runner body = runner(config.experiment);
    if (config.cutoffs.empty()) throw UsageError("cutoffs must not be empty");
    Report r;
    r.experiment = config.experiment;
    r.cutoffs = config.cutoffs;
    r.seed = config.seed;
    r.tol_scale = config.tol_scale;
    const auto t0 = Clock::now();
    try {
        body(config, r);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        r.notes.push_back(std::string("aborted: ") + e.what());
        r.check("completed", "the experiment ran to completion", 0.0, "==", 1.0);
    }
    r.seconds = seconds_since(t0);
    return r;
}

std::vector<Report> run_all(const std::vector<ExperimentConfig>& configs, int threads) {
    std::vector<Report> out(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next++; i < configs.size(); i = next++) {
            try {
                out[i] = run(configs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const size_t n = std::min(configs.size(), static_cast<size_t>(std::max(1, threads)));
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (size_t i = 0; i < n; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::vector<ExperimentConfig> verify_suite(std::uint64_t seed, double tol_scale) {
    std::vector<ExperimentConfig> out;
    for (const auto& name : experiment_names()) {
        ExperimentConfig c = default_config(name, seed);
        c.tol_scale = tol_scale;
        out.push_back(std::move(c));
    }
    return out;
}

int thread_limit() {
    if (const char* env = std::getenv("MODULI_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string describe() {
    static const std::vector<std::pair<std::string, std::string>> what{
        {"slice-toy", "Newton slice on finite-dimensional toy actions (SO(2) on the plane, SO(3) on symmetric "
                      "matrices, translations, trivial action) and on the torus Beltrami action: round trip, "
                      "idempotence of the retraction, and the orbit/slice probe at diag(1,2,3). Cutoff: torus |k|_inf."},
        {"torus-complex", "Complex tori of dimension 1 and 2: Kuranishi tangent dimensions, adjointness of "
                          "dbar/dbar*, Maurer-Cartan vanishing for constant coefficients, and the third-order "
                          "pull-back test. Cutoff: |k|_inf."},
        {"torus-metric", "Flat real tori of dimension 1 to 3: the metric slice Ker P* against the Fourier count, "
                         "Killing fields, and adjointness. Cutoff: |k|_inf."},
        {"s3-verify", "Standard Sasakian structure on S^3: the five Echar conditions, single-condition mutations, "
                      "Reeb field, Phi and the round metric, and linearized integrability on orbit directions. "
                      "Cutoff: j_max."},
        {"s3-contact", "Contact deformations: keta and keta' tangent spaces with dense-SVD cross-checks, "
                       "holomorphic transverse fields, basic (1,1) forms, and the contact P/P* pair. Cutoff: j_max."},
        {"s3-general", "General Sasakian deformations: Kuranishi tangent space, the general P/P* pair, ellipticity "
                       "of P, the pull-back oracle and orbit tangency. Cutoff: j_max."},
        {"s3-einstein", "Sasaki-Einstein filter: Ric = 2g for the round metric, the squashed metric, and the filter "
                        "on left-invariant candidates. Cutoff: j_max."},
        {"adjoint-audit", "Every assembled (P, P*) pair of the torus and SU(2) backends on 100 random pairs. "
                          "Cutoff: |k|_inf and j_max."},
    };
    std::ostringstream out;
    out << "Experiments\n";
    for (const auto& [name, text] : what) {
        out << "  " << name << "\n    " << text << "\n    default cutoffs:";
        for (int c : default_cutoffs(name)) out << ' ' << c;
        out << " (max " << max_cutoff(name) << ")\n";
    }
    out << "\nDefault tolerances (--tol-scale multiplies the starred ones)\n";
    for (const auto& t : tolerance_specs()) {
        std::ostringstream v;
        v << t.value;
        out << "  " << t.name << (t.scaled ? "*" : " ") << " = " << v.str() << "  " << t.meaning << "\n";
    }
    out << "\nEnvironment: MODULI_THREADS caps the number of experiments run in parallel.\n";
    return out.str();
}

} // namespace moduli::cli
