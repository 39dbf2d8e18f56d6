// Acceptance suite: one test case per criterion, each emitting a single
// [ACCEPTANCE] pass/fail line in addition to the usual doctest assertions.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <tfr/model.hpp>
#include <tfr/crn.hpp>
#include <tfr/manifold.hpp>
#include <tfr/reduce.hpp>
#include <tfr/pipeline.hpp>
#include <tfr/sim.hpp>

#include "test_util.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace tfr;
using tfr_test::load_fixture;

namespace {

struct Criterion {
    std::string name;
    bool ok = true;
    ~Criterion() {
        std::printf("[ACCEPTANCE] %s: %s\n", name.c_str(), ok ? "PASS" : "FAIL");
        std::fflush(stdout);
    }
};

#define ACHECK(crit, expr)          \
    do {                            \
        bool achk_b = (expr);       \
        (crit).ok &= achk_b;        \
        CHECK(achk_b);              \
    } while (0)

std::string rstr(const Rational& q) { return q.get_str(); }

// RatFun shorthands over a fixed variable list.
struct VCtx {
    std::vector<std::string> vn;
    RatFun c(const Rational& q) const { return RatFun::constant(vn, q); }
    RatFun v(std::size_t i) const { return RatFun::variable(vn, i); }
};

// ---------------------------------------------------------------------------
// Model text builders with substituted rate constants.

std::string example1_text(const Rational& k1, const Rational& km1,
                          const Rational& k2, const Rational& km2) {
    return "@species X1 X2 X3\n@fast\nX1 + X2 <-> X3 : " + rstr(k1) + ", " +
           rstr(km1) + "\n@slow\nX1 + X3 <-> 2 X2 : " + rstr(k2) + ", " +
           rstr(km2) + "\n";
}

std::string example2_text(const Rational& k1, const Rational& km1,
                          const Rational& k2) {
    return "@species X1 X2 X3\n@fast\nX1 + X2 <-> X3 : " + rstr(k1) + ", " +
           rstr(km1) + "\n@slow\nX3 -> X1 : " + rstr(k2) + "\n";
}

std::string example3_text(const Rational& k1, const Rational& km1,
                          const Rational& k2, const Rational& km2) {
    Rational K = k1 / km1;
    return "@species X1 X2 X3\n@fast\n2 X1 + 2 X2 <-> 3 X3 : " + rstr(k1) +
           ", " + rstr(km1) + "\n@slow\nX1 + X3 <-> 2 X2 : " + rstr(k2) + ", " +
           rstr(km2) + "\n@phi\nv1^3\nv2^3\n(" + rstr(K) +
           ") * v1^2 * v2^2\n@L\n1, -1, 0\n3, 0, 2\n";
}

std::string two_component_text(const std::vector<Rational>& k) {
    // k[0..8] correspond to the nine rate labels in reaction order.
    return "@species X1 X2 X3 X4 X5 X6\n@fast\nX1 <-> X2 : " + rstr(k[0]) +
           ", " + rstr(k[1]) + "\nX2 + X3 <-> X5 : " + rstr(k[2]) + ", " +
           rstr(k[3]) + "\nX5 <-> X1 + X4 : " + rstr(k[4]) + ", " + rstr(k[5]) +
           "\n@fastnodes X6\n@slow\nX4 -> X3 : " + rstr(k[6]) +
           "\nX1 + X3 <-> X6 : " + rstr(k[7]) + ", " + rstr(k[8]) + "\n";
}

std::string oscillator_text(const Rational& a, const Rational& b,
                            const Rational& c) {
    return "@generic\n@vars x1 x2\n@P\nx1\n(" + rstr(c) + ") * x2\n@mu\n(" +
           rstr(a) + ") * x1 + (" + rstr(b) + ") * x2\n@h1\nx1^3\n-1 * x2^4\n"
           "@phi\n(" + rstr(b) + ") * v1\n(" + rstr(-a) + ") * v1\n@L\n" +
           rstr(a * c) + ", " + rstr(b) + "\n";
}

// Greedy multiset matching of two complex eigenvalue lists.
double eig_match_distance(std::vector<std::complex<double>> a,
                          std::vector<std::complex<double>> b) {
    if (a.size() != b.size()) return 1e300;
    double worst = 0.0;
    for (const auto& ea : a) {
        double best = 1e300;
        std::size_t bi = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            double d = std::abs(ea - b[j]);
            if (d < best) { best = d; bi = j; }
        }
        worst = std::max(worst, best);
        b.erase(b.begin() + bi);
    }
    return worst;
}

std::vector<std::complex<double>> eigenvalues_of(const QMatrix& M) {
    Eigen::MatrixXd A(M.rows(), M.cols());
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j) A(i, j) = to_double(M(i, j));
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    std::vector<std::complex<double>> out;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        out.push_back(es.eigenvalues()[i]);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Criterion 1: exact reproduction of the published reduced systems at >= 3
// rational rate assignments per model.

TEST_CASE("criterion 1: formula reproduction") {
    Criterion crit{"criterion 1 (formula reproduction, exact)"};

    const std::vector<std::vector<Rational>> k4sets = {
        {Rational(1), Rational(1), Rational(1), Rational(1)},
        {Rational(2), Rational(3), Rational(5), Rational(7)},
        {Rational(1, 2), Rational(3, 2), Rational(2, 5), Rational(7, 3)},
    };

    // Example 1: reversible association with slow disproportionation.
    for (const auto& ks : k4sets) {
        const Rational &k1 = ks[0], &km1 = ks[1], &k2 = ks[2], &km2 = ks[3];
        Model m = parse_model(example1_text(k1, km1, k2, km2));
        ReductionOptions opts;
        opts.param = "noninteracting";
        opts.ni_set = std::vector<int>{2};
        ReductionResult res = run_reduction(m, opts);
        REQUIRE(res.rsys.rhs.size() == 2);

        VCtx q{res.phi.vnames};
        RatFun K = q.c(k1 / km1);
        RatFun f = (q.c(k2) * K * q.v(0) * q.v(0) * q.v(1) -
                    q.c(km2) * q.v(1) * q.v(1)) /
                   (q.c(1) + K * (q.v(0) + q.v(1)));
        ACHECK(crit, res.rsys.rhs[0] == f * (q.c(-2) - q.c(3) * K * q.v(0)));
        ACHECK(crit, res.rsys.rhs[1] == f * (q.c(1) + q.c(3) * K * q.v(1)));
    }

    // Example 2: Michaelis-Menten with slow complex degradation.
    for (const auto& ks : k4sets) {
        const Rational &k1 = ks[0], &km1 = ks[1], &k2 = ks[2];
        Model m = parse_model(example2_text(k1, km1, k2));
        ReductionOptions opts;
        opts.param = "noninteracting";
        opts.ni_set = std::vector<int>{2};
        ReductionResult res = run_reduction(m, opts);
        REQUIRE(res.rsys.rhs.size() == 2);

        VCtx q{res.phi.vnames};
        RatFun K = q.c(k1 / km1);
        RatFun f = q.c(k2) * K * q.v(0) * q.v(1) /
                   (q.c(1) + K * (q.v(0) + q.v(1)));
        ACHECK(crit, res.rsys.rhs[0] == f * K * q.v(0));
        ACHECK(crit, res.rsys.rhs[1] == f * (q.c(-1) - K * q.v(1)));
    }

    // Example 3: higher-order fast association, user-supplied cubic Phi and L.
    for (const auto& ks : k4sets) {
        const Rational &k1 = ks[0], &km1 = ks[1], &k2 = ks[2], &km2 = ks[3];
        Model m = parse_model(example3_text(k1, km1, k2, km2));
        ReductionOptions opts;
        opts.param = "user";
        ReductionResult res = run_reduction(m, opts);
        REQUIRE(res.rsys.rhs.size() == 2);

        VCtx q{res.phi.vnames};
        RatFun K = q.c(k1 / km1);
        RatFun v1 = q.v(0), v2 = q.v(1);
        RatFun t = q.c(-1) * q.c(k2) * K * v1.pow(5) * v2.pow(2) +
                   q.c(km2) * v2.pow(6);
        RatFun det = q.c(3) * v1 * v2 *
                     (q.c(4) * K * (v1.pow(3) + v2.pow(3)) + q.c(9) * v1 * v2);
        ACHECK(crit, res.rsys.rhs[0] ==
                         (q.c(12) * K * v1 * v1 * v2 + q.c(15) * v2 * v2) * t / det);
        ACHECK(crit, res.rsys.rhs[1] ==
                         (q.c(-12) * v1 * v1 - q.c(12) * K * v1 * v2 * v2) * t / det);
    }

    // Two-component signaling system, both published parameterizations.
    const std::vector<std::vector<Rational>> k9sets = {
        std::vector<Rational>(9, Rational(1)),
        {Rational(2), Rational(1), Rational(3), Rational(1), Rational(2),
         Rational(1), Rational(1), Rational(5), Rational(1)},
        {Rational(1, 2), Rational(2), Rational(3), Rational(1, 3), Rational(5),
         Rational(1, 5), Rational(2), Rational(7), Rational(1, 7)},
    };
    for (const auto& k : k9sets) {
        const Rational &k1 = k[0], &k2 = k[1], &k3 = k[2], &k4 = k[3],
                       &k5 = k[4], &k6 = k[5], &k8 = k[7], &k9 = k[8];
        Model m = parse_model(two_component_text(k));

        // Parameterization A: x* = (1, k1/k2, k2k4k6/(k1k3k5), 1, k6/k5, 1).
        {
            ReductionOptions opts;
            opts.param = "complexbalanced";
            opts.xstar_hint = std::vector<Rational>{
                Rational(1), k1 / k2, k2 * k4 * k6 / (k1 * k3 * k5), Rational(1),
                k6 / k5, Rational(1)};
            ReductionResult res = run_reduction(m, opts);
            REQUIRE(res.rsys.rhs.size() == 3);

            VCtx q{res.phi.vnames};
            RatFun w = q.c(k2 * k4 * k6 * k8) * q.v(0) * q.v(1) -
                       q.c(k1 * k3 * k5 * k9) * q.v(2);
            RatFun xi = q.c(k1 * (k1 * k3 * k5 + k2 * k3 * k5) * k6) * q.v(0) +
                        q.c(k2 * (k1 * k3 * k5 + k2 * k4 * k6) * k6) * q.v(1) +
                        q.c(k5 * (k1 + k2) * (k1 * k3 * k5 + k2 * k4 * k6));
            ACHECK(crit, res.rsys.rhs[0] ==
                             q.c(-k2 * (k1 * k3 * k5 + k2 * k4 * k6) / (k1 * k3)) *
                                 w / xi);
            ACHECK(crit, res.rsys.rhs[1] == q.c(-k5 * (k1 + k2)) * w / xi);
            ACHECK(crit, res.rsys.rhs[2] == q.c(Rational(1) / (k1 * k3 * k5)) * w);
        }

        // Parameterization B: x* = (1, k1/k2, 1, k1k3k5/(k2k4k6), k1k3/(k2k4), 1);
        // identical to rational elimination of the non-interacting set
        // {X2, X4, X5}.
        {
            ReductionOptions opts;
            opts.param = "complexbalanced";
            opts.xstar_hint = std::vector<Rational>{
                Rational(1), k1 / k2, Rational(1), k1 * k3 * k5 / (k2 * k4 * k6),
                k1 * k3 / (k2 * k4), Rational(1)};
            ReductionResult res = run_reduction(m, opts);
            REQUIRE(res.rsys.rhs.size() == 3);

            VCtx q{res.phi.vnames};
            RatFun u = q.c(k8) * q.v(0) * q.v(1) - q.c(k9) * q.v(2);
            RatFun qq = q.c(k1 * k3 * (k1 * k3 * k5 + k2 * k4 * k6)) * q.v(1) +
                        q.c(k1 * k3 * k4 * k6 * (k1 + k2)) * q.v(0) +
                        q.c(k4 * (k1 + k2) * (k1 * k3 * k5 + k2 * k4 * k6));
            RatFun e0 = q.c(-k2 * k4 * (k1 * k3 * k5 + k2 * k4 * k6)) * u / qq;
            RatFun e1 = q.c(-k2 * k4 * k4 * k6 * (k1 + k2)) * u / qq;
            ACHECK(crit, res.rsys.rhs[0] == e0);
            ACHECK(crit, res.rsys.rhs[1] == e1);
            ACHECK(crit, res.rsys.rhs[2] == u);

            ReductionOptions opts2;
            opts2.param = "noninteracting";
            opts2.ni_set = std::vector<int>{1, 3, 4};
            ReductionResult res2 = run_reduction(m, opts2);
            REQUIRE(res2.rsys.rhs.size() == 3);
            for (std::size_t i = 0; i < 3; ++i)
                ACHECK(crit, res2.rsys.rhs[i] == res.rsys.rhs[i]);
        }
    }

    // Generic coupled oscillator: v' = (-1/(ab(1-c))) (ac  b) h1(Phi(v)).
    const std::vector<std::vector<Rational>> abc = {
        {Rational(-1), Rational(1), Rational(-1)},
        {Rational(-2), Rational(3), Rational(-1, 2)},
        {Rational(-1, 3), Rational(2), Rational(-5)},
    };
    for (const auto& p : abc) {
        const Rational &a = p[0], &b = p[1], &c = p[2];
        Model m = parse_model(oscillator_text(a, b, c));
        ReductionResult res = run_reduction(m);
        REQUIRE(res.rsys.rhs.size() == 1);

        VCtx q{res.phi.vnames};
        RatFun v = q.v(0);
        RatFun expected = q.c(-c * b * b / (Rational(1) - c)) * v.pow(3) +
                          q.c(a * a * a / (Rational(1) - c)) * v.pow(4);
        ACHECK(crit, res.rsys.rhs[0] == expected);
    }
}

// ---------------------------------------------------------------------------
// Criterion 2: closed-form complex-balanced reduction vs. the via-L path.

TEST_CASE("criterion 2: closed-form cross-oracle") {
    Criterion crit{"criterion 2 (closed-form vs via-L cross-oracle)"};

    // Exact comparison on example 1 with x* = (1,1,1).
    {
        Model m = load_fixture("example-1.model");
        StructuralInfo info = analyze_structure(m);
        ComplexBalancedState st = complex_balanced_state(
            m, info.split, std::vector<Rational>(3, Rational(1)));
        REQUIRE(st.exact);
        Parameterization phi = monomial_parameterization(st, info.Lf);
        ReducedSystem closed = complex_balanced_reduced(phi, info.Lf, info.split);
        RFMatrix R = compute_R_via_L(phi, info.Lf);
        ReducedSystem via = reduced_system(phi, R, info.h1, ReductionPath::via_L);
        REQUIRE(closed.rhs.size() == via.rhs.size());
        for (std::size_t i = 0; i < via.rhs.size(); ++i)
            ACHECK(crit, closed.rhs[i] == via.rhs[i]);
        for (std::size_t i = 0; i < R.rows(); ++i)
            for (std::size_t j = 0; j < R.cols(); ++j)
                ACHECK(crit, closed.R(i, j) == R(i, j));
    }

    // Numeric comparison on the two-component system with perturbed rates,
    // where the steady state is found by Newton iteration only.
    {
        std::vector<Rational> k(9, Rational(1));
        k[0] = Rational(3, 2);
        Model m = parse_model(two_component_text(k));
        StructuralInfo info = analyze_structure(m);
        ComplexBalancedState st = complex_balanced_state(m, info.split);
        REQUIRE(!st.exact);
        Parameterization phi = monomial_parameterization(st, info.Lf);

        std::size_t s = info.Lf.rows(), n = info.Lf.cols();
        Eigen::MatrixXd Lf(s, n);
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < n; ++j) Lf(i, j) = to_double(info.Lf(i, j));

        std::mt19937_64 rng(2026);
        std::uniform_real_distribution<double> dist(0.2, 3.0);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            std::vector<double> v{dist(rng), dist(rng), dist(rng)};
            Eigen::VectorXd closed =
                complex_balanced_reduced_num(phi, info.Lf, info.split, v);
            auto x = phi.eval_num(v);
            Eigen::VectorXd h1x(n);
            for (std::size_t i = 0; i < n; ++i) h1x[i] = info.h1[i].eval_d(x);
            Eigen::MatrixXd J = dphi_num(phi, v);
            Eigen::VectorXd via = (Lf * J).fullPivLu().solve(Lf * h1x);
            double rel = (closed - via).norm() / (1.0 + via.norm());
            worst = std::max(worst, rel);
        }
        ACHECK(crit, worst < 1e-10);
    }
}

// ---------------------------------------------------------------------------
// Criterion 3: structural numbers.

TEST_CASE("criterion 3: structural numbers") {
    Criterion crit{"criterion 3 (structural numbers)"};

    StructuralInfo tc = analyze_structure(load_fixture("two-component.model"));
    ACHECK(crit, tc.deficiency_fast == 0);
    ACHECK(crit, tc.r == 3);
    ACHECK(crit, tc.s == 3);

    StructuralInfo dp =
        analyze_structure(load_fixture("dual-phosphorylation.model"));
    ACHECK(crit, dp.deficiency_fast == 1);
}

// ---------------------------------------------------------------------------
// Criterion 4: triviality of the reduced system when rank N == rank N_f.

TEST_CASE("criterion 4: trivial reduction") {
    Criterion crit{"criterion 4 (trivial reduction)"};

    Model m = load_fixture("two-component-trivial.model");
    ReductionResult res = run_reduction(m);
    ACHECK(crit, res.info.trivial);
    ACHECK(crit, res.rsys.trivial);
    REQUIRE(res.rsys.rhs.size() == 3);
    for (const auto& f : res.rsys.rhs) ACHECK(crit, f.is_zero());
}

// ---------------------------------------------------------------------------
// Criterion 5: invariant suite, exact, 1000 random sample points.

TEST_CASE("criterion 5: invariant suite") {
    Criterion crit{"criterion 5 (invariant suite, 1000 random cases)"};

    struct Case {
        std::string fixture;
        ReductionOptions opts;
    };
    std::vector<Case> cases;
    {
        Case c1{"example-1.model", {}};
        c1.opts.param = "noninteracting";
        c1.opts.ni_set = std::vector<int>{2};
        cases.push_back(c1);
        Case c2{"example-2.model", {}};
        c2.opts.param = "noninteracting";
        c2.opts.ni_set = std::vector<int>{2};
        cases.push_back(c2);
        Case c3{"example-3.model", {}};
        c3.opts.param = "user";
        cases.push_back(c3);
        Case c4{"two-component.model", {}};
        c4.opts.param = "complexbalanced";
        cases.push_back(c4);
        Case c5{"dual-phosphorylation.model", {}};
        c5.opts.param = "noninteracting";
        cases.push_back(c5);
    }

    std::mt19937_64 rng(7);
    const int samples_per_case = 200;  // 5 fixtures x 200 = 1000 cases

    for (const auto& cs : cases) {
        INFO(cs.fixture);
        Model m = load_fixture(cs.fixture);
        ReductionResult res = run_reduction(m, cs.opts);
        std::size_t s = res.phi.dim_v(), n = res.phi.dim_x();

        // Symbolic identities, checked once per fixture.
        RFMatrix J = dphi(res.phi);
        RFMatrix RJ = res.rsys.R * J;
        bool r_dphi_identity = true;
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < s; ++j)
                r_dphi_identity = r_dphi_identity &&
                                  RJ(i, j) == RatFun::constant(res.phi.vnames,
                                                               Rational(i == j));
        ACHECK(crit, r_dphi_identity);

        // R(v) . P(Phi(v)) == 0.
        bool rp_zero = true;
        std::size_t r = res.dec.mu.size();
        for (std::size_t j = 0; j < r; ++j) {
            std::vector<RatFun> pj;
            for (std::size_t i = 0; i < n; ++i)
                pj.push_back(poly_subst(res.dec.P[i][j], res.phi.phi));
            for (std::size_t i = 0; i < s; ++i) {
                RatFun acc = RatFun::constant(res.phi.vnames, Rational(0));
                for (std::size_t l = 0; l < n; ++l)
                    acc += res.rsys.R(i, l) * pj[l];
                rp_zero = rp_zero && acc.is_zero();
            }
        }
        ACHECK(crit, rp_zero);

        // (DPhi R)^2 == DPhi R.
        RFMatrix JR = J * res.rsys.R;
        RFMatrix JR2 = JR * JR;
        bool idem = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                idem = idem && JR2(i, j) == JR(i, j);
        ACHECK(crit, idem);

        // h0 o Phi == 0 and rank DPhi == s (parameterization report).
        ACHECK(crit, res.phi_report.h0_vanishes);
        ACHECK(crit, res.phi_report.rank_ok);

        // Inherited first integrals have identically zero Lie derivative.
        bool integrals_ok = true;
        for (const auto& psi : res.first_integrals) {
            RatFun dot = RatFun::constant(res.phi.vnames, Rational(0));
            for (std::size_t l = 0; l < s; ++l)
                dot += psi.derivative(l) * res.rsys.rhs[l];
            integrals_ok = integrals_ok && dot.is_zero();
        }
        ACHECK(crit, integrals_ok);

        // Pointwise identities at random positive rational v.
        bool q_idem = true, qp_zero = true, q_rank = true, lemma_ok = true;
        for (int t = 0; t < samples_per_case; ++t) {
            std::vector<Rational> v = random_positive_point(rng, s);
            std::vector<Rational> x;
            for (const auto& f : res.phi.phi) x.push_back(f.eval(v));

            QMatrix Q = projection_Q(res.dec, x);
            q_idem = q_idem && (Q * Q - Q).is_zero();
            QMatrix Px = eval_poly_matrix(res.dec.P, x);
            qp_zero = qp_zero && (Q * Px).is_zero();
            q_rank = q_rank && Q.rank() == s;

            QMatrix Jv(n, s), Rv(s, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < s; ++j) Jv(i, j) = J(i, j).eval(v);
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    Rv(i, j) = res.rsys.R(i, j).eval(v);
            lemma_ok = lemma_ok && lemma_BA_check(Jv, Rv);
        }
        ACHECK(crit, q_idem);
        ACHECK(crit, qp_zero);
        ACHECK(crit, q_rank);
        ACHECK(crit, lemma_ok);
    }
}

// ---------------------------------------------------------------------------
// Criterion 6: stability.

TEST_CASE("criterion 6: stability") {
    Criterion crit{"criterion 6 (stability)"};

    // Example 1: symbolic A(Phi(v)) == -(k1 (v1 + v2) + km1), several k.
    const std::vector<std::vector<Rational>> k4sets = {
        {Rational(1), Rational(1), Rational(1), Rational(1)},
        {Rational(2), Rational(3), Rational(5), Rational(7)},
        {Rational(1, 2), Rational(3, 2), Rational(2, 5), Rational(7, 3)},
    };
    for (const auto& ks : k4sets) {
        Model m = parse_model(example1_text(ks[0], ks[1], ks[2], ks[3]));
        ReductionOptions opts;
        opts.param = "noninteracting";
        opts.ni_set = std::vector<int>{2};
        ReductionResult res = run_reduction(m, opts);
        REQUIRE(res.stability.symbolic);
        REQUIRE(res.stability.A.rows() == 1);
        VCtx q{res.phi.vnames};
        RatFun expected = q.c(-ks[0]) * (q.v(0) + q.v(1)) + q.c(-ks[1]);
        ACHECK(crit, res.stability.A(0, 0) == expected);
        ACHECK(crit, res.stability.method == "routh_hurwitz");
        ACHECK(crit, res.stability.deficiency_zero_shortcut);
        ACHECK(crit, res.stability.all_stable);
    }

    // Dual phosphorylation: degree-3 Hurwitz tests at all 20 samples.
    {
        Model m = load_fixture("dual-phosphorylation.model");
        ReductionOptions opts;
        opts.param = "noninteracting";
        opts.samples = 20;
        ReductionResult res = run_reduction(m, opts);
        ACHECK(crit, res.stability.method == "routh_hurwitz");
        ACHECK(crit, !res.stability.deficiency_zero_shortcut);
        ACHECK(crit, res.stability.samples.size() == 20);
        bool all_ok = res.stability.all_stable;
        for (const auto& smp : res.stability.samples) {
            all_ok = all_ok && smp.verdict == StabilityVerdict::stable;
            all_ok = all_ok && smp.hurwitz.size() == 3;
            for (const auto& h : smp.hurwitz) all_ok = all_ok && h > 0;
        }
        ACHECK(crit, all_ok);
    }

    // Deficiency-zero shortcut agrees with the exact tests wherever both run
    // (stability_analysis throws on contradiction; reaching here with the
    // shortcut flag set and all samples stable is the agreement statement).
    for (const char* fx : {"example-1.model", "example-2.model",
                           "two-component.model"}) {
        Model m = load_fixture(fx);
        ReductionResult res = run_reduction(m);
        ACHECK(crit, res.stability.deficiency_zero_shortcut);
        ACHECK(crit, res.stability.all_stable);
        ACHECK(crit, res.stability.method == "routh_hurwitz");
    }
}

// ---------------------------------------------------------------------------
// Criterion 7: Tikhonov convergence ladder on example 1.

TEST_CASE("criterion 7: Tikhonov convergence") {
    Criterion crit{"criterion 7 (Tikhonov convergence ladder)"};

    Model m = load_fixture("example-1.model");
    ReductionResult res = run_reduction(m);
    std::vector<double> ladder{0.04, 0.02, 0.01, 0.005};
    ConvergenceResult cr =
        convergence_study(m, res.rsys, {2.0, 1.0}, ladder, 0.1, 5.0, 1e-10);
    REQUIRE(cr.errors.size() == 4);
    REQUIRE(cr.ratios.size() == 3);
    for (std::size_t i = 0; i + 1 < cr.errors.size(); ++i)
        ACHECK(crit, cr.errors[i + 1] < cr.errors[i]);
    for (double r : cr.ratios) {
        ACHECK(crit, r >= 0.3);
        ACHECK(crit, r <= 0.75);
    }
}

// ---------------------------------------------------------------------------
// Criterion 8: eigenvalues of Dh0 on Z equal those of A plus s zeros.

TEST_CASE("criterion 8: eigenvalue consistency") {
    Criterion crit{"criterion 8 (eigenvalue consistency on Z)"};

    struct Case {
        std::string fixture;
        ReductionOptions opts;
    };
    std::vector<Case> cases;
    {
        Case c1{"example-1.model", {}};
        cases.push_back(c1);
        Case c2{"example-2.model", {}};
        cases.push_back(c2);
        Case c3{"example-3.model", {}};
        c3.opts.param = "user";
        cases.push_back(c3);
        Case c4{"two-component.model", {}};
        cases.push_back(c4);
        Case c5{"dual-phosphorylation.model", {}};
        c5.opts.param = "noninteracting";
        cases.push_back(c5);
        Case c6{"coupled-oscillator.model", {}};
        cases.push_back(c6);
    }

    std::mt19937_64 rng(11);
    for (const auto& cs : cases) {
        INFO(cs.fixture);
        Model m = load_fixture(cs.fixture);
        ReductionResult res = run_reduction(m, cs.opts);
        std::size_t s = res.phi.dim_v();
        std::size_t r = res.dec.mu.size();
        auto Dh0 = detail::jacobian(res.info.h0);
        auto Dmu = detail::jacobian(res.dec.mu);

        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            std::vector<Rational> v = random_positive_point(rng, s);
            std::vector<Rational> x;
            for (const auto& f : res.phi.phi) x.push_back(f.eval(v));

            QMatrix Jfull = eval_poly_matrix(Dh0, x);
            QMatrix A = eval_poly_matrix(Dmu, x) * eval_poly_matrix(res.dec.P, x);
            REQUIRE(A.rows() == r);

            auto eig_full = eigenvalues_of(Jfull);
            auto eig_A = eigenvalues_of(A);
            for (std::size_t i = 0; i < s; ++i) eig_A.emplace_back(0.0, 0.0);
            worst = std::max(worst, eig_match_distance(eig_full, eig_A));
        }
        ACHECK(crit, worst < 1e-8);
    }
}
