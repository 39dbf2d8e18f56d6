#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "tfr/manifold.hpp"
#include "tfr/pipeline.hpp"

using namespace tfr;
using tfr_test::load_fixture;
using tfr_test::rf;

namespace {

struct Fx {
    Model m;
    SlowFastSplit sp;
    std::vector<MultiPoly> h0, h1;
};

Fx fixture(const std::string& name) {
    Fx f;
    f.m = load_fixture(name);
    f.sp = split_slow_fast(build_stoich(f.m), f.m);
    auto [h0, h1] = model_vector_fields(f.m, f.sp);
    f.h0 = std::move(h0);
    f.h1 = std::move(h1);
    return f;
}

std::vector<int> indices_of(const Model& m, const std::vector<std::string>& names) {
    std::vector<int> out;
    for (const auto& want : names)
        for (const auto& sp : m.species)
            if (sp.name == want) out.push_back(sp.index);
    return out;
}

}  // namespace

TEST_CASE("non-interacting sets of the association network") {
    Fx f = fixture("example-1.model");
    auto sets = find_noninteracting_sets(f.sp, f.m);
    // r = 1: every singleton qualifies (in the induced network each
    // species' fast complex collapses to the zero node)
    REQUIRE(sets.size() == 3);
    CHECK(sets[0].indices == std::vector<int>{0});
    CHECK(sets[2].indices == std::vector<int>{2});  // {X3}
    for (const auto& s : sets) {
        CHECK(s.cond_no_pair);
        CHECK(s.cond_rank);
        CHECK(s.cond_path_to_zero);
    }

    // higher-order fast complexes violate condition (i) outright
    Fx f3 = fixture("example-3.model");
    CHECK(find_noninteracting_sets(f3.sp, f3.m).empty());
}

TEST_CASE("non-interacting sets of the two-component fixture") {
    Fx f = fixture("two-component.model");
    auto sets = find_noninteracting_sets(f.sp, f.m);
    std::vector<std::vector<int>> got;
    for (const auto& s : sets) got.push_back(s.indices);
    // r = 3: each candidate has three species; sets containing an
    // interacting pair (e.g. X2 and X3 both in X2+X3) are rejected.
    CHECK(std::find(got.begin(), got.end(), indices_of(f.m, {"X1", "X3", "X5"})) != got.end());
    CHECK(std::find(got.begin(), got.end(), indices_of(f.m, {"X2", "X3", "X5"})) == got.end());
}

TEST_CASE("non-interacting sets of the dual phosphorylation fixture") {
    Fx f = fixture("dual-phosphorylation.model");
    auto sets = find_noninteracting_sets(f.sp, f.m);
    std::vector<std::vector<int>> got;
    for (const auto& s : sets) got.push_back(s.indices);
    CHECK(std::find(got.begin(), got.end(), std::vector<int>{2, 3, 4}) != got.end());
    // ordering is lexicographic in species indices
    for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1] < got[i]);
}

TEST_CASE("rational parameterization by elimination, association network") {
    Fx f = fixture("example-1.model");
    auto sets = find_noninteracting_sets(f.sp, f.m);
    REQUIRE(sets.size() == 3);
    Parameterization p = rational_parameterization(sets[2], f.sp, f.m);  // {X3}
    REQUIRE(p.exact);
    REQUIRE(p.phi.size() == 3);
    std::vector<std::string> v{"v1", "v2"};
    CHECK(p.phi[0] == rf("v1", v));
    CHECK(p.phi[1] == rf("v2", v));
    CHECK(p.phi[2] == rf("v1*v2", v));  // x3 = (k1/k-1) x1 x2 with k = 1
    // h0 vanishes identically on the image of Phi
    for (const auto& row : f.h0) CHECK(poly_subst(row, p.phi).is_zero());
    CHECK(rf_rank(dphi(p)) == 2);
}

TEST_CASE("rational parameterization matches the elimination formulas, dual phosphorylation") {
    Fx f = fixture("dual-phosphorylation.model");
    auto sets = find_noninteracting_sets(f.sp, f.m);
    NonInteractingSet chosen;
    bool found = false;
    for (const auto& s : sets)
        if (s.indices == std::vector<int>{2, 3, 4}) {
            chosen = s;
            found = true;
        }
    REQUIRE(found);
    Parameterization p = rational_parameterization(chosen, f.sp, f.m);
    REQUIRE(p.exact);
    std::vector<std::string> v{"v1", "v2", "v3"};
    // with all rate constants 1: x3 = x1 x2 / 2, x4 = (x1 + 1) x1 x2 / 2,
    // x5 = x1 x2 / 2; slow coordinates (v1, v2, v3) = (x1, x2, x6)
    CHECK(p.phi[0] == rf("v1", v));
    CHECK(p.phi[1] == rf("v2", v));
    CHECK(p.phi[2] == rf("v1*v2/2", v));
    CHECK(p.phi[3] == rf("(v1 + 1)*v1*v2/2", v));
    CHECK(p.phi[4] == rf("v1*v2/2", v));
    CHECK(p.phi[5] == rf("v3", v));
    for (const auto& row : f.h0) CHECK(poly_subst(row, p.phi).is_zero());
    CHECK(p.positive_coefficients);
}

TEST_CASE("exact complex balance check") {
    Fx f = fixture("two-component.model");
    // with all rate constants 1, the all-ones state is complex balanced
    std::vector<Rational> ones(6, rat(1));
    CHECK(check_complex_balance_exact(f.m, f.sp, ones));
    std::vector<Rational> off = ones;
    off[2] = rat(2);
    CHECK_FALSE(check_complex_balance_exact(f.m, f.sp, off));
}

TEST_CASE("complex balanced state: exact via hint, numeric via Newton") {
    Fx f = fixture("two-component.model");
    auto st = complex_balanced_state(f.m, f.sp, std::vector<Rational>(6, rat(1)));
    CHECK(st.exact);
    CHECK(st.x_exact == std::vector<Rational>(6, rat(1)));

    // perturbed rate constants: no exact hint, numeric fallback
    Model m2 = f.m;
    m2.reactions[0].rate_constant = rat(3, 2);
    auto sp2 = split_slow_fast(build_stoich(m2), m2);
    auto st2 = complex_balanced_state(m2, sp2);
    CHECK_FALSE(st2.exact);
    REQUIRE(st2.x_num.size() == 6);
    for (double xi : st2.x_num) CHECK(xi > 0);
    CHECK(complex_balance_residual(m2, sp2, st2.x_num) < 1e-10);
}

TEST_CASE("complex balance requires weak reversibility") {
    Fx f = fixture("dual-phosphorylation.model");
    CHECK_THROWS_AS(complex_balanced_state(f.m, f.sp), NotWeaklyReversibleError);
}

TEST_CASE("monomial parameterization") {
    Fx f = fixture("two-component.model");
    QMatrix B = left_kernel_basis(f.sp.fast.N);
    Parameterization p = monomial_parameterization(std::vector<Rational>(6, rat(1)), B);
    REQUIRE(p.exact);
    std::vector<std::string> v{"v1", "v2", "v3"};
    CHECK(p.phi[0] == rf("v1", v));
    CHECK(p.phi[1] == rf("v1", v));
    CHECK(p.phi[2] == rf("v2", v));
    CHECK(p.phi[3] == rf("v2", v));
    CHECK(p.phi[4] == rf("v1*v2", v));
    CHECK(p.phi[5] == rf("v3", v));
    for (const auto& row : f.h0) CHECK(poly_subst(row, p.phi).is_zero());

    // closed-form Jacobian agrees with entrywise differentiation
    RFMatrix J = dphi(p);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t l = 0; l < 3; ++l)
            CHECK(J(i, l) == p.phi[i].derivative(l));

    // rank-deficient exponent matrix is rejected
    QMatrix bad(2, 6);
    bad(0, 0) = 1;
    bad(1, 0) = 2;
    CHECK_THROWS_AS(monomial_parameterization(std::vector<Rational>(6, rat(1)), bad),
                    RankDeficientBError);
}

TEST_CASE("numeric monomial parameterization evaluates x* o v^B") {
    ComplexBalancedState st;
    st.exact = false;
    st.x_num = {2.0, 3.0};
    QMatrix B(1, 2);
    B(0, 0) = 1;
    B(0, 1) = -2;
    Parameterization p = monomial_parameterization(st, B);
    CHECK_FALSE(p.exact);
    auto x = p.eval_num({2.0});
    CHECK(x[0] == doctest::Approx(4.0));
    CHECK(x[1] == doctest::Approx(3.0 / 4.0));
    CHECK_THROWS(dphi(p));
    Eigen::MatrixXd J = dphi_num(p, {2.0});
    CHECK(J(0, 0) == doctest::Approx(2.0));        // d(2v)/dv
    CHECK(J(1, 0) == doctest::Approx(-3.0 / 4.0)); // d(3 v^-2)/dv at v=2
}

TEST_CASE("verify_parameterization report") {
    Fx f = fixture("example-1.model");
    auto sets = find_noninteracting_sets(f.sp, f.m);
    Parameterization p = rational_parameterization(sets[2], f.sp, f.m);
    auto rep = verify_parameterization(p, f.h0, 20);
    CHECK(rep.h0_vanishes);
    CHECK(rep.rank_ok);
    CHECK(rep.positive);

    // a wrong parameterization is flagged
    Parameterization bad = p;
    bad.phi[2] = rf("v1 + v2", {"v1", "v2"});
    auto rep2 = verify_parameterization(bad, f.h0, 20);
    CHECK_FALSE(rep2.h0_vanishes);
}

TEST_CASE("user-supplied parameterization fixture satisfies the manifold equations") {
    Fx f = fixture("example-3.model");
    REQUIRE(f.m.user_phi.has_value());
    for (const auto& row : f.h0) CHECK(poly_subst(row, *f.m.user_phi).is_zero());
    // image is two-dimensional
    Parameterization p;
    p.kind = ParamKind::user;
    p.vnames = {"v1", "v2"};
    p.phi = *f.m.user_phi;
    CHECK(rf_rank(dphi(p)) == 2);
}
