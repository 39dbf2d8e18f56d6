// Randomized property tests for the exact-arithmetic kernel and the
// network-analysis layer.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "tfr/crn.hpp"
#include "tfr/manifold.hpp"
#include "tfr/rfmatrix.hpp"
#include "tfr/sampling.hpp"

using namespace tfr;

namespace {

const std::vector<std::string> V{"v1", "v2"};

Rational random_coeff(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-6, 6);
    std::uniform_int_distribution<int> den(1, 4);
    return rat(num(rng), den(rng));
}

MultiPoly random_poly(std::mt19937_64& rng, int max_deg = 2) {
    MultiPoly p(V);
    std::uniform_int_distribution<int> deg(0, max_deg);
    std::uniform_int_distribution<int> nterms(1, 3);
    int t = nterms(rng);
    for (int i = 0; i < t; ++i) {
        std::vector<int> e{deg(rng), deg(rng)};
        p.add_term(e, random_coeff(rng));
    }
    return p;
}

RatFun random_ratfun(std::mt19937_64& rng) {
    MultiPoly den = random_poly(rng, 1);
    while (den.is_zero()) den = random_poly(rng, 1);
    return RatFun(random_poly(rng), den);
}

}  // namespace

TEST_CASE("canonical form: p/q equals (r p)/(r q)") {
    std::mt19937_64 rng(101);
    int done = 0;
    while (done < 1000) {
        MultiPoly p = random_poly(rng), q = random_poly(rng), r = random_poly(rng);
        if (q.is_zero() || r.is_zero()) continue;
        RatFun a(p, q);
        RatFun b(p * r, q * r);
        CHECK(a == b);
        CHECK(a.str() == b.str());
        ++done;
    }
}

TEST_CASE("evaluation is a ring homomorphism") {
    std::mt19937_64 rng(102);
    for (int t = 0; t < 1000; ++t) {
        MultiPoly p = random_poly(rng), q = random_poly(rng);
        auto pt = random_positive_point(rng, 2);
        CHECK((p + q).eval(pt) == p.eval(pt) + q.eval(pt));
        CHECK((p * q).eval(pt) == p.eval(pt) * q.eval(pt));
        CHECK((p - q).eval(pt) == p.eval(pt) - q.eval(pt));
    }
}

TEST_CASE("product rule for derivatives") {
    std::mt19937_64 rng(103);
    for (int t = 0; t < 500; ++t) {
        MultiPoly p = random_poly(rng), q = random_poly(rng);
        for (std::size_t l = 0; l < 2; ++l)
            CHECK((p * q).derivative(l) ==
                  p.derivative(l) * q + p * q.derivative(l));
    }
}

TEST_CASE("exact linear solve satisfies A x = b") {
    std::mt19937_64 rng(104);
    int done = 0;
    while (done < 200) {
        RFMatrix A(2, 2, V), b(2, 1, V);
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) A(i, j) = RatFun(random_poly(rng, 1));
            b(i, 0) = RatFun(random_poly(rng, 1));
        }
        if (rf_rank(A) < 2) continue;
        RFMatrix x = rf_solve_linear(A, b);
        CHECK(A * x == b);
        ++done;
    }
}

TEST_CASE("rank is invariant under row operations") {
    std::mt19937_64 rng(105);
    for (int t = 0; t < 250; ++t) {
        RFMatrix A(3, 3, V);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) A(i, j) = RatFun(random_poly(rng, 1));
        std::size_t r0 = rf_rank(A);

        // swap two rows
        RFMatrix B = A;
        for (std::size_t j = 0; j < 3; ++j) std::swap(B(0, j), B(1, j));
        CHECK(rf_rank(B) == r0);

        // add a multiple of one row to another
        RFMatrix C = A;
        RatFun c = random_ratfun(rng);
        for (std::size_t j = 0; j < 3; ++j) C(2, j) += c * A(0, j);
        CHECK(rf_rank(C) == r0);

        // append a linear combination: rank unchanged
        RFMatrix D(4, 3, V);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) D(i, j) = A(i, j);
        for (std::size_t j = 0; j < 3; ++j) D(3, j) = A(0, j) + A(1, j);
        CHECK(rf_rank(D) == r0);
    }
}

TEST_CASE("rational matrix inverse round-trips") {
    std::mt19937_64 rng(106);
    int done = 0;
    while (done < 500) {
        QMatrix A(3, 3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) A(i, j) = random_coeff(rng);
        if (A.rank() < 3) continue;
        CHECK(A.inverse() * A == QMatrix::identity(3));
        ++done;
    }
}

TEST_CASE("left kernel rows annihilate the matrix and have full rank") {
    std::mt19937_64 rng(107);
    for (int t = 0; t < 500; ++t) {
        std::uniform_int_distribution<std::size_t> dim(1, 4);
        std::size_t rows = dim(rng), cols = dim(rng);
        QMatrix A(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) A(i, j) = random_coeff(rng);
        QMatrix K = A.left_kernel();
        CHECK(K.rows() == rows - A.rank());
        if (K.rows() > 0) {
            CHECK((K * A).is_zero());
            CHECK(K.rank() == K.rows());
        }
    }
}

TEST_CASE("monomial powers obey the log-linear law") {
    std::mt19937_64 rng(108);
    for (int t = 0; t < 500; ++t) {
        std::uniform_int_distribution<int> expd(-2, 3);
        QMatrix M(2, 2), Msum(2, 2);
        QMatrix M2(2, 2);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                M(i, j) = expd(rng);
                M2(i, j) = expd(rng);
                Msum(i, j) = M(i, j) + M2(i, j);
            }
        std::vector<RatFun> x{RatFun::variable(V, 0), RatFun::variable(V, 1)};
        auto a = monomial_pow(x, M);
        auto b = monomial_pow(x, M2);
        auto c = monomial_pow(x, Msum);
        for (std::size_t j = 0; j < 2; ++j) CHECK(a[j] * b[j] == c[j]);
    }
}

TEST_CASE("random mass-action networks: deficiency and kernel identities") {
    std::mt19937_64 rng(109);
    std::uniform_int_distribution<int> nsp(2, 4), nrx(1, 4), coeff(0, 2), kd(1, 5);
    for (int t = 0; t < 250; ++t) {
        int n = nsp(rng);
        std::ostringstream os;
        os << "@species";
        for (int i = 1; i <= n; ++i) os << " S" << i;
        os << "\n@fast\n";
        int m = nrx(rng);
        int written = 0;
        for (int j = 0; j < m; ++j) {
            std::vector<int> re(n), pr(n);
            for (int i = 0; i < n; ++i) {
                re[i] = coeff(rng);
                pr[i] = coeff(rng);
            }
            if (re == pr) continue;
            auto side = [&](const std::vector<int>& c) {
                std::string sout;
                bool first = true;
                for (int i = 0; i < n; ++i) {
                    if (!c[i]) continue;
                    if (!first) sout += " + ";
                    first = false;
                    if (c[i] > 1) sout += std::to_string(c[i]) + " ";
                    sout += "S" + std::to_string(i + 1);
                }
                return sout.empty() ? std::string("0") : sout;
            };
            os << side(re) << " -> " << side(pr) << " : " << kd(rng) << "\n";
            ++written;
        }
        if (written == 0) continue;
        Model model = parse_model(os.str());
        StoichData sd = build_stoich(model);
        NetworkGraph g = build_fast_graph(model);
        auto sp = split_slow_fast(sd, model);

        // deficiency = nodes - linkage classes - rank >= 0
        std::size_t nodes = g.nodes.size(), lc = g.linkage_classes.size();
        REQUIRE(nodes >= lc + sp.fast.N.rank());
        CHECK(deficiency(g, sp.fast.N) == nodes - lc - sp.fast.N.rank());

        // conservation laws annihilate N
        QMatrix cons = conservation_laws(sd);
        if (cons.rows() > 0) CHECK((cons * sd.N).is_zero());
        CHECK(cons.rows() + sd.N.rank() == sd.N.rows());

        // print/parse round trip preserves structure
        Model again = parse_model(print_model(model));
        CHECK(build_stoich(again).N == sd.N);
        CHECK(build_stoich(again).Y == sd.Y);

        // h0 columns: mass-action field lies in the span of N's columns,
        // checked via the conservation identity at a random point
        auto [h0, h1] = model_vector_fields(model, sp);
        auto pt = random_positive_point(rng, n);
        for (std::size_t i = 0; i < cons.rows(); ++i) {
            Rational acc(0);
            for (int j = 0; j < n; ++j) acc += cons(i, j) * h0[j].eval(pt);
            CHECK(acc == 0);
        }
    }
}

TEST_CASE("find_noninteracting_sets is stable under reaction permutation") {
    std::mt19937_64 rng(110);
    Model m = tfr_test::load_fixture("two-component.model");
    auto sp = split_slow_fast(build_stoich(m), m);
    auto base = find_noninteracting_sets(sp, m);
    for (int t = 0; t < 20; ++t) {
        Model perm = m;
        std::shuffle(perm.reactions.begin(), perm.reactions.end(), rng);
        auto sp2 = split_slow_fast(build_stoich(perm), perm);
        auto got = find_noninteracting_sets(sp2, perm);
        REQUIRE(got.size() == base.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got[i].indices == base[i].indices);
    }
}
