#ifndef TFR_REDUCE_HPP
#define TFR_REDUCE_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfr/manifold.hpp"

namespace tfr {

struct SingularLDPhiError : std::runtime_error {
    SingularLDPhiError()
        : std::runtime_error("L * DPhi(v) is singular over the function field; "
                             "invalid Phi or L") {}
};
struct SingularAugmentedMatrixError : std::runtime_error {
    SingularAugmentedMatrixError()
        : std::runtime_error("(DPhi | P) is singular over the function field") {}
};
struct NoInvertibleBlockError : std::runtime_error {
    NoInvertibleBlockError()
        : std::runtime_error("no generically invertible s-row block of DPhi") {}
};
struct SingularAError : std::runtime_error {
    SingularAError() : std::runtime_error("A(x) = Dmu(x) P(x) is singular at x") {}
};
struct PreconditionViolatedError : std::runtime_error {
    explicit PreconditionViolatedError(const std::string& what) : std::runtime_error(what) {}
};
struct InconsistencyError : std::logic_error {
    explicit InconsistencyError(const std::string& what) : std::logic_error(what) {}
};

// Product decomposition h0 = P * mu with mu taken from r rows of h0.
// P is constant for mass-action input; generic models may supply an
// x-dependent P.
struct PMuDecomposition {
    std::vector<std::vector<MultiPoly>> P;  // n rows, r columns, in x
    std::vector<MultiPoly> mu;              // length r, in x
    std::vector<std::size_t> row_indices;   // chosen rows (CRN path)
};

enum class ReductionPath { general, via_L, graph_case, qss, complex_balanced };

inline const char* to_string(ReductionPath p) {
    switch (p) {
        case ReductionPath::general: return "general";
        case ReductionPath::via_L: return "via_L";
        case ReductionPath::graph_case: return "graph_case";
        case ReductionPath::qss: return "qss";
        case ReductionPath::complex_balanced: return "complex_balanced";
    }
    return "?";
}

struct ReducedSystem {
    std::vector<RatFun> rhs;  // in v
    RFMatrix R;               // s x n
    Parameterization phi;
    ReductionPath path = ReductionPath::general;
    std::vector<RatFun> first_integrals;
    bool trivial = false;  // rank N == rank N_f forces rhs == 0
};

// ---------------------------------------------------------------------------
// Small helpers shared by the reduction paths.

namespace detail {

// First subset of rows, in index order, whose span has full rank.
inline std::vector<std::size_t> greedy_row_basis(const QMatrix& A, std::size_t target) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < A.rows() && rows.size() < target; ++i) {
        QMatrix cand(rows.size() + 1, A.cols());
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (std::size_t j = 0; j < A.cols(); ++j) cand(k, j) = A(rows[k], j);
        for (std::size_t j = 0; j < A.cols(); ++j) cand(rows.size(), j) = A(i, j);
        if (cand.rank() == rows.size() + 1) rows.push_back(i);
    }
    return rows;
}

inline RFMatrix compose_poly_matrix(const std::vector<std::vector<MultiPoly>>& M,
                                    const std::vector<RatFun>& phi,
                                    const std::vector<std::string>& vnames) {
    std::size_t rows = M.size(), cols = rows ? M[0].size() : 0;
    RFMatrix out(rows, cols, vnames);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = poly_subst(M[i][j], phi);
    return out;
}

inline std::vector<std::vector<MultiPoly>> jacobian(const std::vector<MultiPoly>& f) {
    std::vector<std::vector<MultiPoly>> J(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::size_t nv = f[i].vars().size();
        J[i].reserve(nv);
        for (std::size_t j = 0; j < nv; ++j) J[i].push_back(f[i].derivative(j));
    }
    return J;
}

inline RFMatrix rf_inverse(const RFMatrix& A) {
    return rf_solve_linear(A, RFMatrix::identity(A.rows(), A.vars()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Decomposition h0 = P mu.

inline PMuDecomposition decompose_P_mu(const SlowFastSplit& split, const Model& m) {
    PMuDecomposition dec;
    if (!m.is_crn()) {
        dec.P = m.generic->P;
        dec.mu = m.generic->mu;
        return dec;
    }
    auto xvars = m.state_var_names();
    std::vector<MultiPoly> h0 = mass_action_vf(split.fast, xvars);
    const QMatrix& Nf = split.fast.N;
    dec.row_indices = detail::greedy_row_basis(Nf, split.r);
    if (dec.row_indices.size() != split.r)
        throw InconsistencyError("rank of N_f dropped below the blanket hypothesis");
    for (auto i : dec.row_indices) dec.mu.push_back(h0[i]);
    // express every row of N_f in the chosen rows: coefficients solve
    // Nf[i] = sum_k P(i,k) Nf[rows[k]]
    QMatrix base(split.r, Nf.cols());
    for (std::size_t k = 0; k < split.r; ++k)
        for (std::size_t j = 0; j < Nf.cols(); ++j) base(k, j) = Nf(dec.row_indices[k], j);
    QMatrix baseT = base.transpose();  // cols x r
    dec.P.assign(split.n, std::vector<MultiPoly>(split.r, MultiPoly(xvars)));
    for (std::size_t i = 0; i < split.n; ++i) {
        // least-structure exact solve via RREF of [baseT | Nf[i]^T]
        QMatrix aug(Nf.cols(), split.r + 1);
        for (std::size_t a = 0; a < Nf.cols(); ++a) {
            for (std::size_t b = 0; b < split.r; ++b) aug(a, b) = baseT(a, b);
            aug(a, split.r) = Nf(i, a);
        }
        auto piv = aug.rref();
        std::vector<Rational> coef(split.r, Rational(0));
        for (std::size_t pi = 0; pi < piv.size(); ++pi) {
            if (piv[pi] == split.r)
                throw InconsistencyError("row of N_f outside span of chosen rows");
            coef[piv[pi]] = aug(pi, split.r);
        }
        for (std::size_t k = 0; k < split.r; ++k)
            dec.P[i][k] = MultiPoly::constant(xvars, coef[k]);
    }
    return dec;
}

// Numeric rank of Dmu(Phi(v)) at sampled positive v; exact rank when
// the samples are rational and Phi is exact.
inline bool functional_independence_check(const PMuDecomposition& dec,
                                          const Parameterization& phi, int samples,
                                          std::uint64_t seed = 42) {
    std::mt19937_64 rng(seed);
    std::size_t r = dec.mu.size();
    auto Dmu = detail::jacobian(dec.mu);
    std::size_t n = dec.mu.empty() ? 0 : dec.mu[0].vars().size();
    for (int t = 0; t < samples; ++t) {
        auto v = random_positive_point(rng, phi.dim_v());
        if (phi.exact) {
            std::vector<Rational> x;
            for (const auto& f : phi.phi) x.push_back(f.eval(v));
            QMatrix Dm(r, n);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < n; ++j) Dm(i, j) = Dmu[i][j].eval(x);
            if (Dm.rank() != r) return false;
        } else {
            std::vector<double> vd;
            for (const auto& q : v) vd.push_back(to_double(q));
            auto x = phi.eval_num(vd);
            Eigen::MatrixXd Dm(r, n);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < n; ++j) Dm(i, j) = Dmu[i][j].eval_d(x);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(Dm);
            if (static_cast<std::size_t>(lu.rank()) != r) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// The three exact computation paths for R(v).

inline RFMatrix compute_R_via_L(const Parameterization& phi, const QMatrix& L) {
    RFMatrix DPhi = dphi(phi);
    RFMatrix Lrf = RFMatrix::from_rational(L, phi.vnames);
    RFMatrix M = Lrf * DPhi;
    try {
        return rf_solve_linear(M, Lrf);
    } catch (const SingularMatrixError&) {
        throw SingularLDPhiError{};
    }
}

inline RFMatrix compute_R_general(const Parameterization& phi, const PMuDecomposition& dec) {
    RFMatrix DPhi = dphi(phi);
    RFMatrix Pphi = detail::compose_poly_matrix(dec.P, phi.phi, phi.vnames);
    std::size_t n = DPhi.rows(), s = DPhi.cols(), r = Pphi.cols();
    if (s + r != n) throw std::invalid_argument("compute_R_general: s + r != n");
    RFMatrix G(n, n, phi.vnames);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < s; ++j) G(i, j) = DPhi(i, j);
        for (std::size_t j = 0; j < r; ++j) G(i, s + j) = Pphi(i, j);
    }
    RFMatrix rhs(n, s, phi.vnames);  // transpose of (I_s | 0)
    for (std::size_t j = 0; j < s; ++j)
        rhs(j, j) = RatFun::constant(phi.vnames, Rational(1));
    try {
        return rf_solve_linear(G.transpose(), rhs).transpose();
    } catch (const SingularMatrixError&) {
        throw SingularAugmentedMatrixError{};
    }
}

// Corollary-style computation: split x-rows so that DPhi_1 is invertible,
// R1 = I - P1 (DPhi2 DPhi1^-1 P1 - P2)^-1 DPhi2 DPhi1^-1, R2 = P1 (...)^-1.
inline RFMatrix compute_R_graph_case(const Parameterization& phi,
                                     const PMuDecomposition& dec) {
    RFMatrix DPhi = dphi(phi);
    RFMatrix Pphi = detail::compose_poly_matrix(dec.P, phi.phi, phi.vnames);
    std::size_t n = DPhi.rows(), s = DPhi.cols(), r = Pphi.cols();

    // first s-row subset of DPhi with generic rank s
    std::vector<std::size_t> top;
    for (std::size_t i = 0; i < n && top.size() < s; ++i) {
        RFMatrix cand(top.size() + 1, s, phi.vnames);
        for (std::size_t k = 0; k < top.size(); ++k)
            for (std::size_t j = 0; j < s; ++j) cand(k, j) = DPhi(top[k], j);
        for (std::size_t j = 0; j < s; ++j) cand(top.size(), j) = DPhi(i, j);
        if (rf_rank(cand) == top.size() + 1) top.push_back(i);
    }
    if (top.size() != s) throw NoInvertibleBlockError{};
    std::vector<bool> in_top(n, false);
    for (auto i : top) in_top[i] = true;
    std::vector<std::size_t> bottom;
    for (std::size_t i = 0; i < n; ++i)
        if (!in_top[i]) bottom.push_back(i);

    auto rows = [&](const RFMatrix& M, const std::vector<std::size_t>& idx) {
        RFMatrix out(idx.size(), M.cols(), phi.vnames);
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < M.cols(); ++j) out(i, j) = M(idx[i], j);
        return out;
    };
    RFMatrix D1 = rows(DPhi, top), D2 = rows(DPhi, bottom);
    RFMatrix P1 = rows(Pphi, top), P2 = rows(Pphi, bottom);
    RFMatrix D2D1inv = rf_solve_linear(D1.transpose(), D2.transpose()).transpose();
    RFMatrix Mmid = D2D1inv * P1 - P2;  // r x r
    RFMatrix Minv = detail::rf_inverse(Mmid);
    RFMatrix R1 = RFMatrix::identity(s, phi.vnames) - P1 * Minv * D2D1inv;
    RFMatrix R2 = P1 * Minv;
    // D1 was factored out of the left of R1: R restricted to the top rows
    // is R1 * D1^{-1}? No: with x ordered (top, bottom), R = (R1 | R2)
    // already satisfies R * (DPhi|P) = (I|0) only when DPhi1 was taken as
    // the derivative block, i.e. for the permuted system; the corollary's
    // formulas use DPhi1 directly, with D2D1inv = DPhi2 DPhi1^{-1}.
    RFMatrix R1full = R1;
    // undo the row permutation of x (columns of R)
    RFMatrix R(s, n, phi.vnames);
    for (std::size_t j = 0; j < s; ++j)
        for (std::size_t i = 0; i < s; ++i) R(i, top[j]) = R1full(i, j);
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < s; ++i) R(i, bottom[j]) = R2(i, j);
    return R;
}

// ---------------------------------------------------------------------------
// Assembling the reduced system.

inline std::vector<RatFun> compose_vector(const std::vector<MultiPoly>& f,
                                          const Parameterization& phi) {
    std::vector<RatFun> out;
    out.reserve(f.size());
    for (const auto& row : f) out.push_back(poly_subst(row, phi.phi));
    return out;
}

inline ReducedSystem reduced_system(const Parameterization& phi, const RFMatrix& R,
                                    const std::vector<MultiPoly>& h1,
                                    ReductionPath path, bool expect_trivial = false) {
    ReducedSystem rs;
    rs.phi = phi;
    rs.R = R;
    rs.path = path;
    auto h1phi = compose_vector(h1, phi);
    std::size_t s = R.rows();
    rs.rhs.assign(s, RatFun::constant(phi.vnames, Rational(0)));
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < R.cols(); ++j) rs.rhs[i] += R(i, j) * h1phi[j];
    rs.trivial = expect_trivial;
    if (expect_trivial) {
        for (const auto& f : rs.rhs)
            if (!f.is_zero())
                throw InconsistencyError(
                    "rank N == rank N_f but the reduced system is not identically zero");
    }
    return rs;
}

// Closed form for complex balanced fast subnetworks (monomial Phi with
// B = L_f, exact x*):
//   v' = diag(v) (L_f diag(x* o v^{L_f}) L_f^tr)^-1 L_f N_s (K_s o (x*)^{Y_s} o v^{L_f Y_s})
inline ReducedSystem complex_balanced_reduced(const Parameterization& phi,
                                              const QMatrix& Lf,
                                              const SlowFastSplit& split) {
    if (phi.kind != ParamKind::monomial || !phi.exact)
        throw std::invalid_argument("complex_balanced_reduced: exact monomial Phi required");
    std::size_t s = Lf.rows(), n = Lf.cols(), ms = split.slow.N.cols();
    const auto& vn = phi.vnames;

    RFMatrix Lrf = RFMatrix::from_rational(Lf, vn);
    // L_f diag(x* o v^{L_f}) L_f^tr
    RFMatrix mid(s, s, vn);
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t b = 0; b < s; ++b) {
            RatFun acc = RatFun::constant(vn, Rational(0));
            for (std::size_t i = 0; i < n; ++i) {
                if (Lf(a, i) == 0 || Lf(b, i) == 0) continue;
                acc += RatFun::constant(vn, Lf(a, i) * Lf(b, i)) * phi.phi[i];
            }
            mid(a, b) = acc;
        }
    RFMatrix midinv = detail::rf_inverse(mid);

    // slow rate vector K_s o (x*)^{Y_s} o v^{L_f Y_s}
    QMatrix LfYs = Lf * split.slow.Y;  // s x ms
    std::vector<RatFun> vvars;
    for (std::size_t l = 0; l < s; ++l) vvars.push_back(RatFun::variable(vn, l));
    auto vpow = monomial_pow(vvars, LfYs);
    std::vector<RatFun> w;
    w.reserve(ms);
    for (std::size_t j = 0; j < ms; ++j) {
        Rational xs_pow = 1;
        for (std::size_t i = 0; i < n; ++i) {
            long e = split.slow.Y(i, j).get_num().get_si();
            for (long t = 0; t < e; ++t) xs_pow *= phi.x_star[i];
        }
        w.push_back(RatFun::constant(vn, split.slow.K[j] * xs_pow) * vpow[j]);
    }
    // L_f N_s w
    QMatrix LfNs = Lf * split.slow.N;  // s x ms
    std::vector<RatFun> lw(s, RatFun::constant(vn, Rational(0)));
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t j = 0; j < ms; ++j)
            if (LfNs(a, j) != 0) lw[a] += RatFun::constant(vn, LfNs(a, j)) * w[j];

    ReducedSystem rs;
    rs.phi = phi;
    rs.path = ReductionPath::complex_balanced;
    rs.rhs.assign(s, RatFun::constant(vn, Rational(0)));
    for (std::size_t a = 0; a < s; ++a) {
        RatFun acc = RatFun::constant(vn, Rational(0));
        for (std::size_t b = 0; b < s; ++b) acc += midinv(a, b) * lw[b];
        rs.rhs[a] = vvars[a] * acc;
    }
    // R(v) = diag(v) (...)^-1 L_f
    RFMatrix R(s, n, vn);
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t j = 0; j < n; ++j) {
            RatFun acc = RatFun::constant(vn, Rational(0));
            for (std::size_t b = 0; b < s; ++b)
                if (Lf(b, j) != 0) acc += midinv(a, b) * RatFun::constant(vn, Lf(b, j));
            R(a, j) = vvars[a] * acc;
        }
    rs.R = R;
    return rs;
}

// Numeric closed-form rhs at a sample point, for floating x*.
inline Eigen::VectorXd complex_balanced_reduced_num(const Parameterization& phi,
                                                    const QMatrix& Lf,
                                                    const SlowFastSplit& split,
                                                    const std::vector<double>& v) {
    std::size_t s = Lf.rows(), n = Lf.cols(), ms = split.slow.N.cols();
    auto x = phi.eval_num(v);
    Eigen::MatrixXd mid(s, s);
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t b = 0; b < s; ++b) {
            double acc = 0;
            for (std::size_t i = 0; i < n; ++i)
                acc += to_double(Lf(a, i)) * to_double(Lf(b, i)) * x[i];
            mid(a, b) = acc;
        }
    Eigen::VectorXd w(ms);
    for (std::size_t j = 0; j < ms; ++j) {
        double t = to_double(split.slow.K[j]);
        for (std::size_t i = 0; i < n; ++i)
            t *= std::pow(x[i], to_double(split.slow.Y(i, j)));
        w[j] = t;
    }
    Eigen::MatrixXd LfNs(s, ms);
    QMatrix lfns = Lf * split.slow.N;
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t j = 0; j < ms; ++j) LfNs(a, j) = to_double(lfns(a, j));
    Eigen::VectorXd rhs = mid.fullPivLu().solve(LfNs * w);
    for (std::size_t a = 0; a < s; ++a) rhs[a] *= v[a];
    return rhs;
}

// ---------------------------------------------------------------------------
// Projection operator and stability.

inline QMatrix eval_poly_matrix(const std::vector<std::vector<MultiPoly>>& M,
                                const std::vector<Rational>& x) {
    QMatrix out(M.size(), M.empty() ? 0 : M[0].size());
    for (std::size_t i = 0; i < M.size(); ++i)
        for (std::size_t j = 0; j < M[i].size(); ++j) out(i, j) = M[i][j].eval(x);
    return out;
}

inline QMatrix projection_Q(const PMuDecomposition& dec, const std::vector<Rational>& x) {
    std::size_t n = dec.P.size(), r = dec.mu.size();
    QMatrix P = eval_poly_matrix(dec.P, x);
    QMatrix Dmu = eval_poly_matrix(detail::jacobian(dec.mu), x);
    QMatrix A = Dmu * P;
    QMatrix Ainv;
    try {
        Ainv = A.inverse();
    } catch (const SingularMatrixError&) {
        throw SingularAError{};
    }
    (void)r;
    return QMatrix::identity(n) - P * Ainv * Dmu;
}

// Symbolic A(Phi(v)) = Dmu(Phi(v)) P(Phi(v)).
inline RFMatrix stability_matrix(const PMuDecomposition& dec, const Parameterization& phi) {
    RFMatrix DmuPhi = detail::compose_poly_matrix(detail::jacobian(dec.mu), phi.phi,
                                                  phi.vnames);
    RFMatrix Pphi = detail::compose_poly_matrix(dec.P, phi.phi, phi.vnames);
    return DmuPhi * Pphi;
}

// Characteristic polynomial coefficients [1, c1, ..., cn] of an exact
// rational matrix (Faddeev-LeVerrier).
inline std::vector<Rational> char_poly(const QMatrix& A) {
    std::size_t n = A.rows();
    std::vector<Rational> c{Rational(1)};
    QMatrix M = QMatrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        QMatrix AM = A * M;
        Rational tr(0);
        for (std::size_t i = 0; i < n; ++i) tr += AM(i, i);
        Rational ck = -tr / Rational(static_cast<long>(k));
        c.push_back(ck);
        M = AM;
        for (std::size_t i = 0; i < n; ++i) M(i, i) += ck;
    }
    return c;
}

// Hurwitz determinants of lambda^n + c1 lambda^(n-1) + ... + cn.
inline std::vector<Rational> hurwitz_determinants(const std::vector<Rational>& coeffs) {
    std::size_t n = coeffs.size() - 1;
    auto a = [&](long i) { return (i >= 0 && i <= static_cast<long>(n)) ? coeffs[i] : Rational(0); };
    std::vector<Rational> dets;
    for (std::size_t k = 1; k <= n; ++k) {
        QMatrix H(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                H(i, j) = a(2 * static_cast<long>(j) - static_cast<long>(i) + 1);
        // exact determinant via RREF with pivot product
        QMatrix W = H;
        Rational det(1);
        bool zero = false;
        for (std::size_t col = 0; col < k; ++col) {
            std::size_t sel = col;
            while (sel < k && W(sel, col) == 0) ++sel;
            if (sel == k) { zero = true; break; }
            if (sel != col) {
                for (std::size_t j = 0; j < k; ++j) std::swap(W(sel, j), W(col, j));
                det = -det;
            }
            det *= W(col, col);
            for (std::size_t i = col + 1; i < k; ++i) {
                Rational f = W(i, col) / W(col, col);
                for (std::size_t j = col; j < k; ++j) W(i, j) -= f * W(col, j);
            }
        }
        dets.push_back(zero ? Rational(0) : det);
    }
    return dets;
}

enum class StabilityVerdict { stable, unstable, marginal };

struct StabilitySample {
    std::vector<Rational> v;
    StabilityVerdict verdict;
    std::vector<Rational> hurwitz;       // exact path
    std::vector<double> eig_real_parts;  // floating path
};

struct StabilityReport {
    RFMatrix A;             // A(Phi(v)), symbolic (exact Phi only)
    bool symbolic = false;
    std::vector<StabilitySample> samples;
    std::string method;     // "routh_hurwitz" | "eigenvalues"
    bool deficiency_zero_shortcut = false;
    bool all_stable = true;
};

inline StabilityReport stability_analysis(const PMuDecomposition& dec,
                                          const Parameterization& phi, int samples,
                                          bool shortcut_applies,
                                          std::uint64_t seed = 42) {
    StabilityReport rep;
    rep.deficiency_zero_shortcut = shortcut_applies;
    std::size_t r = dec.mu.size();
    bool exact_method = r <= 4;
    rep.method = exact_method ? "routh_hurwitz" : "eigenvalues";
    std::mt19937_64 rng(seed);

    if (phi.exact) {
        rep.A = stability_matrix(dec, phi);
        rep.symbolic = true;
    }
    auto Dmu = detail::jacobian(dec.mu);
    for (int t = 0; t < samples; ++t) {
        StabilitySample smp;
        smp.v = random_positive_point(rng, phi.dim_v());
        StabilityVerdict verdict = StabilityVerdict::stable;
        if (phi.exact && exact_method) {
            std::vector<Rational> x;
            for (const auto& f : phi.phi) x.push_back(f.eval(smp.v));
            QMatrix A = eval_poly_matrix(Dmu, x) * eval_poly_matrix(dec.P, x);
            // eigenvalues of A must lie in the open left half plane, i.e.
            // char(A) must be a Hurwitz polynomial
            auto coeffs = char_poly(A);
            smp.hurwitz = hurwitz_determinants(coeffs);
            for (const auto& h : smp.hurwitz) {
                if (h < 0) { verdict = StabilityVerdict::unstable; break; }
                if (h == 0) verdict = StabilityVerdict::marginal;
            }
        } else {
            std::vector<double> vd;
            for (const auto& q : smp.v) vd.push_back(to_double(q));
            auto x = phi.eval_num(vd);
            Eigen::MatrixXd A(r, r);
            std::vector<Rational> dummy;
            Eigen::MatrixXd Dm(r, x.size()), Pm(x.size(), r);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < x.size(); ++j) Dm(i, j) = Dmu[i][j].eval_d(x);
            for (std::size_t i = 0; i < x.size(); ++i)
                for (std::size_t j = 0; j < r; ++j) Pm(i, j) = dec.P[i][j].eval_d(x);
            A = Dm * Pm;
            Eigen::EigenSolver<Eigen::MatrixXd> es(A);
            for (int i = 0; i < es.eigenvalues().size(); ++i) {
                double re = es.eigenvalues()[i].real();
                smp.eig_real_parts.push_back(re);
                if (re > 1e-9) verdict = StabilityVerdict::unstable;
                else if (re > -1e-9 && verdict == StabilityVerdict::stable)
                    verdict = StabilityVerdict::marginal;
            }
        }
        smp.verdict = verdict;
        if (verdict != StabilityVerdict::stable) rep.all_stable = false;
        rep.samples.push_back(std::move(smp));
    }
    if (shortcut_applies && !rep.all_stable)
        throw InconsistencyError(
            "deficiency-zero weakly-reversible certificate contradicts an exact "
            "stability test");
    return rep;
}

// psi_tilde = psi o Phi for every conservation law row; each must be
// constant or satisfy D(psi_tilde) . rhs == 0.
inline std::vector<RatFun> inherited_first_integrals(const QMatrix& cons,
                                                     const Parameterization& phi,
                                                     const std::vector<RatFun>& rhs) {
    std::vector<RatFun> out;
    for (std::size_t k = 0; k < cons.rows(); ++k) {
        RatFun psi = RatFun::constant(phi.vnames, Rational(0));
        for (std::size_t i = 0; i < cons.cols(); ++i)
            if (cons(k, i) != 0)
                psi += RatFun::constant(phi.vnames, cons(k, i)) * phi.phi[i];
        if (!psi.is_constant()) {
            RatFun dot = RatFun::constant(phi.vnames, Rational(0));
            for (std::size_t l = 0; l < phi.vnames.size(); ++l)
                dot += psi.derivative(l) * rhs[l];
            if (!dot.is_zero())
                throw InconsistencyError(
                    "conservation law does not map to a first integral of the "
                    "reduced system");
        }
        out.push_back(std::move(psi));
    }
    return out;
}

struct BlanketSample {
    std::vector<Rational> v;
    bool rank_ok;         // rank Dh0(Phi(v)) == r
    bool A_nonsingular;   // kernel-image decomposition
    bool tikhonov;        // all eigenvalues of A have negative real part
    bool fenichel;        // all eigenvalues have nonzero real part
};

struct BlanketReport {
    std::vector<BlanketSample> samples;
    bool all_pass_tikhonov = true;
    bool all_rank_ok = true;
};

inline BlanketReport blanket_hypothesis_report(const std::vector<MultiPoly>& h0,
                                               const PMuDecomposition& dec,
                                               const Parameterization& phi, int samples,
                                               std::uint64_t seed = 42) {
    BlanketReport rep;
    std::mt19937_64 rng(seed);
    std::size_t r = dec.mu.size();
    auto Dh0 = detail::jacobian(h0);
    auto Dmu = detail::jacobian(dec.mu);
    for (int t = 0; t < samples; ++t) {
        BlanketSample smp;
        smp.v = random_positive_point(rng, phi.dim_v());
        std::vector<Rational> x;
        for (const auto& f : phi.phi) x.push_back(f.eval(smp.v));
        QMatrix J = eval_poly_matrix(Dh0, x);
        smp.rank_ok = J.rank() == r;
        QMatrix A = eval_poly_matrix(Dmu, x) * eval_poly_matrix(dec.P, x);
        smp.A_nonsingular = A.rank() == r;
        Eigen::MatrixXd Ad(r, r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) Ad(i, j) = to_double(A(i, j));
        Eigen::EigenSolver<Eigen::MatrixXd> es(Ad);
        smp.tikhonov = true;
        smp.fenichel = true;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            double re = es.eigenvalues()[i].real();
            if (!(re < 0)) smp.tikhonov = false;
            if (std::abs(re) < 1e-12) smp.fenichel = false;
        }
        rep.all_pass_tikhonov = rep.all_pass_tikhonov && smp.tikhonov &&
                                smp.A_nonsingular && smp.rank_ok;
        rep.all_rank_ok = rep.all_rank_ok && smp.rank_ok;
        rep.samples.push_back(std::move(smp));
    }
    return rep;
}

// Appendix lemma: rank(AB) = s and (AB)^2 = AB imply BA = I_s.
inline bool lemma_BA_check(const QMatrix& A, const QMatrix& B) {
    std::size_t s = A.cols();
    if (B.rows() != s || B.cols() != A.rows())
        throw PreconditionViolatedError("lemma_BA_check: shape mismatch");
    QMatrix AB = A * B;
    if (AB.rank() != s)
        throw PreconditionViolatedError("lemma_BA_check: rank(AB) != s");
    if (!(AB * AB - AB).is_zero())
        throw PreconditionViolatedError("lemma_BA_check: AB is not idempotent");
    return B * A == QMatrix::identity(s);
}

}  // namespace tfr

#endif
