#ifndef TFR_MANIFOLD_HPP
#define TFR_MANIFOLD_HPP

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfr/crn.hpp"
#include "tfr/rfmatrix.hpp"
#include "tfr/sampling.hpp"

namespace tfr {

struct NotWeaklyReversibleError : std::runtime_error {
    NotWeaklyReversibleError()
        : std::runtime_error("fast subnetwork is not weakly reversible, a necessary "
                             "condition for complex balanced steady states") {}
};
struct NoPositiveSolutionError : std::runtime_error {
    explicit NoPositiveSolutionError(double residual)
        : std::runtime_error("no positive complex balanced steady state found "
                             "(last residual " + std::to_string(residual) + ")") {}
};
struct RankDeficientBError : std::runtime_error {
    RankDeficientBError() : std::runtime_error("exponent matrix B is rank deficient") {}
};
struct SingularLinearSystemError : std::runtime_error {
    SingularLinearSystemError()
        : std::runtime_error("elimination system is singular; non-interacting "
                             "certificate failed") {}
};

enum class ParamKind { rational, monomial, user };

// Parameterization Phi: W -> Z of the critical manifold, in variables
// v1..vs. Monomial kind: Phi(v) = x* o v^B. When x* is only known
// numerically the symbolic entries are unavailable and numeric
// evaluation is used downstream.
struct Parameterization {
    ParamKind kind = ParamKind::user;
    std::vector<std::string> vnames;
    std::vector<RatFun> phi;            // size n when exact
    bool exact = true;
    std::vector<Rational> x_star;       // monomial, exact case
    std::vector<double> x_star_num;     // monomial, numeric case
    std::optional<QMatrix> B;           // s x n exponent matrix
    bool positive_coefficients = true;  // rational kind: elimination coefficient signs
    std::string domain_note;

    std::size_t dim_v() const { return vnames.size(); }
    std::size_t dim_x() const {
        return exact ? phi.size()
                     : (x_star.empty() ? x_star_num.size() : x_star.size());
    }

    std::vector<double> eval_num(const std::vector<double>& v) const {
        if (exact) {
            std::vector<double> out;
            out.reserve(phi.size());
            for (const auto& f : phi) out.push_back(f.eval_d(v));
            return out;
        }
        std::vector<double> out(x_star_num.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            double t = x_star_num[i];
            for (std::size_t l = 0; l < v.size(); ++l)
                t *= std::pow(v[l], to_double((*B)(l, i)));
            out[i] = t;
        }
        return out;
    }
};

struct NonInteractingSet {
    std::vector<int> indices;  // species indices, ascending
    bool cond_no_pair = false, cond_rank = false, cond_path_to_zero = false;
};

inline std::vector<std::string> default_vnames(std::size_t s) {
    std::vector<std::string> v;
    for (std::size_t i = 1; i <= s; ++i) v.push_back("v" + std::to_string(i));
    return v;
}

// ---------------------------------------------------------------------------
// Non-interacting sets (conditions (i)-(iii)).

namespace detail {

inline bool check_noninteracting_pair(const Model& m, const std::vector<int>& set) {
    std::vector<bool> in(m.species.size(), false);
    for (int i : set) in[i] = true;
    for (const auto& rx : m.reactions) {
        if (!rx.fast) continue;
        for (const Complex* c : {&rx.reactant, &rx.product}) {
            long sum = 0;
            for (const auto& [sp, co] : c->coeff)
                if (in[sp]) sum += co;
            if (sum > 1) return false;
        }
    }
    return true;
}

inline bool check_rank_condition(const SlowFastSplit& split, const std::vector<int>& set) {
    QMatrix sub(set.size(), split.fast.N.cols());
    for (std::size_t k = 0; k < set.size(); ++k)
        for (std::size_t j = 0; j < split.fast.N.cols(); ++j)
            sub(k, j) = split.fast.N(set[k], j);
    return sub.rank() == split.r;
}

// Induced network: species outside the set are dropped from every
// complex; under (i) each projected complex is 0 or a unit complex.
// Requires a directed path from every set species to the node 0.
inline bool check_path_to_zero(const Model& m, const std::vector<int>& set) {
    auto proj = [&](const Complex& c) -> int {  // -1 encodes the node 0
        for (const auto& [sp, co] : c.coeff)
            for (std::size_t k = 0; k < set.size(); ++k)
                if (set[k] == sp) return static_cast<int>(k);
        return -1;
    };
    std::size_t nn = set.size() + 1;  // nodes: set species, then 0
    std::vector<std::vector<std::size_t>> out(nn);
    auto id = [&](int p) { return p < 0 ? set.size() : static_cast<std::size_t>(p); };
    for (const auto& rx : m.reactions) {
        if (!rx.fast) continue;
        std::size_t a = id(proj(rx.reactant)), b = id(proj(rx.product));
        if (a != b) out[a].push_back(b);
    }
    for (std::size_t start = 0; start < set.size(); ++start) {
        std::vector<bool> seen(nn, false);
        std::vector<std::size_t> stack{start};
        seen[start] = true;
        bool found = false;
        while (!stack.empty() && !found) {
            std::size_t u = stack.back();
            stack.pop_back();
            if (u == set.size()) { found = true; break; }
            for (auto w : out[u])
                if (!seen[w]) { seen[w] = true; stack.push_back(w); }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace detail

inline std::vector<NonInteractingSet> find_noninteracting_sets(const SlowFastSplit& split,
                                                               const Model& m) {
    std::vector<NonInteractingSet> out;
    std::size_t n = m.species.size(), r = split.r;
    if (r == 0 || r > n) return out;
    std::vector<int> idx(r);
    for (std::size_t i = 0; i < r; ++i) idx[i] = static_cast<int>(i);
    while (true) {
        if (detail::check_noninteracting_pair(m, idx) &&
            detail::check_rank_condition(split, idx) &&
            detail::check_path_to_zero(m, idx)) {
            out.push_back({idx, true, true, true});
        }
        // next lexicographic r-combination
        long pos = static_cast<long>(r) - 1;
        while (pos >= 0 && idx[pos] == static_cast<int>(n - r + pos)) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (std::size_t j = pos + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rational parameterization by elimination of a non-interacting set.

inline Parameterization rational_parameterization(const NonInteractingSet& set,
                                                  const SlowFastSplit& split,
                                                  const Model& m) {
    std::size_t n = m.species.size(), r = set.indices.size(), s = n - r;
    auto vnames = default_vnames(s);
    std::vector<int> free_idx;
    std::vector<bool> in_set(n, false);
    for (int i : set.indices) in_set[i] = true;
    for (std::size_t i = 0; i < n; ++i)
        if (!in_set[i]) free_idx.push_back(static_cast<int>(i));

    auto xvars = m.state_var_names();
    std::vector<MultiPoly> h0 = mass_action_vf(split.fast, xvars);

    // position of a species inside the eliminated set
    std::vector<int> set_pos(n, -1), free_pos(n, -1);
    for (std::size_t k = 0; k < set.indices.size(); ++k) set_pos[set.indices[k]] = k;
    for (std::size_t k = 0; k < free_idx.size(); ++k) free_pos[free_idx[k]] = k;

    // The chosen rows of h0 are linear in the set species by condition (i):
    // each mass-action monomial contains at most one of them, to power one.
    RFMatrix A(r, r, vnames), b(r, 1, vnames);
    for (std::size_t j = 0; j < r; ++j) {
        const MultiPoly& row = h0[set.indices[j]];
        for (const auto& [e, c] : row.terms()) {
            int yvar = -1;
            std::vector<int> ve(s, 0);
            for (std::size_t i = 0; i < n; ++i) {
                if (e[i] == 0) continue;
                if (set_pos[i] >= 0) {
                    if (e[i] != 1 || yvar != -1)
                        throw std::logic_error("set is not non-interacting");
                    yvar = set_pos[i];
                } else {
                    ve[free_pos[i]] = e[i];
                }
            }
            RatFun mono(MultiPoly::monomial(vnames, ve, c));
            if (yvar >= 0)
                A(j, yvar) += mono;
            else
                b(j, 0) -= mono;
        }
    }
    RFMatrix sol;
    try {
        sol = rf_solve_linear(A, b);
    } catch (const SingularMatrixError&) {
        throw SingularLinearSystemError{};
    }

    Parameterization p;
    p.kind = ParamKind::rational;
    p.vnames = vnames;
    p.exact = true;
    p.domain_note = "v > 0 componentwise";
    p.phi.assign(n, RatFun::constant(vnames, Rational(0)));
    for (std::size_t k = 0; k < free_idx.size(); ++k)
        p.phi[free_idx[k]] = RatFun::variable(vnames, k);
    auto all_positive = [](const MultiPoly& q) {
        for (const auto& [e, c] : q.terms())
            if (c <= 0) return false;
        return true;
    };
    for (std::size_t j = 0; j < r; ++j) {
        p.phi[set.indices[j]] = sol(j, 0);
        if (!all_positive(sol(j, 0).num()) || !all_positive(sol(j, 0).den()))
            p.positive_coefficients = false;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Complex balanced steady states.

struct ComplexBalancedState {
    bool exact = false;
    std::vector<Rational> x_exact;
    std::vector<double> x_num;
    double residual = 0.0;  // max relative node imbalance (numeric case)
};

namespace detail {

// Inflow/outflow rate per node of the fast subnetwork, mass action.
template <typename Num, typename Eval>
bool node_balance(const Model& m, const SlowFastSplit& split, Eval rate,
                  std::vector<Num>* imbalance_out, std::vector<Num>* scale_out) {
    std::map<Complex, std::pair<Num, Num>> flows;  // node -> (in, out)
    for (std::size_t k = 0; k < split.fast_cols.size(); ++k) {
        const Reaction& rx = m.reactions[split.fast_cols[k]];
        Num w = rate(k);
        auto& o = flows[rx.reactant];
        o.second += w;
        auto& i = flows[rx.product];
        i.first += w;
    }
    bool balanced = true;
    if (imbalance_out) imbalance_out->clear();
    if (scale_out) scale_out->clear();
    for (const auto& [node, f] : flows) {
        Num diff = f.first - f.second;
        if (diff != Num(0)) balanced = false;
        if (imbalance_out) imbalance_out->push_back(diff);
        if (scale_out) scale_out->push_back(f.first + f.second);
    }
    return balanced;
}

}  // namespace detail

inline bool check_complex_balance_exact(const Model& m, const SlowFastSplit& split,
                                        const std::vector<Rational>& x) {
    auto rate = [&](std::size_t k) {
        Rational w = split.fast.K[k];
        for (std::size_t i = 0; i < split.n; ++i) {
            long e = split.fast.Y(i, k).get_num().get_si();
            for (long t = 0; t < e; ++t) w *= x[i];
        }
        return w;
    };
    return detail::node_balance<Rational>(m, split, rate, nullptr, nullptr);
}

inline double complex_balance_residual(const Model& m, const SlowFastSplit& split,
                                       const std::vector<double>& x) {
    auto rate = [&](std::size_t k) {
        double w = to_double(split.fast.K[k]);
        for (std::size_t i = 0; i < split.n; ++i)
            w *= std::pow(x[i], to_double(split.fast.Y(i, k)));
        return w;
    };
    std::vector<double> imb, scale;
    detail::node_balance<double>(m, split, rate, &imb, &scale);
    double worst = 0;
    for (std::size_t i = 0; i < imb.size(); ++i)
        worst = std::max(worst, std::abs(imb[i]) / std::max(scale[i], 1e-300));
    return worst;
}

// Damped Newton in log coordinates on [r independent fast equations;
// L_f x = L_f x0], started from the hint (or all ones).
inline ComplexBalancedState complex_balanced_state(
    const Model& m, const SlowFastSplit& split,
    std::optional<std::vector<Rational>> hint = std::nullopt) {
    NetworkGraph g = build_fast_graph(m);
    if (!weakly_reversible(g)) throw NotWeaklyReversibleError{};

    std::size_t n = split.n;
    std::vector<Rational> x0(n, Rational(1));
    if (hint) x0 = *hint;

    ComplexBalancedState st;
    if (check_complex_balance_exact(m, split, x0)) {
        st.exact = true;
        st.x_exact = x0;
        st.x_num.reserve(n);
        for (const auto& q : x0) st.x_num.push_back(to_double(q));
        return st;
    }

    auto xvars = m.state_var_names();
    std::vector<MultiPoly> h0 = mass_action_vf(split.fast, xvars);
    QMatrix Lf = left_kernel_basis(split.fast.N);

    // first lexicographic maximal-rank row choice of N_f
    std::vector<std::size_t> rows;
    {
        QMatrix acc(0, 0);
        std::size_t cur = 0;
        for (std::size_t i = 0; i < n && rows.size() < split.r; ++i) {
            QMatrix cand(rows.size() + 1, split.fast.N.cols());
            for (std::size_t k = 0; k < rows.size(); ++k)
                for (std::size_t j = 0; j < split.fast.N.cols(); ++j)
                    cand(k, j) = split.fast.N(rows[k], j);
            for (std::size_t j = 0; j < split.fast.N.cols(); ++j)
                cand(rows.size(), j) = split.fast.N(i, j);
            if (cand.rank() == rows.size() + 1) rows.push_back(i);
            (void)cur;
        }
        (void)acc;
    }

    std::vector<std::vector<MultiPoly>> jac(split.r);
    for (std::size_t k = 0; k < split.r; ++k) {
        jac[k].reserve(n);
        for (std::size_t j = 0; j < n; ++j) jac[k].push_back(h0[rows[k]].derivative(j));
    }

    Eigen::VectorXd u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::log(to_double(x0[i]));
    Eigen::VectorXd anchor(split.s);
    {
        Eigen::VectorXd x0d(n);
        for (std::size_t i = 0; i < n; ++i) x0d[i] = to_double(x0[i]);
        for (std::size_t k = 0; k < split.s; ++k) {
            double a = 0;
            for (std::size_t j = 0; j < n; ++j) a += to_double(Lf(k, j)) * x0d[j];
            anchor[k] = a;
        }
    }

    auto eval_F = [&](const Eigen::VectorXd& uu, Eigen::VectorXd& F, Eigen::MatrixXd& J) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(uu[i]);
        F.resize(n);
        J.resize(n, n);
        for (std::size_t k = 0; k < split.r; ++k) {
            F[k] = h0[rows[k]].eval_d(x);
            for (std::size_t j = 0; j < n; ++j)
                J(k, j) = jac[k][j].eval_d(x) * x[j];
        }
        for (std::size_t k = 0; k < split.s; ++k) {
            double a = -anchor[k];
            for (std::size_t j = 0; j < n; ++j) a += to_double(Lf(k, j)) * x[j];
            F[split.r + k] = a;
            for (std::size_t j = 0; j < n; ++j)
                J(split.r + k, j) = to_double(Lf(k, j)) * x[j];
        }
    };

    Eigen::VectorXd F;
    Eigen::MatrixXd J;
    double last_res = 1e300;
    for (int it = 0; it < 200; ++it) {
        eval_F(u, F, J);
        double fn = F.norm();
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(u[i]);
        last_res = complex_balance_residual(m, split, x);
        if (last_res < 1e-12 && fn < 1e-12) {
            st.exact = false;
            st.x_num = x;
            st.residual = last_res;
            return st;
        }
        Eigen::VectorXd step = J.fullPivLu().solve(-F);
        double lambda = 1.0;
        Eigen::VectorXd Ftry;
        Eigen::MatrixXd Jtry;
        for (int half = 0; half < 40; ++half) {
            Eigen::VectorXd ut = u + lambda * step;
            eval_F(ut, Ftry, Jtry);
            if (Ftry.norm() < fn || fn == 0) { u = ut; break; }
            lambda /= 2;
            if (half == 39) u = u + lambda * step;
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(u[i]);
    last_res = complex_balance_residual(m, split, x);
    if (last_res < 1e-10) {
        st.exact = false;
        st.x_num = x;
        st.residual = last_res;
        return st;
    }
    throw NoPositiveSolutionError(last_res);
}

// ---------------------------------------------------------------------------
// Monomial parameterizations Phi(v) = x* o v^B.

inline Parameterization monomial_parameterization(const ComplexBalancedState& xstar,
                                                  const QMatrix& B) {
    std::size_t s = B.rows(), n = B.cols();
    if (B.rank() != s) throw RankDeficientBError{};
    Parameterization p;
    p.kind = ParamKind::monomial;
    p.vnames = default_vnames(s);
    p.B = B;
    p.domain_note = "v > 0 componentwise";
    p.exact = xstar.exact;
    if (xstar.exact) {
        p.x_star = xstar.x_exact;
        std::vector<RatFun> v;
        for (std::size_t l = 0; l < s; ++l) v.push_back(RatFun::variable(p.vnames, l));
        auto powers = monomial_pow(v, B);  // component i is v^(column i of B)
        p.phi.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            p.phi.push_back(RatFun::constant(p.vnames, p.x_star[i]) * powers[i]);
        p.x_star_num.reserve(n);
        for (const auto& q : p.x_star) p.x_star_num.push_back(to_double(q));
    } else {
        p.x_star_num = xstar.x_num;
    }
    return p;
}

inline Parameterization monomial_parameterization(const std::vector<Rational>& x_star,
                                                  const QMatrix& B) {
    ComplexBalancedState st;
    st.exact = true;
    st.x_exact = x_star;
    return monomial_parameterization(st, B);
}

// Exact Jacobian DPhi(v), n x s. Monomial kind uses the closed-form
// identity diag(x* o v^B) B^tr diag(1/v).
inline RFMatrix dphi(const Parameterization& p) {
    if (!p.exact) throw std::logic_error("dphi: symbolic Jacobian needs an exact Phi");
    std::size_t n = p.phi.size(), s = p.vnames.size();
    RFMatrix J(n, s, p.vnames);
    if (p.kind == ParamKind::monomial) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < s; ++l) {
                const Rational& e = (*p.B)(l, i);
                if (e == 0) continue;
                J(i, l) = p.phi[i] * RatFun::constant(p.vnames, e) /
                          RatFun::variable(p.vnames, l);
            }
        return J;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < s; ++l) J(i, l) = p.phi[i].derivative(l);
    return J;
}

// Numeric Jacobian at a point, valid for every kind.
inline Eigen::MatrixXd dphi_num(const Parameterization& p, const std::vector<double>& v) {
    std::size_t n = p.dim_x(), s = p.vnames.size();
    Eigen::MatrixXd J(n, s);
    if (p.kind == ParamKind::monomial) {
        auto x = p.eval_num(v);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < s; ++l)
                J(i, l) = x[i] * to_double((*p.B)(l, i)) / v[l];
        return J;
    }
    RFMatrix Js = dphi(p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < s; ++l) J(i, l) = Js(i, l).eval_d(v);
    return J;
}

struct ParameterizationReport {
    bool h0_vanishes = false;       // h0 o Phi == 0 (exact) / residual small
    bool rank_ok = false;           // generic and sampled rank of DPhi == s
    bool positive = false;          // Phi maps positive v to positive x
    double max_residual = 0.0;
};

inline ParameterizationReport verify_parameterization(const Parameterization& p,
                                                      const std::vector<MultiPoly>& h0,
                                                      int samples,
                                                      std::uint64_t seed = 42) {
    ParameterizationReport rep;
    std::mt19937_64 rng(seed);
    std::size_t s = p.vnames.size();
    if (p.exact) {
        rep.h0_vanishes = true;
        for (const auto& row : h0)
            rep.h0_vanishes = rep.h0_vanishes && poly_subst(row, p.phi).is_zero();
        RFMatrix J = dphi(p);
        rep.rank_ok = rf_rank(J) == s;
        rep.positive = true;
        for (int t = 0; t < samples; ++t) {
            auto v = random_positive_point(rng, s);
            std::vector<double> vd;
            for (const auto& q : v) vd.push_back(to_double(q));
            for (const auto& f : p.phi) {
                Rational val = f.eval(v);
                if (val <= 0) rep.positive = false;
            }
            Eigen::MatrixXd Jn = dphi_num(p, vd);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(Jn);
            if (static_cast<std::size_t>(lu.rank()) != s) rep.rank_ok = false;
        }
        return rep;
    }
    rep.h0_vanishes = true;
    rep.rank_ok = true;
    rep.positive = true;
    for (int t = 0; t < samples; ++t) {
        std::vector<double> v(s);
        for (auto& c : v) c = to_double(random_positive_rational(rng));
        auto x = p.eval_num(v);
        double scale = 0;
        for (double xi : x) {
            scale = std::max(scale, std::abs(xi));
            if (!(xi > 0)) rep.positive = false;
        }
        for (const auto& row : h0) {
            double r = std::abs(row.eval_d(x));
            rep.max_residual = std::max(rep.max_residual, r / std::max(scale, 1.0));
        }
        Eigen::MatrixXd Jn = dphi_num(p, v);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Jn);
        if (static_cast<std::size_t>(lu.rank()) != s) rep.rank_ok = false;
    }
    rep.h0_vanishes = rep.max_residual < 1e-10;
    return rep;
}

}  // namespace tfr

#endif
