#ifndef TFR_PIPELINE_HPP
#define TFR_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "tfr/reduce.hpp"

namespace tfr {

struct StructuralInfo {
    bool crn = true;
    std::size_t n = 0, m_reactions = 0, r = 0, s = 0;
    SlowFastSplit split;
    QMatrix N;  // full stoichiometric matrix (CRN)
    std::size_t deficiency_fast = 0;
    bool weakly_reversible_fast = false;
    QMatrix conservation;  // left kernel of N
    QMatrix Lf;            // left kernel of N_f
    std::vector<NonInteractingSet> ni_sets;
    bool trivial = false;  // rank N == rank N_f
    std::vector<MultiPoly> h0, h1;
};

inline StructuralInfo analyze_structure(const Model& m) {
    StructuralInfo info;
    info.crn = m.is_crn();
    if (m.is_crn()) {
        StoichData sd = build_stoich(m);
        info.split = split_slow_fast(sd, m);
        info.n = info.split.n;
        info.m_reactions = m.reactions.size();
        info.r = info.split.r;
        info.s = info.split.s;
        info.N = sd.N;
        NetworkGraph fg = build_fast_graph(m);
        info.deficiency_fast = deficiency(fg, info.split.fast.N);
        info.weakly_reversible_fast = weakly_reversible(fg);
        info.conservation = conservation_laws(sd);
        info.Lf = left_kernel_basis(info.split.fast.N);
        info.ni_sets = find_noninteracting_sets(info.split, m);
        info.trivial = info.N.rank() == info.r;
    } else {
        const GenericModel& g = *m.generic;
        info.n = g.state_vars.size();
        info.r = g.mu.size();
        info.s = info.n - info.r;
        info.m_reactions = 0;
    }
    auto [h0, h1] = model_vector_fields(m, info.split);
    info.h0 = std::move(h0);
    info.h1 = std::move(h1);
    return info;
}

struct ReductionOptions {
    std::string param = "auto";  // auto | complexbalanced | noninteracting | user
    std::optional<std::vector<int>> ni_set;            // species indices, ascending
    std::optional<std::vector<Rational>> xstar_hint;   // complex balanced x*
    int samples = 20;
    std::uint64_t seed = 42;
};

struct ReductionResult {
    StructuralInfo info;
    Parameterization phi;
    PMuDecomposition dec;
    ReducedSystem rsys;
    StabilityReport stability;
    std::vector<RatFun> first_integrals;
    ParameterizationReport phi_report;
    std::vector<std::string> attempts;  // per-path failure reasons
};

struct NoReductionPathError : std::runtime_error {
    std::vector<std::string> reasons;
    explicit NoReductionPathError(std::vector<std::string> rs)
        : std::runtime_error(join(rs)), reasons(std::move(rs)) {}
    static std::string join(const std::vector<std::string>& rs) {
        std::string s = "no parameterization path succeeded";
        for (const auto& r : rs) s += "; " + r;
        return s;
    }
};

namespace detail {

inline void finalize_reduction(ReductionResult& res, const Model& m,
                               const ReductionOptions& opts) {
    res.dec = decompose_P_mu(res.info.split, m);
    bool shortcut = res.info.crn && res.info.deficiency_fast == 0 &&
                    res.info.weakly_reversible_fast;
    res.stability =
        stability_analysis(res.dec, res.phi, opts.samples, shortcut, opts.seed);
    res.phi_report = verify_parameterization(res.phi, res.info.h0, opts.samples,
                                             opts.seed);
    if (res.phi.exact && !res.rsys.rhs.empty() && res.info.conservation.rows() > 0)
        res.first_integrals =
            inherited_first_integrals(res.info.conservation, res.phi, res.rsys.rhs);
}

}  // namespace detail

// Orchestrates parameterization choice and reduction. Auto order for CRN
// input: complexbalanced (weakly reversible, deficiency 0, exact x* found)
// -> noninteracting (lexicographic first) -> user.
inline ReductionResult run_reduction(const Model& m, const ReductionOptions& opts = {}) {
    ReductionResult res;
    res.info = analyze_structure(m);
    std::vector<std::string>& why = res.attempts;
    bool is_auto = opts.param == "auto";

    if (!res.info.crn) {
        const GenericModel& g = *m.generic;
        if (!g.phi) throw NoReductionPathError({"generic model provides no @phi"});
        res.phi.kind = ParamKind::user;
        res.phi.vnames = default_vnames(res.info.s);
        res.phi.phi = *g.phi;
        res.phi.exact = true;
        res.dec.P = g.P;
        res.dec.mu = g.mu;
        RFMatrix R = g.L ? compute_R_via_L(res.phi, *g.L)
                         : compute_R_general(res.phi, res.dec);
        res.rsys = reduced_system(res.phi, R, res.info.h1,
                                  g.L ? ReductionPath::via_L : ReductionPath::general);
        bool shortcut = false;
        res.stability =
            stability_analysis(res.dec, res.phi, opts.samples, shortcut, opts.seed);
        res.phi_report =
            verify_parameterization(res.phi, res.info.h0, opts.samples, opts.seed);
        return res;
    }

    auto try_complexbalanced = [&]() -> bool {
        try {
            ComplexBalancedState st =
                complex_balanced_state(m, res.info.split, opts.xstar_hint);
            if (is_auto && !st.exact) {
                why.push_back("complexbalanced: only a numeric steady state found");
                return false;
            }
            res.phi = monomial_parameterization(st, res.info.Lf);
            if (st.exact) {
                res.rsys = complex_balanced_reduced(res.phi, res.info.Lf,
                                                    res.info.split);
                if (res.info.trivial) {
                    for (const auto& f : res.rsys.rhs)
                        if (!f.is_zero())
                            throw InconsistencyError(
                                "rank N == rank N_f but reduced rhs != 0");
                    res.rsys.trivial = true;
                }
            } else {
                res.rsys.phi = res.phi;
                res.rsys.path = ReductionPath::complex_balanced;
            }
            return true;
        } catch (const NotWeaklyReversibleError& e) {
            why.push_back(std::string("complexbalanced: ") + e.what());
        } catch (const NoPositiveSolutionError& e) {
            why.push_back(std::string("complexbalanced: ") + e.what());
        } catch (const RankDeficientBError& e) {
            why.push_back(std::string("complexbalanced: ") + e.what());
        }
        return false;
    };

    auto try_noninteracting = [&]() -> bool {
        const NonInteractingSet* chosen = nullptr;
        if (opts.ni_set) {
            for (const auto& s : res.info.ni_sets)
                if (s.indices == *opts.ni_set) chosen = &s;
            if (!chosen) {
                why.push_back("noninteracting: requested set fails conditions (i)-(iii)");
                return false;
            }
        } else if (!res.info.ni_sets.empty()) {
            chosen = &res.info.ni_sets.front();
        } else {
            why.push_back("noninteracting: no set satisfies conditions (i)-(iii)");
            return false;
        }
        try {
            res.phi = rational_parameterization(*chosen, res.info.split, m);
            RFMatrix R = compute_R_via_L(res.phi, res.info.Lf);
            res.rsys = reduced_system(res.phi, R, res.info.h1, ReductionPath::via_L,
                                      res.info.trivial);
            return true;
        } catch (const SingularLinearSystemError& e) {
            why.push_back(std::string("noninteracting: ") + e.what());
        } catch (const SingularLDPhiError& e) {
            why.push_back(std::string("noninteracting: ") + e.what());
        }
        return false;
    };

    auto try_user = [&]() -> bool {
        if (!m.user_phi) {
            why.push_back("user: model provides no @phi");
            return false;
        }
        try {
            res.phi.kind = ParamKind::user;
            res.phi.vnames = m.user_phi->front().num().vars();
            res.phi.phi = *m.user_phi;
            res.phi.exact = true;
            const QMatrix& L = m.user_L ? *m.user_L : res.info.Lf;
            RFMatrix R = compute_R_via_L(res.phi, L);
            res.rsys = reduced_system(res.phi, R, res.info.h1, ReductionPath::via_L,
                                      res.info.trivial);
            return true;
        } catch (const SingularLDPhiError& e) {
            why.push_back(std::string("user: ") + e.what());
        }
        return false;
    };

    bool ok = false;
    if (opts.param == "complexbalanced") ok = try_complexbalanced();
    else if (opts.param == "noninteracting") ok = try_noninteracting();
    else if (opts.param == "user") ok = try_user();
    else if (is_auto)
        ok = try_complexbalanced() || try_noninteracting() || try_user();
    else throw std::invalid_argument("unknown --param value '" + opts.param + "'");
    if (!ok) throw NoReductionPathError(why);

    detail::finalize_reduction(res, m, opts);
    return res;
}

}  // namespace tfr

#endif
