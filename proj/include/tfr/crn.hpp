#ifndef TFR_CRN_HPP
#define TFR_CRN_HPP

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "tfr/model.hpp"
#include "tfr/multipoly.hpp"
#include "tfr/qmatrix.hpp"

namespace tfr {

// Stoichiometric matrix N, kinetic-order matrix Y and rate-constant
// vector K of a mass-action network, columns in file order.
struct StoichData {
    QMatrix N;  // n x m, integer entries: product - reactant
    QMatrix Y;  // n x m, nonnegative integer entries: reactant vectors
    std::vector<Rational> K;
};

struct SlowFastSplit {
    StoichData fast, slow;
    std::vector<std::size_t> fast_cols, slow_cols;  // original reaction indices
    std::size_t r = 0;  // rank of N_f
    std::size_t s = 0;  // n - r
    std::size_t n = 0;
};

struct NetworkGraph {
    std::vector<Complex> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // reactant -> product
    std::vector<std::vector<std::size_t>> linkage_classes;   // node indices
    std::vector<int> scc_id;           // per node
    std::vector<bool> scc_terminal;    // per scc
};

inline StoichData build_stoich(const Model& m) {
    if (!m.is_crn()) throw std::invalid_argument("build_stoich: CRN model required");
    std::size_t n = m.species.size(), cols = m.reactions.size();
    StoichData sd{QMatrix(n, cols), QMatrix(n, cols), {}};
    sd.K.reserve(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        const Reaction& rx = m.reactions[j];
        for (const auto& [sp, c] : rx.reactant.coeff) {
            sd.N(sp, j) -= c;
            sd.Y(sp, j) = c;
        }
        for (const auto& [sp, c] : rx.product.coeff) sd.N(sp, j) += c;
        sd.K.push_back(rx.rate_constant);
    }
    return sd;
}

inline SlowFastSplit split_slow_fast(const StoichData& sd, const Model& m) {
    SlowFastSplit sp;
    sp.n = sd.N.rows();
    for (std::size_t j = 0; j < m.reactions.size(); ++j)
        (m.reactions[j].fast ? sp.fast_cols : sp.slow_cols).push_back(j);
    auto take = [&](const std::vector<std::size_t>& cols) {
        StoichData part{QMatrix(sp.n, cols.size()), QMatrix(sp.n, cols.size()), {}};
        for (std::size_t k = 0; k < cols.size(); ++k) {
            for (std::size_t i = 0; i < sp.n; ++i) {
                part.N(i, k) = sd.N(i, cols[k]);
                part.Y(i, k) = sd.Y(i, cols[k]);
            }
            part.K.push_back(sd.K[cols[k]]);
        }
        return part;
    };
    sp.fast = take(sp.fast_cols);
    sp.slow = take(sp.slow_cols);
    sp.r = sp.fast.N.rank();
    sp.s = sp.n - sp.r;
    return sp;
}

// Basis of {y : y A = 0} as rows, canonical integer echelon form.
inline QMatrix left_kernel_basis(const QMatrix& A) { return A.left_kernel(); }

// Conservation laws of the full network: left kernel of N.
inline QMatrix conservation_laws(const StoichData& sd) { return left_kernel_basis(sd.N); }

// Digraph on the distinct complexes of the given reactions, plus any
// explicitly requested isolated nodes.
inline NetworkGraph build_graph(const std::vector<Reaction>& reactions,
                                const std::vector<Complex>& extra_nodes = {}) {
    NetworkGraph g;
    std::map<Complex, std::size_t> index;
    auto node_of = [&](const Complex& c) {
        auto it = index.find(c);
        if (it != index.end()) return it->second;
        index[c] = g.nodes.size();
        g.nodes.push_back(c);
        return g.nodes.size() - 1;
    };
    for (const auto& rx : reactions)
        g.edges.emplace_back(node_of(rx.reactant), node_of(rx.product));
    for (const auto& c : extra_nodes) node_of(c);

    std::size_t nn = g.nodes.size();
    // linkage classes: connected components of the underlying undirected graph
    std::vector<int> comp(nn, -1);
    std::vector<std::vector<std::size_t>> adj(nn);
    for (const auto& [a, b] : g.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    int nc = 0;
    for (std::size_t v = 0; v < nn; ++v) {
        if (comp[v] != -1) continue;
        std::vector<std::size_t> stack{v};
        comp[v] = nc;
        g.linkage_classes.emplace_back();
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            g.linkage_classes.back().push_back(u);
            for (auto w : adj[u])
                if (comp[w] == -1) {
                    comp[w] = nc;
                    stack.push_back(w);
                }
        }
        std::sort(g.linkage_classes.back().begin(), g.linkage_classes.back().end());
        ++nc;
    }

    // strongly connected components (Tarjan, iterative)
    std::vector<std::vector<std::size_t>> out(nn);
    for (const auto& [a, b] : g.edges) out[a].push_back(b);
    g.scc_id.assign(nn, -1);
    std::vector<int> low(nn), num(nn, -1);
    std::vector<bool> on_stack(nn, false);
    std::vector<std::size_t> scc_stack;
    int counter = 0, scc_count = 0;
    struct Frame { std::size_t v; std::size_t child; };
    for (std::size_t root = 0; root < nn; ++root) {
        if (num[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        num[root] = low[root] = counter++;
        scc_stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, child] = frames.back();
            if (child < out[v].size()) {
                std::size_t w = out[v][child++];
                if (num[w] == -1) {
                    num[w] = low[w] = counter++;
                    scc_stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], num[w]);
                }
            } else {
                if (low[v] == num[v]) {
                    while (true) {
                        std::size_t w = scc_stack.back();
                        scc_stack.pop_back();
                        on_stack[w] = false;
                        g.scc_id[w] = scc_count;
                        if (w == v) break;
                    }
                    ++scc_count;
                }
                std::size_t v_done = v;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().v] = std::min(low[frames.back().v], low[v_done]);
            }
        }
    }
    // an scc is terminal iff no edge leaves it
    g.scc_terminal.assign(scc_count, true);
    for (const auto& [a, b] : g.edges)
        if (g.scc_id[a] != g.scc_id[b]) g.scc_terminal[g.scc_id[a]] = false;
    return g;
}

inline NetworkGraph build_fast_graph(const Model& m) {
    std::vector<Reaction> fast;
    for (const auto& rx : m.reactions)
        if (rx.fast) fast.push_back(rx);
    std::vector<Complex> extra;
    for (int sp : m.fast_node_species) {
        Complex c;
        c.coeff[sp] = 1;
        extra.push_back(c);
    }
    return build_graph(fast, extra);
}

inline std::size_t deficiency(const NetworkGraph& g, const QMatrix& N) {
    long d = static_cast<long>(g.nodes.size()) - static_cast<long>(N.rank()) -
             static_cast<long>(g.linkage_classes.size());
    if (d < 0)
        throw std::logic_error("negative deficiency: graph/matrix mismatch");
    return static_cast<std::size_t>(d);
}

inline bool weakly_reversible(const NetworkGraph& g) {
    // every linkage class strongly connected: all nodes within a class
    // share an scc (isolated nodes are classes of size one)
    for (const auto& lc : g.linkage_classes) {
        for (std::size_t i = 1; i < lc.size(); ++i)
            if (g.scc_id[lc[i]] != g.scc_id[lc[0]]) return false;
    }
    return true;
}

// Mass-action vector field N * (K o x^Y) as exact polynomials in the
// species concentrations.
inline std::vector<MultiPoly> mass_action_vf(const StoichData& sd,
                                             const std::vector<std::string>& xvars) {
    std::size_t n = sd.N.rows(), cols = sd.N.cols();
    std::vector<MultiPoly> vf(n, MultiPoly(xvars));
    for (std::size_t j = 0; j < cols; ++j) {
        std::vector<int> exps(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            exps[i] = static_cast<int>(sd.Y(i, j).get_num().get_si());
        MultiPoly rate = MultiPoly::monomial(xvars, exps, sd.K[j]);
        for (std::size_t i = 0; i < n; ++i) {
            if (sd.N(i, j) == 0) continue;
            vf[i] += rate * sd.N(i, j);
        }
    }
    return vf;
}

// Fast part h0 and slow part h1 of the model, in the state variables.
inline std::pair<std::vector<MultiPoly>, std::vector<MultiPoly>> model_vector_fields(
    const Model& m, const SlowFastSplit& split) {
    auto xvars = m.state_var_names();
    if (m.is_crn())
        return {mass_action_vf(split.fast, xvars), mass_action_vf(split.slow, xvars)};
    const GenericModel& g = *m.generic;
    std::vector<MultiPoly> h0(g.state_vars.size(), MultiPoly(xvars));
    for (std::size_t i = 0; i < g.P.size(); ++i)
        for (std::size_t j = 0; j < g.mu.size(); ++j) h0[i] += g.P[i][j] * g.mu[j];
    return {h0, g.h1};
}

}  // namespace tfr

#endif
