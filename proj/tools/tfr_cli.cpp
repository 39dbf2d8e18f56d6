// Command-line front end: analyze | reduce | simulate | verify.
//
// Exit codes: 0 success, 2 parse/validation error, 3 hypothesis failure
// under --strict, 4 no parameterization path, 5 integrator failure,
// 6 failed verification invariants.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "tfr/latex.hpp"
#include "tfr/pipeline.hpp"
#include "tfr/sim.hpp"

using json = nlohmann::ordered_json;
using namespace tfr;

namespace {

struct GlobalFlags {
    std::uint64_t seed = 42;
    int samples = 20;
    std::string out;
    bool strict = false;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

json matrix_json(const QMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json rfmatrix_json(const RFMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).str());
        rows.push_back(row);
    }
    return rows;
}

json structural_json(const Model& m, const StructuralInfo& info) {
    json out;
    out["n"] = info.n;
    out["m"] = info.m_reactions;
    out["r"] = info.r;
    out["s"] = info.s;
    if (info.crn) {
        out["deficiency_fast"] = info.deficiency_fast;
        out["weakly_reversible_fast"] = info.weakly_reversible_fast;
        out["conservation_laws"] = matrix_json(info.conservation);
        out["L_f"] = matrix_json(info.Lf);
        json sets = json::array();
        for (const auto& s : info.ni_sets) {
            json names = json::array();
            for (int i : s.indices) names.push_back(m.species[i].name);
            sets.push_back(names);
        }
        out["noninteracting_sets"] = sets;
        out["trivial"] = info.trivial;
    }
    return out;
}

json hypothesis_json(const ReductionResult& res, const Model& m,
                     const GlobalFlags& g, bool* all_ok) {
    json out;
    BlanketReport rep;
    bool sampled = false;
    if (res.phi.exact) {
        rep = blanket_hypothesis_report(res.info.h0, res.dec, res.phi, g.samples, g.seed);
        sampled = true;
    }
    out["parameterization_found"] = true;
    out["h0_vanishes_on_phi"] = res.phi_report.h0_vanishes;
    out["dphi_rank_ok"] = res.phi_report.rank_ok;
    out["phi_positive"] = res.phi_report.positive;
    if (sampled) {
        out["rank_h0_jacobian_ok"] = rep.all_rank_ok;
        out["tikhonov_eigenvalues_ok"] = rep.all_pass_tikhonov;
    }
    out["stability_all_samples_stable"] = res.stability.all_stable;
    *all_ok = res.phi_report.h0_vanishes && res.phi_report.rank_ok &&
              res.phi_report.positive && res.stability.all_stable &&
              (!sampled || (rep.all_rank_ok && rep.all_pass_tikhonov));
    return out;
}

json parameterization_json(const ReductionResult& res) {
    json out;
    switch (res.phi.kind) {
        case ParamKind::rational: out["kind"] = "rational"; break;
        case ParamKind::monomial: out["kind"] = "monomial"; break;
        case ParamKind::user: out["kind"] = "user"; break;
    }
    out["exact"] = res.phi.exact;
    json phi = json::array();
    if (res.phi.exact)
        for (const auto& f : res.phi.phi) phi.push_back(f.str());
    out["phi"] = phi;
    if (res.phi.kind == ParamKind::monomial) {
        json xs = json::array();
        if (res.phi.exact)
            for (const auto& q : res.phi.x_star) xs.push_back(to_string(q));
        else
            for (double d : res.phi.x_star_num) xs.push_back(d);
        out["x_star"] = xs;
        if (res.phi.B) out["B"] = matrix_json(*res.phi.B);
    }
    out["domain"] = res.phi.domain_note;
    return out;
}

json reduction_json(const ReductionResult& res, bool with_latex) {
    json out;
    out["path"] = to_string(res.rsys.path);
    json rhs = json::array(), rhs_tex = json::array();
    for (const auto& f : res.rsys.rhs) {
        rhs.push_back(f.str());
        if (with_latex) rhs_tex.push_back(latex(f));
    }
    out["rhs"] = rhs;
    if (with_latex) out["rhs_latex"] = rhs_tex;
    if (res.rsys.R.rows() > 0) {
        out["R"] = rfmatrix_json(res.rsys.R);
        if (with_latex) {
            json rows = json::array();
            for (std::size_t i = 0; i < res.rsys.R.rows(); ++i) {
                json row = json::array();
                for (std::size_t j = 0; j < res.rsys.R.cols(); ++j)
                    row.push_back(latex(res.rsys.R(i, j)));
                rows.push_back(row);
            }
            out["R_latex"] = rows;
        }
    }
    out["trivial"] = res.rsys.trivial;
    json fi = json::array();
    for (const auto& f : res.first_integrals) fi.push_back(f.str());
    out["first_integrals"] = fi;
    return out;
}

json stability_json(const StabilityReport& rep) {
    json out;
    out["method"] = rep.method;
    out["deficiency_zero_shortcut"] = rep.deficiency_zero_shortcut;
    out["all_stable"] = rep.all_stable;
    out["samples"] = rep.samples.size();
    int stable = 0, unstable = 0, marginal = 0;
    for (const auto& s : rep.samples) {
        if (s.verdict == StabilityVerdict::stable) ++stable;
        else if (s.verdict == StabilityVerdict::unstable) ++unstable;
        else ++marginal;
    }
    out["stable"] = stable;
    out["unstable"] = unstable;
    out["marginal"] = marginal;
    return out;
}

void emit(const json& report, const GlobalFlags& g) {
    std::string text = report.dump(2);
    std::cout << text << "\n";
    if (!g.out.empty()) {
        std::ofstream f(g.out);
        f << text << "\n";
    }
}

Model load_model(const std::string& path) {
    std::string text = read_file(path);
    Model m = parse_model(text);
    auto diags = validate_model(m);
    bool bad = false;
    for (const auto& d : diags) {
        bool err = d.severity == Diagnostic::Severity::error;
        bad = bad || err;
        std::cerr << (err ? "error: " : "warning: ") << d.message;
        if (d.line > 0) std::cerr << " (line " << d.line << ")";
        std::cerr << "\n";
    }
    if (bad) throw std::runtime_error("model validation failed");
    return m;
}

ReductionOptions make_options(const GlobalFlags& g, const std::string& param,
                              const std::string& xstar, const Model& m) {
    ReductionOptions opts;
    opts.samples = g.samples;
    opts.seed = g.seed;
    if (param.rfind("noninteracting:", 0) == 0) {
        opts.param = "noninteracting";
        std::vector<int> set;
        std::stringstream ss(param.substr(15));
        std::string name;
        while (std::getline(ss, name, ',')) {
            bool found = false;
            for (const auto& sp : m.species)
                if (sp.name == name) { set.push_back(sp.index); found = true; }
            if (!found) throw std::runtime_error("unknown species '" + name + "' in --param");
        }
        std::sort(set.begin(), set.end());
        opts.ni_set = set;
    } else {
        opts.param = param;
    }
    if (!xstar.empty()) {
        std::vector<Rational> xs;
        std::stringstream ss(xstar);
        std::string cell;
        while (std::getline(ss, cell, ',')) xs.push_back(parse_rational(cell));
        opts.xstar_hint = xs;
    }
    return opts;
}

int cmd_analyze(const std::string& path, const GlobalFlags& g) {
    Model m = load_model(path);
    StructuralInfo info = analyze_structure(m);
    json report;
    report["schema"] = 1;
    report["command"] = "analyze";
    report["structural"] = structural_json(m, info);
    bool hyp_ok = false;
    try {
        ReductionOptions opts;
        opts.samples = g.samples;
        opts.seed = g.seed;
        ReductionResult res = run_reduction(m, opts);
        report["hypothesis"] = hypothesis_json(res, m, g, &hyp_ok);
    } catch (const NoReductionPathError& e) {
        json h;
        h["parameterization_found"] = false;
        h["reasons"] = e.reasons;
        report["hypothesis"] = h;
    }
    emit(report, g);
    if (g.strict && !hyp_ok) {
        std::cerr << "error: blanket hypothesis not verified\n";
        return 3;
    }
    return 0;
}

int cmd_reduce(const std::string& path, const GlobalFlags& g, const std::string& param,
               const std::string& xstar, bool with_latex) {
    Model m = load_model(path);
    ReductionOptions opts = make_options(g, param, xstar, m);
    ReductionResult res;
    try {
        res = run_reduction(m, opts);
    } catch (const NoReductionPathError& e) {
        for (const auto& r : e.reasons) std::cerr << "error: " << r << "\n";
        return 4;
    }
    json report;
    report["schema"] = 1;
    report["command"] = "reduce";
    report["structural"] = structural_json(m, res.info);
    bool hyp_ok = false;
    report["hypothesis"] = hypothesis_json(res, m, g, &hyp_ok);
    report["parameterization"] = parameterization_json(res);
    report["reduction"] = reduction_json(res, with_latex);
    report["stability"] = stability_json(res.stability);
    emit(report, g);
    if (g.strict && !hyp_ok) {
        std::cerr << "error: blanket hypothesis not verified\n";
        return 3;
    }
    return 0;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

int cmd_simulate(const std::string& path, const GlobalFlags& g, const std::string& param,
                 const std::string& eps_ladder_s, const std::string& v0_s,
                 const std::string& tau_s, const std::string& csv_out, double tol) {
    Model m = load_model(path);
    ReductionOptions opts = make_options(g, param, "", m);
    ReductionResult res;
    try {
        res = run_reduction(m, opts);
    } catch (const NoReductionPathError& e) {
        for (const auto& r : e.reasons) std::cerr << "error: " << r << "\n";
        return 4;
    }
    if (!res.phi.exact) {
        std::cerr << "error: simulation requires an exact parameterization\n";
        return 4;
    }

    std::vector<double> eps_ladder = parse_doubles(eps_ladder_s);
    for (double e : eps_ladder)
        if (!(e > 0)) {
            std::cerr << "error: every ladder entry must satisfy eps > 0\n";
            return 2;
        }
    std::vector<double> v0 = parse_doubles(v0_s);
    if (v0.size() != res.info.s) {
        std::cerr << "error: --v0 needs " << res.info.s << " entries\n";
        return 2;
    }
    for (double v : v0)
        if (!(v > 0)) {
            std::cerr << "error: --v0 entries must be positive\n";
            return 2;
        }
    std::vector<double> tau = parse_doubles(tau_s);
    if (tau.size() != 2 || !(0 < tau[0] && tau[0] < tau[1])) {
        std::cerr << "error: --tau needs 'tau_min,tau_max' with 0 < tau_min < tau_max\n";
        return 2;
    }

    try {
        ConvergenceResult conv = convergence_study(m, res.rsys, v0, eps_ladder, tau[0],
                                                   tau[1], tol);
        if (!csv_out.empty()) {
            Trajectory red = integrate_reduced(res.rsys, m, v0, tau[1], tol);
            std::ofstream f(csv_out + "-reduced.csv");
            write_trajectory_csv(f, red, res.info.s, res.info.n);
            auto x0 = res.phi.eval_num(v0);
            for (double e : eps_ladder) {
                Trajectory full = integrate_full(m, e, x0, tau[1], tol);
                std::ostringstream name;
                name << csv_out << "-full-eps-" << e << ".csv";
                std::ofstream ff(name.str());
                write_trajectory_csv(ff, full, 0, res.info.n);
            }
        }
        json report;
        report["schema"] = 1;
        report["command"] = "simulate";
        report["eps_ladder"] = conv.eps_ladder;
        report["errors"] = conv.errors;
        report["ratios"] = conv.ratios;
        report["tau_window"] = tau;
        report["tolerance"] = tol;
        bool monotone = true, in_band = true;
        for (std::size_t i = 0; i + 1 < conv.errors.size(); ++i)
            monotone = monotone && conv.errors[i + 1] < conv.errors[i];
        for (double r : conv.ratios) in_band = in_band && 0.3 <= r && r <= 0.75;
        report["errors_monotone_decreasing"] = monotone;
        report["ratios_in_first_order_band"] = in_band;
        emit(report, g);
        return 0;
    } catch (const StepSizeUnderflow& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const DenominatorBlowup& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const PositivityViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
}

int cmd_verify(const std::string& path, const GlobalFlags& g) {
    Model m = load_model(path);
    ReductionOptions opts;
    opts.samples = g.samples;
    opts.seed = g.seed;
    ReductionResult res;
    try {
        res = run_reduction(m, opts);
    } catch (const NoReductionPathError& e) {
        for (const auto& r : e.reasons) std::cerr << "error: " << r << "\n";
        return 4;
    }

    std::vector<std::pair<std::string, bool>> checks;
    auto add = [&](const std::string& name, bool ok) { checks.emplace_back(name, ok); };

    add("h0(Phi(v)) == 0", res.phi_report.h0_vanishes);
    add("rank DPhi == s", res.phi_report.rank_ok);
    add("Phi positive on positive v", res.phi_report.positive);

    if (res.phi.exact && res.rsys.R.rows() > 0) {
        RFMatrix DPhi = dphi(res.phi);
        RFMatrix Pphi =
            detail::compose_poly_matrix(res.dec.P, res.phi.phi, res.phi.vnames);
        add("R * DPhi == I_s", (res.rsys.R * DPhi).is_identity());
        add("R * P(Phi) == 0", (res.rsys.R * Pphi).is_zero());
        RFMatrix E = DPhi * res.rsys.R;
        add("(DPhi R)^2 == DPhi R", (E * E - E).is_zero());

        std::mt19937_64 rng(g.seed);
        bool q_idem = true, q_kills_p = true, q_rank = true, lemma_ok = true;
        for (int t = 0; t < g.samples; ++t) {
            auto v = random_positive_point(rng, res.info.s);
            std::vector<Rational> x;
            for (const auto& f : res.phi.phi) x.push_back(f.eval(v));
            QMatrix Q = projection_Q(res.dec, x);
            q_idem = q_idem && (Q * Q - Q).is_zero();
            QMatrix P = eval_poly_matrix(res.dec.P, x);
            q_kills_p = q_kills_p && (Q * P).is_zero();
            q_rank = q_rank && Q.rank() == res.info.s;
            QMatrix A = DPhi.eval(v), B = res.rsys.R.eval(v);
            lemma_ok = lemma_ok && lemma_BA_check(A, B);
        }
        add("Q^2 == Q at samples", q_idem);
        add("Q * P == 0 at samples", q_kills_p);
        add("rank Q == s at samples", q_rank);
        add("pseudo-inverse lemma: B A == I_s", lemma_ok);

        bool fi_ok = true;
        try {
            if (res.info.conservation.rows() > 0)
                inherited_first_integrals(res.info.conservation, res.phi, res.rsys.rhs);
        } catch (const InconsistencyError&) {
            fi_ok = false;
        }
        add("conservation laws inherited (D(psi o Phi) . rhs == 0)", fi_ok);

        BlanketReport rep =
            blanket_hypothesis_report(res.info.h0, res.dec, res.phi, g.samples, g.seed);
        add("blanket hypothesis at samples (rank, A nonsingular, Re < 0)",
            rep.all_pass_tikhonov);
    }
    add("stability analysis: all samples stable", res.stability.all_stable);

    bool all_ok = true;
    for (const auto& [name, ok] : checks) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
        all_ok = all_ok && ok;
    }
    if (!all_ok) {
        std::cerr << "error: failed invariants:\n";
        for (const auto& [name, ok] : checks)
            if (!ok) std::cerr << "  " << name << "\n";
        return 6;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular-perturbation reduction of slow-fast reaction networks"};
    app.require_subcommand(1);
    GlobalFlags g;
    app.add_option("--seed", g.seed, "PRNG seed for sampling")->capture_default_str();
    app.add_option("--samples", g.samples, "number of random samples")
        ->capture_default_str();
    app.add_option("--out", g.out, "write the JSON report to this path");
    app.add_flag("--strict", g.strict, "fail when the blanket hypothesis is unverified");

    std::string model_path, param = "auto", xstar, eps_ladder = "0.04,0.02,0.01,0.005";
    std::string v0 = "1,1", tau = "0.1,5", csv_out;
    double tol = 1e-10;
    bool with_latex = false;

    app.fallthrough();  // allow global flags after the subcommand name

    auto* analyze = app.add_subcommand("analyze", "structural analysis");
    analyze->add_option("model", model_path, "model file")->required();

    auto* reduce = app.add_subcommand("reduce", "compute the reduced system");
    reduce->add_option("model", model_path, "model file")->required();
    reduce->add_option("--param", param,
                       "auto | complexbalanced | noninteracting[:SET] | user");
    reduce->add_option("--xstar", xstar, "complex balanced steady state (comma list)");
    reduce->add_flag("--latex", with_latex, "include LaTeX renderings");

    auto* simulate = app.add_subcommand("simulate", "convergence study");
    simulate->add_option("model", model_path, "model file")->required();
    simulate->add_option("--param", param,
                         "auto | complexbalanced | noninteracting[:SET] | user");
    simulate->add_option("--eps-ladder", eps_ladder, "decreasing positive eps values");
    simulate->add_option("--v0", v0, "initial slow coordinates");
    simulate->add_option("--tau", tau, "slow-time window 'tau_min,tau_max'");
    simulate->add_option("--csv-out", csv_out, "prefix for trajectory CSV files");
    simulate->add_option("--tol", tol, "integrator local error tolerance")
        ->capture_default_str();

    auto* verify = app.add_subcommand("verify", "run the invariant suite");
    verify->add_option("model", model_path, "model file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(model_path, g);
        if (app.got_subcommand(reduce))
            return cmd_reduce(model_path, g, param, xstar, with_latex);
        if (app.got_subcommand(simulate))
            return cmd_simulate(model_path, g, param, eps_ladder, v0, tau, csv_out, tol);
        if (app.got_subcommand(verify)) return cmd_verify(model_path, g);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
