#ifndef TFR_MODEL_HPP
#define TFR_MODEL_HPP

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tfr/expr.hpp"
#include "tfr/qmatrix.hpp"

namespace tfr {

struct Species {
    std::string name;
    int index;
};

// A node of the reaction digraph: nonnegative integer combination of
// species. The empty complex is the node 0.
struct Complex {
    std::map<int, long> coeff;  // species index -> coefficient > 0

    bool operator==(const Complex& o) const { return coeff == o.coeff; }
    bool operator<(const Complex& o) const { return coeff < o.coeff; }
    bool empty() const { return coeff.empty(); }
    long coefficient(int sp) const {
        auto it = coeff.find(sp);
        return it == coeff.end() ? 0 : it->second;
    }
};

struct Reaction {
    Complex reactant, product;
    Rational rate_constant;
    bool fast;
    int line;
};

// Non-CRN input: a polynomial slow-fast system given via h0 = P*mu plus
// the slow part h1, optionally with a user parameterization and L.
struct GenericModel {
    std::vector<std::string> state_vars;
    std::vector<std::vector<MultiPoly>> P;  // n rows, r columns
    std::vector<MultiPoly> mu;              // length r
    std::vector<MultiPoly> h1;              // length n
    std::optional<std::vector<RatFun>> phi; // in v1..vs
    std::optional<QMatrix> L;               // s x n rational
};

struct Model {
    std::vector<Species> species;
    std::vector<Reaction> reactions;
    std::optional<GenericModel> generic;
    std::vector<int> fast_node_species;  // @fastnodes override, species indices
    std::optional<std::vector<RatFun>> user_phi;  // CRN user parameterization, in v
    std::optional<QMatrix> user_L;                // CRN user L, s x n
    Rational epsilon_default = Rational(1, 100);

    bool is_crn() const { return !generic.has_value(); }
    std::size_t dimension() const {
        return generic ? generic->state_vars.size() : species.size();
    }
    std::vector<std::string> state_var_names() const {
        if (generic) return generic->state_vars;
        std::vector<std::string> v;
        v.reserve(species.size());
        for (const auto& s : species) v.push_back(s.name);
        return v;
    }
};

struct Diagnostic {
    enum class Severity { error, warning } severity;
    std::string message;
    int line;
};

namespace detail {

constexpr long kMaxStoichCoeff = 1000000;

class ModelParser {
public:
    explicit ModelParser(const std::string& text) : text_(text) {}

    Model parse() {
        if (text_.empty()) throw ParseError("empty model text", 1, 1);
        std::istringstream is(text_);
        std::string raw;
        int line_no = 0;
        while (std::getline(is, raw)) {
            ++line_no;
            std::string line = strip_comment(raw);
            std::size_t i = line.find_first_not_of(" \t\r");
            if (i == std::string::npos) continue;
            line = line.substr(i);
            if (line[0] == '@') {
                handle_marker(line, line_no);
            } else {
                handle_content(line, line_no);
            }
        }
        finish();
        return std::move(model_);
    }

private:
    static std::string strip_comment(const std::string& s) {
        auto h = s.find('#');
        return h == std::string::npos ? s : s.substr(0, h);
    }
    static std::string rstrip(std::string s) {
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
            s.pop_back();
        return s;
    }

    void handle_marker(const std::string& line, int line_no) {
        std::size_t end = line.find_first_of(" \t");
        std::string marker = line.substr(0, end);
        std::string rest = end == std::string::npos ? "" : rstrip(line.substr(end + 1));
        static const std::vector<std::string> known = {
            "@species", "@fast", "@slow", "@fastnodes", "@generic",
            "@vars",    "@phi",  "@P",    "@mu",        "@h1", "@L"};
        bool ok = false;
        for (const auto& k : known) ok = ok || (k == marker);
        if (!ok) throw ParseError("unknown section marker '" + marker + "'", line_no, 1);
        section_ = marker;
        if (marker == "@generic") generic_seen_ = true;
        if (!rest.empty()) handle_content(rest, line_no);
    }

    void handle_content(const std::string& line, int line_no) {
        if (section_ == "@species") {
            for (const auto& name : split_names(line, line_no)) add_species(name, line_no);
        } else if (section_ == "@fastnodes") {
            for (const auto& name : split_names(line, line_no))
                fast_node_names_.emplace_back(name, line_no);
        } else if (section_ == "@fast" || section_ == "@slow") {
            parse_reaction(line, line_no, section_ == "@fast");
        } else if (section_ == "@vars") {
            for (const auto& name : split_names(line, line_no)) {
                for (const auto& v : gvars_)
                    if (v == name)
                        throw ParseError("duplicate state variable '" + name + "'", line_no, 1);
                gvars_.push_back(name);
            }
        } else if (section_ == "@P") {
            p_rows_.emplace_back(line, line_no);
        } else if (section_ == "@mu") {
            mu_rows_.emplace_back(line, line_no);
        } else if (section_ == "@h1") {
            h1_rows_.emplace_back(line, line_no);
        } else if (section_ == "@phi") {
            phi_rows_.emplace_back(line, line_no);
        } else if (section_ == "@L") {
            l_rows_.emplace_back(line, line_no);
        } else {
            throw ParseError("content before any section marker", line_no, 1);
        }
    }

    std::vector<std::string> split_names(const std::string& line, int line_no) {
        std::vector<std::string> names;
        std::istringstream is(line);
        std::string tok;
        while (is >> tok) {
            for (char c : tok)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
                    throw ParseError("bad identifier '" + tok + "'", line_no, 1);
            if (!std::isalpha(static_cast<unsigned char>(tok[0])) && tok[0] != '_')
                throw ParseError("bad identifier '" + tok + "'", line_no, 1);
            names.push_back(tok);
        }
        return names;
    }

    void add_species(const std::string& name, int line_no) {
        for (const auto& s : model_.species)
            if (s.name == name)
                throw ParseError("duplicate species '" + name + "'", line_no, 1);
        model_.species.push_back({name, static_cast<int>(model_.species.size())});
    }

    int species_index(const std::string& name, int line_no, int col) const {
        for (const auto& s : model_.species)
            if (s.name == name) return s.index;
        throw ParseError("unknown species '" + name + "'", line_no, col);
    }

    // COMPLEX ("->" | "<->") COMPLEX ":" RATIONAL ("," RATIONAL)?
    void parse_reaction(const std::string& line, int line_no, bool fast) {
        std::size_t pos = 0;
        Complex lhs = parse_complex(line, pos, line_no);
        skip_ws(line, pos);
        bool reversible;
        if (line.compare(pos, 3, "<->") == 0) { reversible = true; pos += 3; }
        else if (line.compare(pos, 2, "->") == 0) { reversible = false; pos += 2; }
        else throw ParseError("expected '->' or '<->'", line_no, static_cast<int>(pos) + 1);
        Complex rhs = parse_complex(line, pos, line_no);
        skip_ws(line, pos);
        if (pos >= line.size() || line[pos] != ':')
            throw ParseError("expected ':' before rate constant", line_no,
                             static_cast<int>(pos) + 1);
        ++pos;
        Rational kf = parse_rate(line, pos, line_no);
        std::optional<Rational> kr;
        skip_ws(line, pos);
        if (pos < line.size() && line[pos] == ',') {
            ++pos;
            kr = parse_rate(line, pos, line_no);
        }
        skip_ws(line, pos);
        if (pos != line.size())
            throw ParseError("unexpected trailing input", line_no, static_cast<int>(pos) + 1);
        if (reversible && !kr)
            throw ParseError("reversible reaction needs two rate constants", line_no,
                             static_cast<int>(pos) + 1);
        if (!reversible && kr)
            throw ParseError("irreversible reaction takes one rate constant", line_no,
                             static_cast<int>(pos) + 1);
        if (lhs == rhs)
            throw ParseError("reactant and product complexes are identical", line_no, 1);
        add_reaction(lhs, rhs, kf, fast, line_no);
        if (reversible) add_reaction(rhs, lhs, *kr, fast, line_no);
    }

    void add_reaction(const Complex& r, const Complex& p, const Rational& k, bool fast,
                      int line_no) {
        if (k <= 0)
            throw ParseError("rate constant must be positive", line_no, 1);
        model_.reactions.push_back({r, p, k, fast, line_no});
    }

    Complex parse_complex(const std::string& line, std::size_t& pos, int line_no) {
        Complex c;
        skip_ws(line, pos);
        if (pos < line.size() && line[pos] == '0' &&
            (pos + 1 == line.size() || !std::isalnum(static_cast<unsigned char>(line[pos + 1])))) {
            ++pos;
            return c;  // the empty complex
        }
        while (true) {
            skip_ws(line, pos);
            long coeff = 1;
            if (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) {
                coeff = 0;
                while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) {
                    coeff = coeff * 10 + (line[pos++] - '0');
                    if (coeff > kMaxStoichCoeff)
                        throw ParseError("stoichiometric coefficient exceeds 10^6", line_no,
                                         static_cast<int>(pos) + 1);
                }
                skip_ws(line, pos);
            }
            if (pos >= line.size() ||
                (!std::isalpha(static_cast<unsigned char>(line[pos])) && line[pos] != '_'))
                throw ParseError("species name expected in complex", line_no,
                                 static_cast<int>(pos) + 1);
            std::size_t start = pos;
            while (pos < line.size() &&
                   (std::isalnum(static_cast<unsigned char>(line[pos])) || line[pos] == '_'))
                ++pos;
            int idx = species_index(line.substr(start, pos - start), line_no,
                                    static_cast<int>(start) + 1);
            c.coeff[idx] += coeff;
            if (c.coeff[idx] == 0) c.coeff.erase(idx);
            skip_ws(line, pos);
            if (pos < line.size() && line[pos] == '+' &&
                line.compare(pos, 2, "->") != 0) {
                ++pos;
                continue;
            }
            return c;
        }
    }

    Rational parse_rate(const std::string& line, std::size_t& pos, int line_no) {
        skip_ws(line, pos);
        std::size_t start = pos;
        if (pos < line.size() && line[pos] == '-') ++pos;
        while (pos < line.size() &&
               (std::isdigit(static_cast<unsigned char>(line[pos])) || line[pos] == '/' ||
                line[pos] == '.'))
            ++pos;
        if (start == pos)
            throw ParseError("rate constant expected", line_no, static_cast<int>(start) + 1);
        try {
            return parse_rational(line.substr(start, pos - start));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), line_no, static_cast<int>(start) + 1);
        }
    }

    static void skip_ws(const std::string& line, std::size_t& pos) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    }

    std::vector<MultiPoly> parse_poly_rows(
        const std::vector<std::pair<std::string, int>>& rows,
        const std::vector<std::string>& vars) {
        std::vector<MultiPoly> out;
        for (const auto& [text, line] : rows) out.push_back(parse_poly(text, vars, line));
        return out;
    }

    void finish() {
        // resolve @fastnodes names
        for (const auto& [name, line] : fast_node_names_)
            model_.fast_node_species.push_back(species_index(name, line, 1));

        if (!generic_seen_) {
            finish_crn_user_sections();
            return;
        }
        GenericModel g;
        g.state_vars = gvars_;
        if (g.state_vars.empty())
            throw ParseError("@generic model requires @vars", 1, 1);
        std::size_t n = g.state_vars.size();
        // P: one row per line, comma-separated entries
        std::size_t r = 0;
        for (const auto& [text, line] : p_rows_) {
            std::vector<MultiPoly> row;
            for (const auto& cell : split_commas(text))
                row.push_back(parse_poly(cell, g.state_vars, line));
            if (r == 0) r = row.size();
            else if (row.size() != r)
                throw ParseError("ragged @P matrix", line, 1);
            g.P.push_back(std::move(row));
        }
        g.mu = parse_poly_rows(mu_rows_, g.state_vars);
        g.h1 = parse_poly_rows(h1_rows_, g.state_vars);
        if (g.P.size() != n || g.h1.size() != n || g.mu.size() != r) {
            // dimension mismatches are reported by validate_model; only a
            // malformed ragged matrix is fatal here
        }
        std::size_t s = n > g.mu.size() ? n - g.mu.size() : 0;
        if (!phi_rows_.empty()) {
            std::vector<std::string> vnames;
            for (std::size_t i = 1; i <= std::max<std::size_t>(s, 1); ++i)
                vnames.push_back("v" + std::to_string(i));
            std::vector<RatFun> phi;
            for (const auto& [text, line] : phi_rows_)
                phi.push_back(parse_ratfun(text, vnames, line));
            g.phi = std::move(phi);
        }
        if (!l_rows_.empty()) {
            QMatrix L(l_rows_.size(), n);
            for (std::size_t i = 0; i < l_rows_.size(); ++i) {
                auto cells = split_commas(l_rows_[i].first);
                if (cells.size() != n)
                    throw ParseError("@L row must have one entry per state variable",
                                     l_rows_[i].second, 1);
                for (std::size_t j = 0; j < n; ++j) {
                    try {
                        L(i, j) = parse_rational(trim(cells[j]));
                    } catch (const std::invalid_argument& e) {
                        throw ParseError(e.what(), l_rows_[i].second, 1);
                    }
                }
            }
            g.L = std::move(L);
        }
        model_.generic = std::move(g);
    }

    // CRN models may carry a user parameterization (@phi, one entry per
    // species) and a rational L (@L, s rows). The v-dimension is the @L row
    // count when present, else the largest v<k> index mentioned in @phi.
    void finish_crn_user_sections() {
        if (!p_rows_.empty() || !mu_rows_.empty() || !h1_rows_.empty() || !gvars_.empty())
            throw ParseError("@P/@mu/@h1/@vars require @generic", 1, 1);
        if (phi_rows_.empty() && l_rows_.empty()) return;
        std::size_t n = model_.species.size();
        std::size_t s = l_rows_.size();
        if (s == 0) {
            for (const auto& [text, line] : phi_rows_) {
                for (std::size_t i = 0; i + 1 < text.size(); ++i) {
                    if (text[i] != 'v' || !std::isdigit(static_cast<unsigned char>(text[i + 1])))
                        continue;
                    if (i > 0 && (std::isalnum(static_cast<unsigned char>(text[i - 1])) ||
                                  text[i - 1] == '_'))
                        continue;
                    s = std::max(s, static_cast<std::size_t>(std::stoul(text.substr(i + 1))));
                }
            }
        }
        if (s == 0) throw ParseError("cannot infer v-dimension for @phi", 1, 1);
        std::vector<std::string> vnames;
        for (std::size_t i = 1; i <= s; ++i) vnames.push_back("v" + std::to_string(i));
        if (!phi_rows_.empty()) {
            std::vector<RatFun> phi;
            for (const auto& [text, line] : phi_rows_)
                phi.push_back(parse_ratfun(text, vnames, line));
            if (phi.size() != n)
                throw ParseError("@phi must have one entry per species",
                                 phi_rows_.back().second, 1);
            model_.user_phi = std::move(phi);
        }
        if (!l_rows_.empty()) {
            QMatrix L(l_rows_.size(), n);
            for (std::size_t i = 0; i < l_rows_.size(); ++i) {
                auto cells = split_commas(l_rows_[i].first);
                if (cells.size() != n)
                    throw ParseError("@L row must have one entry per species",
                                     l_rows_[i].second, 1);
                for (std::size_t j = 0; j < n; ++j) {
                    try {
                        L(i, j) = parse_rational(trim(cells[j]));
                    } catch (const std::invalid_argument& e) {
                        throw ParseError(e.what(), l_rows_[i].second, 1);
                    }
                }
            }
            model_.user_L = std::move(L);
        }
    }

    static std::string trim(std::string s) {
        std::size_t a = s.find_first_not_of(" \t");
        std::size_t b = s.find_last_not_of(" \t");
        return a == std::string::npos ? "" : s.substr(a, b - a + 1);
    }
    static std::vector<std::string> split_commas(const std::string& s) {
        std::vector<std::string> out;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= s.size(); ++i) {
            if (i == s.size() || s[i] == ',') {
                out.push_back(s.substr(start, i - start));
                start = i + 1;
            }
        }
        return out;
    }

    const std::string& text_;
    Model model_;
    std::string section_;
    bool generic_seen_ = false;
    std::vector<std::string> gvars_;
    std::vector<std::pair<std::string, int>> fast_node_names_;
    std::vector<std::pair<std::string, int>> p_rows_, mu_rows_, h1_rows_, phi_rows_,
        l_rows_;
};

}  // namespace detail

inline Model parse_model(const std::string& text) {
    return detail::ModelParser(text).parse();
}

inline std::vector<Diagnostic> validate_model(const Model& m) {
    std::vector<Diagnostic> out;
    using S = Diagnostic::Severity;
    if (m.is_crn()) {
        if (m.species.empty())
            out.push_back({S::error, "model declares no species", 0});
        bool any_fast = false;
        std::vector<bool> used(m.species.size(), false);
        for (const auto& rx : m.reactions) {
            any_fast = any_fast || rx.fast;
            if (rx.rate_constant <= 0)
                out.push_back({S::error, "nonpositive rate constant", rx.line});
            for (const auto& [sp, c] : rx.reactant.coeff) used[sp] = true;
            for (const auto& [sp, c] : rx.product.coeff) used[sp] = true;
        }
        if (!any_fast)
            out.push_back({S::error, "model has no fast reaction", 0});
        for (std::size_t i = 0; i < used.size(); ++i)
            if (!used[i])
                out.push_back({S::warning, "unused species " + m.species[i].name, 0});
    } else {
        const GenericModel& g = *m.generic;
        std::size_t n = g.state_vars.size();
        std::size_t r = g.mu.size();
        if (n == 0) out.push_back({S::error, "generic model declares no state variables", 0});
        if (r == 0) out.push_back({S::error, "generic model has no fast equations (@mu empty)", 0});
        if (g.P.size() != n)
            out.push_back({S::error,
                           "dimension mismatch: @P has " + std::to_string(g.P.size()) +
                               " rows, expected " + std::to_string(n), 0});
        for (const auto& row : g.P)
            if (row.size() != r) {
                out.push_back({S::error,
                               "dimension mismatch: @P has " + std::to_string(row.size()) +
                                   " columns, expected " + std::to_string(r), 0});
                break;
            }
        if (g.h1.size() != n)
            out.push_back({S::error,
                           "dimension mismatch: @h1 has " + std::to_string(g.h1.size()) +
                               " rows, expected " + std::to_string(n), 0});
        if (r >= n && n > 0)
            out.push_back({S::error, "generic model needs r < n (some slow dimension)", 0});
        std::size_t s = n > r ? n - r : 0;
        if (g.phi && g.phi->size() != n)
            out.push_back({S::error, "dimension mismatch: @phi must have one entry per state variable", 0});
        if (g.L && (g.L->rows() != s || g.L->cols() != n))
            out.push_back({S::error, "dimension mismatch: @L must be s x n", 0});
    }
    return out;
}

// Deterministic pretty-printer; parse(print(m)) is structurally identical
// to m for CRN models.
inline std::string print_model(const Model& m) {
    std::ostringstream os;
    os << "@species";
    for (const auto& s : m.species) os << " " << s.name;
    os << "\n";
    auto print_complex = [&](const Complex& c) {
        if (c.empty()) { os << "0"; return; }
        bool first = true;
        for (const auto& [sp, co] : c.coeff) {
            if (!first) os << " + ";
            first = false;
            if (co != 1) os << co << " ";
            os << m.species[sp].name;
        }
    };
    for (bool fast : {true, false}) {
        bool any = false;
        for (const auto& rx : m.reactions) any = any || (rx.fast == fast);
        if (!any) continue;
        os << (fast ? "@fast\n" : "@slow\n");
        for (const auto& rx : m.reactions) {
            if (rx.fast != fast) continue;
            print_complex(rx.reactant);
            os << " -> ";
            print_complex(rx.product);
            os << " : " << to_string(rx.rate_constant) << "\n";
        }
    }
    if (!m.fast_node_species.empty()) {
        os << "@fastnodes";
        for (int sp : m.fast_node_species) os << " " << m.species[sp].name;
        os << "\n";
    }
    return os.str();
}

}  // namespace tfr

#endif
