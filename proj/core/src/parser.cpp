#include "rxnet/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "rxnet/errors.hpp"

namespace rxnet {

bool ParseResult::has_errors() const {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const ParseDiagnostic& d) { return d.severity == Severity::error; });
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general);
    std::string s(buf, ptr);
    // Normalize exponent: "5e-05" -> "5e-5", "1e+20" -> "1e20".
    const size_t e = s.find('e');
    if (e != std::string::npos) {
        size_t p = e + 1;
        std::string exp;
        if (p < s.size() && (s[p] == '+' || s[p] == '-')) {
            if (s[p] == '-') exp.push_back('-');
            ++p;
        }
        while (p < s.size() - 1 && s[p] == '0') ++p;
        exp.append(s, p, std::string::npos);
        s.erase(e + 1);
        s += exp;
    }
    return s;
}

namespace {

struct RawTerm {
    double coeff = 1.0;
    std::string name;
    int line = 1, column = 1;
};

struct RateToken {
    bool is_symbol = false;
    double value = 0.0;
    std::string symbol;
    int line = 1, column = 1;
};

struct RawReaction {
    std::vector<RawTerm> lhs, rhs;
    RateToken forward;
    std::optional<RateToken> backward;  // set for "<->"
    int line = 1;
};

struct ScaleEntry {
    std::string species;
    int reaction = 0;  // 1-based; 0 means "*"
    double factor = 1.0;
    int line = 1, column = 1;
};

struct InitEntry {
    double value = 0.0;
    int line = 1, column = 1;
};

class LineParser {
public:
    LineParser(std::string_view text, int line, std::vector<ParseDiagnostic>& diags)
        : s_(text), line_(line), diags_(diags) {}

    int column() { skip_ws(); return static_cast<int>(pos_) + 1; }
    bool at_end() { skip_ws(); return pos_ >= s_.size(); }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    bool consume(std::string_view tok) {
        skip_ws();
        if (s_.substr(pos_).starts_with(tok)) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    std::optional<std::string> identifier() {
        skip_ws();
        if (pos_ >= s_.size()) return std::nullopt;
        const char c0 = s_[pos_];
        if (!std::isalpha(static_cast<unsigned char>(c0)) && c0 != '_') return std::nullopt;
        size_t end = pos_ + 1;
        while (end < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_'))
            ++end;
        std::string out(s_.substr(pos_, end - pos_));
        pos_ = end;
        return out;
    }

    std::optional<double> number(bool allow_sign = false) {
        skip_ws();
        size_t start = pos_;
        if (allow_sign && pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        const size_t digits = pos_;
        double v = 0.0;
        const auto res = std::from_chars(s_.data() + digits, s_.data() + s_.size(), v);
        if (res.ec != std::errc{} || res.ptr == s_.data() + digits) {
            pos_ = start;
            return std::nullopt;
        }
        if (start != digits && s_[start] == '-') v = -v;
        pos_ = res.ptr - s_.data();
        return v;
    }

    void error(const std::string& msg, int col = -1) {
        diags_.push_back({Severity::error, line_, col < 0 ? column() : col, msg,
                          std::string(s_)});
    }
    void warn(const std::string& msg, int col = -1) {
        diags_.push_back({Severity::warning, line_, col < 0 ? column() : col, msg,
                          std::string(s_)});
    }

    std::string_view rest() { skip_ws(); return s_.substr(pos_); }
    int line() const { return line_; }

private:
    std::string_view s_;
    size_t pos_ = 0;
    int line_;
    std::vector<ParseDiagnostic>& diags_;
};

// One side of a reaction: terms joined by '+'; "0" or empty denotes the
// empty side.
std::optional<std::vector<RawTerm>> parse_side(LineParser& lp) {
    std::vector<RawTerm> terms;
    if (lp.at_end()) return terms;
    bool first = true;
    for (;;) {
        lp.skip_ws();
        // An arrow or rate separator right away means the side is empty.
        if (first && (lp.rest().starts_with("->") || lp.rest().starts_with("<->") ||
                      lp.rest().starts_with(":")))
            return terms;
        RawTerm term;
        term.line = lp.line();
        term.column = lp.column();
        const auto num = lp.number();
        const auto name = lp.identifier();
        if (!name) {
            if (num && *num == 0.0 && first) return terms;  // explicit empty side
            lp.error(num ? "expected species name after coefficient"
                         : "expected species term");
            return std::nullopt;
        }
        if (num) {
            if (*num < 0.0) {
                lp.error("stoichiometric coefficient must be non-negative", term.column);
                return std::nullopt;
            }
            term.coeff = *num;
        }
        term.name = *name;
        terms.push_back(std::move(term));
        first = false;
        if (!lp.consume("+")) break;
    }
    return terms;
}

std::optional<RateToken> parse_rate(LineParser& lp) {
    RateToken tok;
    tok.line = lp.line();
    lp.skip_ws();
    tok.column = lp.column();
    if (const auto v = lp.number(/*allow_sign=*/true)) {
        if (*v < 0.0) {
            lp.error("rate must be non-negative", tok.column);
            return std::nullopt;
        }
        tok.value = *v;
        return tok;
    }
    if (const auto id = lp.identifier()) {
        tok.is_symbol = true;
        tok.symbol = *id;
        return tok;
    }
    lp.error("expected rate literal or parameter name");
    return std::nullopt;
}

// Merges duplicate species mentions on one side by summing; warns once per
// duplicate.
std::vector<Term> merge_terms(const std::vector<RawTerm>& raw,
                              const std::map<std::string, int>& index,
                              std::vector<ParseDiagnostic>& diags) {
    std::vector<Term> out;
    std::map<int, size_t> pos;
    for (const RawTerm& rt : raw) {
        const int idx = index.at(rt.name);
        const auto it = pos.find(idx);
        if (it == pos.end()) {
            pos[idx] = out.size();
            out.push_back({idx, rt.coeff});
        } else {
            out[it->second].coeff += rt.coeff;
            diags.push_back({Severity::warning, rt.line, rt.column,
                             "duplicate mention of " + rt.name + " merged by summation",
                             ""});
        }
    }
    return out;
}

}  // namespace

ParseResult parse_network(std::string_view text) {
    ParseResult result;
    auto& diags = result.diagnostics;

    std::vector<std::string> declared;            // species: lines, in order
    std::map<std::string, int> declared_lines;
    std::map<std::string, std::pair<double, int>> params;
    std::map<std::string, InitEntry> init;
    std::vector<ScaleEntry> scales;
    std::vector<RawReaction> reactions;
    int last_init_line = 0;

    int line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line = text.substr(
            start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        if (const size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        LineParser lp(line, line_no, diags);
        if (lp.at_end()) continue;

        if (lp.consume("species:")) {
            do {
                const int col = lp.column();
                const auto id = lp.identifier();
                if (!id) {
                    lp.error("expected species name");
                    break;
                }
                if (declared_lines.count(*id)) {
                    lp.error("duplicate species declaration: " + *id, col);
                } else {
                    declared_lines[*id] = line_no;
                    declared.push_back(*id);
                }
            } while (lp.consume(","));
            if (!lp.at_end()) lp.error("trailing text after species list");
            continue;
        }

        if (lp.consume("params:")) {
            do {
                const int col = lp.column();
                const auto id = lp.identifier();
                if (!id || !lp.consume("=")) {
                    lp.error("expected name=value");
                    break;
                }
                const auto v = lp.number(/*allow_sign=*/true);
                if (!v) {
                    lp.error("malformed number");
                    break;
                }
                if (*v < 0.0) {
                    lp.error("rate parameter must be non-negative", col);
                } else if (params.count(*id)) {
                    lp.error("duplicate parameter: " + *id, col);
                } else {
                    params[*id] = {*v, line_no};
                }
            } while (lp.consume(","));
            if (!lp.at_end()) lp.error("trailing text after params list");
            continue;
        }

        if (lp.consume("init:")) {
            last_init_line = line_no;
            do {
                const int col = lp.column();
                const auto id = lp.identifier();
                if (!id || !lp.consume("=")) {
                    lp.error("expected name=value");
                    break;
                }
                const auto v = lp.number(/*allow_sign=*/true);
                if (!v) {
                    lp.error("malformed number");
                    break;
                }
                if (*v < 0.0)
                    lp.error("initial concentration must be non-negative", col);
                else
                    init[*id] = {*v, line_no, col};
            } while (lp.consume(","));
            if (!lp.at_end()) lp.error("trailing text after init list");
            continue;
        }

        if (lp.consume("scale:")) {
            do {
                ScaleEntry e;
                e.line = line_no;
                e.column = lp.column();
                const auto id = lp.identifier();
                if (!id || !lp.consume("@")) {
                    lp.error("expected species@reaction=factor");
                    break;
                }
                e.species = *id;
                if (lp.consume("*")) {
                    e.reaction = 0;
                } else if (const auto r = lp.number()) {
                    if (*r < 1.0 || std::trunc(*r) != *r) {
                        lp.error("reaction reference must be a positive integer");
                        break;
                    }
                    e.reaction = static_cast<int>(*r);
                } else {
                    lp.error("expected reaction index or *");
                    break;
                }
                if (!lp.consume("=")) {
                    lp.error("expected =factor");
                    break;
                }
                const auto v = lp.number(/*allow_sign=*/true);
                if (!v) {
                    lp.error("malformed number");
                    break;
                }
                if (!(*v > 0.0)) {
                    lp.error("scale factor must be positive");
                    break;
                }
                e.factor = *v;
                scales.push_back(std::move(e));
            } while (lp.consume(","));
            if (!lp.at_end()) lp.error("trailing text after scale list");
            continue;
        }

        // Reaction line.
        RawReaction rr;
        rr.line = line_no;
        auto lhs = parse_side(lp);
        if (!lhs) continue;
        rr.lhs = std::move(*lhs);
        bool reversible = false;
        if (lp.consume("<->")) {
            reversible = true;
        } else if (!lp.consume("->")) {
            lp.error("expected '->' or '<->'");
            continue;
        }
        auto rhs = parse_side(lp);
        if (!rhs) continue;
        rr.rhs = std::move(*rhs);
        if (!lp.consume(":")) {
            lp.error("expected ':' before rate");
            continue;
        }
        auto kf = parse_rate(lp);
        if (!kf) continue;
        rr.forward = std::move(*kf);
        if (reversible) {
            if (!lp.consume(",")) {
                lp.error("reversible reaction needs two rates: kf, kr");
                continue;
            }
            auto kr = parse_rate(lp);
            if (!kr) continue;
            rr.backward = std::move(*kr);
        }
        if (!lp.at_end()) {
            lp.error("trailing text after reaction");
            continue;
        }
        reactions.push_back(std::move(rr));
    }

    // Species order: declarations first, then first appearance in reactions.
    std::vector<std::string> species = declared;
    std::map<std::string, int> index;
    for (size_t i = 0; i < species.size(); ++i) index[species[i]] = static_cast<int>(i);
    for (const RawReaction& rr : reactions)
        for (const auto* side : {&rr.lhs, &rr.rhs})
            for (const RawTerm& t : *side)
                if (!index.count(t.name)) {
                    index[t.name] = static_cast<int>(species.size());
                    species.push_back(t.name);
                }

    auto resolve_rate = [&](const RateToken& tok) -> std::optional<double> {
        if (!tok.is_symbol) return tok.value;
        const auto it = params.find(tok.symbol);
        if (it == params.end()) {
            diags.push_back({Severity::error, tok.line, tok.column,
                             "undefined rate symbol: " + tok.symbol, ""});
            return std::nullopt;
        }
        return it->second.first;
    };

    NetworkSpec spec;
    spec.species = species;
    for (const RawReaction& rr : reactions) {
        ReactionSpec fwd;
        fwd.reactants = merge_terms(rr.lhs, index, diags);
        fwd.products = merge_terms(rr.rhs, index, diags);
        const auto kf = resolve_rate(rr.forward);
        if (kf) fwd.rate = *kf;
        spec.reactions.push_back(std::move(fwd));
        if (rr.backward) {
            ReactionSpec bwd;
            bwd.reactants = spec.reactions.back().products;
            bwd.products = spec.reactions.back().reactants;
            const auto kr = resolve_rate(*rr.backward);
            if (kr) bwd.rate = *kr;
            spec.reactions.push_back(std::move(bwd));
        }
    }

    spec.initial.assign(species.size(), 0.0);
    std::vector<std::string> defaulted;
    for (size_t i = 0; i < species.size(); ++i) {
        const auto it = init.find(species[i]);
        if (it != init.end())
            spec.initial[i] = it->second.value;
        else
            defaulted.push_back(species[i]);
    }
    for (const auto& [name, entry] : init)
        if (!index.count(name))
            diags.push_back({Severity::error, entry.line, entry.column,
                             "unknown species in init: " + name, ""});
    if (!defaulted.empty() && !init.empty()) {
        std::string msg = "initial concentration defaults to 0 for:";
        for (const auto& n : defaulted) msg += " " + n;
        diags.push_back({Severity::warning, last_init_line ? last_init_line : 1, 1,
                         msg, ""});
    }

    for (const ScaleEntry& e : scales) {
        const auto it = index.find(e.species);
        if (it == index.end()) {
            diags.push_back({Severity::error, e.line, e.column,
                             "unknown species in scale: " + e.species, ""});
            continue;
        }
        if (e.reaction > static_cast<int>(spec.reactions.size())) {
            diags.push_back({Severity::error, e.line, e.column,
                             "scale references reaction " + std::to_string(e.reaction) +
                                 " but only " + std::to_string(spec.reactions.size()) +
                                 " exist", ""});
            continue;
        }
        spec.modifiers.push_back({it->second, e.reaction - 1, e.factor});
    }

    if (species.empty())
        diags.push_back({Severity::error, 1, 1, "network declares no species", ""});

    if (!result.has_errors()) result.spec = std::move(spec);
    return result;
}

std::string serialize_network(const NetworkSpec& spec) {
    validate(spec);

    std::vector<int> order(spec.species.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return spec.species[a] < spec.species[b]; });

    std::ostringstream out;
    out << "species: ";
    for (size_t i = 0; i < order.size(); ++i) {
        if (i) out << ", ";
        out << spec.species[order[i]];
    }
    out << "\n";

    out << "init: ";
    for (size_t i = 0; i < order.size(); ++i) {
        if (i) out << ", ";
        out << spec.species[order[i]] << "=" << format_double(spec.initial[order[i]]);
    }
    out << "\n";

    for (const Modifier& m : spec.modifiers) {
        out << "scale: " << spec.species[m.species] << "@";
        if (m.reaction < 0)
            out << "*";
        else
            out << (m.reaction + 1);
        out << "=" << format_double(m.factor) << "\n";
    }

    auto emit_side = [&](const std::vector<Term>& terms) {
        if (terms.empty()) {
            out << "0";
            return;
        }
        for (size_t i = 0; i < terms.size(); ++i) {
            if (i) out << " + ";
            if (terms[i].coeff != 1.0) out << format_double(terms[i].coeff) << " ";
            out << spec.species[terms[i].species];
        }
    };
    for (const ReactionSpec& r : spec.reactions) {
        emit_side(r.reactants);
        out << " -> ";
        emit_side(r.products);
        out << " : " << format_double(r.rate) << "\n";
    }
    return out.str();
}

}  // namespace rxnet
