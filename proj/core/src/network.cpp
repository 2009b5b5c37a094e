#include "rxnet/network.hpp"

#include <cmath>
#include <set>
#include <string>

#include "rxnet/errors.hpp"

namespace rxnet {

int find_species(const NetworkSpec& spec, const std::string& name) {
    for (int i = 0; i < spec.n_species(); ++i)
        if (spec.species[i] == name) return i;
    return -1;
}

namespace {

void check_terms(const NetworkSpec& spec, const std::vector<Term>& terms,
                 int reaction, const char* side) {
    std::set<int> seen;
    for (const Term& t : terms) {
        if (t.species < 0 || t.species >= spec.n_species())
            throw UnknownSpecies("#" + std::to_string(t.species + 1) + " (" +
                                 side + " of reaction " + std::to_string(reaction + 1) + ")");
        if (!seen.insert(t.species).second)
            throw CompileError("species " + spec.species[t.species] +
                               " listed twice in " + side + " of reaction " +
                               std::to_string(reaction + 1));
        if (!(t.coeff >= 0.0) || !std::isfinite(t.coeff))
            throw NegativeCoefficient(t.species, reaction);
    }
}

}  // namespace

void validate(const NetworkSpec& spec) {
    if (spec.species.empty())
        throw CompileError("network declares no species");

    std::set<std::string> names;
    for (const std::string& s : spec.species) {
        if (s.empty()) throw CompileError("empty species name");
        if (!names.insert(s).second)
            throw CompileError("duplicate species name: " + s);
    }

    if (spec.initial.size() != spec.species.size())
        throw CompileError("initial concentration list does not match species count");
    for (size_t i = 0; i < spec.initial.size(); ++i)
        if (!(spec.initial[i] >= 0.0) || !std::isfinite(spec.initial[i]))
            throw CompileError("negative or non-finite initial concentration for " +
                               spec.species[i]);

    for (int m = 0; m < spec.n_reactions(); ++m) {
        const ReactionSpec& r = spec.reactions[m];
        check_terms(spec, r.reactants, m, "reactants");
        check_terms(spec, r.products, m, "products");
        if (!(r.rate >= 0.0) || !std::isfinite(r.rate))
            throw CompileError("negative or non-finite rate in reaction " +
                               std::to_string(m + 1));
    }

    for (const Modifier& mod : spec.modifiers) {
        if (mod.species < 0 || mod.species >= spec.n_species())
            throw UnknownSpecies("#" + std::to_string(mod.species + 1) + " (scale)");
        if (mod.reaction < -1 || mod.reaction >= spec.n_reactions())
            throw CompileError("scale references reaction " +
                               std::to_string(mod.reaction + 1) + " which does not exist");
        if (!(mod.factor > 0.0) || !std::isfinite(mod.factor))
            throw NonPositiveFactor(mod.factor);
    }
}

}  // namespace rxnet
