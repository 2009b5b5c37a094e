#ifndef RXNET_NETWORK_HPP
#define RXNET_NETWORK_HPP

#include <string>
#include <utility>
#include <vector>

namespace rxnet {

/// One species/coefficient pair on either side of a reaction.
/// Species are identified by 0-based index into NetworkSpec::species.
struct Term {
    int species = 0;
    double coeff = 0.0;

    friend bool operator==(const Term&, const Term&) = default;
};

/// A single unidirectional elementary reaction.  Reactant coefficients are
/// the kinetic orders (non-negative reals under generalized mass action,
/// integers in strict mode); product coefficients are multiplicities.
struct ReactionSpec {
    std::vector<Term> reactants;
    std::vector<Term> products;
    double rate = 0.0;

    friend bool operator==(const ReactionSpec&, const ReactionSpec&) = default;
};

/// A per-entry scaling of the rate-weighted step-change matrix.
struct Modifier {
    int species = 0;   // 0-based
    int reaction = 0;  // 0-based; -1 means "all reactions touching this species"
    double factor = 1.0;

    friend bool operator==(const Modifier&, const Modifier&) = default;
};

/// Parsed, human-oriented network description.  Species index order defines
/// the state-vector layout everywhere downstream.
struct NetworkSpec {
    std::vector<std::string> species;
    std::vector<ReactionSpec> reactions;
    std::vector<double> initial;       // one entry per species
    std::vector<Modifier> modifiers;   // lowered from "scale:" lines

    int n_species() const { return static_cast<int>(species.size()); }
    int n_reactions() const { return static_cast<int>(reactions.size()); }

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Checks all NetworkSpec invariants; throws CompileError on violation.
/// M = 0 is allowed here (inspection), compile() rejects it separately.
void validate(const NetworkSpec& spec);

/// Index of a species name, or -1.
int find_species(const NetworkSpec& spec, const std::string& name);

}  // namespace rxnet

#endif
