#ifndef RXNET_COMPILE_HPP
#define RXNET_COMPILE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "rxnet/network.hpp"

namespace rxnet {

/// Compact column-per-reaction stoichiometry.  The index matrices store
/// 1-based species indices with 0 as the unused-slot sentinel, so the
/// empty-product convention is realized by skipping sentinels.  Value
/// matrices hold the matching nonzero coefficients.  Layout is column-major
/// with a per-column entry count.
struct SparseStoichiometry {
    int n_species = 0;
    int n_reactions = 0;

    int l_rows = 0;              // max reactants per reaction
    std::vector<int> l_idx;      // l_rows x M, column-major, 1-based, 0 = sentinel
    std::vector<double> l_val;
    std::vector<int> l_count;    // nonzeros per column

    int r_rows = 0;
    std::vector<int> r_idx;
    std::vector<double> r_val;
    std::vector<int> r_count;

    /// Rate-scaled step-change matrix Dk as a coordinate list sorted by
    /// column: dk[p] lives at (dk_row[p], column c) for dk_col_ptr[c] <= p <
    /// dk_col_ptr[c+1].  Entry value is k_m * (r_nm - l_nm), times any
    /// modifier applied later.
    std::vector<int> dk_row;
    std::vector<double> dk_val;
    std::vector<int> dk_col_ptr;  // size M+1

    std::vector<double> rates;    // k_m, kept for eval_rates

    int lidx(int r, int m) const { return l_idx[static_cast<size_t>(m) * l_rows + r]; }
    double lval(int r, int m) const { return l_val[static_cast<size_t>(m) * l_rows + r]; }
    int ridx(int r, int m) const { return r_idx[static_cast<size_t>(m) * r_rows + r]; }
    double rval(int r, int m) const { return r_val[static_cast<size_t>(m) * r_rows + r]; }

    /// Stored nonzero stoichiometric entries: nnz(L) + nnz(R) + nnz(D).
    size_t stored_entries() const;
};

/// Per-species Jacobian column structure: the reactions where species j is a
/// reactant, each carrying its order l_jm, the reduced reactant block with
/// the j-entry exponent lowered by one, and a private copy of the reaction's
/// Dk entries so modifier scaling stays consistent between RHS and Jacobian.
struct JacFactor {
    int species = 0;      // 0-based
    double exponent = 0;  // l_im, or l_jm - 1 for the differentiated species
    bool integer_exp = true;
};

struct JacDkEntry {
    int species = 0;  // row n
    double value = 0; // dk_nm (modifier-scaled)
};

struct JacTerm {
    int reaction = 0;  // m, 0-based
    double order = 0;  // l_jm
    std::vector<JacFactor> factors;
    std::vector<JacDkEntry> dk;
};

struct JacColumn {
    std::vector<JacTerm> terms;
};

enum class CompileMode { strict_mass_action, generalized };

/// Evaluation-ready network.  Immutable after construction; safe to share
/// across concurrent evaluators.
struct CompiledNetwork {
    SparseStoichiometry stoich;
    std::vector<JacColumn> jac_columns;     // one per species
    std::vector<std::string> species_names;

    /// Unscaled integer-or-real step change d_nm = r_nm - l_nm, dense
    /// column-major N x M; kept for conservation-law extraction.
    std::vector<double> step_change;

    int n_species() const { return stoich.n_species; }
    int n_reactions() const { return stoich.n_reactions; }

    double d(int n, int m) const {
        return step_change[static_cast<size_t>(m) * stoich.n_species + n];
    }
};

CompiledNetwork compile(const NetworkSpec& spec,
                        CompileMode mode = CompileMode::generalized);

/// Returns a copy with dk entries (n, m) scaled by the given factors, in
/// both the stoichiometry and every Jacobian block referencing them.
CompiledNetwork apply_modifiers(const CompiledNetwork& net,
                                const std::vector<Modifier>& modifiers);

/// Dense N x M reconstructions (column-major) for testing and display.
std::vector<double> densify_l(const SparseStoichiometry& s);
std::vector<double> densify_r(const SparseStoichiometry& s);
std::vector<double> densify_dk(const SparseStoichiometry& s);

}  // namespace rxnet

#endif
