#include "rxnet/compile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rxnet/errors.hpp"

namespace rxnet {

namespace {

bool is_integer(double v) { return std::trunc(v) == v; }

// Nonzero terms of one reaction side, sorted by species index.
std::vector<Term> sorted_nonzero(const std::vector<Term>& terms) {
    std::vector<Term> out;
    for (const Term& t : terms)
        if (t.coeff != 0.0) out.push_back(t);
    std::sort(out.begin(), out.end(),
              [](const Term& a, const Term& b) { return a.species < b.species; });
    return out;
}

void fill_side(const std::vector<std::vector<Term>>& cols, int rows,
               std::vector<int>& idx, std::vector<double>& val,
               std::vector<int>& count) {
    const int m_total = static_cast<int>(cols.size());
    idx.assign(static_cast<size_t>(rows) * m_total, 0);
    val.assign(static_cast<size_t>(rows) * m_total, 0.0);
    count.resize(m_total);
    for (int m = 0; m < m_total; ++m) {
        count[m] = static_cast<int>(cols[m].size());
        for (int r = 0; r < count[m]; ++r) {
            idx[static_cast<size_t>(m) * rows + r] = cols[m][r].species + 1;
            val[static_cast<size_t>(m) * rows + r] = cols[m][r].coeff;
        }
    }
}

}  // namespace

size_t SparseStoichiometry::stored_entries() const {
    auto sum = [](const std::vector<int>& v) {
        return std::accumulate(v.begin(), v.end(), size_t{0});
    };
    return sum(l_count) + sum(r_count) + dk_val.size();
}

CompiledNetwork compile(const NetworkSpec& spec, CompileMode mode) {
    validate(spec);
    if (spec.reactions.empty()) throw EmptyNetwork();

    const int n = spec.n_species();
    const int m_total = spec.n_reactions();

    if (mode == CompileMode::strict_mass_action) {
        for (int m = 0; m < m_total; ++m) {
            for (const Term& t : spec.reactions[m].reactants)
                if (!is_integer(t.coeff)) throw NonIntegerOrderInStrictMode(t.species, m);
            for (const Term& t : spec.reactions[m].products)
                if (!is_integer(t.coeff)) throw NonIntegerOrderInStrictMode(t.species, m);
        }
    }

    std::vector<std::vector<Term>> l_cols(m_total), r_cols(m_total);
    for (int m = 0; m < m_total; ++m) {
        l_cols[m] = sorted_nonzero(spec.reactions[m].reactants);
        r_cols[m] = sorted_nonzero(spec.reactions[m].products);
    }

    CompiledNetwork net;
    net.species_names = spec.species;
    SparseStoichiometry& s = net.stoich;
    s.n_species = n;
    s.n_reactions = m_total;

    auto max_count = [](const std::vector<std::vector<Term>>& cols) {
        int mx = 1;
        for (const auto& c : cols) mx = std::max(mx, static_cast<int>(c.size()));
        return mx;
    };
    s.l_rows = max_count(l_cols);
    s.r_rows = max_count(r_cols);
    fill_side(l_cols, s.l_rows, s.l_idx, s.l_val, s.l_count);
    fill_side(r_cols, s.r_rows, s.r_idx, s.r_val, s.r_count);

    s.rates.resize(m_total);
    for (int m = 0; m < m_total; ++m) s.rates[m] = spec.reactions[m].rate;

    // Dense step change d = r - l, then Dk coordinates sorted by column.
    net.step_change.assign(static_cast<size_t>(n) * m_total, 0.0);
    for (int m = 0; m < m_total; ++m) {
        for (const Term& t : l_cols[m])
            net.step_change[static_cast<size_t>(m) * n + t.species] -= t.coeff;
        for (const Term& t : r_cols[m])
            net.step_change[static_cast<size_t>(m) * n + t.species] += t.coeff;
    }
    s.dk_col_ptr.assign(m_total + 1, 0);
    for (int m = 0; m < m_total; ++m) {
        for (int row = 0; row < n; ++row) {
            const double d = net.step_change[static_cast<size_t>(m) * n + row];
            if (d != 0.0) {
                s.dk_row.push_back(row);
                s.dk_val.push_back(s.rates[m] * d);
            }
        }
        s.dk_col_ptr[m + 1] = static_cast<int>(s.dk_row.size());
    }

    // Jacobian column structures: for each species j, the reactions with
    // l_jm > 0, the reduced reactant block with the j-exponent lowered by
    // one, and the reaction's Dk entries.
    net.jac_columns.resize(n);
    for (int m = 0; m < m_total; ++m) {
        for (const Term& tj : l_cols[m]) {
            const int j = tj.species;
            JacTerm term;
            term.reaction = m;
            term.order = tj.coeff;
            for (const Term& ti : l_cols[m]) {
                const double e = (ti.species == j) ? ti.coeff - 1.0 : ti.coeff;
                if (e == 0.0) continue;  // x^0 = 1, skipped structurally
                term.factors.push_back({ti.species, e, is_integer(e)});
            }
            for (int p = s.dk_col_ptr[m]; p < s.dk_col_ptr[m + 1]; ++p)
                term.dk.push_back({s.dk_row[p], s.dk_val[p]});
            net.jac_columns[j].terms.push_back(std::move(term));
        }
    }
    // Within a column, keep reaction-index order for deterministic sums.
    for (JacColumn& col : net.jac_columns)
        std::sort(col.terms.begin(), col.terms.end(),
                  [](const JacTerm& a, const JacTerm& b) { return a.reaction < b.reaction; });

    return net;
}

CompiledNetwork apply_modifiers(const CompiledNetwork& net,
                                const std::vector<Modifier>& modifiers) {
    CompiledNetwork out = net;
    SparseStoichiometry& s = out.stoich;

    auto scale_entry = [&](int species, int reaction, double factor) {
        bool found = false;
        for (int p = s.dk_col_ptr[reaction]; p < s.dk_col_ptr[reaction + 1]; ++p) {
            if (s.dk_row[p] == species) {
                s.dk_val[p] *= factor;
                found = true;
                break;
            }
        }
        if (!found) throw ModifierOnZeroEntry(species, reaction);
        for (JacColumn& col : out.jac_columns)
            for (JacTerm& term : col.terms)
                if (term.reaction == reaction)
                    for (JacDkEntry& e : term.dk)
                        if (e.species == species) e.value *= factor;
    };

    for (const Modifier& mod : modifiers) {
        if (!(mod.factor > 0.0) || !std::isfinite(mod.factor))
            throw NonPositiveFactor(mod.factor);
        if (mod.species < 0 || mod.species >= s.n_species)
            throw UnknownSpecies("#" + std::to_string(mod.species + 1) + " (modifier)");
        if (mod.reaction == -1) {
            // "all reactions" convenience: every column touching the species.
            bool any = false;
            for (int m = 0; m < s.n_reactions; ++m)
                for (int p = s.dk_col_ptr[m]; p < s.dk_col_ptr[m + 1]; ++p)
                    if (s.dk_row[p] == mod.species) {
                        scale_entry(mod.species, m, mod.factor);
                        any = true;
                        break;
                    }
            if (!any) throw ModifierOnZeroEntry(mod.species, 0);
        } else {
            if (mod.reaction < 0 || mod.reaction >= s.n_reactions)
                throw CompileError("modifier references reaction " +
                                   std::to_string(mod.reaction + 1) +
                                   " which does not exist");
            scale_entry(mod.species, mod.reaction, mod.factor);
        }
    }
    return out;
}

namespace {

std::vector<double> densify_side(int n, int m_total, int rows,
                                 const std::vector<int>& idx,
                                 const std::vector<double>& val,
                                 const std::vector<int>& count) {
    std::vector<double> dense(static_cast<size_t>(n) * m_total, 0.0);
    for (int m = 0; m < m_total; ++m)
        for (int r = 0; r < count[m]; ++r) {
            const int species = idx[static_cast<size_t>(m) * rows + r] - 1;
            dense[static_cast<size_t>(m) * n + species] = val[static_cast<size_t>(m) * rows + r];
        }
    return dense;
}

}  // namespace

std::vector<double> densify_l(const SparseStoichiometry& s) {
    return densify_side(s.n_species, s.n_reactions, s.l_rows, s.l_idx, s.l_val, s.l_count);
}

std::vector<double> densify_r(const SparseStoichiometry& s) {
    return densify_side(s.n_species, s.n_reactions, s.r_rows, s.r_idx, s.r_val, s.r_count);
}

std::vector<double> densify_dk(const SparseStoichiometry& s) {
    std::vector<double> dense(static_cast<size_t>(s.n_species) * s.n_reactions, 0.0);
    for (int m = 0; m < s.n_reactions; ++m)
        for (int p = s.dk_col_ptr[m]; p < s.dk_col_ptr[m + 1]; ++p)
            dense[static_cast<size_t>(m) * s.n_species + s.dk_row[p]] = s.dk_val[p];
    return dense;
}

}  // namespace rxnet
