#include "rxnet/kinetics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <set>

#include "rxnet/errors.hpp"

namespace rxnet {

namespace {

// x^n for non-negative integer n, small cases unrolled.
double ipow(double x, long n) {
    switch (n) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return x * x;
        case 3: return x * x * x;
        case 4: { const double x2 = x * x; return x2 * x2; }
        default: break;
    }
    double r = 1.0, b = x;
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

// Power with the evaluation rules of the engine: integer exponents work for
// any base (the integrator may probe negative states), real exponents demand
// a non-negative base, and a zero base with a negative exponent marks a
// singular derivative.
double pow_checked(double x, double e, bool integer_exp) {
    if (integer_exp) {
        const long n = static_cast<long>(e);
        if (n >= 0) return ipow(x, n);
        if (x == 0.0)
            throw DomainError("zero concentration raised to negative power");
        return 1.0 / ipow(x, -n);
    }
    if (x < 0.0)
        throw DomainError("negative concentration raised to non-integer power");
    if (x == 0.0) {
        if (e > 0.0) return 0.0;
        throw DomainError("derivative singular: zero concentration with order in (0,1)");
    }
    return std::pow(x, e);
}

bool is_integer(double v) { return std::trunc(v) == v; }

// prod_i x_i^{l_im} over the stored reactant entries of column m.
double monomial(const SparseStoichiometry& s, std::span<const double> x, int m) {
    double p = 1.0;
    for (int r = 0; r < s.l_count[m]; ++r) {
        const double e = s.lval(r, m);
        p *= pow_checked(x[s.lidx(r, m) - 1], e, is_integer(e));
    }
    return p;
}

}  // namespace

SparseJacobian::SparseJacobian(const CompiledNetwork& net) {
    n_ = net.n_species();
    col_ptr_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) {
        std::set<int> rows;
        for (const JacTerm& term : net.jac_columns[j].terms)
            for (const JacDkEntry& e : term.dk) rows.insert(e.species);
        for (int r : rows) row_idx_.push_back(r);
        col_ptr_[j + 1] = static_cast<int>(row_idx_.size());
    }
    values_.assign(row_idx_.size(), 0.0);
}

double SparseJacobian::at(int n, int j) const {
    const auto beg = row_idx_.begin() + col_ptr_[j];
    const auto end = row_idx_.begin() + col_ptr_[j + 1];
    const auto it = std::lower_bound(beg, end, n);
    if (it == end || *it != n) return 0.0;
    return values_[it - row_idx_.begin()];
}

bool SparseJacobian::structurally_present(int n, int j) const {
    const auto beg = row_idx_.begin() + col_ptr_[j];
    const auto end = row_idx_.begin() + col_ptr_[j + 1];
    return std::binary_search(beg, end, n);
}

void SparseJacobian::set_zero() {
    std::fill(values_.begin(), values_.end(), 0.0);
}

void SparseJacobian::add_to_dense(std::span<double> dense) const {
    for (int j = 0; j < n_; ++j)
        for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
            dense[static_cast<size_t>(j) * n_ + row_idx_[p]] += values_[p];
}

void eval_rates(const CompiledNetwork& net, std::span<const double> x,
                std::span<double> out) {
    const SparseStoichiometry& s = net.stoich;
    assert(out.size() == static_cast<size_t>(s.n_reactions));
    for (int m = 0; m < s.n_reactions; ++m)
        out[m] = s.rates[m] * monomial(s, x, m);
}

void eval_rhs(const CompiledNetwork& net, std::span<const double> x,
              std::span<double> out, std::span<double> scratch) {
    const SparseStoichiometry& s = net.stoich;
    assert(out.size() == static_cast<size_t>(s.n_species));
    assert(scratch.size() >= static_cast<size_t>(s.n_reactions));
    for (int m = 0; m < s.n_reactions; ++m) scratch[m] = monomial(s, x, m);
    std::fill(out.begin(), out.end(), 0.0);
    for (int m = 0; m < s.n_reactions; ++m) {
        const double w = scratch[m];
        for (int p = s.dk_col_ptr[m]; p < s.dk_col_ptr[m + 1]; ++p)
            out[s.dk_row[p]] += s.dk_val[p] * w;
    }
}

void eval_jacobian(const CompiledNetwork& net, std::span<const double> x,
                   SparseJacobian& out) {
    if (out.n_ != net.n_species()) out = SparseJacobian(net);
    out.set_zero();
    for (int j = 0; j < net.n_species(); ++j) {
        const auto col_beg = out.row_idx_.begin() + out.col_ptr_[j];
        const auto col_end = out.row_idx_.begin() + out.col_ptr_[j + 1];
        for (const JacTerm& term : net.jac_columns[j].terms) {
            double w = term.order;
            for (const JacFactor& f : term.factors)
                w *= pow_checked(x[f.species], f.exponent, f.integer_exp);
            for (const JacDkEntry& e : term.dk) {
                const auto it = std::lower_bound(col_beg, col_end, e.species);
                out.values_[it - out.row_idx_.begin()] += e.value * w;
            }
        }
    }
}

std::vector<double> eval_rates(const CompiledNetwork& net, std::span<const double> x) {
    std::vector<double> out(net.n_reactions());
    eval_rates(net, x, out);
    return out;
}

std::vector<double> eval_rhs(const CompiledNetwork& net, std::span<const double> x) {
    std::vector<double> out(net.n_species());
    std::vector<double> scratch(net.n_reactions());
    eval_rhs(net, x, out, scratch);
    return out;
}

SparseJacobian eval_jacobian(const CompiledNetwork& net, std::span<const double> x) {
    SparseJacobian jac(net);
    eval_jacobian(net, x, jac);
    return jac;
}

std::vector<double> eval_rhs_dense_oracle(const NetworkSpec& spec,
                                          std::span<const double> x) {
    const int n = spec.n_species();
    const int m_total = spec.n_reactions();

    // Dense L and D, column-major.
    std::vector<double> l(static_cast<size_t>(n) * m_total, 0.0);
    std::vector<double> d(static_cast<size_t>(n) * m_total, 0.0);
    for (int m = 0; m < m_total; ++m) {
        for (const Term& t : spec.reactions[m].reactants) {
            l[static_cast<size_t>(m) * n + t.species] += t.coeff;
            d[static_cast<size_t>(m) * n + t.species] -= t.coeff;
        }
        for (const Term& t : spec.reactions[m].products)
            d[static_cast<size_t>(m) * n + t.species] += t.coeff;
    }

    // f = D * (k .* prod(X .^ L, 1))', full products, 0^0 = 1.
    std::vector<double> f(n, 0.0);
    for (int m = 0; m < m_total; ++m) {
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
            const double e = l[static_cast<size_t>(m) * n + i];
            if (e == 0.0) continue;  // 0^0 = 1
            p *= pow_checked(x[i], e, is_integer(e));
        }
        const double rate = spec.reactions[m].rate * p;
        for (int i = 0; i < n; ++i)
            f[i] += d[static_cast<size_t>(m) * n + i] * rate;
    }
    return f;
}

}  // namespace rxnet
