#ifndef RXNET_TESTS_ORACLES_HPP
#define RXNET_TESTS_ORACLES_HPP

#include <cmath>
#include <span>
#include <vector>

#include "rxnet/compile.hpp"
#include "rxnet/kinetics.hpp"

namespace rxnet::testing {

// Central finite differences of eval_rhs, step 1e-6 * max(1, |x_j|).
// Independent of the analytic Jacobian path.
inline std::vector<double> fd_jacobian(const CompiledNetwork& net,
                                       std::span<const double> x) {
    const int n = net.n_species();
    std::vector<double> jac(static_cast<size_t>(n) * n, 0.0);  // column-major
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
        xp[j] += h;
        xm[j] -= h;
        const auto fp = eval_rhs(net, xp);
        const auto fm = eval_rhs(net, xm);
        for (int row = 0; row < n; ++row)
            jac[static_cast<size_t>(j) * n + row] = (fp[row] - fm[row]) / (2.0 * h);
    }
    return jac;
}

// Per-species magnitude of the RHS summands, sum_m |dk_nm| * w_m.  The right
// scale for comparing two RHS evaluations: cancellation between reactions can
// make |f_n| arbitrarily small relative to the terms being summed.
inline std::vector<double> rhs_term_scale(const NetworkSpec& spec,
                                          std::span<const double> x) {
    std::vector<double> scale(spec.n_species(), 0.0);
    for (const auto& r : spec.reactions) {
        double w = r.rate;
        for (const Term& t : r.reactants)
            w *= std::pow(x[t.species], t.coeff);
        for (const Term& t : r.reactants)
            scale[t.species] += std::abs(t.coeff) * std::abs(w);
        for (const Term& t : r.products)
            scale[t.species] += std::abs(t.coeff) * std::abs(w);
    }
    return scale;
}

// Gaussian elimination on D' as an independent null-space oracle: checks that
// v lies in the left null space of D, i.e. v' D = 0.
inline bool is_left_null_vector(const CompiledNetwork& net,
                                std::span<const double> v, double tol = 1e-9) {
    for (int m = 0; m < net.n_reactions(); ++m) {
        double dot = 0.0;
        for (int n = 0; n < net.n_species(); ++n) dot += v[n] * net.d(n, m);
        if (std::abs(dot) > tol) return false;
    }
    return true;
}

// Rank of the left null space by elimination on D' (oracle, independent of
// conservation_laws).
inline int left_null_dimension(const CompiledNetwork& net) {
    const int n = net.n_species();
    const int m = net.n_reactions();
    std::vector<std::vector<double>> a(m, std::vector<double>(n));
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) a[r][c] = net.d(c, r);
    int rank = 0;
    for (int c = 0; c < n && rank < m; ++c) {
        int piv = rank;
        for (int r = rank + 1; r < m; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-10) continue;
        std::swap(a[rank], a[piv]);
        for (int r = 0; r < m; ++r) {
            if (r == rank) continue;
            const double f = a[r][c] / a[rank][c];
            for (int c2 = 0; c2 < n; ++c2) a[r][c2] -= f * a[rank][c2];
        }
        ++rank;
    }
    return n - rank;
}

}  // namespace rxnet::testing

#endif
