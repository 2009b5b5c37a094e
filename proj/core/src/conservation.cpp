#include "rxnet/conservation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "rxnet/errors.hpp"

namespace rxnet {

namespace {

// Exact rational scalar for integer stoichiometries.
struct Rat {
    long long num = 0;
    long long den = 1;

    void normalize() {
        if (den < 0) { num = -num; den = -den; }
        const long long g = std::gcd(std::abs(num), den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }
};

Rat make_rat(long long n, long long d = 1) {
    Rat r{n, d};
    r.normalize();
    return r;
}

Rat operator*(Rat a, Rat b) { return make_rat(a.num * b.num, a.den * b.den); }
Rat operator/(Rat a, Rat b) { return make_rat(a.num * b.den, a.den * b.num); }
Rat operator-(Rat a, Rat b) {
    return make_rat(a.num * b.den - b.num * a.den, a.den * b.den);
}
bool is_zero(const Rat& r) { return r.num == 0; }

using RatMatrix = std::vector<std::vector<Rat>>;
using DblMatrix = std::vector<std::vector<double>>;

// In-place reduced row echelon form; returns pivot columns.
std::vector<int> rref(RatMatrix& a) {
    std::vector<int> pivots;
    const int rows = static_cast<int>(a.size());
    const int cols = rows ? static_cast<int>(a[0].size()) : 0;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (!is_zero(a[i][c])) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(a[r], a[piv]);
        const Rat inv = make_rat(a[r][c].den, a[r][c].num);
        for (int c2 = c; c2 < cols; ++c2) a[r][c2] = a[r][c2] * inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || is_zero(a[i][c])) continue;
            const Rat f = a[i][c];
            for (int c2 = c; c2 < cols; ++c2)
                a[i][c2] = a[i][c2] - f * a[r][c2];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

std::vector<int> rref(DblMatrix& a, double tol) {
    std::vector<int> pivots;
    const int rows = static_cast<int>(a.size());
    const int cols = rows ? static_cast<int>(a[0].size()) : 0;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = r;
        for (int i = r + 1; i < rows; ++i)
            if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
        if (std::abs(a[piv][c]) <= tol) continue;
        std::swap(a[r], a[piv]);
        const double inv = 1.0 / a[r][c];
        for (int c2 = c; c2 < cols; ++c2) a[r][c2] *= inv;
        a[r][c] = 1.0;
        for (int i = 0; i < rows; ++i) {
            if (i == r) continue;
            const double f = a[i][c];
            if (f == 0.0) continue;
            for (int c2 = c; c2 < cols; ++c2) a[i][c2] -= f * a[r][c2];
            a[i][c] = 0.0;
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

// Null-space basis from an RREF matrix and its pivot columns.
template <class M, class Zero, class One, class Neg>
M null_basis(const M& a, const std::vector<int>& pivots, int cols,
             Zero zero, One one, Neg neg) {
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivots) is_pivot[c] = true;
    M basis;
    for (int f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        typename M::value_type v(cols, zero());
        v[f] = one();
        for (size_t i = 0; i < pivots.size(); ++i)
            v[pivots[i]] = neg(a[i][f]);
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<std::vector<double>> rational_laws(const CompiledNetwork& net) {
    const int n = net.n_species();
    const int m = net.n_reactions();
    // A = D' (reactions x species).
    RatMatrix a(m, std::vector<Rat>(n));
    for (int row = 0; row < m; ++row)
        for (int col = 0; col < n; ++col)
            a[row][col] = make_rat(static_cast<long long>(net.d(col, row)));
    auto pivots = rref(a);
    RatMatrix basis = null_basis(a, pivots, n,
                                 [] { return make_rat(0); },
                                 [] { return make_rat(1); },
                                 [](Rat r) { return make_rat(-r.num, r.den); });
    if (basis.empty()) return {};
    // Canonical form: row-reduce the basis itself, then clear denominators.
    rref(basis);
    std::vector<std::vector<double>> out;
    for (auto& row : basis) {
        long long mult = 1;
        for (const Rat& r : row) mult = std::lcm(mult, r.den);
        std::vector<long long> ints(n);
        long long g = 0;
        for (int c = 0; c < n; ++c) {
            ints[c] = row[c].num * (mult / row[c].den);
            g = std::gcd(g, std::abs(ints[c]));
        }
        if (g > 1)
            for (auto& v : ints) v /= g;
        std::vector<double> dv(n);
        for (int c = 0; c < n; ++c) dv[c] = static_cast<double>(ints[c]);
        out.push_back(std::move(dv));
    }
    return out;
}

std::vector<std::vector<double>> floating_laws(const CompiledNetwork& net) {
    const int n = net.n_species();
    const int m = net.n_reactions();
    double scale = 1.0;
    for (double v : net.step_change) scale = std::max(scale, std::abs(v));
    const double tol = 1e-10 * scale;

    DblMatrix a(m, std::vector<double>(n));
    for (int row = 0; row < m; ++row)
        for (int col = 0; col < n; ++col)
            a[row][col] = net.d(col, row);
    auto pivots = rref(a, tol);
    DblMatrix basis = null_basis(a, pivots, n,
                                 [] { return 0.0; },
                                 [] { return 1.0; },
                                 [](double v) { return -v; });
    if (basis.empty()) return {};
    rref(basis, tol);
    return basis;
}

}  // namespace

ConservationBasis conservation_laws(const CompiledNetwork& net) {
    bool integral = true;
    for (double v : net.step_change)
        if (std::trunc(v) != v || std::abs(v) > 1e15) { integral = false; break; }

    ConservationBasis basis;
    basis.vectors = integral ? rational_laws(net) : floating_laws(net);
    return basis;
}

}  // namespace rxnet
