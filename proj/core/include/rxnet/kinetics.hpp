#ifndef RXNET_KINETICS_HPP
#define RXNET_KINETICS_HPP

#include <span>
#include <vector>

#include "rxnet/compile.hpp"
#include "rxnet/network.hpp"

namespace rxnet {

/// N x N Jacobian in column-compressed form.  The structural pattern is
/// fixed by the network: entry (n, j) is present iff some reaction m has
/// dk_nm != 0 and l_jm > 0.  Values for absent entries read as zero.
class SparseJacobian {
public:
    SparseJacobian() = default;
    explicit SparseJacobian(const CompiledNetwork& net);

    int dim() const { return n_; }
    int nnz() const { return static_cast<int>(values_.size()); }

    /// Value at (row n, col j); zero when structurally absent.
    double at(int n, int j) const;
    bool structurally_present(int n, int j) const;

    std::span<const int> col_rows(int j) const {
        return {row_idx_.data() + col_ptr_[j],
                static_cast<size_t>(col_ptr_[j + 1] - col_ptr_[j])};
    }
    std::span<const double> col_values(int j) const {
        return {values_.data() + col_ptr_[j],
                static_cast<size_t>(col_ptr_[j + 1] - col_ptr_[j])};
    }

    void set_zero();

    /// Adds this matrix into a dense column-major N x N buffer.
    void add_to_dense(std::span<double> dense) const;

private:
    friend void eval_jacobian(const CompiledNetwork&, std::span<const double>,
                              SparseJacobian&);
    int n_ = 0;
    std::vector<int> col_ptr_;   // size N+1
    std::vector<int> row_idx_;   // sorted within each column
    std::vector<double> values_;
};

/// rate_m = k_m * prod_i x_i^{l_im}; empty product = 1.  `out` has length M.
void eval_rates(const CompiledNetwork& net, std::span<const double> x,
                std::span<double> out);

/// f_n = sum_m dk_nm * prod_i x_i^{l_im}, accumulated over dk nonzeros in
/// reaction-index order.  `out` has length N, `scratch` length M.
void eval_rhs(const CompiledNetwork& net, std::span<const double> x,
              std::span<double> out, std::span<double> scratch);

/// Column-wise analytic Jacobian: column j is Dk_xj * (l_xj .* prod(X_xj .^
/// Ltilde_xj))'.  Writes only structurally present entries.
void eval_jacobian(const CompiledNetwork& net, std::span<const double> x,
                   SparseJacobian& out);

// Allocating conveniences.
std::vector<double> eval_rates(const CompiledNetwork& net, std::span<const double> x);
std::vector<double> eval_rhs(const CompiledNetwork& net, std::span<const double> x);
SparseJacobian eval_jacobian(const CompiledNetwork& net, std::span<const double> x);

/// Dense reference formulation f = D * (k .* prod(X .^ L, 1))' with full
/// N x M products and the 0^0 = 1 convention.  Retained as an independent
/// oracle for the sparse path.
std::vector<double> eval_rhs_dense_oracle(const NetworkSpec& spec,
                                          std::span<const double> x);

}  // namespace rxnet

#endif
