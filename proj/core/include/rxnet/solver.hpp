#ifndef RXNET_SOLVER_HPP
#define RXNET_SOLVER_HPP

#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "rxnet/compile.hpp"
#include "rxnet/kinetics.hpp"

namespace rxnet {

enum class Method { rosenbrock4, bdf, erk45 };

enum class OutputMode { every_accepted_step, dense_sample };

struct SolverOptions {
    Method method = Method::rosenbrock4;
    double rtol = 1e-6;
    double atol = 1e-9;                 // scalar absolute tolerance
    std::vector<double> atol_vec;       // optional per-species override
    double h_init = 0.0;                // 0 = auto
    double h_min = 0.0;                 // 0 = 1e4 * eps * |t_end - t0| floor
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 100000;            // attempted steps
    OutputMode output = OutputMode::every_accepted_step;
    int output_points = 200;            // used by dense_sample

    void validate() const;              // throws Error on bad settings
    double atol_for(int i) const {
        return atol_vec.empty() ? atol : atol_vec[i];
    }
};

struct SolverStats {
    long steps_accepted = 0;
    long steps_rejected = 0;
    long rhs_evals = 0;
    long jac_evals = 0;
    long lu_factorizations = 0;
};

struct Trajectory {
    std::vector<double> times;               // strictly increasing, starts at t0
    std::vector<std::vector<double>> states; // one row per sample
    SolverStats stats;
};

/// Result of a single step attempt.
struct StepAttempt {
    bool accepted = false;
    std::vector<double> x_new;
    double err_norm = 0.0;  // scaled RMS; accepted iff <= 1
    double h_next = 0.0;    // controller suggestion, in [0.2, 5] x h
};

/// One-step drivers exposing the per-attempt contract.  A stepper owns its
/// scratch buffers and is single-threaded; make one instance per concurrent
/// integration.
class Stepper {
public:
    virtual ~Stepper() = default;
    virtual StepAttempt step(std::span<const double> x, double t, double h) = 0;
    virtual int order() const = 0;
    SolverStats& stats() { return stats_; }

protected:
    SolverStats stats_;
};

/// Rosenbrock 4(3): linearly implicit, analytic Jacobian in the stage
/// equations, embedded third-order error estimate.
std::unique_ptr<Stepper> make_rosenbrock4(const CompiledNetwork& net,
                                          const SolverOptions& opts);

/// Embedded explicit Runge-Kutta 5(4) (Dormand-Prince), no Jacobian use.
std::unique_ptr<Stepper> make_erk45(const CompiledNetwork& net,
                                    const SolverOptions& opts);

/// Integrates dx/dt = f(x) over [t0, t_end] with adaptive step control.
/// Throws StepSizeUnderflow, MaxStepsExceeded, NewtonDivergence, or
/// DomainError on failure.
Trajectory integrate(const CompiledNetwork& net, std::span<const double> x0,
                     double t0, double t_end, const SolverOptions& opts);

}  // namespace rxnet

#endif
