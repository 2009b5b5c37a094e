#include "rxnet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "rxnet/errors.hpp"

namespace rxnet {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kSafety = 0.9;

double scaled_rms(std::span<const double> err, std::span<const double> x_old,
                  std::span<const double> x_new, const SolverOptions& opts) {
    double acc = 0.0;
    const size_t n = err.size();
    for (size_t i = 0; i < n; ++i) {
        const double sc = opts.atol_for(static_cast<int>(i)) +
                          opts.rtol * std::max(std::abs(x_old[i]), std::abs(x_new[i]));
        const double q = err[i] / sc;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Dense LU with partial pivoting, column-major.
class DenseLU {
public:
    explicit DenseLU(int n) : n_(n), a_(static_cast<size_t>(n) * n), piv_(n) {}

    double& a(int r, int c) { return a_[static_cast<size_t>(c) * n_ + r]; }
    std::span<double> raw() { return a_; }

    // Factorizes in place; returns false on a zero pivot.
    bool factorize() {
        for (int k = 0; k < n_; ++k) {
            int p = k;
            for (int i = k + 1; i < n_; ++i)
                if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
            piv_[k] = p;
            if (a(p, k) == 0.0) return false;
            if (p != k)
                for (int c = 0; c < n_; ++c) std::swap(a(k, c), a(p, c));
            const double inv = 1.0 / a(k, k);
            for (int i = k + 1; i < n_; ++i) {
                const double f = (a(i, k) *= inv);
                for (int c = k + 1; c < n_; ++c) a(i, c) -= f * a(k, c);
            }
        }
        return true;
    }

    void solve(std::span<double> b) const {
        for (int k = 0; k < n_; ++k)
            if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
        for (int k = 0; k < n_; ++k) {
            const double bk = b[k];
            for (int i = k + 1; i < n_; ++i)
                b[i] -= a_[static_cast<size_t>(k) * n_ + i] * bk;
        }
        for (int k = n_ - 1; k >= 0; --k) {
            double s = b[k];
            for (int c = k + 1; c < n_; ++c)
                s -= a_[static_cast<size_t>(c) * n_ + k] * b[c];
            b[k] = s / a_[static_cast<size_t>(k) * n_ + k];
        }
    }

private:
    int n_;
    std::vector<double> a_;
    std::vector<int> piv_;
};

// Step-size factor from a PI controller; plain I-control until an accepted
// error history exists.
class PiController {
public:
    explicit PiController(int order) : k_(order) {}

    double factor(double err, bool had_rejection) const {
        double fac;
        const double e = std::max(err, 1e-16);
        if (err_prev_ > 0.0 && !had_rejection)
            fac = kSafety * std::pow(e, -0.7 / k_) * std::pow(err_prev_, 0.4 / k_);
        else
            fac = kSafety * std::pow(e, -1.0 / k_);
        if (had_rejection) fac = std::min(fac, 1.0);
        return std::clamp(fac, kMinFactor, kMaxFactor);
    }

    void on_accept(double err) { err_prev_ = std::max(err, 1e-16); }

private:
    int k_;
    double err_prev_ = 0.0;
};

// RODAS4 coefficients (Hairer & Wanner): six-stage stiffly accurate
// Rosenbrock method of order 4 with an embedded order-3 estimate.
struct Rodas4 {
    static constexpr double gamma = 0.25;
    static constexpr double a21 = 1.544000000000000e+00;
    static constexpr double a31 = 9.466785280815826e-01, a32 = 2.557011698983284e-01;
    static constexpr double a41 = 3.314825187068521e+00, a42 = 2.896124015972201e+00,
                            a43 = 9.986419139977817e-01;
    static constexpr double a51 = 1.221224509226641e+00, a52 = 6.019134481288629e+00,
                            a53 = 1.253708332932087e+01, a54 = -6.878860361058950e-01;
    static constexpr double c21 = -5.668800000000000e+00;
    static constexpr double c31 = -2.430093356833875e+00, c32 = -2.063599157091915e-01;
    static constexpr double c41 = -1.073529058151375e-01, c42 = -9.594562251023355e+00,
                            c43 = -2.047028614809616e+01;
    static constexpr double c51 = 7.496443313967647e+00, c52 = -1.024680431464352e+01,
                            c53 = -3.399990352819905e+01, c54 = 1.170890893206160e+01;
    static constexpr double c61 = 8.083246795921522e+00, c62 = -7.981132988064893e+00,
                            c63 = -3.152159432874371e+01, c64 = 1.631930543123136e+01,
                            c65 = -6.058818238834054e+00;
};

class Rosenbrock4Stepper final : public Stepper {
public:
    Rosenbrock4Stepper(const CompiledNetwork& net, const SolverOptions& opts)
        : net_(net), opts_(opts), n_(net.n_species()),
          jac_(net), lu_(net.n_species()), controller_(4),
          f0_(n_), ftmp_(n_), xtmp_(n_),
          g1_(n_), g2_(n_), g3_(n_), g4_(n_), g5_(n_), g6_(n_),
          rate_scratch_(net.n_reactions()) {}

    int order() const override { return 4; }

    StepAttempt step(std::span<const double> x, double t, double h) override {
        eval_rhs(net_, x, f0_, rate_scratch_);
        ++stats_.rhs_evals;
        eval_jacobian(net_, x, jac_);
        ++stats_.jac_evals;

        // A = I/(gamma h) - J
        std::fill(lu_.raw().begin(), lu_.raw().end(), 0.0);
        const double diag = 1.0 / (Rodas4::gamma * h);
        for (int i = 0; i < n_; ++i) lu_.a(i, i) = diag;
        std::vector<double> neg(static_cast<size_t>(n_) * n_, 0.0);
        jac_.add_to_dense(neg);
        for (size_t i = 0; i < neg.size(); ++i) lu_.raw()[i] -= neg[i];
        ++stats_.lu_factorizations;
        if (!lu_.factorize()) throw SingularIterationMatrix(t);

        auto rhs_at = [&](std::span<const double> y) -> std::span<const double> {
            eval_rhs(net_, y, ftmp_, rate_scratch_);
            ++stats_.rhs_evals;
            return ftmp_;
        };

        const double ih = 1.0 / h;
        // Stage 1
        std::copy(f0_.begin(), f0_.end(), g1_.begin());
        lu_.solve(g1_);
        // Stage 2
        for (int i = 0; i < n_; ++i) xtmp_[i] = x[i] + Rodas4::a21 * g1_[i];
        rhs_at(xtmp_);
        for (int i = 0; i < n_; ++i)
            g2_[i] = ftmp_[i] + Rodas4::c21 * g1_[i] * ih;
        lu_.solve(g2_);
        // Stage 3
        for (int i = 0; i < n_; ++i)
            xtmp_[i] = x[i] + Rodas4::a31 * g1_[i] + Rodas4::a32 * g2_[i];
        rhs_at(xtmp_);
        for (int i = 0; i < n_; ++i)
            g3_[i] = ftmp_[i] + (Rodas4::c31 * g1_[i] + Rodas4::c32 * g2_[i]) * ih;
        lu_.solve(g3_);
        // Stage 4
        for (int i = 0; i < n_; ++i)
            xtmp_[i] = x[i] + Rodas4::a41 * g1_[i] + Rodas4::a42 * g2_[i] +
                       Rodas4::a43 * g3_[i];
        rhs_at(xtmp_);
        for (int i = 0; i < n_; ++i)
            g4_[i] = ftmp_[i] + (Rodas4::c41 * g1_[i] + Rodas4::c42 * g2_[i] +
                                 Rodas4::c43 * g3_[i]) * ih;
        lu_.solve(g4_);
        // Stage 5
        for (int i = 0; i < n_; ++i)
            xtmp_[i] = x[i] + Rodas4::a51 * g1_[i] + Rodas4::a52 * g2_[i] +
                       Rodas4::a53 * g3_[i] + Rodas4::a54 * g4_[i];
        rhs_at(xtmp_);
        for (int i = 0; i < n_; ++i)
            g5_[i] = ftmp_[i] + (Rodas4::c51 * g1_[i] + Rodas4::c52 * g2_[i] +
                                 Rodas4::c53 * g3_[i] + Rodas4::c54 * g4_[i]) * ih;
        lu_.solve(g5_);
        // Stage 6 (embedded difference): xtmp = stage-5 state + g5
        for (int i = 0; i < n_; ++i) xtmp_[i] += g5_[i];
        rhs_at(xtmp_);
        for (int i = 0; i < n_; ++i)
            g6_[i] = ftmp_[i] + (Rodas4::c61 * g1_[i] + Rodas4::c62 * g2_[i] +
                                 Rodas4::c63 * g3_[i] + Rodas4::c64 * g4_[i] +
                                 Rodas4::c65 * g5_[i]) * ih;
        lu_.solve(g6_);

        StepAttempt out;
        out.x_new.resize(n_);
        for (int i = 0; i < n_; ++i) out.x_new[i] = xtmp_[i] + g6_[i];

        if (!all_finite(out.x_new)) {
            out.accepted = false;
            out.err_norm = std::numeric_limits<double>::infinity();
            out.h_next = kMinFactor * h;
            ++stats_.steps_rejected;
            return out;
        }

        out.err_norm = scaled_rms(g6_, x, out.x_new, opts_);
        out.accepted = out.err_norm <= 1.0;
        out.h_next = h * controller_.factor(out.err_norm, !out.accepted);
        if (out.accepted) {
            controller_.on_accept(out.err_norm);
            ++stats_.steps_accepted;
        } else {
            ++stats_.steps_rejected;
        }
        return out;
    }

private:
    const CompiledNetwork& net_;
    SolverOptions opts_;
    int n_;
    SparseJacobian jac_;
    DenseLU lu_;
    PiController controller_;
    std::vector<double> f0_, ftmp_, xtmp_;
    std::vector<double> g1_, g2_, g3_, g4_, g5_, g6_;
    std::vector<double> rate_scratch_;
};

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

class Erk45Stepper final : public Stepper {
public:
    Erk45Stepper(const CompiledNetwork& net, const SolverOptions& opts)
        : net_(net), opts_(opts), n_(net.n_species()), controller_(5),
          k1_(n_), k2_(n_), k3_(n_), k4_(n_), k5_(n_), k6_(n_), k7_(n_),
          xtmp_(n_), err_(n_), rate_scratch_(net.n_reactions()) {}

    int order() const override { return 5; }

    StepAttempt step(std::span<const double> x, double t, double h) override {
        auto f = [&](std::span<const double> y, std::span<double> out) {
            eval_rhs(net_, y, out, rate_scratch_);
            ++stats_.rhs_evals;
        };
        using C = Dopri5;
        f(x, k1_);
        for (int i = 0; i < n_; ++i) xtmp_[i] = x[i] + h * C::a21 * k1_[i];
        f(xtmp_, k2_);
        for (int i = 0; i < n_; ++i)
            xtmp_[i] = x[i] + h * (C::a31 * k1_[i] + C::a32 * k2_[i]);
        f(xtmp_, k3_);
        for (int i = 0; i < n_; ++i)
            xtmp_[i] = x[i] + h * (C::a41 * k1_[i] + C::a42 * k2_[i] + C::a43 * k3_[i]);
        f(xtmp_, k4_);
        for (int i = 0; i < n_; ++i)
            xtmp_[i] = x[i] + h * (C::a51 * k1_[i] + C::a52 * k2_[i] +
                                   C::a53 * k3_[i] + C::a54 * k4_[i]);
        f(xtmp_, k5_);
        for (int i = 0; i < n_; ++i)
            xtmp_[i] = x[i] + h * (C::a61 * k1_[i] + C::a62 * k2_[i] + C::a63 * k3_[i] +
                                   C::a64 * k4_[i] + C::a65 * k5_[i]);
        f(xtmp_, k6_);

        StepAttempt out;
        out.x_new.resize(n_);
        for (int i = 0; i < n_; ++i)
            out.x_new[i] = x[i] + h * (C::b1 * k1_[i] + C::b3 * k3_[i] +
                                       C::b4 * k4_[i] + C::b5 * k5_[i] + C::b6 * k6_[i]);
        f(out.x_new, k7_);
        for (int i = 0; i < n_; ++i)
            err_[i] = h * (C::e1 * k1_[i] + C::e3 * k3_[i] + C::e4 * k4_[i] +
                           C::e5 * k5_[i] + C::e6 * k6_[i] + C::e7 * k7_[i]);

        if (!all_finite(out.x_new)) {
            out.accepted = false;
            out.err_norm = std::numeric_limits<double>::infinity();
            out.h_next = kMinFactor * h;
            ++stats_.steps_rejected;
            return out;
        }

        out.err_norm = scaled_rms(err_, x, out.x_new, opts_);
        out.accepted = out.err_norm <= 1.0;
        out.h_next = h * controller_.factor(out.err_norm, !out.accepted);
        if (out.accepted) {
            controller_.on_accept(out.err_norm);
            ++stats_.steps_accepted;
        } else {
            ++stats_.steps_rejected;
        }
        return out;
    }

private:
    const CompiledNetwork& net_;
    SolverOptions opts_;
    int n_;
    PiController controller_;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_;
    std::vector<double> xtmp_, err_;
    std::vector<double> rate_scratch_;
};

}  // namespace

std::unique_ptr<Stepper> make_rosenbrock4(const CompiledNetwork& net,
                                          const SolverOptions& opts) {
    return std::make_unique<Rosenbrock4Stepper>(net, opts);
}

std::unique_ptr<Stepper> make_erk45(const CompiledNetwork& net,
                                    const SolverOptions& opts) {
    return std::make_unique<Erk45Stepper>(net, opts);
}

void SolverOptions::validate() const {
    if (!(rtol > 0.0 && rtol < 1.0)) throw Error("rtol must be in (0, 1)");
    if (!(atol > 0.0)) throw Error("atol must be positive");
    for (double a : atol_vec)
        if (!(a > 0.0)) throw Error("per-species atol must be positive");
    if (h_min < 0.0 || h_max <= 0.0 || h_min > h_max)
        throw Error("step bounds must satisfy 0 <= h_min <= h_max");
    if (max_steps < 1) throw Error("max_steps must be >= 1");
    if (output_points < 2) throw Error("output_points must be >= 2");
}

namespace {

// Standard starting-step heuristic from ||f(x0)|| and the tolerances.
double initial_step(const CompiledNetwork& net, std::span<const double> x0,
                    double span, int order, const SolverOptions& opts,
                    SolverStats& stats) {
    const int n = net.n_species();
    std::vector<double> f0(n), scratch(net.n_reactions());
    eval_rhs(net, x0, f0, scratch);
    ++stats.rhs_evals;

    auto sc_norm = [&](std::span<const double> v) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sc = opts.atol_for(i) + opts.rtol * std::abs(x0[i]);
            acc += (v[i] / sc) * (v[i] / sc);
        }
        return std::sqrt(acc / n);
    };

    const double d0 = sc_norm(x0);
    const double d1 = sc_norm(f0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);

    std::vector<double> x1(n), f1(n);
    for (int i = 0; i < n; ++i) x1[i] = x0[i] + h0 * f0[i];
    double d2 = 0.0;
    try {
        eval_rhs(net, x1, f1, scratch);
        ++stats.rhs_evals;
        for (int i = 0; i < n; ++i) f1[i] -= f0[i];
        d2 = sc_norm(f1) / h0;
    } catch (const DomainError&) {
        d2 = 0.0;  // probe left the domain; fall back to h0
    }

    double h1;
    if (std::max(d1, d2) <= 1e-15)
        h1 = std::max(1e-6, h0 * 1e-3);
    else
        h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / (order + 1));
    return std::min({100.0 * h0, h1, span});
}

bool negativity_ok(std::span<const double> x, const SolverOptions& opts) {
    for (size_t i = 0; i < x.size(); ++i)
        if (x[i] < -100.0 * opts.atol_for(static_cast<int>(i))) return false;
    return true;
}

Trajectory integrate_one_step_method(const CompiledNetwork& net,
                                     std::span<const double> x0, double t0,
                                     double t_end, const SolverOptions& opts) {
    std::unique_ptr<Stepper> stepper =
        opts.method == Method::rosenbrock4 ? make_rosenbrock4(net, opts)
                                           : make_erk45(net, opts);

    const double span = t_end - t0;
    const double h_floor =
        std::max(opts.h_min, 16.0 * kEps * std::max({std::abs(t0), std::abs(t_end), 1.0}));

    Trajectory traj;
    traj.times.push_back(t0);
    traj.states.emplace_back(x0.begin(), x0.end());

    std::vector<double> x(x0.begin(), x0.end());
    double t = t0;
    double h = opts.h_init > 0.0
                   ? std::min(opts.h_init, span)
                   : initial_step(net, x0, span, stepper->order(), opts, stepper->stats());
    h = std::min(h, opts.h_max);

    long attempts = 0;
    int singular_retries = 0;
    while (t < t_end) {
        if (++attempts > opts.max_steps) {
            traj.stats = stepper->stats();
            throw MaxStepsExceeded(t);
        }
        const bool last = (t + h >= t_end) || (t_end - (t + h) < h_floor);
        const double h_try = last ? t_end - t : h;

        StepAttempt att;
        try {
            att = stepper->step(x, t, h_try);
        } catch (const SingularIterationMatrix&) {
            if (++singular_retries > 20 || h_try * 0.5 < h_floor) {
                traj.stats = stepper->stats();
                throw;
            }
            ++stepper->stats().steps_rejected;
            h = h_try * 0.5;
            continue;
        }
        singular_retries = 0;

        bool accept = att.accepted;
        double h_next = att.h_next;
        if (accept && !negativity_ok(att.x_new, opts)) {
            // Physically inadmissible excursion: reject and halve.
            accept = false;
            --stepper->stats().steps_accepted;
            ++stepper->stats().steps_rejected;
            h_next = h_try * 0.5;
        }

        if (accept) {
            t = last ? t_end : t + h_try;
            x = std::move(att.x_new);
            traj.times.push_back(t);
            traj.states.push_back(x);
            h = std::clamp(h_next, h_floor, opts.h_max);
        } else {
            h = std::min(h_next, h_try);
            if (h < h_floor) {
                traj.stats = stepper->stats();
                throw StepSizeUnderflow(t);
            }
        }
    }
    traj.stats = stepper->stats();
    return traj;
}

// Fixed-leading-coefficient BDF, orders 1-5, quasi-constant step realized by
// rescaling the modified-divided-difference array, modified Newton on the
// corrector with Jacobian and LU reuse.
class BdfIntegrator {
public:
    static constexpr int kMaxOrder = 5;
    static constexpr int kNewtonMaxIter = 4;

    BdfIntegrator(const CompiledNetwork& net, const SolverOptions& opts,
                  std::span<const double> x0, double t0, double t_end)
        : net_(net), opts_(opts), n_(net.n_species()), t_(t0), t_end_(t_end),
          jac_(net), lu_(n_), d_(kMaxOrder + 3, std::vector<double>(n_, 0.0)),
          f_(n_), scratch_(net.n_reactions()) {
        gamma_[0] = 0.0;
        for (int k = 1; k <= kMaxOrder + 1; ++k) gamma_[k] = gamma_[k - 1] + 1.0 / k;
        for (int k = 0; k <= kMaxOrder + 1; ++k) error_const_[k] = 1.0 / (k + 1);

        h_floor_ = std::max(opts.h_min,
                            16.0 * kEps * std::max({std::abs(t0), std::abs(t_end), 1.0}));

        d_[0].assign(x0.begin(), x0.end());
        eval_rhs(net_, x0, f_, scratch_);
        ++stats_.rhs_evals;
        h_ = opts.h_init > 0.0 ? std::min(opts.h_init, t_end - t0)
                               : initial_step(net_, x0, t_end - t0, 1, opts, stats_);
        h_ = std::min(h_, opts.h_max);
        for (int i = 0; i < n_; ++i) d_[1][i] = h_ * f_[i];
        d_scale_h_ = h_;
        order_ = 1;
    }

    double t() const { return t_; }
    const std::vector<double>& x() const { return d_[0]; }
    SolverStats& stats() { return stats_; }
    long attempts() const { return attempts_; }

    // Advances one accepted step; t() lands exactly on t_end at the last one.
    void step() {
        bool accepted = false;
        int newton_failures = 0;
        while (!accepted) {
            if (++attempts_ > opts_.max_steps) throw MaxStepsExceeded(t_);
            if (h_ < h_floor_) throw StepSizeUnderflow(t_);

            double h = h_;
            bool last = false;
            if (t_ + h >= t_end_ || t_end_ - (t_ + h) < h_floor_) {
                h = t_end_ - t_;
                last = true;
            }
            if (h != d_scale_h_) rescale_d(h / d_scale_h_);

            // Predictor and the corrector constant c = h / gamma_k.
            std::vector<double> y_predict(n_, 0.0);
            for (int i = 0; i <= order_; ++i)
                for (int c = 0; c < n_; ++c) y_predict[c] += d_[i][c];

            std::vector<double> psi(n_, 0.0);
            for (int i = 1; i <= order_; ++i)
                for (int c = 0; c < n_; ++c) psi[c] += gamma_[i] * d_[i][c];
            const double inv_alpha = 1.0 / gamma_[order_];
            for (double& v : psi) v *= inv_alpha;
            const double c_newton = h * inv_alpha;

            ensure_lu(c_newton, y_predict);

            std::vector<double> y = y_predict, dacc(n_, 0.0);
            double rate = 0.0;
            const bool converged = newton(c_newton, y_predict, psi, y, dacc, rate);
            if (!converged) {
                ++stats_.steps_rejected;
                if (!jac_fresh_) {
                    refresh_jacobian(y_predict);
                    continue;  // same h, fresh Jacobian
                }
                if (++newton_failures >= 8 && h <= h_floor_ * 2.0)
                    throw NewtonDivergence(t_);
                h_ = std::max(h * 0.5, 0.0);
                continue;
            }
            if (rate > 0.5) jac_fresh_ = false;  // refresh before next Newton

            // Embedded error estimate from the correction.
            std::vector<double> err(n_);
            for (int c = 0; c < n_; ++c) err[c] = error_const_[order_] * dacc[c];
            const double err_norm = scaled_rms(err, d_[0], y, opts_);

            if (err_norm > 1.0 || !all_finite(y)) {
                ++stats_.steps_rejected;
                const double fac = std::isfinite(err_norm) && err_norm > 0.0
                    ? std::max(kMinFactor, kSafety * std::pow(err_norm, -1.0 / (order_ + 1)))
                    : kMinFactor;
                h_ = h * fac;
                continue;
            }
            if (!negativity_ok(y, opts_)) {
                ++stats_.steps_rejected;
                h_ = h * 0.5;
                continue;
            }

            // Accept: advance difference array.
            ++stats_.steps_accepted;
            t_ = last ? t_end_ : t_ + h;
            for (int c = 0; c < n_; ++c) {
                d_[order_ + 2][c] = dacc[c] - d_[order_ + 1][c];
                d_[order_ + 1][c] = dacc[c];
            }
            for (int i = order_; i >= 0; --i)
                for (int c = 0; c < n_; ++c) d_[i][c] += d_[i + 1][c];
            ++n_equal_steps_;
            accepted = true;

            select_order_and_step(err_norm, y);
        }
    }

private:
    void rescale_d(double factor) {
        const int k = order_;
        // R(factor) then R(1): D <- (R U)^T D over rows 0..k.
        auto compute_r = [&](double f) {
            std::vector<std::vector<double>> r(k + 1, std::vector<double>(k + 1, 0.0));
            for (int j = 0; j <= k; ++j) r[0][j] = 1.0;
            for (int i = 1; i <= k; ++i)
                for (int j = 1; j <= k; ++j)
                    r[i][j] = r[i - 1][j] * (i - 1 - f * j) / i;
            for (int i = 1; i <= k; ++i) r[i][0] = 0.0;
            return r;
        };
        const auto r = compute_r(factor);
        const auto u = compute_r(1.0);
        std::vector<std::vector<double>> ru(k + 1, std::vector<double>(k + 1, 0.0));
        for (int i = 0; i <= k; ++i)
            for (int j = 0; j <= k; ++j)
                for (int p = 0; p <= k; ++p) ru[i][j] += r[i][p] * u[p][j];
        std::vector<std::vector<double>> nd(k + 1, std::vector<double>(n_, 0.0));
        for (int i = 0; i <= k; ++i)
            for (int p = 0; p <= k; ++p)
                for (int c = 0; c < n_; ++c) nd[i][c] += ru[p][i] * d_[p][c];
        for (int i = 0; i <= k; ++i) d_[i] = std::move(nd[i]);
        d_scale_h_ *= factor;
        n_equal_steps_ = 0;
    }

    void refresh_jacobian(std::span<const double> y) {
        eval_jacobian(net_, y, jac_);
        ++stats_.jac_evals;
        jac_fresh_ = true;
        lu_c_ = 0.0;  // force refactorization
    }

    // Builds (I - c J) and factorizes, reusing the LU while c drifts < 30%.
    void ensure_lu(double c, std::span<const double> y) {
        if (!have_jac_) {
            refresh_jacobian(y);
            have_jac_ = true;
        }
        if (lu_c_ > 0.0 && std::abs(c / lu_c_ - 1.0) <= 0.3) return;
        factorize(c, y);
    }

    void factorize(double c, std::span<const double> y) {
        std::fill(lu_.raw().begin(), lu_.raw().end(), 0.0);
        for (int i = 0; i < n_; ++i) lu_.a(i, i) = 1.0;
        std::vector<double> dense(static_cast<size_t>(n_) * n_, 0.0);
        jac_.add_to_dense(dense);
        for (size_t i = 0; i < dense.size(); ++i) lu_.raw()[i] -= c * dense[i];
        ++stats_.lu_factorizations;
        if (!lu_.factorize()) {
            lu_c_ = 0.0;
            throw SingularIterationMatrix(t_);
        }
        lu_c_ = c;
    }

    bool newton(double c, std::span<const double> y_predict,
                std::span<const double> psi, std::vector<double>& y,
                std::vector<double>& dacc, double& rate_out) {
        const double tol =
            std::max(10.0 * kEps / opts_.rtol, std::min(0.03, std::sqrt(opts_.rtol)));
        double dy_norm_old = -1.0;
        rate_out = 0.0;
        std::vector<double> res(n_);
        for (int it = 0; it < kNewtonMaxIter; ++it) {
            try {
                eval_rhs(net_, y, f_, scratch_);
            } catch (const DomainError&) {
                return false;
            }
            ++stats_.rhs_evals;
            for (int i = 0; i < n_; ++i) res[i] = c * f_[i] - psi[i] - dacc[i];
            if (!all_finite(res)) return false;
            lu_.solve(res);
            const double dy_norm = scaled_rms(res, y_predict, y, opts_);
            double rate = -1.0;
            if (dy_norm_old >= 0.0 && dy_norm_old > 0.0) {
                rate = dy_norm / dy_norm_old;
                rate_out = rate;
                if (rate >= 1.0 ||
                    std::pow(rate, kNewtonMaxIter - it) / (1.0 - rate) * dy_norm > tol)
                    return false;
            }
            for (int i = 0; i < n_; ++i) {
                y[i] += res[i];
                dacc[i] += res[i];
            }
            if (dy_norm == 0.0 ||
                (rate >= 0.0 && rate / (1.0 - rate) * dy_norm < tol))
                return true;
            dy_norm_old = dy_norm;
        }
        return false;
    }

    void select_order_and_step(double err_norm, std::span<const double> y) {
        if (n_equal_steps_ < order_ + 1) return;

        auto err_at = [&](const std::vector<double>& diff, int k) {
            std::vector<double> e(n_);
            for (int c = 0; c < n_; ++c) e[c] = error_const_[k] * diff[c];
            return scaled_rms(e, d_[0], y, opts_);
        };
        const double inf = std::numeric_limits<double>::infinity();
        const double em = order_ > 1 ? err_at(d_[order_], order_ - 1) : inf;
        const double ec = std::max(err_norm, 1e-16);
        const double ep = order_ < kMaxOrder ? err_at(d_[order_ + 2], order_ + 1) : inf;

        const double fm = em > 0 ? std::pow(std::max(em, 1e-16), -1.0 / order_) : inf;
        const double fc = std::pow(ec, -1.0 / (order_ + 1));
        const double fp = ep > 0 ? std::pow(std::max(ep, 1e-16), -1.0 / (order_ + 2)) : inf;

        int delta = 0;
        double best = fc;
        if (fm > best) { best = fm; delta = -1; }
        if (fp > best) { best = fp; delta = 1; }
        order_ += delta;

        const double factor = std::min(kMaxFactor, std::max(kMinFactor, kSafety * best));
        h_ = std::min(d_scale_h_ * factor, opts_.h_max);
        n_equal_steps_ = 0;
    }

    const CompiledNetwork& net_;
    SolverOptions opts_;
    int n_;
    double t_, t_end_;
    SparseJacobian jac_;
    DenseLU lu_;
    std::vector<std::vector<double>> d_;
    std::vector<double> f_, scratch_;
    double gamma_[kMaxOrder + 2];
    double error_const_[kMaxOrder + 2];
    int order_ = 1;
    double h_ = 0.0;
    double d_scale_h_ = 0.0;
    double h_floor_ = 0.0;
    int n_equal_steps_ = 0;
    bool have_jac_ = false;
    bool jac_fresh_ = false;
    double lu_c_ = 0.0;
    SolverStats stats_;
    long attempts_ = 0;
};

Trajectory integrate_bdf(const CompiledNetwork& net, std::span<const double> x0,
                         double t0, double t_end, const SolverOptions& opts) {
    BdfIntegrator bdf(net, opts, x0, t0, t_end);
    Trajectory traj;
    traj.times.push_back(t0);
    traj.states.emplace_back(x0.begin(), x0.end());
    try {
        while (bdf.t() < t_end) {
            bdf.step();
            traj.times.push_back(bdf.t());
            traj.states.push_back(bdf.x());
        }
    } catch (...) {
        traj.stats = bdf.stats();
        throw;
    }
    traj.stats = bdf.stats();
    return traj;
}

// Cubic Hermite resampling of a raw trajectory onto an equispaced grid.
Trajectory dense_sample(const CompiledNetwork& net, const Trajectory& raw,
                        double t0, double t_end, int points) {
    const int n = net.n_species();
    std::vector<std::vector<double>> derivs(raw.times.size());
    std::vector<double> scratch(net.n_reactions());
    for (size_t i = 0; i < raw.times.size(); ++i) {
        derivs[i].resize(n);
        eval_rhs(net, raw.states[i], derivs[i], scratch);
    }

    Trajectory out;
    out.stats = raw.stats;
    size_t seg = 0;
    for (int p = 0; p < points; ++p) {
        const double t = p == points - 1
            ? t_end
            : t0 + (t_end - t0) * (static_cast<double>(p) / (points - 1));
        while (seg + 2 < raw.times.size() && raw.times[seg + 1] < t) ++seg;
        const double ta = raw.times[seg], tb = raw.times[seg + 1];
        const double dt = tb - ta;
        const double s = std::clamp((t - ta) / dt, 0.0, 1.0);
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        std::vector<double> xi(n);
        for (int i = 0; i < n; ++i)
            xi[i] = h00 * raw.states[seg][i] + h10 * dt * derivs[seg][i] +
                    h01 * raw.states[seg + 1][i] + h11 * dt * derivs[seg + 1][i];
        out.times.push_back(t);
        out.states.push_back(std::move(xi));
    }
    return out;
}

}  // namespace

Trajectory integrate(const CompiledNetwork& net, std::span<const double> x0,
                     double t0, double t_end, const SolverOptions& opts) {
    opts.validate();
    if (!(t_end > t0)) throw Error("t_end must exceed t0");
    if (x0.size() != static_cast<size_t>(net.n_species()))
        throw Error("initial state length does not match species count");
    if (!all_finite(x0)) throw Error("initial state must be finite");

    Trajectory raw = opts.method == Method::bdf
        ? integrate_bdf(net, x0, t0, t_end, opts)
        : integrate_one_step_method(net, x0, t0, t_end, opts);

    if (opts.output == OutputMode::every_accepted_step) return raw;
    return dense_sample(net, raw, t0, t_end, opts.output_points);
}

}  // namespace rxnet
