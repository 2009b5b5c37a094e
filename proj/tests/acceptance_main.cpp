// Acceptance suite: runs each criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion.  Exit code is the number of failures.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <new>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rxnet/compile.hpp"
#include "rxnet/conservation.hpp"
#include "rxnet/errors.hpp"
#include "rxnet/kinetics.hpp"
#include "rxnet/parser.hpp"
#include "rxnet/solver.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/random_network.hpp"

using namespace rxnet;
using namespace rxnet::testing;
namespace fs = std::filesystem;

// ---- allocation counting test facility ----
namespace {
std::atomic<bool> g_count_allocs{false};
std::atomic<long> g_alloc_count{0};
}  // namespace

void* operator new(std::size_t size) {
    if (g_count_allocs.load(std::memory_order_relaxed))
        g_alloc_count.fetch_add(1, std::memory_order_relaxed);
    if (void* p = std::malloc(size)) return p;
    throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace {

int g_failures = 0;

void report(int id, const char* what, bool ok) {
    std::printf("%s  criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what);
    if (!ok) ++g_failures;
}

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

// 1. Worked-example fixtures: D, L, Li, Lv of the enzyme network.
bool criterion1() {
    const auto net = compile(enzyme_spec(1.0, 1.0, 1.0));
    const auto& s = net.stoich;
    const int li[2][3] = {{1, 3, 3}, {2, 0, 0}};
    const int lv[2][3] = {{1, 1, 1}, {1, 0, 0}};
    const int dmat[4][3] = {{-1, 1, 1}, {-1, 1, 0}, {1, -1, -1}, {0, 0, 1}};
    const int lmat[4][3] = {{1, 0, 0}, {1, 0, 0}, {0, 1, 1}, {0, 0, 0}};
    if (s.l_rows != 2 || s.n_species != 4 || s.n_reactions != 3) return false;
    for (int r = 0; r < 2; ++r)
        for (int m = 0; m < 3; ++m)
            if (s.lidx(r, m) != li[r][m] ||
                static_cast<int>(s.lval(r, m)) != lv[r][m] ||
                s.lval(r, m) != std::trunc(s.lval(r, m)))
                return false;
    const auto dense_l = densify_l(s);
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 3; ++m) {
            if (net.d(n, m) != dmat[n][m]) return false;
            if (dense_l[static_cast<size_t>(m) * 4 + n] != lmat[n][m]) return false;
        }
    return true;
}

// 2. RHS equals the dense oracle on random networks, rel err <= 1e-13,
// including 0th-order reactions.
bool criterion2() {
    std::mt19937 rng(20240817);
    int zero_order_seen = 0;
    for (int trial = 0; trial < 220; ++trial) {
        const auto spec = random_network(rng);
        const auto net = compile(spec);
        for (const auto& r : spec.reactions)
            if (r.reactants.empty()) ++zero_order_seen;
        for (int s = 0; s < 10; ++s) {
            const auto x = random_state(rng, spec.n_species());
            const auto fast = eval_rhs(net, x);
            const auto dense = eval_rhs_dense_oracle(spec, x);
            // Relative to the magnitude of the summed terms: cancellation
            // between reactions makes |f_n| itself an unusable scale.
            const auto scale = rhs_term_scale(spec, x);
            for (int i = 0; i < spec.n_species(); ++i) {
                const double sc = std::max(scale[i], 1.0);
                if (std::abs(fast[i] - dense[i]) > 1e-13 * sc) return false;
            }
        }
    }
    return zero_order_seen > 0;
}

// 3. Analytic Jacobian vs central differences, 1e-5 abs+rel; structural
// pattern exactly the l_jm > 0 support.
bool criterion3() {
    std::mt19937 rng(3141592);
    for (int trial = 0; trial < 200; ++trial) {
        const auto spec = random_network(rng);
        const auto net = compile(spec);
        const int n = spec.n_species();
        // Bounded away from 0 and capped at 2 so the central-difference
        // oracle itself stays well inside the 1e-5 budget.
        const auto x = random_state(rng, n, 0.1, 2.0);
        const auto jac = eval_jacobian(net, x);
        const auto fd = fd_jacobian(net, x);
        const auto dk = densify_dk(net.stoich);
        const auto l = densify_l(net.stoich);
        for (int j = 0; j < n; ++j)
            for (int row = 0; row < n; ++row) {
                const double f = fd[static_cast<size_t>(j) * n + row];
                const double a = jac.at(row, j);
                if (std::abs(f - a) > 1e-5 + 1e-5 * std::abs(f)) return false;
                bool expect = false;
                for (int m = 0; m < spec.n_reactions(); ++m)
                    if (dk[static_cast<size_t>(m) * n + row] != 0.0 &&
                        l[static_cast<size_t>(m) * n + j] > 0.0)
                        expect = true;
                if (jac.structurally_present(row, j) != expect) return false;
            }
    }
    return true;
}

bool drift_ok(const CompiledNetwork& net, const ConservationBasis& basis,
              std::span<const double> x0, double t_end, const SolverOptions& o) {
    const auto traj = integrate(net, x0, 0.0, t_end, o);
    for (const auto& c : basis.vectors) {
        double c0 = 0.0;
        for (size_t i = 0; i < x0.size(); ++i) c0 += c[i] * x0[i];
        for (const auto& x : traj.states) {
            double ct = 0.0;
            for (size_t i = 0; i < x.size(); ++i) ct += c[i] * x[i];
            if (std::abs(ct - c0) > 10 * o.rtol * std::abs(c0) + 10 * o.atol)
                return false;
        }
    }
    return true;
}

// 4. Conservation drift bounded along trajectories: enzyme network plus 50
// random networks with nontrivial left null spaces.
bool criterion4() {
    SolverOptions o;
    o.rtol = 1e-6;
    o.atol = 1e-12;

    auto enzyme = enzyme_spec(1e6, 1e-4, 0.1);
    enzyme.initial = {5e-5, 2e-4, 0.0, 0.0};
    {
        const auto net = compile(enzyme);
        const auto basis = conservation_laws(net);
        if (basis.size() != 2) return false;
        if (!drift_ok(net, basis, enzyme.initial, 1e4, o)) return false;
    }

    std::mt19937 rng(112358);
    NetworkParams p;
    p.mass_conserving = true;
    p.max_species = 6;
    p.max_reactions = 10;
    int done = 0;
    o.atol = 1e-9;
    while (done < 50) {
        const auto spec = random_network(rng, p);
        const auto net = compile(spec);
        const auto basis = conservation_laws(net);
        if (basis.empty()) continue;
        if (!drift_ok(net, basis, spec.initial, 5.0, o)) return false;
        ++done;
    }
    return true;
}

// 5. Stiffness payoff on the Robertson-type network.
bool criterion5() {
    const auto spec = robertson_spec();
    const auto net = compile(spec);
    SolverOptions stiff;
    stiff.method = Method::rosenbrock4;
    stiff.rtol = 1e-6;
    stiff.atol = 1e-10;
    const auto ros = integrate(net, spec.initial, 0.0, 1e5, stiff);
    if (ros.stats.steps_accepted > 5000) return false;

    SolverOptions erk = stiff;
    erk.method = Method::erk45;
    erk.max_steps = 100000;
    bool exceeded = false;
    try {
        integrate(net, spec.initial, 0.0, 1e5, erk);
    } catch (const MaxStepsExceeded&) {
        exceeded = true;
    }
    if (!exceeded) return false;

    SolverOptions tight = stiff;
    tight.rtol = 1e-10;
    tight.atol = 1e-14;
    for (double t : {0.4, 4.0, 40.0}) {
        const auto ref = integrate(net, spec.initial, 0.0, t, tight);
        const auto run = integrate(net, spec.initial, 0.0, t, stiff);
        for (int i = 0; i < 3; ++i) {
            const double r = ref.states.back()[i];
            const double v = run.states.back()[i];
            if (std::abs(v - r) > 1e-4 * std::max(std::abs(r), 1e-10)) return false;
        }
    }
    return true;
}

// 6. Analytic problems: linear decay error bound and enzyme long-time limit.
bool criterion6() {
    const auto net = compile(decay_spec(3.0, 1.0));
    const double exact = std::exp(-3.0);
    for (double rtol : {1e-4, 1e-6, 1e-8}) {
        SolverOptions o;
        o.rtol = rtol;
        o.atol = 1e-13;
        const auto traj = integrate(net, std::vector<double>{1.0}, 0.0, 1.0, o);
        if (std::abs(traj.states.back()[0] - exact) > 100 * rtol) return false;
    }

    auto enzyme = enzyme_spec(1e6, 1e-4, 0.1);
    enzyme.initial = {5e-5, 2e-4, 0.0, 0.0};
    SolverOptions o;
    o.rtol = 1e-8;
    o.atol = 1e-14;
    const auto traj =
        integrate(compile(enzyme), enzyme.initial, 0.0, 1e5, o);
    const auto& xf = traj.states.back();
    const double limit[4] = {5e-5, 0.0, 0.0, 2e-4};
    for (int i = 0; i < 4; ++i)
        if (std::abs(xf[i] - limit[i]) > 1e-6) return false;
    return true;
}

struct CliRun {
    int exit_code = -1;
    std::string out;
};

CliRun run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "out.txt";
    const std::string cmd = std::string(RXNET_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + (dir / "err.txt").string();
    const int rc = std::system(cmd.c_str());
    std::ifstream in(out, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, ss.str()};
}

// 7. Parser identity on 500 random specs; malformed fixtures produce a
// diagnostic at the right line and CLI exit 1.
bool criterion7() {
    std::mt19937 rng(271828);
    for (int trial = 0; trial < 500; ++trial) {
        const auto spec = random_network(rng);
        const std::string text = serialize_network(spec);
        const auto back = parse_network(text);
        if (!back.ok()) return false;
        if (serialize_network(*back.spec) != text) return false;
    }

    struct Fixture {
        const char* text;
        int error_line;
    };
    const Fixture malformed[] = {
        {"A -> B\n", 1},
        {"A -> B : 1\nB -> A : -2\n", 2},
        {"species: A, B, A\n", 1},
        {"A -> B : kf\n", 1},
        {"A -> B : 1\ninit: Q=1\n", 2},
        {"A -> B : 1\n2. 5 C -> A : 1\n", 2},
    };
    const fs::path dir = fs::temp_directory_path() / "rxnet_acceptance";
    fs::create_directories(dir);
    for (const auto& fx : malformed) {
        const auto result = parse_network(fx.text);
        bool found = false;
        for (const auto& d : result.diagnostics)
            if (d.severity == Severity::error && d.line == fx.error_line) found = true;
        if (result.ok() || !found) return false;

        const fs::path p = dir / "malformed.rxn";
        std::ofstream(p, std::ios::binary) << fx.text;
        if (run_cli("check " + p.string(), dir).exit_code != 1) return false;
    }
    return true;
}

// 8. CLI determinism: two runs of any invocation are byte-identical.
bool criterion8() {
    const fs::path dir = fs::temp_directory_path() / "rxnet_acceptance";
    fs::create_directories(dir);
    const fs::path p = dir / "enzyme.rxn";
    auto enzyme = enzyme_spec(1e6, 1e-4, 0.1);
    enzyme.initial = {5e-5, 2e-4, 0.0, 0.0};
    std::ofstream(p, std::ios::binary) << serialize_network(enzyme);

    for (const std::string args :
         {std::string("simulate ") + p.string() + " --t-end 10",
          std::string("simulate ") + p.string() + " --t-end 10 --method bdf",
          std::string("simulate ") + p.string() + " --t-end 10 --method erk45",
          std::string("simulate ") + p.string() + " --t-end 1 --raw-steps",
          std::string("check ") + p.string(),
          std::string("jacobian ") + p.string(),
          std::string("conservation ") + p.string()}) {
        const auto a = run_cli(args, dir);
        const auto b = run_cli(args, dir);
        if (a.exit_code != b.exit_code || a.out != b.out) return false;
    }
    return true;
}

// 9. Sparsity engineering: stored entries equal nnz(L)+nnz(R)+nnz(D);
// scratch-buffer RHS and Jacobian evaluation never allocate.
bool criterion9() {
    std::mt19937 rng(161803);
    for (int trial = 0; trial < 100; ++trial) {
        const auto spec = random_network(rng);
        const auto net = compile(spec);
        const int n = spec.n_species();
        size_t nnz = 0;
        std::vector<double> l(static_cast<size_t>(n) * spec.n_reactions(), 0.0);
        std::vector<double> r(l.size(), 0.0);
        for (int m = 0; m < spec.n_reactions(); ++m) {
            for (const Term& t : spec.reactions[m].reactants)
                l[static_cast<size_t>(m) * n + t.species] += t.coeff;
            for (const Term& t : spec.reactions[m].products)
                r[static_cast<size_t>(m) * n + t.species] += t.coeff;
        }
        for (size_t i = 0; i < l.size(); ++i) {
            nnz += l[i] != 0.0;
            nnz += r[i] != 0.0;
            nnz += (r[i] - l[i]) != 0.0;
        }
        if (net.stoich.stored_entries() != nnz) return false;
    }

    const auto net = compile(robertson_spec());
    const std::vector<double> x = {0.7, 1e-5, 0.3};
    std::vector<double> out(3), scratch(3), rates(3);
    SparseJacobian jac(net);
    // Warm-up outside the counted region.
    eval_rhs(net, x, out, scratch);
    eval_jacobian(net, x, jac);

    g_alloc_count = 0;
    g_count_allocs = true;
    for (int i = 0; i < 100; ++i) {
        eval_rhs(net, x, out, scratch);
        eval_rates(net, x, rates);
        eval_jacobian(net, x, jac);
    }
    g_count_allocs = false;
    return g_alloc_count.load() == 0;
}

}  // namespace

int main() {
    report(1, "worked-example fixtures (D, L, Li, Lv)", criterion1());
    report(2, "RHS equals dense oracle at 1e-13", criterion2());
    report(3, "Jacobian matches finite differences, exact pattern", criterion3());
    report(4, "conservation drift bounded along trajectories", criterion4());
    report(5, "stiffness payoff on Robertson network", criterion5());
    report(6, "analytic problems within tolerance", criterion6());
    report(7, "parser round-trip and malformed-input diagnostics", criterion7());
    report(8, "CLI determinism", criterion8());
    report(9, "sparse storage counts and allocation-free evaluation", criterion9());
    return g_failures;
}
