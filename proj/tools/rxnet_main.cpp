// rxnet: parse, inspect, and simulate mass-action reaction networks.
//
// Subcommands:
//   check        parse + compile, print a network summary
//   simulate     integrate and emit a CSV trajectory
//   jacobian     print the analytic Jacobian at the initial state, with a
//                finite-difference comparison
//   conservation print linear conservation laws with species names
//
// Exit codes: 0 success, 1 parse/validation failure, 2 solver failure,
// 64 bad flags.  Data goes to stdout, logging to stderr.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rxnet/compile.hpp"
#include "rxnet/conservation.hpp"
#include "rxnet/errors.hpp"
#include "rxnet/kinetics.hpp"
#include "rxnet/network.hpp"
#include "rxnet/parser.hpp"
#include "rxnet/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;
constexpr int kExitUsage = 64;

struct LoadedNetwork {
    rxnet::NetworkSpec spec;
    rxnet::CompiledNetwork net;  // modifiers applied
};

void print_diagnostics(const std::string& path,
                       const std::vector<rxnet::ParseDiagnostic>& diags) {
    for (const auto& d : diags) {
        std::cerr << path << ":" << d.line << ":" << d.column << ": "
                  << (d.severity == rxnet::Severity::error ? "error: " : "warning: ")
                  << d.message << "\n";
    }
}

// Parses and compiles; on failure prints diagnostics and returns nullopt.
std::optional<LoadedNetwork> load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        return std::nullopt;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    rxnet::ParseResult parsed = rxnet::parse_network(buf.str());
    print_diagnostics(path, parsed.diagnostics);
    if (!parsed.ok()) return std::nullopt;

    try {
        LoadedNetwork out;
        out.spec = std::move(*parsed.spec);
        out.net = rxnet::apply_modifiers(rxnet::compile(out.spec), out.spec.modifiers);
        return out;
    } catch (const rxnet::CompileError& e) {
        std::cerr << path << ": error: " << e.what() << "\n";
        return std::nullopt;
    }
}

int cmd_check(const std::string& path) {
    const auto loaded = load(path);
    if (!loaded) return kExitInput;
    const auto& spec = loaded->spec;

    std::cout << "species: " << spec.n_species() << "\n";
    std::cout << "reactions: " << spec.n_reactions() << "\n";
    for (int i = 0; i < spec.n_species(); ++i)
        std::cout << "  X" << (i + 1) << " = " << spec.species[i]
                  << "  init " << rxnet::format_double(spec.initial[i]) << "\n";
    auto side = [&](const std::vector<rxnet::Term>& terms) {
        if (terms.empty()) return std::string("0");
        std::string s;
        for (size_t i = 0; i < terms.size(); ++i) {
            if (i) s += " + ";
            if (terms[i].coeff != 1.0) s += rxnet::format_double(terms[i].coeff) + " ";
            s += spec.species[terms[i].species];
        }
        return s;
    };
    for (int m = 0; m < spec.n_reactions(); ++m) {
        const auto& r = spec.reactions[m];
        std::cout << "  R" << (m + 1) << ": " << side(r.reactants) << " -> "
                  << side(r.products) << "  k=" << rxnet::format_double(r.rate) << "\n";
    }
    return kExitOk;
}

int cmd_simulate(const std::string& path, double t0, double t_end,
                 const rxnet::SolverOptions& opts, const std::string& output_path) {
    const auto loaded = load(path);
    if (!loaded) return kExitInput;
    if (!(t_end > t0)) {
        std::cerr << "error: --t-end must exceed --t0\n";
        return kExitUsage;
    }

    rxnet::Trajectory traj;
    try {
        traj = rxnet::integrate(loaded->net, loaded->spec.initial, t0, t_end, opts);
    } catch (const rxnet::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const rxnet::DomainError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }

    std::ostringstream csv;
    csv << "t";
    for (const auto& name : loaded->spec.species) csv << "," << name;
    csv << "\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        csv << rxnet::format_double(traj.times[i]);
        for (double v : traj.states[i]) csv << "," << rxnet::format_double(v);
        csv << "\n";
    }

    if (output_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(output_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << output_path << "\n";
            return kExitInput;
        }
        out << csv.str();
    }

    const auto& st = traj.stats;
    std::cerr << "steps accepted " << st.steps_accepted << ", rejected "
              << st.steps_rejected << ", rhs evals " << st.rhs_evals
              << ", jac evals " << st.jac_evals << ", lu factorizations "
              << st.lu_factorizations << "\n";
    return kExitOk;
}

int cmd_jacobian(const std::string& path) {
    const auto loaded = load(path);
    if (!loaded) return kExitInput;
    const auto& net = loaded->net;
    const int n = net.n_species();
    const std::vector<double>& x = loaded->spec.initial;

    rxnet::SparseJacobian jac = rxnet::eval_jacobian(net, x);
    for (int row = 0; row < n; ++row) {
        for (int col = 0; col < n; ++col)
            std::cout << (col ? " " : "") << rxnet::format_double(jac.at(row, col));
        std::cout << "\n";
    }

    // Central finite differences of the RHS as a cross-check.
    double max_abs = 0.0, max_rel = 0.0;
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        std::vector<double> xp(x), xm(x);
        xp[j] += h;
        xm[j] -= h;
        const auto fp = rxnet::eval_rhs(net, xp);
        const auto fm = rxnet::eval_rhs(net, xm);
        for (int row = 0; row < n; ++row) {
            const double fd = (fp[row] - fm[row]) / (2.0 * h);
            const double an = jac.at(row, j);
            const double dev = std::abs(fd - an);
            max_abs = std::max(max_abs, dev);
            const double mag = std::max(std::abs(fd), std::abs(an));
            if (mag > 1e-12) max_rel = std::max(max_rel, dev / mag);
        }
    }
    std::cout << "finite-difference max abs deviation: "
              << rxnet::format_double(max_abs) << "\n";
    std::cout << "finite-difference max rel deviation: "
              << rxnet::format_double(max_rel) << "\n";
    return kExitOk;
}

int cmd_conservation(const std::string& path) {
    const auto loaded = load(path);
    if (!loaded) return kExitInput;
    const rxnet::ConservationBasis basis = rxnet::conservation_laws(loaded->net);
    if (basis.empty()) {
        std::cout << "no conservation laws\n";
        return kExitOk;
    }
    for (const auto& c : basis.vectors) {
        std::string line;
        for (size_t i = 0; i < c.size(); ++i) {
            if (c[i] == 0.0) continue;
            if (!line.empty()) line += c[i] > 0 ? " + " : " - ";
            else if (c[i] < 0) line += "- ";
            const double mag = std::abs(c[i]);
            if (mag != 1.0) line += rxnet::format_double(mag) + " ";
            line += loaded->spec.species[i];
        }
        std::cout << line << " = const\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mass-action reaction network simulator"};
    app.require_subcommand(1);

    std::string path;
    double t0 = 0.0, t_end = 0.0;
    rxnet::SolverOptions opts;
    opts.output = rxnet::OutputMode::dense_sample;
    std::string output_path;
    bool raw_steps = false;
    std::string method = "rosenbrock4";

    auto* sim = app.add_subcommand("simulate", "integrate and emit a CSV trajectory");
    sim->add_option("network", path, "network file (.rxn)")->required();
    sim->add_option("--t0", t0, "start time");
    sim->add_option("--t-end", t_end, "end time")->required();
    sim->add_option("--rtol", opts.rtol, "relative tolerance");
    sim->add_option("--atol", opts.atol, "absolute tolerance");
    sim->add_option("--method", method, "rosenbrock4|bdf|erk45")
        ->check(CLI::IsMember({"rosenbrock4", "bdf", "erk45"}));
    sim->add_option("--max-steps", opts.max_steps, "maximum attempted steps");
    sim->add_option("--output", output_path, "output path (default stdout)");
    sim->add_option("--output-points", opts.output_points,
                    "equally spaced output samples");
    sim->add_flag("--raw-steps", raw_steps, "emit every accepted step");

    auto* chk = app.add_subcommand("check", "parse + compile, print a summary");
    chk->add_option("network", path, "network file (.rxn)")->required();

    auto* jac = app.add_subcommand("jacobian",
                                   "print the Jacobian at the initial state");
    jac->add_option("network", path, "network file (.rxn)")->required();

    auto* con = app.add_subcommand("conservation", "print conservation laws");
    con->add_option("network", path, "network file (.rxn)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed()) {
            if (method == "bdf") opts.method = rxnet::Method::bdf;
            else if (method == "erk45") opts.method = rxnet::Method::erk45;
            else opts.method = rxnet::Method::rosenbrock4;
            if (raw_steps) opts.output = rxnet::OutputMode::every_accepted_step;
            return cmd_simulate(path, t0, t_end, opts, output_path);
        }
        if (chk->parsed()) return cmd_check(path);
        if (jac->parsed()) return cmd_jacobian(path);
        if (con->parsed()) return cmd_conservation(path);
    } catch (const rxnet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitUsage;
}
