#ifndef RXNET_ERRORS_HPP
#define RXNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rxnet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Network validation / compilation failures.
struct CompileError : Error {
    using Error::Error;
};

struct UnknownSpecies : CompileError {
    explicit UnknownSpecies(const std::string& name)
        : CompileError("unknown species: " + name), species(name) {}
    std::string species;
};

struct NegativeCoefficient : CompileError {
    NegativeCoefficient(int species, int reaction)
        : CompileError("negative stoichiometric coefficient for species " +
                       std::to_string(species + 1) + " in reaction " +
                       std::to_string(reaction + 1)),
          species(species), reaction(reaction) {}
    int species;
    int reaction;
};

struct NonIntegerOrderInStrictMode : CompileError {
    NonIntegerOrderInStrictMode(int species, int reaction)
        : CompileError("non-integer order for species " + std::to_string(species + 1) +
                       " in reaction " + std::to_string(reaction + 1) +
                       " (strict mass-action mode)"),
          species(species), reaction(reaction) {}
    int species;
    int reaction;
};

struct EmptyNetwork : CompileError {
    EmptyNetwork() : CompileError("network has no reactions") {}
};

// Modifier application failures.
struct ModifierOnZeroEntry : CompileError {
    ModifierOnZeroEntry(int species, int reaction)
        : CompileError("modifier addresses zero step-change entry (" +
                       std::to_string(species + 1) + ", " + std::to_string(reaction + 1) + ")"),
          species(species), reaction(reaction) {}
    int species;
    int reaction;
};

struct NonPositiveFactor : CompileError {
    explicit NonPositiveFactor(double factor)
        : CompileError("modifier factor must be finite and positive, got " +
                       std::to_string(factor)),
          factor(factor) {}
    double factor;
};

// Evaluation failures (negative base with real exponent, singular derivative).
struct DomainError : Error {
    using Error::Error;
};

// Integration failures.
struct SolverError : Error {
    SolverError(const std::string& what, double t) : Error(what), t(t) {}
    double t;
};

struct StepSizeUnderflow : SolverError {
    explicit StepSizeUnderflow(double t)
        : SolverError("step size underflow at t = " + std::to_string(t), t) {}
};

struct MaxStepsExceeded : SolverError {
    explicit MaxStepsExceeded(double t)
        : SolverError("maximum step count exceeded at t = " + std::to_string(t), t) {}
};

struct NewtonDivergence : SolverError {
    explicit NewtonDivergence(double t)
        : SolverError("Newton iteration failed to converge at t = " + std::to_string(t), t) {}
};

struct SingularIterationMatrix : SolverError {
    explicit SingularIterationMatrix(double t)
        : SolverError("singular iteration matrix at t = " + std::to_string(t), t) {}
};

}  // namespace rxnet

#endif
