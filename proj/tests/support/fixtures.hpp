#ifndef RXNET_TESTS_FIXTURES_HPP
#define RXNET_TESTS_FIXTURES_HPP

#include "rxnet/network.hpp"

namespace rxnet::testing {

// Basic enzyme-kinetic pathway X1+X2 <-> X3 -> X1+X4 decomposed into three
// elementary reactions, with configurable rates.
inline NetworkSpec enzyme_spec(double k1 = 1.0, double k2 = 1.0, double k3 = 1.0) {
    NetworkSpec spec;
    spec.species = {"X1", "X2", "X3", "X4"};
    spec.initial = {0.0, 0.0, 0.0, 0.0};
    spec.reactions = {
        {{{0, 1.0}, {1, 1.0}}, {{2, 1.0}}, k1},
        {{{2, 1.0}}, {{0, 1.0}, {1, 1.0}}, k2},
        {{{2, 1.0}}, {{0, 1.0}, {3, 1.0}}, k3},
    };
    return spec;
}

// Robertson-type stiff benchmark: A -> B (0.04), B+B -> B+C (3e7),
// B+C -> A+C (1e4), x0 = (1, 0, 0).
inline NetworkSpec robertson_spec() {
    NetworkSpec spec;
    spec.species = {"A", "B", "C"};
    spec.initial = {1.0, 0.0, 0.0};
    spec.reactions = {
        {{{0, 1.0}}, {{1, 1.0}}, 0.04},
        {{{1, 2.0}}, {{1, 1.0}, {2, 1.0}}, 3e7},
        {{{1, 1.0}, {2, 1.0}}, {{0, 1.0}, {2, 1.0}}, 1e4},
    };
    return spec;
}

// Linear decay X1 -> 0 with rate k.
inline NetworkSpec decay_spec(double k = 3.0, double x0 = 1.0) {
    NetworkSpec spec;
    spec.species = {"X1"};
    spec.initial = {x0};
    spec.reactions = {{{{0, 1.0}}, {}, k}};
    return spec;
}

// Zeroth-order source 0 -> X1 with rate k.
inline NetworkSpec source_spec(double k = 2.0) {
    NetworkSpec spec;
    spec.species = {"X1"};
    spec.initial = {0.0};
    spec.reactions = {{{}, {{0, 1.0}}, k}};
    return spec;
}

}  // namespace rxnet::testing

#endif
