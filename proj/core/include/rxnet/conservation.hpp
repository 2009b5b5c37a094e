#ifndef RXNET_CONSERVATION_HPP
#define RXNET_CONSERVATION_HPP

#include <vector>

#include "rxnet/compile.hpp"

namespace rxnet {

/// Basis of the left null space of the unscaled step-change matrix D.
/// Each vector c satisfies c' * D = 0, so c' * x is constant along every
/// modifier-free trajectory.
struct ConservationBasis {
    std::vector<std::vector<double>> vectors;  // each of length N

    bool empty() const { return vectors.empty(); }
    size_t size() const { return vectors.size(); }
};

/// Extracts conservation laws from the unscaled D (rates and modifiers
/// stripped).  Integer stoichiometries use exact rational elimination and
/// return integer vectors in reduced row echelon form; otherwise floating
/// elimination with pivot threshold 1e-10 is used.
ConservationBasis conservation_laws(const CompiledNetwork& net);

}  // namespace rxnet

#endif
