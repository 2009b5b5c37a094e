#ifndef RXNET_PARSER_HPP
#define RXNET_PARSER_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rxnet/network.hpp"

namespace rxnet {

enum class Severity { error, warning };

struct ParseDiagnostic {
    Severity severity = Severity::error;
    int line = 1;    // 1-based
    int column = 1;  // 1-based
    std::string message;
    std::string offending_text;
};

struct ParseResult {
    std::optional<NetworkSpec> spec;  // set iff no error diagnostics
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return spec.has_value(); }
    bool has_errors() const;
};

/// Parses the ".rxn" network format.  One statement per line, "#" comments.
///   species: A, B, C
///   params:  k1=1e6, k2=3.5
///   init:    A=1.0, B=0
///   scale:   A@2=0.5        (species@reaction=factor; reaction "*" = all)
///   E + S -> ES : k1
///   X1 + X2 <-> X3 : k1, k2
/// Reversible arrows desugar into two elementary reactions (forward first).
/// Duplicate reactant mentions on one side merge by summation (warning).
ParseResult parse_network(std::string_view text);

/// Canonical text form: species declarations sorted alphabetically,
/// reactions in index order, rates inlined as shortest round-trip literals.
/// parse_network(serialize_network(s)) reproduces s up to species reindexing
/// by name.  Throws CompileError if the spec violates its invariants.
std::string serialize_network(const NetworkSpec& spec);

/// Shortest round-trip decimal for a double ("5e-5", "0.0002", "1", ...).
std::string format_double(double v);

}  // namespace rxnet

#endif
