#pragma once

#include <stdexcept>
#include <string>

namespace ldgmq {

/// All-zero result of a tuple combine (disjoint sure supports).
struct contradiction_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Contradiction hit during BP, traced back to a decimated variable node.
struct decimation_contradiction : contradiction_error {
    decimation_contradiction(int node_, int round_)
        : contradiction_error("decimation contradiction at b-node " + std::to_string(node_) +
                              ", round " + std::to_string(round_)),
          node(node_), round(round_) {}
    int node;
    int round;
};

/// Quadrature or iteration failed to reach the requested tolerance.
struct numerical_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Brute-force enumeration request above the compile-time cap.
struct size_exceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A structural assumption (symmetry, profile consistency) failed numerically.
struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bisection bracket whose verdict is not monotone; reported, never guessed over.
struct non_monotone_bracket : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ldgmq
