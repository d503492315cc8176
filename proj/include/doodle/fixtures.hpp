#pragma once

// Checked-in fixture generators. Fixture files are emitted by the CLI
// `example` subcommand from these builders, never hand-edited.

#include "diagram.hpp"

namespace doodle {

// The Borromean doodle: three circles a, b, c in the octahedral arrangement,
// every pair crossing twice with opposite chirality. Vertices:
//   0 = a/b upper, 1 = a/b lower, 2 = b/c upper, 3 = b/c lower,
//   4 = c/a upper, 5 = c/a lower.
inline DoodleDiagram borromean() {
    DoodleDiagram D;
    D.alphabet = Alphabet({"a", "b", "c"});
    D.vertices.assign(6, {VertexKind::Crossing});
    const VertexId P1 = 0, P2 = 1, Q1 = 2, Q2 = 3, R1 = 4, R2 = 5;
    const GenId a = 0, b = 1, c = 2;
    auto E = [&](VertexId tv, int tp, VertexId hv, int hp, GenId g) {
        D.edges.push_back({End{tv, tp}, End{hv, hp}, g});
    };
    E(R1, 3, P1, 0, a);  // A1
    E(P1, 2, R2, 1, a);  // A2
    E(R2, 3, P2, 2, a);  // A3
    E(P2, 0, R1, 1, a);  // A4
    E(P1, 3, Q1, 0, b);  // B1
    E(Q1, 2, P2, 1, b);  // B2
    E(P2, 3, Q2, 2, b);  // B3
    E(Q2, 0, P1, 1, b);  // B4
    E(Q1, 3, R1, 0, c);  // C1
    E(R1, 2, Q2, 1, c);  // C2
    E(Q2, 3, R2, 2, c);  // C3
    E(R2, 0, Q1, 1, c);  // C4
    return D;
}

// A single crossing-free loop of the given color.
inline DoodleDiagram marker_loop(const Alphabet& alphabet, GenId color) {
    DoodleDiagram D;
    D.alphabet = alphabet;
    D.vertices.push_back({VertexKind::Marker});
    D.edges.push_back({End{0, 0}, End{0, 1}, color});
    return D;
}

// One-component single-crossing diagram (a figure eight); crossing 0 carries
// the kink with its monogon on the left of the loop edge.
inline DoodleDiagram figure_eight(const Alphabet& alphabet, GenId color) {
    DoodleDiagram D;
    D.alphabet = alphabet;
    D.vertices.push_back({VertexKind::Crossing});
    // loop edge ports 0 -> 1 (monogon = corner 0), strand edge closes 3 -> 2
    D.edges.push_back({End{0, 0}, End{0, 1}, color});
    D.edges.push_back({End{0, 3}, End{0, 2}, color});
    return D;
}

inline DoodleDiagram empty_diagram(const Alphabet& alphabet) {
    DoodleDiagram D;
    D.alphabet = alphabet;
    return D;
}

}  // namespace doodle
