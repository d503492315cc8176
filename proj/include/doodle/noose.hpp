#pragma once

// Combinatorial noose systems and identity extraction.
//
// A noose is stored as its head crossing, the corner where the neck attaches
// (which must be the unique corner whose counterclockwise loop word reads
// a^-1 b^-1 a b) and the rope: a dual-graph path of directed edge crossings
// from the base region to the corner's region. Intersection letters follow
// the sign convention that crossing a strand from its right side to its left
// (relative to the strand's orientation) reads a positive letter.
//
// auto_noose_system builds a breadth-first spanning tree of the region dual
// graph rooted at the base and orders the nooses along the planar contour
// walk of that tree, which realizes an embedded proper noose system; the
// extracted identity is re-verified and a failure throws (it would be a bug,
// not an input condition).

#include "diagram.hpp"
#include "identity.hpp"

namespace doodle {

enum class CrossSide { FromRight, FromLeft };

struct RopeStep {
    EdgeId edge = -1;
    CrossSide side = CrossSide::FromRight;  // FromRight: right-to-left, positive letter
};

struct Noose {
    VertexId head_crossing = -1;
    int corner = -1;
    std::vector<RopeStep> rope;
};

struct NooseSystem {
    int base_face = -1;  // face id in analyze() order; -1 only for empty diagrams
    std::vector<Noose> nooses;
};

// Reference to a face by one of its corners, the CLI-facing face address.
struct FaceRef {
    VertexId v = -1;
    int corner = -1;
};

inline Letter intersection_letter(const DoodleDiagram& D, EdgeId edge, CrossSide side) {
    return Letter(D.edges.at(static_cast<std::size_t>(edge)).color,
                  side == CrossSide::FromRight ? +1 : -1);
}

namespace detail {

// Letter read by the counterclockwise loop around crossing x at port p:
// positive iff the edge germ at p points away from x.
inline Letter loop_letter_at(const MapView& V, VertexId x, int p) {
    Dart d = V.out[static_cast<std::size_t>(x)][static_cast<std::size_t>(p)];
    return Letter(V.dart_color(d), dart_dir(d) == 0 ? +1 : -1);
}

}  // namespace detail

// The unique corner of a crossing whose loop reads a^-1 b^-1 a b.
inline int commutator_corner(const MapView& V, VertexId x) {
    for (int c = 0; c < 4; ++c) {
        Letter l1 = detail::loop_letter_at(V, x, (c + 1) % 4);
        Letter l2 = detail::loop_letter_at(V, x, (c + 2) % 4);
        Letter l3 = detail::loop_letter_at(V, x, (c + 3) % 4);
        Letter l4 = detail::loop_letter_at(V, x, c);
        if (l1.sign < 0 && l2.sign < 0 && l3.sign > 0 && l4.sign > 0 && l1.gen == l3.gen &&
            l2.gen == l4.gen)
            return c;
    }
    throw std::logic_error("commutator_corner: no corner matches (invalid crossing orientation)");
}

// Loop word of a proper noose: the commutator pair (a, b) read from the neck
// corner. Throws if the corner does not produce the commutator pattern.
inline std::pair<GenId, GenId> loop_word(const DoodleDiagram& D, const Noose& n) {
    MapView V = analyze(D);
    if (n.head_crossing < 0 || n.head_crossing >= static_cast<VertexId>(D.vertices.size()) ||
        !D.is_crossing(n.head_crossing))
        throw std::invalid_argument("loop_word: head is not a crossing");
    if (commutator_corner(V, n.head_crossing) != n.corner)
        throw std::invalid_argument("loop_word: corner does not read a^-1 b^-1 a b");
    Letter a = detail::loop_letter_at(V, n.head_crossing, (n.corner + 1) % 4);
    Letter b = detail::loop_letter_at(V, n.head_crossing, (n.corner + 2) % 4);
    return {a.gen, b.gen};
}

namespace detail {

inline int rope_from_region(const MapView& V, const RopeStep& s) {
    Dart d = make_dart(s.edge, s.side == CrossSide::FromRight ? 1 : 0);
    return V.region_of_dart(d);
}
inline int rope_to_region(const MapView& V, const RopeStep& s) {
    Dart d = make_dart(s.edge, s.side == CrossSide::FromRight ? 0 : 1);
    return V.region_of_dart(d);
}

}  // namespace detail

// Intersection word along the rope, base to neck. The term conjugator is the
// inverse of this word.
inline Word rope_word(const DoodleDiagram& D, const NooseSystem& ns, const Noose& n) {
    MapView V = analyze(D);
    int at = ns.base_face >= 0 ? V.region_of_face[static_cast<std::size_t>(ns.base_face)] : -1;
    Word w;
    for (const RopeStep& s : n.rope) {
        if (s.edge < 0 || s.edge >= static_cast<EdgeId>(D.edges.size()))
            throw std::invalid_argument("rope_word: rope references a missing edge");
        if (detail::rope_from_region(V, s) != at)
            throw std::invalid_argument("rope_word: rope step inconsistent with dual graph");
        at = detail::rope_to_region(V, s);
        w.letters.push_back(intersection_letter(D, s.edge, s.side));
    }
    int corner_region = V.region_of_face[static_cast<std::size_t>(
        V.face_at_corner(n.head_crossing, n.corner))];
    if (at != corner_region)
        throw std::invalid_argument("rope_word: rope does not reach the neck corner region");
    return w;
}

// ---------------------------------------------------------------------------
// Automatic proper noose systems
// ---------------------------------------------------------------------------

inline int resolve_face(const DoodleDiagram& D, const MapView& V, const FaceRef& ref) {
    if (ref.v < 0 || ref.v >= static_cast<VertexId>(D.vertices.size()))
        throw std::invalid_argument("face reference: missing vertex");
    if (ref.corner < 0 || ref.corner >= D.degree(ref.v))
        throw std::invalid_argument("face reference: corner out of range");
    return V.face_at_corner(ref.v, ref.corner);
}

// Breadth-first spanning tree of the region dual rooted at the base region,
// then a contour walk of that tree emitting one noose per crossing at its
// commutator corner.
inline NooseSystem auto_noose_system(const DoodleDiagram& D, int base_face) {
    MapView V = analyze(D);
    NooseSystem ns;
    ns.base_face = base_face;
    if (D.edges.empty()) return ns;
    if (base_face < 0 || base_face >= V.n_faces)
        throw std::invalid_argument("auto_noose_system: bad base face");
    const int base_region = V.region_of_face[static_cast<std::size_t>(base_face)];

    // corner faces of the crossings
    std::vector<int> corner_of(D.vertices.size(), -1);
    for (std::size_t v = 0; v < D.vertices.size(); ++v)
        if (D.is_crossing(static_cast<VertexId>(v)))
            corner_of[v] = commutator_corner(V, static_cast<VertexId>(v));

    // BFS tree over regions; tree arc into r recorded as the dart crossed
    // (a dart of the parent's boundary)
    std::vector<int> parent_region(static_cast<std::size_t>(V.n_regions), -1);
    std::vector<Dart> parent_arc(static_cast<std::size_t>(V.n_regions), -1);
    std::vector<bool> reached(static_cast<std::size_t>(V.n_regions), false);
    reached[static_cast<std::size_t>(base_region)] = true;
    std::vector<int> queue{base_region};
    auto region_boundary_darts = [&](int r) {
        std::vector<Dart> darts;
        std::vector<int> fs = V.region_faces[static_cast<std::size_t>(r)];
        std::sort(fs.begin(), fs.end());
        for (int f : fs)
            for (Dart d : V.faces[static_cast<std::size_t>(f)]) darts.push_back(d);
        return darts;
    };
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int r = queue[qi];
        for (Dart d : region_boundary_darts(r)) {
            int other = V.region_of_dart(dart_reverse(d));
            if (!reached[static_cast<std::size_t>(other)]) {
                reached[static_cast<std::size_t>(other)] = true;
                parent_region[static_cast<std::size_t>(other)] = r;
                parent_arc[static_cast<std::size_t>(other)] = d;
                queue.push_back(other);
            }
        }
    }

    // tree children keyed by the crossing dart in the parent's boundary
    std::vector<int> child_by_arc(static_cast<std::size_t>(V.n_darts), -1);
    for (int r = 0; r < V.n_regions; ++r)
        if (parent_arc[static_cast<std::size_t>(r)] >= 0)
            child_by_arc[static_cast<std::size_t>(parent_arc[static_cast<std::size_t>(r)])] = r;

    // rope steps accumulated along the contour walk
    std::vector<RopeStep> rope;
    auto step_for = [&](Dart d) {
        return RopeStep{dart_edge(d), dart_dir(d) == 1 ? CrossSide::FromRight : CrossSide::FromLeft};
    };

    std::vector<bool> emitted(D.vertices.size(), false);

    auto walk_region = [&](auto&& self, int r, Dart entry_dart) -> void {
        // cycles of r's boundary: the entry cycle from the entry dart first,
        // then the remaining faces in canonical order from their least dart
        std::vector<std::pair<int, Dart>> cycles;  // (face, start dart)
        std::vector<int> fs = V.region_faces[static_cast<std::size_t>(r)];
        std::sort(fs.begin(), fs.end());
        int entry_face = entry_dart >= 0 ? V.face_of[static_cast<std::size_t>(entry_dart)] : -1;
        if (entry_dart >= 0) cycles.push_back({entry_face, entry_dart});
        for (int f : fs)
            if (f != entry_face) cycles.push_back({f, V.faces[static_cast<std::size_t>(f)][0]});

        for (auto [f, start] : cycles) {
            const std::vector<Dart>& orbit = V.faces[static_cast<std::size_t>(f)];
            std::size_t start_idx = 0;
            while (orbit[start_idx] != start) ++start_idx;
            for (std::size_t k = 0; k < orbit.size(); ++k) {
                Dart d = orbit[(start_idx + k) % orbit.size()];
                // branch through this edge into an unvisited child region
                if (d != entry_dart) {
                    int child = child_by_arc[static_cast<std::size_t>(d)];
                    if (child >= 0) {
                        rope.push_back(step_for(d));
                        self(self, child, dart_reverse(d));
                        rope.pop_back();
                    }
                }
                // corner at the end of this dart
                End t = V.dart_target(d);
                if (D.is_crossing(t.v) && !emitted[static_cast<std::size_t>(t.v)]) {
                    int corner = V.prev_port(t.v, t.port);
                    if (corner == corner_of[static_cast<std::size_t>(t.v)]) {
                        Noose n;
                        n.head_crossing = t.v;
                        n.corner = corner;
                        n.rope = rope;
                        ns.nooses.push_back(std::move(n));
                        emitted[static_cast<std::size_t>(t.v)] = true;
                    }
                }
            }
        }
    };
    walk_region(walk_region, base_region, -1);

    if (ns.nooses.size() != D.crossing_count())
        throw std::logic_error("auto_noose_system: contour walk missed a crossing");
    return ns;
}

inline NooseSystem auto_noose_system(const DoodleDiagram& D, const FaceRef& base) {
    MapView V = analyze(D);
    return auto_noose_system(D, resolve_face(D, V, base));
}

// I(D, N): one conjugated commutator per noose, verified on construction.
inline ElementaryIdentity identity_of(const DoodleDiagram& D, const NooseSystem& ns) {
    std::vector<bool> covered(D.vertices.size(), false);
    std::vector<CommutatorTerm> terms;
    for (const Noose& n : ns.nooses) {
        auto [a, b] = loop_word(D, n);
        Word u = inverse(rope_word(D, ns, n));
        terms.emplace_back(a, b, u);
        if (covered[static_cast<std::size_t>(n.head_crossing)])
            throw std::invalid_argument("identity_of: a crossing is covered by two nooses");
        covered[static_cast<std::size_t>(n.head_crossing)] = true;
    }
    for (std::size_t v = 0; v < D.vertices.size(); ++v)
        if (D.is_crossing(static_cast<VertexId>(v)) && !covered[v])
            throw std::invalid_argument("identity_of: noose system does not cover every crossing");
    try {
        return checked_elementary(D.alphabet, std::move(terms));
    } catch (const std::invalid_argument&) {
        throw std::logic_error(
            "identity_of: extracted product is not freely trivial (invalid noose system)");
    }
}

// Extraction with an automatic system; the Theorem-2.1 contract is re-checked
// by the checked identity constructor inside identity_of.
inline ElementaryIdentity extract_identity(const DoodleDiagram& D, int base_face) {
    return identity_of(D, auto_noose_system(D, base_face));
}

}  // namespace doodle
