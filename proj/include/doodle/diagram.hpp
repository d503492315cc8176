#pragma once

// Colored oriented doodle diagrams on the sphere as combinatorial maps.
//
// A diagram is a 4-valent rotation-system map (crossings, ports 0..3 in
// counterclockwise order) plus synthetic 2-valent marker vertices carrying
// crossing-free loops. Edges are directed with the component orientation.
// Faces are the orbits of the left-face walk; disconnected pieces are glued
// into sphere regions by explicit merge pairs of darts (each pair declares
// its two faces to lie in the same region), which must form a spanning tree
// over the pieces.
//
// File format (line oriented, '#' comments):
//   doodle v1
//   alphabet a b c
//   crossing X1
//   edge E1 X1.0 -> X2.3
//   color E1 a
//   loop L1 left-of E3 color a [reversed]
//   loop L2 inside L1 color b
//   merge left-of E4 right-of E9
// Region references: left-of E# | right-of E# | inside L# | outside L# .

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "freegroup.hpp"

namespace doodle {

using VertexId = int;
using EdgeId = int;
using Dart = int;  // 2*edge + dir; dir 0 runs with the edge (left face on its left)

enum class VertexKind { Crossing, Marker };

struct End {
    VertexId v = -1;
    int port = -1;
    bool operator==(const End& o) const { return v == o.v && port == o.port; }
};

struct VertexRec {
    VertexKind kind = VertexKind::Crossing;
};

struct EdgeRec {
    End tail, head;
    GenId color = 0;
};

struct MergePair {
    Dart a = -1, b = -1;
};

struct DoodleDiagram {
    Alphabet alphabet;
    std::vector<VertexRec> vertices;
    std::vector<EdgeRec> edges;
    std::vector<MergePair> merges;

    int degree(VertexId v) const {
        return vertices[static_cast<std::size_t>(v)].kind == VertexKind::Crossing ? 4 : 2;
    }
    bool is_crossing(VertexId v) const {
        return vertices[static_cast<std::size_t>(v)].kind == VertexKind::Crossing;
    }
    std::size_t crossing_count() const {
        std::size_t n = 0;
        for (auto& v : vertices)
            if (v.kind == VertexKind::Crossing) ++n;
        return n;
    }
};

inline Dart make_dart(EdgeId e, int dir) { return 2 * e + dir; }
inline EdgeId dart_edge(Dart d) { return d / 2; }
inline int dart_dir(Dart d) { return d & 1; }
inline Dart dart_reverse(Dart d) { return d ^ 1; }

// ---------------------------------------------------------------------------
// MapView: derived incidence, face, piece, region and component structure.
// Requires a structurally complete diagram (validate checks that first).
// ---------------------------------------------------------------------------

struct MapView {
    const DoodleDiagram* D = nullptr;

    std::vector<std::array<int, 4>> out;  // out[v][p] = dart leaving (v,p)
    int n_darts = 0;

    std::vector<int> face_of;              // dart -> face
    std::vector<std::vector<Dart>> faces;  // face -> darts in walk order
    int n_faces = 0;

    std::vector<int> piece_of_vertex;
    int n_pieces = 0;

    std::vector<int> region_of_face;  // face -> region (ids 0..n_regions-1)
    int n_regions = 0;
    std::vector<std::vector<int>> region_faces;

    std::vector<int> comp_of_edge;
    std::vector<std::vector<EdgeId>> comp_edges;  // cyclic order along the strand
    std::vector<GenId> comp_color;
    int n_comps = 0;

    End dart_origin(Dart d) const {
        const EdgeRec& e = D->edges[static_cast<std::size_t>(dart_edge(d))];
        return dart_dir(d) == 0 ? e.tail : e.head;
    }
    End dart_target(Dart d) const {
        const EdgeRec& e = D->edges[static_cast<std::size_t>(dart_edge(d))];
        return dart_dir(d) == 0 ? e.head : e.tail;
    }
    GenId dart_color(Dart d) const { return D->edges[static_cast<std::size_t>(dart_edge(d))].color; }

    int prev_port(VertexId v, int q) const {
        return D->is_crossing(v) ? (q + 3) % 4 : 1 - q;
    }
    int next_port(VertexId v, int q) const {
        return D->is_crossing(v) ? (q + 1) % 4 : 1 - q;
    }

    // Left-face successor: arriving at (v,q), continue from the clockwise-
    // previous port.
    Dart face_next(Dart d) const {
        End t = dart_target(d);
        return out[static_cast<std::size_t>(t.v)][static_cast<std::size_t>(prev_port(t.v, t.port))];
    }

    // Strand-through successor: in at q, out at q+2 (crossing) / 1-q (marker).
    Dart strand_next(Dart d) const {
        End t = dart_target(d);
        int p = D->is_crossing(t.v) ? (t.port + 2) % 4 : 1 - t.port;
        return out[static_cast<std::size_t>(t.v)][static_cast<std::size_t>(p)];
    }

    int piece_of_face(int f) const {
        Dart d = faces[static_cast<std::size_t>(f)][0];
        return piece_of_vertex[static_cast<std::size_t>(dart_origin(d).v)];
    }
    int region_of_dart(Dart d) const { return region_of_face[static_cast<std::size_t>(face_of[static_cast<std::size_t>(d)])]; }

    // Corner (v,k) = sector between ports k and k+1; it belongs to the face of
    // the dart leaving port k.
    int face_at_corner(VertexId v, int corner) const {
        return face_of[static_cast<std::size_t>(out[static_cast<std::size_t>(v)][static_cast<std::size_t>(corner)])];
    }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[static_cast<std::size_t>(a)] = b;
        return true;
    }
};

}  // namespace detail

// Structural checks that must hold before MapView can be built.
inline std::vector<std::string> structural_violations(const DoodleDiagram& D) {
    std::vector<std::string> bad;
    const int V = static_cast<int>(D.vertices.size());
    std::vector<std::array<int, 4>> ends(static_cast<std::size_t>(V), {-1, -1, -1, -1});
    for (std::size_t ei = 0; ei < D.edges.size(); ++ei) {
        const EdgeRec& e = D.edges[ei];
        if (e.color < 0 || e.color >= D.alphabet.size())
            bad.push_back("edge E" + std::to_string(ei) + ": color out of range");
        for (int which = 0; which < 2; ++which) {
            End end = which ? e.head : e.tail;
            if (end.v < 0 || end.v >= V) {
                bad.push_back("edge E" + std::to_string(ei) + ": bad vertex");
                continue;
            }
            if (end.port < 0 || end.port >= D.degree(end.v)) {
                bad.push_back("edge E" + std::to_string(ei) + ": bad port");
                continue;
            }
            int& slot = ends[static_cast<std::size_t>(end.v)][static_cast<std::size_t>(end.port)];
            if (slot != -1) {
                bad.push_back("vertex " + std::to_string(end.v) + " port " + std::to_string(end.port) +
                              ": used by more than one edge end");
            } else {
                slot = make_dart(static_cast<EdgeId>(ei), which == 0 ? 0 : 1);
            }
        }
    }
    for (int v = 0; v < V; ++v)
        for (int p = 0; p < D.degree(v); ++p)
            if (ends[static_cast<std::size_t>(v)][static_cast<std::size_t>(p)] == -1)
                bad.push_back("vertex " + std::to_string(v) + " port " + std::to_string(p) + ": no edge end");
    for (auto& m : D.merges) {
        for (Dart d : {m.a, m.b})
            if (d < 0 || d >= 2 * static_cast<int>(D.edges.size()))
                bad.push_back("merge references a missing dart");
    }
    return bad;
}

inline MapView analyze(const DoodleDiagram& D) {
    MapView V;
    V.D = &D;
    V.n_darts = 2 * static_cast<int>(D.edges.size());
    V.out.assign(D.vertices.size(), {-1, -1, -1, -1});
    for (std::size_t ei = 0; ei < D.edges.size(); ++ei) {
        const EdgeRec& e = D.edges[ei];
        V.out[static_cast<std::size_t>(e.tail.v)][static_cast<std::size_t>(e.tail.port)] =
            make_dart(static_cast<EdgeId>(ei), 0);
        V.out[static_cast<std::size_t>(e.head.v)][static_cast<std::size_t>(e.head.port)] =
            make_dart(static_cast<EdgeId>(ei), 1);
    }

    // faces
    V.face_of.assign(static_cast<std::size_t>(V.n_darts), -1);
    for (int d0 = 0; d0 < V.n_darts; ++d0) {
        if (V.face_of[static_cast<std::size_t>(d0)] != -1) continue;
        std::vector<Dart> orbit;
        int d = d0;
        while (V.face_of[static_cast<std::size_t>(d)] == -1) {
            V.face_of[static_cast<std::size_t>(d)] = V.n_faces;
            orbit.push_back(d);
            d = V.face_next(d);
        }
        V.faces.push_back(std::move(orbit));
        ++V.n_faces;
    }

    // pieces
    detail::UnionFind uf(static_cast<int>(D.vertices.size()));
    for (const EdgeRec& e : D.edges) uf.unite(e.tail.v, e.head.v);
    std::map<int, int> piece_ids;
    V.piece_of_vertex.assign(D.vertices.size(), -1);
    for (std::size_t v = 0; v < D.vertices.size(); ++v) {
        int root = uf.find(static_cast<int>(v));
        auto [it, fresh] = piece_ids.try_emplace(root, static_cast<int>(piece_ids.size()));
        V.piece_of_vertex[v] = it->second;
    }
    V.n_pieces = static_cast<int>(piece_ids.size());

    // regions
    detail::UnionFind rf(V.n_faces);
    for (auto& m : D.merges)
        rf.unite(V.face_of[static_cast<std::size_t>(m.a)], V.face_of[static_cast<std::size_t>(m.b)]);
    std::map<int, int> region_ids;
    V.region_of_face.assign(static_cast<std::size_t>(V.n_faces), -1);
    for (int f = 0; f < V.n_faces; ++f) {
        int root = rf.find(f);
        auto [it, fresh] = region_ids.try_emplace(root, static_cast<int>(region_ids.size()));
        V.region_of_face[static_cast<std::size_t>(f)] = it->second;
    }
    V.n_regions = static_cast<int>(region_ids.size());
    V.region_faces.assign(static_cast<std::size_t>(V.n_regions), {});
    for (int f = 0; f < V.n_faces; ++f)
        V.region_faces[static_cast<std::size_t>(V.region_of_face[static_cast<std::size_t>(f)])].push_back(f);

    // components (strand orbits over forward darts)
    V.comp_of_edge.assign(D.edges.size(), -1);
    for (std::size_t e0 = 0; e0 < D.edges.size(); ++e0) {
        if (V.comp_of_edge[e0] != -1) continue;
        std::vector<EdgeId> cyc;
        Dart d = make_dart(static_cast<EdgeId>(e0), 0);
        while (V.comp_of_edge[static_cast<std::size_t>(dart_edge(d))] == -1) {
            V.comp_of_edge[static_cast<std::size_t>(dart_edge(d))] = V.n_comps;
            cyc.push_back(dart_edge(d));
            d = V.strand_next(d);
            if (dart_dir(d) != 0) break;  // direction inconsistency; validate reports it
        }
        V.comp_color.push_back(D.edges[e0].color);
        V.comp_edges.push_back(std::move(cyc));
        ++V.n_comps;
    }

    return V;
}

// Full validation per the diagram invariants. Returns the list of violations;
// empty means the diagram is a valid colored oriented doodle diagram.
inline std::vector<std::string> validate(const DoodleDiagram& D) {
    std::vector<std::string> bad = structural_violations(D);
    if (!bad.empty()) return bad;
    MapView V = analyze(D);

    // direction consistency: strand-through must map forward darts to forward darts
    for (std::size_t e = 0; e < D.edges.size(); ++e) {
        Dart d = make_dart(static_cast<EdgeId>(e), 0);
        if (dart_dir(V.strand_next(d)) != 0)
            bad.push_back("edge E" + std::to_string(e) + ": strand continues against edge direction");
    }
    if (!bad.empty()) return bad;

    // color consistency along components
    for (int c = 0; c < V.n_comps; ++c)
        for (EdgeId e : V.comp_edges[static_cast<std::size_t>(c)])
            if (D.edges[static_cast<std::size_t>(e)].color != V.comp_color[static_cast<std::size_t>(c)])
                bad.push_back("component " + std::to_string(c) + ": edges of mixed color");

    // marker components must be crossing-free loops
    for (std::size_t v = 0; v < D.vertices.size(); ++v) {
        if (D.vertices[v].kind != VertexKind::Marker) continue;
        for (int p = 0; p < 2; ++p) {
            Dart d = V.out[v][static_cast<std::size_t>(p)];
            End t = V.dart_target(d);
            if (t.v != static_cast<VertexId>(v))
                bad.push_back("marker " + std::to_string(v) + ": its loop passes through another vertex");
        }
    }

    // sphericity per connected piece: V - E + F = 2
    std::vector<long long> vs(static_cast<std::size_t>(V.n_pieces), 0);
    std::vector<long long> es(static_cast<std::size_t>(V.n_pieces), 0);
    std::vector<long long> fs(static_cast<std::size_t>(V.n_pieces), 0);
    for (std::size_t v = 0; v < D.vertices.size(); ++v)
        vs[static_cast<std::size_t>(V.piece_of_vertex[v])]++;
    for (auto& e : D.edges) es[static_cast<std::size_t>(V.piece_of_vertex[static_cast<std::size_t>(e.tail.v)])]++;
    for (int f = 0; f < V.n_faces; ++f) fs[static_cast<std::size_t>(V.piece_of_face(f))]++;
    for (int p = 0; p < V.n_pieces; ++p) {
        long long chi = vs[static_cast<std::size_t>(p)] - es[static_cast<std::size_t>(p)] + fs[static_cast<std::size_t>(p)];
        if (chi != 2)
            bad.push_back("piece " + std::to_string(p) + ": Euler characteristic " + std::to_string(chi) +
                          ", rotation system is not spherical");
    }

    // merges: spanning tree over pieces
    if (V.n_pieces > 0) {
        if (static_cast<int>(D.merges.size()) != V.n_pieces - 1) {
            bad.push_back("merges: expected " + std::to_string(V.n_pieces - 1) + " pairs for " +
                          std::to_string(V.n_pieces) + " pieces, got " + std::to_string(D.merges.size()));
        } else {
            detail::UnionFind pf(V.n_pieces);
            for (auto& m : D.merges) {
                int pa = V.piece_of_vertex[static_cast<std::size_t>(V.dart_origin(m.a).v)];
                int pb = V.piece_of_vertex[static_cast<std::size_t>(V.dart_origin(m.b).v)];
                if (pa == pb) {
                    bad.push_back("merge joins two faces of the same piece");
                } else if (!pf.unite(pa, pb)) {
                    bad.push_back("merges contain a cycle over the pieces");
                }
            }
        }
    }

    return bad;
}

inline bool is_valid(const DoodleDiagram& D) { return validate(D).empty(); }

inline DoodleDiagram checked(DoodleDiagram D) {
    auto bad = validate(D);
    if (!bad.empty()) {
        std::string msg = "invalid diagram:";
        for (auto& b : bad) msg += "\n  " + b;
        throw std::invalid_argument(msg);
    }
    return D;
}

// ---------------------------------------------------------------------------
// Components, recoloring, reversal, mirror
// ---------------------------------------------------------------------------

struct ComponentInfo {
    int id;
    GenId color;
    std::vector<EdgeId> edges;  // cyclic order along the strand
};

// Deterministic component list: ids ordered by least contained edge.
inline std::vector<ComponentInfo> components(const DoodleDiagram& D) {
    MapView V = analyze(D);
    std::vector<ComponentInfo> out;
    for (int c = 0; c < V.n_comps; ++c)
        out.push_back({c, V.comp_color[static_cast<std::size_t>(c)], V.comp_edges[static_cast<std::size_t>(c)]});
    return out;  // analyze scans edges in id order, so ids are already by least edge
}

// Relabels colors through a permutation of the alphabet (names -> names).
inline DoodleDiagram recolor(const DoodleDiagram& D, const std::map<std::string, std::string>& sigma) {
    std::vector<GenId> image(static_cast<std::size_t>(D.alphabet.size()));
    std::vector<bool> hit(static_cast<std::size_t>(D.alphabet.size()), false);
    for (GenId g = 0; g < D.alphabet.size(); ++g) {
        auto it = sigma.find(D.alphabet.name(g));
        std::string target = it == sigma.end() ? D.alphabet.name(g) : it->second;
        GenId tg = D.alphabet.require(target);
        image[static_cast<std::size_t>(g)] = tg;
        if (hit[static_cast<std::size_t>(tg)]) throw std::invalid_argument("recolor: sigma is not a bijection");
        hit[static_cast<std::size_t>(tg)] = true;
    }
    DoodleDiagram out = D;
    for (auto& e : out.edges) e.color = image[static_cast<std::size_t>(e.color)];
    return out;
}

// Flips the direction of every component whose color lies in T.
inline DoodleDiagram reverse_components(const DoodleDiagram& D, const std::set<std::string>& T) {
    std::set<GenId> gens;
    for (auto& name : T) gens.insert(D.alphabet.require(name));
    DoodleDiagram out = D;
    std::vector<bool> flipped(D.edges.size(), false);
    for (std::size_t e = 0; e < out.edges.size(); ++e) {
        if (gens.count(out.edges[e].color)) {
            std::swap(out.edges[e].tail, out.edges[e].head);
            flipped[e] = true;
        }
    }
    for (auto& m : out.merges) {
        if (flipped[static_cast<std::size_t>(dart_edge(m.a))]) m.a = dart_reverse(m.a);
        if (flipped[static_cast<std::size_t>(dart_edge(m.b))]) m.b = dart_reverse(m.b);
    }
    return out;
}

// Reverses every rotation (the mirror image); not folded into isomorphic.
inline DoodleDiagram mirror(const DoodleDiagram& D) {
    DoodleDiagram out = D;
    auto flip = [&](End e) {
        if (e.v >= 0 && D.is_crossing(e.v)) e.port = (4 - e.port) % 4;
        return e;
    };
    for (auto& e : out.edges) {
        e.tail = flip(e.tail);
        e.head = flip(e.head);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical form & isomorphism
// ---------------------------------------------------------------------------

namespace detail {

constexpr long long TOK_CROSSING = -100;
constexpr long long TOK_MARKER = -101;
constexpr long long TOK_FACE = -102;
constexpr long long TOK_PARENT = -103;
constexpr long long TOK_CHILD_OPEN = -104;
constexpr long long TOK_CHILD_CLOSE = -105;
constexpr long long TOK_EMPTY = -106;

struct PieceCode {
    std::vector<long long> tokens;
    std::vector<VertexId> vertex_order;
    std::vector<std::pair<VertexId, int>> entry_ports;
    std::vector<EdgeId> edge_order;
    std::vector<Dart> dart_seq;
    std::vector<int> faces_in_rank_order;
};

inline PieceCode encode_piece(const MapView& V, Dart d0) {
    PieceCode pc;
    const DoodleDiagram& D = *V.D;
    std::map<VertexId, int> vidx;
    std::map<EdgeId, int> eidx;
    auto discover = [&](VertexId v, int port) {
        if (vidx.count(v)) return;
        vidx[v] = static_cast<int>(pc.vertex_order.size());
        pc.vertex_order.push_back(v);
        pc.entry_ports.emplace_back(v, port);
    };
    End o = V.dart_origin(d0);
    discover(o.v, o.port);
    for (std::size_t i = 0; i < pc.vertex_order.size(); ++i) {
        auto [v, entry] = pc.entry_ports[i];
        int deg = D.degree(v);
        pc.tokens.push_back(D.is_crossing(v) ? TOK_CROSSING : TOK_MARKER);
        for (int k = 0; k < deg; ++k) {
            int p = (entry + k) % deg;
            Dart d = V.out[static_cast<std::size_t>(v)][static_cast<std::size_t>(p)];
            EdgeId e = dart_edge(d);
            auto [it, fresh] = eidx.try_emplace(e, static_cast<int>(pc.edge_order.size()));
            if (fresh) pc.edge_order.push_back(e);
            pc.tokens.push_back(it->second);
            pc.tokens.push_back(dart_dir(d));
            pc.tokens.push_back(V.dart_color(d));
            pc.dart_seq.push_back(d);
            End t = V.dart_target(d);
            discover(t.v, t.port);
        }
    }
    std::set<int> seen_faces;
    for (Dart d : pc.dart_seq) {
        int f = V.face_of[static_cast<std::size_t>(d)];
        if (seen_faces.insert(f).second) pc.faces_in_rank_order.push_back(f);
    }
    return pc;
}

struct ArrangementCoder {
    const MapView& V;
    std::vector<std::vector<std::pair<int, int>>> region_piece_faces;  // region -> (piece, face)
    std::vector<std::vector<Dart>> piece_darts;

    explicit ArrangementCoder(const MapView& view) : V(view) {
        region_piece_faces.assign(static_cast<std::size_t>(V.n_regions), {});
        for (int f = 0; f < V.n_faces; ++f) {
            int r = V.region_of_face[static_cast<std::size_t>(f)];
            region_piece_faces[static_cast<std::size_t>(r)].emplace_back(V.piece_of_face(f), f);
        }
        piece_darts.assign(static_cast<std::size_t>(V.n_pieces), {});
        for (Dart d = 0; d < V.n_darts; ++d) {
            int p = V.piece_of_vertex[static_cast<std::size_t>(V.dart_origin(d).v)];
            piece_darts[static_cast<std::size_t>(p)].push_back(d);
        }
    }

    std::vector<Dart> face_darts_of(int face) const { return V.faces[static_cast<std::size_t>(face)]; }

    // Canonical code of `piece` rooted at one of `roots`, recursing into the
    // arrangement tree; `parent_region` is skipped.
    std::vector<long long> code_piece(int piece, const std::vector<Dart>& roots, int parent_region,
                                      PieceCode* winner = nullptr,
                                      std::vector<std::pair<Dart, long long>>* child_order = nullptr) const {
        std::vector<long long> best;
        PieceCode best_pc;
        bool first = true;
        for (Dart d0 : roots) {
            PieceCode pc = encode_piece(V, d0);
            std::vector<long long> code = pc.tokens;
            for (int f : pc.faces_in_rank_order) {
                code.push_back(TOK_FACE);
                int r = V.region_of_face[static_cast<std::size_t>(f)];
                if (r == parent_region) {
                    code.push_back(TOK_PARENT);
                    continue;
                }
                std::vector<std::vector<long long>> kids;
                for (auto [q, qf] : region_piece_faces[static_cast<std::size_t>(r)]) {
                    if (q == piece) continue;
                    std::vector<Dart> qroots = face_darts_of(qf);
                    kids.push_back(code_piece(q, qroots, r));
                }
                std::sort(kids.begin(), kids.end());
                for (auto& k : kids) {
                    code.push_back(TOK_CHILD_OPEN);
                    code.insert(code.end(), k.begin(), k.end());
                    code.push_back(TOK_CHILD_CLOSE);
                }
            }
            if (first || code < best) {
                best = std::move(code);
                best_pc = std::move(pc);
                first = false;
            }
        }
        if (winner) *winner = best_pc;
        (void)child_order;
        return best;
    }
};

}  // namespace detail

// Canonical token stream; two valid diagrams over the same alphabet are
// isomorphic iff their canonical tokens are equal.
inline std::vector<long long> canonical_tokens(const DoodleDiagram& D) {
    MapView V = analyze(D);
    if (V.n_pieces == 0) return {detail::TOK_EMPTY};
    detail::ArrangementCoder coder(V);
    std::vector<long long> best;
    bool first = true;
    for (int p = 0; p < V.n_pieces; ++p) {
        auto code = coder.code_piece(p, coder.piece_darts[static_cast<std::size_t>(p)], -1);
        if (first || code < best) {
            best = std::move(code);
            first = false;
        }
    }
    return best;
}

// Orientation-, color- and rotation-preserving combinatorial-map isomorphism,
// computed by rooted canonical form minimized over all roots.
inline bool isomorphic(const DoodleDiagram& D1, const DoodleDiagram& D2) {
    if (D1.alphabet != D2.alphabet) return false;
    if (D1.vertices.size() != D2.vertices.size() || D1.edges.size() != D2.edges.size()) return false;
    if (D1.crossing_count() != D2.crossing_count()) return false;
    return canonical_tokens(D1) == canonical_tokens(D2);
}

// ---------------------------------------------------------------------------
// Canonical layout (stable element names) and serialization
// ---------------------------------------------------------------------------

struct CanonicalLayout {
    struct PieceEntry {
        int piece = -1;
        detail::PieceCode pc;
        int parent_region = -1;   // -1 for the root piece
        Dart parent_ref = -1;     // dart on an earlier piece bounding parent_region
        Dart child_ref = -1;      // dart of this piece whose face lies in parent_region
    };
    std::vector<PieceEntry> order;             // pre-order, root first
    std::vector<std::string> vertex_name;      // per vertex: "X#" or "L#"
    std::vector<std::string> edge_name;        // per edge: "E#" or its loop name
    std::vector<int> dart_emission;            // dart -> global emission index
    std::vector<Dart> loop_outer_dart;         // per vertex (markers only): outer-side dart
    int outer_region = -1;
};

namespace detail {

inline CanonicalLayout compute_layout(const DoodleDiagram& D, const MapView& V) {
    CanonicalLayout L;
    L.vertex_name.assign(D.vertices.size(), "");
    L.edge_name.assign(D.edges.size(), "");
    L.dart_emission.assign(static_cast<std::size_t>(V.n_darts), -1);
    L.loop_outer_dart.assign(D.vertices.size(), -1);
    if (V.n_pieces == 0) return L;

    ArrangementCoder coder(V);

    // root piece: the one whose full code is the global minimum
    int root_piece = 0;
    std::vector<long long> best;
    bool first = true;
    for (int p = 0; p < V.n_pieces; ++p) {
        auto code = coder.code_piece(p, coder.piece_darts[static_cast<std::size_t>(p)], -1);
        if (first || code < best) {
            best = std::move(code);
            root_piece = p;
            first = false;
        }
    }

    int emission_counter = 0;

    // recursive emission; chooses the argmin root dart at each piece
    auto emit = [&](auto&& self, int piece, const std::vector<Dart>& roots, int parent_region) -> void {
        Dart d0_best = roots.front();
        std::vector<long long> code_best;
        bool f = true;
        for (Dart d0 : roots) {
            auto code = coder.code_piece(piece, {d0}, parent_region);
            if (f || code < code_best) {
                code_best = std::move(code);
                d0_best = d0;
                f = false;
            }
        }
        PieceCode pc = encode_piece(V, d0_best);

        CanonicalLayout::PieceEntry entry;
        entry.piece = piece;
        entry.pc = pc;
        entry.parent_region = parent_region;
        if (parent_region >= 0) {
            // attaching face of this piece = the face in parent_region
            for (int fc : pc.faces_in_rank_order) {
                if (V.region_of_face[static_cast<std::size_t>(fc)] == parent_region) {
                    for (Dart d : pc.dart_seq) {
                        if (V.face_of[static_cast<std::size_t>(d)] == fc) {
                            entry.child_ref = d;
                            break;
                        }
                    }
                    break;
                }
            }
            // earliest already-emitted dart bounding parent_region
            int best_idx = -1;
            for (int face : V.region_faces[static_cast<std::size_t>(parent_region)]) {
                for (Dart d : V.faces[static_cast<std::size_t>(face)]) {
                    int idx = L.dart_emission[static_cast<std::size_t>(d)];
                    if (idx >= 0 && (best_idx < 0 || idx < best_idx)) {
                        best_idx = idx;
                        entry.parent_ref = d;
                    }
                }
            }
        }
        if (L.outer_region < 0)
            L.outer_region =
                V.region_of_face[static_cast<std::size_t>(V.face_of[static_cast<std::size_t>(d0_best)])];

        for (Dart d : pc.dart_seq)
            if (L.dart_emission[static_cast<std::size_t>(d)] < 0)
                L.dart_emission[static_cast<std::size_t>(d)] = emission_counter++;
        L.order.push_back(entry);

        for (int fc : pc.faces_in_rank_order) {
            int r = V.region_of_face[static_cast<std::size_t>(fc)];
            if (r == parent_region) continue;
            std::vector<std::pair<std::vector<long long>, std::pair<int, std::vector<Dart>>>> kids;
            for (auto [q, qf] : coder.region_piece_faces[static_cast<std::size_t>(r)]) {
                if (q == piece) continue;
                std::vector<Dart> qroots = V.faces[static_cast<std::size_t>(qf)];
                kids.push_back({coder.code_piece(q, qroots, r), {q, qroots}});
            }
            std::sort(kids.begin(), kids.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
            for (auto& k : kids) self(self, k.second.first, k.second.second, r);
        }
    };
    emit(emit, root_piece, coder.piece_darts[static_cast<std::size_t>(root_piece)], -1);

    // names
    int xc = 0, lc = 0, ec = 0;
    for (auto& entry : L.order) {
        for (VertexId v : entry.pc.vertex_order) {
            if (D.is_crossing(v))
                L.vertex_name[static_cast<std::size_t>(v)] = "X" + std::to_string(++xc);
            else
                L.vertex_name[static_cast<std::size_t>(v)] = "L" + std::to_string(++lc);
        }
        for (EdgeId e : entry.pc.edge_order) {
            VertexId tv = D.edges[static_cast<std::size_t>(e)].tail.v;
            if (D.is_crossing(tv))
                L.edge_name[static_cast<std::size_t>(e)] = "E" + std::to_string(++ec);
            else
                L.edge_name[static_cast<std::size_t>(e)] = L.vertex_name[static_cast<std::size_t>(tv)];
        }
        // marker outer side
        VertexId v0 = entry.pc.vertex_order.front();
        if (!D.is_crossing(v0)) {
            Dart outer = entry.child_ref >= 0 ? entry.child_ref
                                              : make_dart(dart_edge(entry.pc.dart_seq.front()), 0);
            L.loop_outer_dart[static_cast<std::size_t>(v0)] = outer;
        }
    }
    return L;
}

}  // namespace detail

inline CanonicalLayout canonical_layout(const DoodleDiagram& D) {
    MapView V = analyze(D);
    return detail::compute_layout(D, V);
}

namespace detail {

inline std::string region_ref_string(const DoodleDiagram& D, const CanonicalLayout& L, Dart d) {
    EdgeId e = dart_edge(d);
    VertexId tv = D.edges[static_cast<std::size_t>(e)].tail.v;
    if (D.is_crossing(tv))
        return (dart_dir(d) == 0 ? "left-of " : "right-of ") + L.edge_name[static_cast<std::size_t>(e)];
    Dart outer = L.loop_outer_dart[static_cast<std::size_t>(tv)];
    return (d == outer ? "outside " : "inside ") + L.vertex_name[static_cast<std::size_t>(tv)];
}

}  // namespace detail

// Canonical text form: isomorphic diagrams serialize to identical bytes.
inline std::string serialize(const DoodleDiagram& D) {
    {
        auto bad = validate(D);
        if (!bad.empty()) throw std::invalid_argument("serialize: invalid diagram: " + bad.front());
    }
    MapView V = analyze(D);
    CanonicalLayout L = detail::compute_layout(D, V);
    std::ostringstream out;
    out << "doodle v1\n";
    out << "alphabet";
    for (auto& n : D.alphabet.names()) out << ' ' << n;
    out << '\n';

    // crossings in name order
    std::vector<std::pair<int, VertexId>> xs;
    for (std::size_t v = 0; v < D.vertices.size(); ++v)
        if (D.is_crossing(static_cast<VertexId>(v)) && !L.vertex_name[v].empty())
            xs.push_back({std::stoi(L.vertex_name[v].substr(1)), static_cast<VertexId>(v)});
    std::sort(xs.begin(), xs.end());
    for (auto& [rank, v] : xs) out << "crossing " << L.vertex_name[static_cast<std::size_t>(v)] << '\n';

    std::vector<std::pair<int, EdgeId>> es;
    for (std::size_t e = 0; e < D.edges.size(); ++e) {
        VertexId tv = D.edges[e].tail.v;
        if (D.is_crossing(tv)) es.push_back({std::stoi(L.edge_name[e].substr(1)), static_cast<EdgeId>(e)});
    }
    std::sort(es.begin(), es.end());
    for (auto& [rank, e] : es) {
        const EdgeRec& er = D.edges[static_cast<std::size_t>(e)];
        out << "edge " << L.edge_name[static_cast<std::size_t>(e)] << ' '
            << L.vertex_name[static_cast<std::size_t>(er.tail.v)] << '.' << er.tail.port << " -> "
            << L.vertex_name[static_cast<std::size_t>(er.head.v)] << '.' << er.head.port << '\n';
    }

    // one color line per crossing-piece component, keyed by its least-named edge
    std::vector<std::pair<int, GenId>> colors;
    for (int c = 0; c < V.n_comps; ++c) {
        EdgeId e0 = V.comp_edges[static_cast<std::size_t>(c)].front();
        if (!D.is_crossing(D.edges[static_cast<std::size_t>(e0)].tail.v)) continue;
        int best = -1;
        for (EdgeId e : V.comp_edges[static_cast<std::size_t>(c)]) {
            int rank = std::stoi(L.edge_name[static_cast<std::size_t>(e)].substr(1));
            if (best < 0 || rank < best) best = rank;
        }
        colors.push_back({best, V.comp_color[static_cast<std::size_t>(c)]});
    }
    std::sort(colors.begin(), colors.end());
    for (auto& [rank, g] : colors)
        out << "color E" << rank << ' ' << D.alphabet.name(g) << '\n';

    // loops and merges, in piece emission order
    for (auto& entry : L.order) {
        VertexId v0 = entry.pc.vertex_order.front();
        if (!D.is_crossing(v0)) {
            EdgeId e = dart_edge(entry.pc.dart_seq.front());
            out << "loop " << L.vertex_name[static_cast<std::size_t>(v0)] << ' ';
            if (entry.parent_region < 0)
                out << "outer";
            else
                out << detail::region_ref_string(D, L, entry.parent_ref);
            out << " color " << D.alphabet.name(D.edges[static_cast<std::size_t>(e)].color);
            if (entry.parent_region >= 0 && dart_dir(entry.child_ref) == 1) out << " reversed";
            out << '\n';
        } else if (entry.parent_region >= 0) {
            out << "merge " << detail::region_ref_string(D, L, entry.parent_ref) << ' '
                << detail::region_ref_string(D, L, entry.child_ref) << '\n';
        }
    }
    return out.str();
}

// Diagram plus the file's element names, for CLI references like F(X1.2).
struct ParsedDiagram {
    DoodleDiagram diagram;
    std::map<std::string, VertexId> vertex_by_name;  // X# and L#
    std::map<std::string, EdgeId> edge_by_name;      // E# and loop names
    std::map<std::string, Dart> loop_outer;          // loop name -> outer-side dart
};

inline ParsedDiagram deserialize(const std::string& text) {
    ParsedDiagram P;
    DoodleDiagram& D = P.diagram;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool saw_header = false, saw_alphabet = false;
    struct PendingColor {
        std::string edge;
        std::string color;
        int lineno;
    };
    std::vector<PendingColor> color_lines;

    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": " + msg);
    };

    auto split = [](const std::string& s) {
        std::istringstream ss(s);
        std::vector<std::string> toks;
        std::string t;
        while (ss >> t) toks.push_back(t);
        return toks;
    };

    auto parse_end = [&](const std::string& tok) -> End {
        auto dot = tok.rfind('.');
        if (dot == std::string::npos) fail("expected VERTEX.PORT, got '" + tok + "'");
        std::string vn = tok.substr(0, dot);
        auto it = P.vertex_by_name.find(vn);
        if (it == P.vertex_by_name.end()) fail("unknown vertex '" + vn + "'");
        int port = std::stoi(tok.substr(dot + 1));
        return End{it->second, port};
    };

    auto resolve_ref = [&](const std::string& kind, const std::string& name) -> Dart {
        if (kind == "left-of" || kind == "right-of") {
            auto it = P.edge_by_name.find(name);
            if (it == P.edge_by_name.end()) fail("unknown edge '" + name + "'");
            return make_dart(it->second, kind == "left-of" ? 0 : 1);
        }
        if (kind == "inside" || kind == "outside") {
            auto it = P.loop_outer.find(name);
            if (it == P.loop_outer.end()) fail("unknown loop '" + name + "'");
            return kind == "outside" ? it->second : dart_reverse(it->second);
        }
        fail("unknown region reference '" + kind + "'");
        return -1;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        auto toks = split(line);
        if (toks.empty()) continue;
        if (!saw_header) {
            if (toks.size() != 2 || toks[0] != "doodle" || toks[1] != "v1") fail("missing header 'doodle v1'");
            saw_header = true;
            continue;
        }
        const std::string& cmd = toks[0];
        if (cmd == "alphabet") {
            if (toks.size() < 2) fail("alphabet needs at least one generator");
            D.alphabet = Alphabet(std::vector<std::string>(toks.begin() + 1, toks.end()));
            saw_alphabet = true;
        } else if (cmd == "crossing") {
            if (!saw_alphabet) fail("alphabet must come first");
            if (toks.size() != 2) fail("usage: crossing X#");
            if (P.vertex_by_name.count(toks[1])) fail("duplicate vertex '" + toks[1] + "'");
            P.vertex_by_name[toks[1]] = static_cast<VertexId>(D.vertices.size());
            D.vertices.push_back({VertexKind::Crossing});
        } else if (cmd == "edge") {
            if (toks.size() != 5 || toks[3] != "->") fail("usage: edge E# X#.p -> X#.p");
            if (P.edge_by_name.count(toks[1])) fail("duplicate edge '" + toks[1] + "'");
            End tail = parse_end(toks[2]);
            End head = parse_end(toks[4]);
            P.edge_by_name[toks[1]] = static_cast<EdgeId>(D.edges.size());
            D.edges.push_back({tail, head, -1});
        } else if (cmd == "color") {
            if (toks.size() != 3) fail("usage: color E# gen");
            color_lines.push_back({toks[1], toks[2], lineno});
        } else if (cmd == "loop") {
            // loop L# (outer | left-of E# | right-of E# | inside L# | outside L#) color g [reversed]
            if (toks.size() < 4) fail("usage: loop L# <region> color g [reversed]");
            std::string name = toks[1];
            if (P.vertex_by_name.count(name)) fail("duplicate vertex '" + name + "'");
            std::size_t i = 2;
            std::string kind = toks[i++];
            std::string refname;
            if (kind != "outer") {
                if (i >= toks.size()) fail("region reference needs an element name");
                refname = toks[i++];
            }
            if (i >= toks.size() || toks[i] != "color") fail("expected 'color'");
            ++i;
            if (i >= toks.size()) fail("expected color name");
            std::string colorname = toks[i++];
            bool reversed = false;
            if (i < toks.size() && toks[i] == "reversed") {
                reversed = true;
                ++i;
            }
            if (i != toks.size()) fail("trailing tokens on loop line");
            if (!saw_alphabet) fail("alphabet must come first");
            GenId color = -1;
            if (auto g = D.alphabet.find(colorname))
                color = *g;
            else
                fail("unknown generator '" + colorname + "'");
            VertexId v = static_cast<VertexId>(D.vertices.size());
            D.vertices.push_back({VertexKind::Marker});
            P.vertex_by_name[name] = v;
            EdgeId e = static_cast<EdgeId>(D.edges.size());
            D.edges.push_back({End{v, 0}, End{v, 1}, color});
            P.edge_by_name[name] = e;
            Dart outer = make_dart(e, reversed ? 1 : 0);
            P.loop_outer[name] = outer;
            if (kind != "outer") D.merges.push_back({resolve_ref(kind, refname), outer});
        } else if (cmd == "merge") {
            if (toks.size() != 5) fail("usage: merge <kind> <name> <kind> <name>");
            Dart a = resolve_ref(toks[1], toks[2]);
            Dart b = resolve_ref(toks[3], toks[4]);
            D.merges.push_back({a, b});
        } else {
            fail("unknown directive '" + cmd + "'");
        }
    }
    if (!saw_header) throw std::runtime_error("missing header");
    if (!saw_alphabet) throw std::runtime_error("missing alphabet line");

    // paint components from color lines
    if (!D.edges.empty()) {
        auto bad = structural_violations(D);
        // tolerate color -1 during the structural pass: colors checked below
        for (auto& b : bad)
            if (b.find("color out of range") == std::string::npos) throw std::runtime_error(b);
        MapView V = analyze(D);
        for (auto& cl : color_lines) {
            lineno = cl.lineno;
            auto it = P.edge_by_name.find(cl.edge);
            if (it == P.edge_by_name.end()) fail("unknown edge '" + cl.edge + "'");
            auto g = D.alphabet.find(cl.color);
            if (!g) fail("unknown generator '" + cl.color + "'");
            int comp = V.comp_of_edge[static_cast<std::size_t>(it->second)];
            for (EdgeId e : V.comp_edges[static_cast<std::size_t>(comp)]) {
                if (D.edges[static_cast<std::size_t>(e)].color >= 0 &&
                    D.edges[static_cast<std::size_t>(e)].color != *g)
                    fail("conflicting colors for one component");
                D.edges[static_cast<std::size_t>(e)].color = *g;
            }
        }
        for (std::size_t e = 0; e < D.edges.size(); ++e)
            if (D.edges[e].color < 0)
                throw std::runtime_error("component containing edge index " + std::to_string(e) +
                                         " has no color assignment");
    }

    auto bad = validate(D);
    if (!bad.empty()) {
        std::string msg = "invalid diagram on load:";
        for (auto& b : bad) msg += "\n  " + b;
        throw std::runtime_error(msg);
    }
    return P;
}

// Diagnostic DOT export: the 4-valent multigraph with port annotations.
inline std::string export_dot(const DoodleDiagram& D) {
    MapView V = analyze(D);
    CanonicalLayout L = detail::compute_layout(D, V);
    std::ostringstream out;
    out << "graph doodle {\n";
    for (std::size_t v = 0; v < D.vertices.size(); ++v) {
        out << "  \"" << L.vertex_name[v] << "\" [shape=" << (D.is_crossing(static_cast<VertexId>(v)) ? "point" : "circle")
            << "];\n";
    }
    for (std::size_t e = 0; e < D.edges.size(); ++e) {
        const EdgeRec& er = D.edges[e];
        out << "  \"" << L.vertex_name[static_cast<std::size_t>(er.tail.v)] << "\" -- \""
            << L.vertex_name[static_cast<std::size_t>(er.head.v)] << "\" [label=\""
            << L.edge_name[e] << ':' << D.alphabet.name(er.color) << "\", taillabel=\"" << er.tail.port
            << "\", headlabel=\"" << er.head.port << "\", dir=forward];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace doodle
