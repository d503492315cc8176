#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "doodle/diagram.hpp"
#include "doodle/fixtures.hpp"

using namespace doodle;

namespace {

// Oracle: exhaustive search for a color-, direction- and rotation-preserving
// bijection between two connected diagrams, anchored at one vertex image and
// propagated along edges.
bool iso_oracle_connected(const DoodleDiagram& A, const DoodleDiagram& B) {
    if (A.vertices.size() != B.vertices.size() || A.edges.size() != B.edges.size()) return false;
    if (A.vertices.empty()) return true;
    MapView VA = analyze(A);
    MapView VB = analyze(B);
    const int n = static_cast<int>(A.vertices.size());
    for (int w0 = 0; w0 < n; ++w0) {
        if (B.vertices[static_cast<std::size_t>(w0)].kind != A.vertices[0].kind) continue;
        int degs = A.degree(0);
        for (int shift = 0; shift < degs; ++shift) {
            // map vertex 0 -> w0 with port p -> (p + shift) % deg, propagate
            std::vector<int> vmap(static_cast<std::size_t>(n), -1);
            std::vector<int> pshift(static_cast<std::size_t>(n), -1);
            vmap[0] = w0;
            pshift[0] = shift;
            std::vector<int> stack{0};
            bool ok = true;
            while (!stack.empty() && ok) {
                int v = stack.back();
                stack.pop_back();
                int deg = A.degree(v);
                for (int p = 0; p < deg && ok; ++p) {
                    Dart da = VA.out[static_cast<std::size_t>(v)][static_cast<std::size_t>(p)];
                    int q = (p + pshift[static_cast<std::size_t>(v)]) % deg;
                    Dart db = VB.out[static_cast<std::size_t>(vmap[static_cast<std::size_t>(v)])][static_cast<std::size_t>(q)];
                    if (dart_dir(da) != dart_dir(db) || VA.dart_color(da) != VB.dart_color(db)) {
                        ok = false;
                        break;
                    }
                    End ta = VA.dart_target(da);
                    End tb = VB.dart_target(db);
                    if (A.vertices[static_cast<std::size_t>(ta.v)].kind !=
                        B.vertices[static_cast<std::size_t>(tb.v)].kind) {
                        ok = false;
                        break;
                    }
                    int degt = A.degree(ta.v);
                    if (degt != B.degree(tb.v)) {
                        ok = false;
                        break;
                    }
                    int want_shift = ((tb.port - ta.port) % degt + degt) % degt;
                    if (vmap[static_cast<std::size_t>(ta.v)] == -1) {
                        vmap[static_cast<std::size_t>(ta.v)] = tb.v;
                        pshift[static_cast<std::size_t>(ta.v)] = want_shift;
                        stack.push_back(ta.v);
                    } else if (vmap[static_cast<std::size_t>(ta.v)] != tb.v ||
                               pshift[static_cast<std::size_t>(ta.v)] != want_shift) {
                        ok = false;
                    }
                }
            }
            if (ok) {
                bool bijective = true;
                std::set<int> img(vmap.begin(), vmap.end());
                if (static_cast<int>(img.size()) != n || img.count(-1)) bijective = false;
                if (bijective) return true;
            }
        }
    }
    return false;
}

DoodleDiagram relabel(const DoodleDiagram& D, std::mt19937& rng) {
    std::vector<int> vperm(D.vertices.size());
    for (std::size_t i = 0; i < vperm.size(); ++i) vperm[i] = static_cast<int>(i);
    std::shuffle(vperm.begin(), vperm.end(), rng);
    std::vector<int> eperm(D.edges.size());
    for (std::size_t i = 0; i < eperm.size(); ++i) eperm[i] = static_cast<int>(i);
    std::shuffle(eperm.begin(), eperm.end(), rng);
    DoodleDiagram out;
    out.alphabet = D.alphabet;
    out.vertices.resize(D.vertices.size());
    for (std::size_t i = 0; i < D.vertices.size(); ++i)
        out.vertices[static_cast<std::size_t>(vperm[i])] = D.vertices[i];
    out.edges.resize(D.edges.size());
    for (std::size_t i = 0; i < D.edges.size(); ++i) {
        EdgeRec e = D.edges[i];
        e.tail.v = vperm[static_cast<std::size_t>(e.tail.v)];
        e.head.v = vperm[static_cast<std::size_t>(e.head.v)];
        out.edges[static_cast<std::size_t>(eperm[i])] = e;
    }
    for (auto m : D.merges) {
        MergePair mm;
        mm.a = make_dart(eperm[static_cast<std::size_t>(dart_edge(m.a))], dart_dir(m.a));
        mm.b = make_dart(eperm[static_cast<std::size_t>(dart_edge(m.b))], dart_dir(m.b));
        out.merges.push_back(mm);
    }
    return out;
}

const Alphabet abc({"a", "b", "c"});

}  // namespace

TEST_CASE("single marker loop validates with Euler characteristic 2") {
    DoodleDiagram D = marker_loop(abc, 0);
    CHECK(validate(D).empty());
    MapView V = analyze(D);
    CHECK(V.n_faces == 2);
    CHECK(V.n_pieces == 1);
    CHECK(V.n_regions == 2);
}

TEST_CASE("borromean fixture validates: V=6 E=12 F=8") {
    DoodleDiagram D = borromean();
    auto bad = validate(D);
    CAPTURE(bad);
    CHECK(bad.empty());
    MapView V = analyze(D);
    CHECK(D.vertices.size() == 6);
    CHECK(D.edges.size() == 12);
    CHECK(V.n_faces == 8);
    CHECK(V.n_pieces == 1);

    // sum over faces of boundary length = 2E
    std::size_t total = 0;
    for (auto& f : V.faces) total += f.size();
    CHECK(total == 2 * D.edges.size());
}

TEST_CASE("structural violations are reported") {
    DoodleDiagram D;
    D.alphabet = abc;
    D.vertices.push_back({VertexKind::Crossing});
    D.edges.push_back({End{0, 0}, End{0, 0}, 0});  // both ends on one port
    auto bad = validate(D);
    CHECK(!bad.empty());

    DoodleDiagram incomplete;
    incomplete.alphabet = abc;
    incomplete.vertices.push_back({VertexKind::Crossing});
    CHECK(!validate(incomplete).empty());

    // mixed-color component
    DoodleDiagram mixed = figure_eight(abc, 0);
    mixed.edges[1].color = 1;
    CHECK(!validate(mixed).empty());

    // marker loop may not pass through a crossing
    DoodleDiagram bad_marker = figure_eight(abc, 0);
    bad_marker.vertices.push_back({VertexKind::Marker});
    bad_marker.edges[1].head = End{1, 0};  // reroute strand into the marker
    bad_marker.edges.push_back({End{1, 1}, End{0, 2}, 0});
    CHECK(!validate(bad_marker).empty());
}

TEST_CASE("components of the fixtures") {
    auto comps = components(borromean());
    REQUIRE(comps.size() == 3);
    std::set<GenId> cols;
    for (auto& c : comps) {
        CHECK(c.edges.size() == 4);
        cols.insert(c.color);
    }
    CHECK(cols == std::set<GenId>{0, 1, 2});

    CHECK(components(empty_diagram(abc)).empty());
    CHECK(components(figure_eight(abc, 2)).size() == 1);
}

TEST_CASE("isomorphic: relabeling invariance, canonical form agrees with oracle") {
    std::mt19937 rng(5);
    DoodleDiagram B = borromean();
    for (int trial = 0; trial < 10; ++trial) {
        DoodleDiagram R = relabel(B, rng);
        CHECK(validate(R).empty());
        CHECK(isomorphic(B, R));
        CHECK(iso_oracle_connected(B, R));
    }
    CHECK(!isomorphic(B, marker_loop(abc, 0)));
    CHECK(!isomorphic(B, figure_eight(abc, 0)));
}

TEST_CASE("mirror: canonical form agrees with the exhaustive oracle") {
    // The octahedral borromean is amphichiral: the antipodal map reverses the
    // sphere orientation while fixing every circle with its direction.
    DoodleDiagram B = borromean();
    DoodleDiagram M = mirror(B);
    CHECK(validate(M).empty());
    CHECK(isomorphic(B, M) == iso_oracle_connected(B, M));
    CHECK(isomorphic(B, M));

    DoodleDiagram F = figure_eight(abc, 0);
    DoodleDiagram FM = mirror(F);
    CHECK(validate(FM).empty());
    CHECK(isomorphic(F, FM) == iso_oracle_connected(F, FM));
}

TEST_CASE("recolor and reverse_components") {
    DoodleDiagram B = borromean();
    CHECK(isomorphic(B, recolor(B, {})));
    CHECK(isomorphic(B, reverse_components(B, {})));

    DoodleDiagram swapped = recolor(B, {{"b", "c"}, {"c", "b"}});
    CHECK(validate(swapped).empty());
    // colors map through components
    std::map<GenId, std::size_t> before, after;
    for (auto& c : components(B)) before[c.color] = c.edges.size();
    for (auto& c : components(swapped)) after[c.color] = c.edges.size();
    CHECK(before == after);

    DoodleDiagram rev = reverse_components(B, {"a"});
    CHECK(validate(rev).empty());
    CHECK(!isomorphic(B, rev));
    CHECK(isomorphic(B, reverse_components(rev, {"a"})));

    CHECK_THROWS_AS(recolor(B, {{"a", "b"}}), std::invalid_argument);
}

TEST_CASE("marker arrangements: sides, nesting, re-anchoring invariance") {
    // Two disjoint oriented circles: the shared region sees (left,left),
    // (right,right) or mixed sides; mixed is one class by swapping, the other
    // two are distinct.
    auto two_loops = [&](int s0, int s1) {
        DoodleDiagram D;
        D.alphabet = abc;
        D.vertices.assign(2, {VertexKind::Marker});
        D.edges.push_back({End{0, 0}, End{0, 1}, 0});
        D.edges.push_back({End{1, 0}, End{1, 1}, 0});
        D.merges.push_back({make_dart(0, s0), make_dart(1, s1)});
        return D;
    };
    DoodleDiagram ll = two_loops(0, 0), rr = two_loops(1, 1), lr = two_loops(0, 1),
                  rl = two_loops(1, 0);
    for (auto* d : {&ll, &rr, &lr, &rl}) CHECK(validate(*d).empty());
    CHECK(isomorphic(lr, rl));
    CHECK(!isomorphic(ll, rr));
    CHECK(!isomorphic(ll, rl));

    // three loops in one region, expressed with different anchor trees
    auto three = [&](bool chain) {
        DoodleDiagram D;
        D.alphabet = abc;
        D.vertices.assign(3, {VertexKind::Marker});
        for (int i = 0; i < 3; ++i)
            D.edges.push_back({End{i, 0}, End{i, 1}, static_cast<GenId>(i)});
        D.merges.push_back({make_dart(0, 0), make_dart(1, 0)});
        D.merges.push_back({chain ? make_dart(1, 0) : make_dart(0, 0), make_dart(2, 0)});
        return D;
    };
    CHECK(isomorphic(three(true), three(false)));

    // inner vs outer placement relative to the middle loop is distinct
    auto third_nested = [&]() {
        DoodleDiagram D;
        D.alphabet = abc;
        D.vertices.assign(3, {VertexKind::Marker});
        for (int i = 0; i < 3; ++i)
            D.edges.push_back({End{i, 0}, End{i, 1}, static_cast<GenId>(i)});
        D.merges.push_back({make_dart(0, 0), make_dart(1, 0)});
        D.merges.push_back({make_dart(1, 1), make_dart(2, 0)});  // loop 2 inside loop 1
        return D;
    };
    CHECK(validate(third_nested()).empty());
    CHECK(!isomorphic(three(true), third_nested()));

    // same-color markers in one region are interchangeable: the merge order
    // and anchor choice never affect the canonical bytes
    auto pair_in_region = [&](bool swapped) {
        DoodleDiagram D;
        D.alphabet = abc;
        D.vertices.assign(3, {VertexKind::Marker});
        D.edges.push_back({End{0, 0}, End{0, 1}, 1});
        D.edges.push_back({End{1, 0}, End{1, 1}, 0});
        D.edges.push_back({End{2, 0}, End{2, 1}, 0});
        int first = swapped ? 2 : 1, second = swapped ? 1 : 2;
        D.merges.push_back({make_dart(0, 1), make_dart(first, 0)});
        D.merges.push_back({make_dart(0, 1), make_dart(second, 0)});
        return D;
    };
    CHECK(serialize(pair_in_region(false)) == serialize(pair_in_region(true)));
}

TEST_CASE("serialize round trip is canonical") {
    std::mt19937 rng(9);
    for (DoodleDiagram D : {borromean(), marker_loop(abc, 1), figure_eight(abc, 0)}) {
        std::string text = serialize(D);
        ParsedDiagram P = deserialize(text);
        CHECK(validate(P.diagram).empty());
        CHECK(isomorphic(D, P.diagram));
        CHECK(serialize(P.diagram) == text);
        // relabeled diagrams serialize to the same bytes
        CHECK(serialize(relabel(D, rng)) == text);
    }
}

TEST_CASE("deserialize error paths") {
    CHECK_THROWS(deserialize(""));
    CHECK_THROWS(deserialize("doodle v2\n"));
    CHECK_THROWS(deserialize("doodle v1\nalphabet a\ncrossing X1\n"));  // open ports
    CHECK_THROWS(deserialize("doodle v1\nalphabet a\nedge E1 X1.0 -> X1.1\n"));
    CHECK_THROWS(deserialize("doodle v1\nalphabet a\nloop L1 left-of E9 color a\n"));
    // missing color assignment
    CHECK_THROWS(deserialize(
        "doodle v1\nalphabet a\ncrossing X1\nedge E1 X1.0 -> X1.1\nedge E2 X1.3 -> X1.2\n"));
}

TEST_CASE("file format example with loops") {
    std::string text =
        "doodle v1\n"
        "# a marker loop beside a figure eight, plus one nested loop\n"
        "alphabet a b c\n"
        "crossing X1\n"
        "edge E1 X1.0 -> X1.1\n"
        "edge E2 X1.3 -> X1.2\n"
        "color E1 a\n"
        "loop L1 left-of E2 color b\n"
        "loop L2 inside L1 color c reversed\n";
    ParsedDiagram P = deserialize(text);
    CHECK(validate(P.diagram).empty());
    CHECK(P.diagram.vertices.size() == 3);
    CHECK(components(P.diagram).size() == 3);
    std::string again = serialize(P.diagram);
    CHECK(isomorphic(deserialize(again).diagram, P.diagram));
}

TEST_CASE("export_dot mentions every element") {
    DoodleDiagram B = borromean();
    std::string dot = export_dot(B);
    CHECK(dot.find("graph doodle") != std::string::npos);
    CHECK(dot.find("X1") != std::string::npos);
    CHECK(dot.find("E12") != std::string::npos);
}
