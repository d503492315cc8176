#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "doodle/identity.hpp"

using namespace doodle;

namespace {

const Alphabet abc({"a", "b", "c"});

Word W(const std::string& text) { return parse_word(text, abc); }

ElementaryIdentity example_231() {
    return parse_elementary_identity("(a,c)^[b] (b,c) (b,a)^[c] (c,a) (c,b)^[a] (a,b)", abc);
}

GeneralIdentity hall_witt() {
    return parse_identity(
        "([a^-1 b^-1 a b],[a^-1 c a]) ([c^-1 a^-1 c a],[c^-1 b c]) ([b^-1 c^-1 b c],[b^-1 a b])", abc);
}

ElementaryIdentity rand_identity(std::mt19937& rng, int max_terms = 6, int max_u = 4) {
    // Random verifying identity: random conjugated commutators followed by the
    // factorization of the product's inverse, so the total is freely trivial.
    std::vector<CommutatorTerm> terms;
    int n = static_cast<int>(rng() % static_cast<unsigned>(max_terms + 1));
    for (int i = 0; i < n; ++i) {
        GenId a = static_cast<GenId>(rng() % 3);
        GenId b = static_cast<GenId>(rng() % 3);
        Word u;
        int len = static_cast<int>(rng() % static_cast<unsigned>(max_u + 1));
        for (int k = 0; k < len; ++k)
            u.letters.emplace_back(static_cast<GenId>(rng() % 3), rng() % 2 ? +1 : -1);
        terms.emplace_back(a, b, u);
    }
    Word prod;
    for (auto& t : terms) prod = concat(prod, term_value(t));
    for (auto& t : commutator_factorization(inverse(prod))) terms.push_back(t);
    return checked_elementary(abc, terms);
}

}  // namespace

TEST_CASE("term values") {
    CHECK(term_value(CommutatorTerm(0, 2, W("b"))) == W("b^-1 a^-1 c^-1 a c b"));
    CHECK(freely_trivial(term_value(CommutatorTerm(0, 0, W("c a")))));
    CHECK(term_value(GeneralTerm(PairTerm{W("b c"), W("a"), Word()})) ==
          W("c^-1 b^-1 a^-1 b c a"));
}

TEST_CASE("verify: paper identities hold, a lone commutator does not") {
    CHECK(verify(example_231()));
    CHECK(verify(hall_witt()));
    CHECK(!verify(parse_elementary_identity("(a,b)", abc)));
    CHECK(verify(parse_identity("([b c],[a]) ([c a],[b]) ([a b],[c])", abc)));
    CHECK(verify(ElementaryIdentity(abc, {})));
}

TEST_CASE("checked constructor rejects non-identities") {
    CHECK_THROWS_AS(checked_elementary(abc, {CommutatorTerm(0, 1)}), std::invalid_argument);
    CHECK_NOTHROW(checked_elementary(abc, {CommutatorTerm(0, 0, W("b"))}));
}

TEST_CASE("apply_move: rho and sigma") {
    Alphabet abcd({"a", "b", "c", "d"});
    ElementaryIdentity id(abcd, {CommutatorTerm(0, 1), CommutatorTerm(2, 3)});

    auto s = apply_move(id, MoveDescriptor::sigma(0, +1));
    REQUIRE(s.size() == 2);
    CHECK(s.terms[0] == CommutatorTerm(2, 3));
    CHECK(s.terms[1] == CommutatorTerm(0, 1, parse_word("c^-1 d^-1 c d", abcd)));
    // oracle: products freely equal, value multiset conjugate-matched
    CHECK(freely_equal(s.product(), id.product()));
    CHECK(conjugacy_key(term_value(s.terms[1])) == conjugacy_key(term_value(id.terms[0])));

    ElementaryIdentity tri(abc, {CommutatorTerm(0, 1), CommutatorTerm(1, 2), CommutatorTerm(2, 0)});
    auto r = apply_move(tri, MoveDescriptor::rho());
    CHECK(r.terms == std::vector<CommutatorTerm>{tri.terms[1], tri.terms[2], tri.terms[0]});

    ElementaryIdentity empty(abc, {});
    auto ins = apply_move(empty, MoveDescriptor::insert_trivial(0, 0, W("b")));
    REQUIRE(ins.size() == 1);
    CHECK(ins.terms[0] == CommutatorTerm(0, 0, W("b")));
    CHECK(verify(ins));
}

TEST_CASE("apply_move preserves verify") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        ElementaryIdentity id = rand_identity(rng);
        const int m = static_cast<int>(id.size());
        std::vector<MoveDescriptor> moves{MoveDescriptor::rho(),
                                          MoveDescriptor::conj(W("b a^-1")),
                                          MoveDescriptor::insert_trivial(0, 1, W("c"))};
        if (m >= 2) {
            moves.push_back(MoveDescriptor::sigma(static_cast<int>(rng() % (m - 1)), +1));
            moves.push_back(MoveDescriptor::sigma(static_cast<int>(rng() % (m - 1)), -1));
        }
        if (m >= 1) moves.push_back(MoveDescriptor::local2(static_cast<int>(rng() % m), +1));
        moves.push_back(MoveDescriptor::insert_cancelling(0, 0, 2, W("b^-1")));
        for (auto& mv : moves) {
            ElementaryIdentity out = apply_move(id, mv);
            CHECK(verify(out));
        }
        CHECK(verify(normalize_local(id)));
        CHECK(verify(strict_normal_form(id)));
    }
}

TEST_CASE("apply_move error paths") {
    ElementaryIdentity id(abc, {CommutatorTerm(0, 1)});
    CHECK_THROWS_AS(apply_move(id, MoveDescriptor::sigma(0, +1)), std::invalid_argument);
    CHECK_THROWS_AS(apply_move(id, MoveDescriptor::delete_trivial(0)), std::invalid_argument);
    CHECK_THROWS_AS(apply_move(id, MoveDescriptor::local2(3, +1)), std::invalid_argument);
    ElementaryIdentity pair(abc, {CommutatorTerm(0, 1, W("c")), CommutatorTerm(1, 0, W("c c"))});
    CHECK_THROWS_AS(apply_move(pair, MoveDescriptor::delete_cancelling(0)), std::invalid_argument);
    ElementaryIdentity ok(abc, {CommutatorTerm(0, 1, W("c")), CommutatorTerm(1, 0, W("c b b^-1"))});
    CHECK(apply_move(ok, MoveDescriptor::delete_cancelling(0)).size() == 0);
}

TEST_CASE("normalize_local reduces conjugators only") {
    ElementaryIdentity id(abc, {CommutatorTerm(0, 1, W("c c^-1"))});
    CHECK(normalize_local(id).terms[0] == CommutatorTerm(0, 1, Word()));
    ElementaryIdentity id2(abc, {CommutatorTerm(0, 1, W("b b^-1 a"))});
    CHECK(normalize_local(id2).terms[0] == CommutatorTerm(0, 1, W("a")));
    ElementaryIdentity reduced(abc, {CommutatorTerm(0, 1, W("c"))});
    CHECK(normalize_local(reduced) == reduced);
}

namespace {

// Oracle for the strict normal form: exhaustive k over a generous window,
// minimizing (length, lex).
Word snf_oracle_u(const CommutatorTerm& t) {
    if (t.a == t.b) return free_reduce(t.u);
    Word c = free_reduce(commutator(Word::single(t.a), Word::single(t.b)));
    Word ur = free_reduce(t.u);
    Word best = ur;
    for (int k = -12; k <= 12; ++k) {
        Word p;
        for (int i = 0; i < std::abs(k); ++i) p = concat(p, k > 0 ? c : inverse(c));
        Word cand = free_reduce(concat(p, ur));
        if (cand.size() < best.size() || (cand.size() == best.size() && cand < best)) best = cand;
    }
    return best;
}

}  // namespace

TEST_CASE("strict normal form strips commutator powers") {
    CommutatorTerm t(0, 1, W("a^-1 b^-1 a b c"));
    CHECK(strict_normal_term(t).u == W("c"));
    CHECK(strict_normal_term(t).u == snf_oracle_u(t));

    CommutatorTerm t2(0, 1, Word());
    CHECK(strict_normal_term(t2) == t2);

    CommutatorTerm t3(0, 1, W("b^-1 a^-1 b a"));
    CHECK(strict_normal_term(t3).u == Word());
    CHECK(strict_normal_term(t3).u == snf_oracle_u(t3));
}

TEST_CASE("strict normal form: idempotent, LocalII- and (IV)-invariant") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 120; ++trial) {
        GenId a = static_cast<GenId>(rng() % 3);
        GenId b = static_cast<GenId>(rng() % 3);
        Word u;
        int len = static_cast<int>(rng() % 7);
        for (int k = 0; k < len; ++k)
            u.letters.emplace_back(static_cast<GenId>(rng() % 3), rng() % 2 ? +1 : -1);
        CommutatorTerm t(a, b, u);
        CommutatorTerm n = strict_normal_term(t);
        CHECK(strict_normal_term(n) == n);
        CHECK(n.u == snf_oracle_u(t));
        // (V)
        ElementaryIdentity id(abc, {t});
        for (int s : {+1, -1}) {
            auto moved = apply_move(id, MoveDescriptor::local2(0, s));
            CHECK(strict_normal_term(moved.terms[0]) == n);
        }
        // (IV): pad with a cancelling pair
        CommutatorTerm padded(a, b, concat(W("c c^-1"), u));
        CHECK(strict_normal_term(padded) == n);
        // values are preserved up to free equality
        CHECK(freely_equal(term_value(n), term_value(t)));
    }
}

TEST_CASE("Hurwitz braid relation and inverse, as strict-normal-form equalities") {
    std::mt19937 rng(37);
    for (int trial = 0; trial < 60; ++trial) {
        ElementaryIdentity id = rand_identity(rng, 4, 3);
        while (id.size() < 3) id.terms.emplace_back(0, 0, Word());
        const int m = static_cast<int>(id.size());
        int j = static_cast<int>(rng() % (m - 2));
        auto s = [&](ElementaryIdentity x, int k, int sg) {
            return apply_move(x, MoveDescriptor::sigma(k, sg));
        };
        auto lhs = s(s(s(id, j, +1), j + 1, +1), j, +1);
        auto rhs = s(s(s(id, j + 1, +1), j, +1), j + 1, +1);
        CHECK(strict_normal_form(lhs).terms == strict_normal_form(rhs).terms);
        auto back = s(s(id, j, +1), j, -1);
        CHECK(strict_normal_form(back).terms == strict_normal_form(id).terms);
    }
}

TEST_CASE("conjugacy multiset of Example 2.3(1)") {
    auto keys = conjugacy_multiset(example_231());
    std::vector<Word> expected = {
        conjugacy_key(commutator(W("a"), W("c"))), conjugacy_key(commutator(W("b"), W("c"))),
        conjugacy_key(commutator(W("b"), W("a"))), conjugacy_key(commutator(W("c"), W("a"))),
        conjugacy_key(commutator(W("c"), W("b"))), conjugacy_key(commutator(W("a"), W("b")))};
    std::sort(expected.begin(), expected.end());
    CHECK(keys == expected);
    CHECK(conjugacy_multiset(ElementaryIdentity(abc, {})).empty());
}

TEST_CASE("invariants under the transformation calculus") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        ElementaryIdentity id = rand_identity(rng);
        const int m = static_cast<int>(id.size());
        auto keys = conjugacy_multiset(id);
        auto wsum = weak_class_sum(id);

        std::vector<MoveDescriptor> i_to_v{MoveDescriptor::rho(), MoveDescriptor::conj(W("c b"))};
        if (m >= 2) {
            i_to_v.push_back(MoveDescriptor::sigma(static_cast<int>(rng() % (m - 1)), +1));
            i_to_v.push_back(MoveDescriptor::sigma(static_cast<int>(rng() % (m - 1)), -1));
        }
        if (m >= 1) i_to_v.push_back(MoveDescriptor::local2(static_cast<int>(rng() % m), -1));
        for (auto& mv : i_to_v) {
            auto out = apply_move(id, mv);
            CHECK(conjugacy_multiset(out) == keys);
            CHECK(weak_class_sum(out) == wsum);
        }

        std::vector<MoveDescriptor> vi_vii{
            MoveDescriptor::insert_trivial(m / 2, 2, W("a b")),
            MoveDescriptor::insert_cancelling(m / 2, 1, 2, W("a^-1"))};
        for (auto& mv : vi_vii) {
            auto out = apply_move(id, mv);
            CHECK(weak_class_sum(out) == wsum);
        }
    }
}

TEST_CASE("weak class sum values") {
    ElementaryIdentity pair(abc, {CommutatorTerm(0, 1, W("c a")), CommutatorTerm(1, 0, W("c a"))});
    CHECK(weak_class_sum(pair).empty());
    CHECK(weak_class_sum(example_231()).empty());

    ElementaryIdentity one(abc, {CommutatorTerm(0, 1)});
    auto sum = weak_class_sum(one);
    REQUIRE(sum.size() == 1);
    CHECK(sum.begin()->first == conjugacy_key(commutator(W("a"), W("b"))));
    CHECK(sum.begin()->second == 1);
}

TEST_CASE("commutator factorization") {
    CHECK(commutator_factorization(W("a^-1 b^-1 a b")) ==
          std::vector<CommutatorTerm>{CommutatorTerm(0, 1, Word())});
    CHECK(commutator_factorization(Word()).empty());

    auto terms = commutator_factorization(W("b a b^-1 a^-1"));
    Word prod;
    for (auto& t : terms) prod = concat(prod, term_value(t));
    CHECK(freely_equal(prod, W("b a b^-1 a^-1")));

    CHECK_THROWS_AS(commutator_factorization(W("a a b^-1")), std::invalid_argument);

    std::mt19937 rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        Word w;
        int pairs = static_cast<int>(rng() % 11);
        std::vector<Letter> bag;
        for (int i = 0; i < pairs; ++i) {
            GenId g = static_cast<GenId>(rng() % 3);
            bag.emplace_back(g, +1);
            bag.emplace_back(g, -1);
        }
        std::shuffle(bag.begin(), bag.end(), rng);
        w.letters = bag;
        auto ts = commutator_factorization(w);
        Word p;
        for (auto& t : ts) p = concat(p, term_value(t));
        CHECK(freely_equal(p, w));
    }
}

TEST_CASE("identity grammar round trip") {
    auto id = example_231();
    CHECK(format_identity(id) == "(a,c)^[b] (b,c) (b,a)^[c] (c,a) (c,b)^[a] (a,b)");
    CHECK(parse_elementary_identity(format_identity(id), abc) == id);

    auto hw = hall_witt();
    CHECK(parse_identity(format_identity(hw), abc) == hw);

    auto raw = parse_identity("{a^-1 b^-1 a b} {b^-1 a^-1 b a}", abc);
    REQUIRE(raw.size() == 2);
    CHECK(raw.terms[0].is_raw());
    CHECK(parse_identity(format_identity(raw), abc) == raw);

    CHECK(parse_identity("(a,b) (b,a) == 1", abc).size() == 2);
    CHECK_THROWS_AS(parse_identity("(a,b", abc), ParseError);
    CHECK_THROWS_AS(parse_identity("{a b}", abc), ParseError);  // nonzero exponent sums
    CHECK_THROWS_AS(parse_identity("(a,b) == 2", abc), ParseError);

    // alphabet inference picks up sorted mentioned generators
    auto inferred = parse_identity("(z,b)^[m]");
    CHECK(inferred.alphabet.names() == std::vector<std::string>{"b", "m", "z"});
}
