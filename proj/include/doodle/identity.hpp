#pragma once

// Commutator identities as formal term sequences: verification (free
// reduction of the term-value product), the transformation calculus
//   (I) rho, (II) sigma_j Hurwitz moves, (III) global conjugation,
//   (IV)/(V) local conjugation changes, (VI)/(VII) insert/delete moves,
// strict normal forms, class invariants, bounded equivalence search and
// commutator factorization.
//
// Identity grammar:
//   identity := cterm+ ("==" "1")?
//   cterm    := "(" atom "," atom ")" ("^" "[" word "]")? | "{" word "}"
//   atom     := ident | "[" word "]"

#include <cassert>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "freegroup.hpp"

namespace doodle {

struct CommutatorTerm {
    GenId a = 0;
    GenId b = 0;
    Word u;

    CommutatorTerm() = default;
    CommutatorTerm(GenId a_, GenId b_, Word u_ = {}) : a(a_), b(b_), u(std::move(u_)) {}

    bool operator==(const CommutatorTerm& o) const { return a == o.a && b == o.b && u == o.u; }
    bool operator!=(const CommutatorTerm& o) const { return !(*this == o); }
};

// (a,b)^u spelled out, unreduced.
inline Word term_value(const CommutatorTerm& t) {
    return conjugate(commutator(Word::single(t.a), Word::single(t.b)), t.u);
}

struct PairTerm {
    Word s, t, u;
    bool operator==(const PairTerm& o) const { return s == o.s && t == o.t && u == o.u; }
};

struct RawTerm {
    Word w;
    bool operator==(const RawTerm& o) const { return w == o.w; }
};

struct GeneralTerm {
    std::variant<CommutatorTerm, PairTerm, RawTerm> v;

    GeneralTerm() = default;
    GeneralTerm(CommutatorTerm t) : v(std::move(t)) {}
    GeneralTerm(PairTerm t) : v(std::move(t)) {}
    GeneralTerm(RawTerm t) : v(std::move(t)) {}

    bool is_elementary() const { return std::holds_alternative<CommutatorTerm>(v); }
    bool is_pair() const { return std::holds_alternative<PairTerm>(v); }
    bool is_raw() const { return std::holds_alternative<RawTerm>(v); }

    bool operator==(const GeneralTerm& o) const { return v == o.v; }
};

inline Word term_value(const GeneralTerm& t) {
    if (auto* e = std::get_if<CommutatorTerm>(&t.v)) return term_value(*e);
    if (auto* p = std::get_if<PairTerm>(&t.v)) return conjugate(commutator(p->s, p->t), p->u);
    return std::get<RawTerm>(t.v).w;
}

struct ElementaryIdentity {
    Alphabet alphabet;
    std::vector<CommutatorTerm> terms;

    ElementaryIdentity() = default;
    ElementaryIdentity(Alphabet a, std::vector<CommutatorTerm> ts)
        : alphabet(std::move(a)), terms(std::move(ts)) {}

    std::size_t size() const { return terms.size(); }

    Word product() const {
        Word w;
        for (auto& t : terms) w = concat(w, term_value(t));
        return w;
    }

    bool operator==(const ElementaryIdentity& o) const {
        return alphabet == o.alphabet && terms == o.terms;
    }
    bool operator!=(const ElementaryIdentity& o) const { return !(*this == o); }
};

struct GeneralIdentity {
    Alphabet alphabet;
    std::vector<GeneralTerm> terms;

    GeneralIdentity() = default;
    GeneralIdentity(Alphabet a, std::vector<GeneralTerm> ts)
        : alphabet(std::move(a)), terms(std::move(ts)) {}

    std::size_t size() const { return terms.size(); }

    Word product() const {
        Word w;
        for (auto& t : terms) w = concat(w, term_value(t));
        return w;
    }

    bool operator==(const GeneralIdentity& o) const {
        return alphabet == o.alphabet && terms == o.terms;
    }
};

inline bool verify(const ElementaryIdentity& id) { return freely_trivial(id.product()); }
inline bool verify(const GeneralIdentity& id) { return freely_trivial(id.product()); }

// Checked constructors: enforce the Theorem-2.1 contract that the product of
// term values freely reduces to the empty word.
inline ElementaryIdentity checked_elementary(Alphabet a, std::vector<CommutatorTerm> ts) {
    ElementaryIdentity id(std::move(a), std::move(ts));
    if (!verify(id)) throw std::invalid_argument("identity: term-value product is not freely trivial");
    return id;
}

inline GeneralIdentity checked_general(Alphabet a, std::vector<GeneralTerm> ts) {
    GeneralIdentity id(std::move(a), std::move(ts));
    if (!verify(id)) throw std::invalid_argument("identity: term-value product is not freely trivial");
    return id;
}

inline GeneralIdentity to_general(const ElementaryIdentity& id) {
    GeneralIdentity g;
    g.alphabet = id.alphabet;
    for (auto& t : id.terms) g.terms.emplace_back(t);
    return g;
}

inline std::optional<ElementaryIdentity> to_elementary(const GeneralIdentity& id) {
    ElementaryIdentity e;
    e.alphabet = id.alphabet;
    for (auto& t : id.terms) {
        if (!t.is_elementary()) return std::nullopt;
        e.terms.push_back(std::get<CommutatorTerm>(t.v));
    }
    return e;
}

// ---------------------------------------------------------------------------
// Transformations (I)-(VII)
// ---------------------------------------------------------------------------

struct MoveDescriptor {
    enum class Kind {
        Rho,              // (I) cyclic permutation
        Sigma,            // (II) Hurwitz move at index j (0-based), sign +-1
        Conj,             // (III) global conjugation by u
        LocalII,          // (V) at index i: sign s prefixes u_i with value(a_i,b_i)^(-s)
        InsertTrivial,    // (VI) insert (a,a)^u at index i
        DeleteTrivial,    // (VI) delete term i, which must have shape (a,a)^u
        InsertCancelling, // (VII) insert (a,b)^u (b,a)^u at index i
        DeleteCancelling, // (VII) delete terms i,i+1 of shape (a,b)^u (b,a)^u', u' freely equal to u
    };

    Kind kind = Kind::Rho;
    int index = 0;  // j for Sigma, i for the others
    int sign = +1;  // Sigma / LocalII
    GenId a = 0, b = 0;
    Word u;

    static MoveDescriptor rho() { return {}; }
    static MoveDescriptor sigma(int j, int sign) {
        MoveDescriptor m;
        m.kind = Kind::Sigma;
        m.index = j;
        m.sign = sign;
        return m;
    }
    static MoveDescriptor conj(Word u) {
        MoveDescriptor m;
        m.kind = Kind::Conj;
        m.u = std::move(u);
        return m;
    }
    static MoveDescriptor local2(int i, int sign) {
        MoveDescriptor m;
        m.kind = Kind::LocalII;
        m.index = i;
        m.sign = sign;
        return m;
    }
    static MoveDescriptor insert_trivial(int i, GenId a, Word u) {
        MoveDescriptor m;
        m.kind = Kind::InsertTrivial;
        m.index = i;
        m.a = a;
        m.u = std::move(u);
        return m;
    }
    static MoveDescriptor delete_trivial(int i) {
        MoveDescriptor m;
        m.kind = Kind::DeleteTrivial;
        m.index = i;
        return m;
    }
    static MoveDescriptor insert_cancelling(int i, GenId a, GenId b, Word u) {
        MoveDescriptor m;
        m.kind = Kind::InsertCancelling;
        m.index = i;
        m.a = a;
        m.b = b;
        m.u = std::move(u);
        return m;
    }
    static MoveDescriptor delete_cancelling(int i) {
        MoveDescriptor m;
        m.kind = Kind::DeleteCancelling;
        m.index = i;
        return m;
    }
};

inline ElementaryIdentity apply_move(const ElementaryIdentity& id, const MoveDescriptor& mv) {
    using K = MoveDescriptor::Kind;
    ElementaryIdentity out = id;
    auto& ts = out.terms;
    const int m = static_cast<int>(ts.size());
    auto need = [&](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(std::string("apply_move: ") + msg);
    };
    switch (mv.kind) {
        case K::Rho: {
            if (m > 1) std::rotate(ts.begin(), ts.begin() + 1, ts.end());
            break;
        }
        case K::Sigma: {
            need(mv.index >= 0 && mv.index + 1 < m, "sigma index out of range");
            CommutatorTerm tj = ts[static_cast<std::size_t>(mv.index)];
            CommutatorTerm tk = ts[static_cast<std::size_t>(mv.index) + 1];
            if (mv.sign > 0) {
                // (w_j, w_{j+1}) -> (w_{j+1}, w_j^{w_{j+1}})
                ts[static_cast<std::size_t>(mv.index)] = tk;
                tj.u = concat(tj.u, term_value(tk));
                ts[static_cast<std::size_t>(mv.index) + 1] = tj;
            } else {
                // (w_j, w_{j+1}) -> (w_{j+1}^{w_j^{-1}}, w_j)
                ts[static_cast<std::size_t>(mv.index) + 1] = tj;
                tk.u = concat(tk.u, inverse(term_value(tj)));
                ts[static_cast<std::size_t>(mv.index)] = tk;
            }
            break;
        }
        case K::Conj: {
            for (auto& t : ts) t.u = concat(t.u, mv.u);
            break;
        }
        case K::LocalII: {
            need(mv.index >= 0 && mv.index < m, "index out of range");
            auto& t = ts[static_cast<std::size_t>(mv.index)];
            Word c = commutator(Word::single(t.a), Word::single(t.b));
            t.u = concat(mv.sign > 0 ? inverse(c) : c, t.u);
            break;
        }
        case K::InsertTrivial: {
            need(mv.index >= 0 && mv.index <= m, "index out of range");
            ts.insert(ts.begin() + mv.index, CommutatorTerm(mv.a, mv.a, mv.u));
            break;
        }
        case K::DeleteTrivial: {
            need(mv.index >= 0 && mv.index < m, "index out of range");
            need(ts[static_cast<std::size_t>(mv.index)].a == ts[static_cast<std::size_t>(mv.index)].b,
                 "delete-trivial: term is not of shape (a,a)^u");
            ts.erase(ts.begin() + mv.index);
            break;
        }
        case K::InsertCancelling: {
            need(mv.index >= 0 && mv.index <= m, "index out of range");
            ts.insert(ts.begin() + mv.index, CommutatorTerm(mv.b, mv.a, mv.u));
            ts.insert(ts.begin() + mv.index, CommutatorTerm(mv.a, mv.b, mv.u));
            break;
        }
        case K::DeleteCancelling: {
            need(mv.index >= 0 && mv.index + 1 < m, "index out of range");
            const auto& t1 = ts[static_cast<std::size_t>(mv.index)];
            const auto& t2 = ts[static_cast<std::size_t>(mv.index) + 1];
            need(t1.a == t2.b && t1.b == t2.a, "delete-cancelling: terms are not (a,b)^u (b,a)^u");
            need(freely_equal(t1.u, t2.u), "delete-cancelling: conjugators not freely equal");
            ts.erase(ts.begin() + mv.index, ts.begin() + mv.index + 2);
            break;
        }
    }
    return out;
}

inline ElementaryIdentity apply_moves(ElementaryIdentity id, const std::vector<MoveDescriptor>& path) {
    for (auto& mv : path) id = apply_move(id, mv);
    return id;
}

inline ElementaryIdentity strict_normal_form(const ElementaryIdentity& id);

// Path replay used by the search verdicts: each move applies to the strict
// normal form of the running state, so (IV)/(V) adjustments never have to be
// spelled out in the path.
inline ElementaryIdentity replay_path(ElementaryIdentity id, const std::vector<MoveDescriptor>& path) {
    id = strict_normal_form(id);
    for (auto& mv : path) id = strict_normal_form(apply_move(id, mv));
    return id;
}

// (IV) normalization: free-reduce every conjugator.
inline ElementaryIdentity normalize_local(const ElementaryIdentity& id) {
    ElementaryIdentity out = id;
    for (auto& t : out.terms) t.u = free_reduce(t.u);
    return out;
}

// Canonical representative of a term's (IV)+(V) class: the (length, lex)-least
// word among free_reduce((a,b)^k u), k ranging over a window that provably
// contains every global minimizer: |red((a,b)^k u)| >= 4|k| - |red u| forces
// |k| <= |red u|/2 for any k achieving the minimum.
inline CommutatorTerm strict_normal_term(const CommutatorTerm& t) {
    CommutatorTerm out = t;
    Word ur = free_reduce(t.u);
    if (t.a == t.b) {
        out.u = ur;
        return out;
    }
    Word c = free_reduce(commutator(Word::single(t.a), Word::single(t.b)));
    long long window = static_cast<long long>(ur.size()) / 2 + 1;
    Word best = ur;
    Word fwd = ur, bwd = ur;
    Word cinv = inverse(c);
    for (long long k = 1; k <= window; ++k) {
        fwd = free_reduce(concat(c, fwd));
        bwd = free_reduce(concat(cinv, bwd));
        for (const Word* cand : {&fwd, &bwd}) {
            if (cand->size() < best.size() || (cand->size() == best.size() && *cand < best))
                best = *cand;
        }
    }
    out.u = best;
    return out;
}

inline ElementaryIdentity strict_normal_form(const ElementaryIdentity& id) {
    ElementaryIdentity out = id;
    for (auto& t : out.terms) t = strict_normal_term(t);
    return out;
}

// ---------------------------------------------------------------------------
// Invariants
// ---------------------------------------------------------------------------

// Multiset of conjugacy keys of the term values; invariant under (I)-(V).
inline std::vector<Word> conjugacy_multiset(const ElementaryIdentity& id) {
    std::vector<Word> keys;
    keys.reserve(id.terms.size());
    for (auto& t : id.terms) keys.push_back(conjugacy_key(term_value(t)));
    std::sort(keys.begin(), keys.end());
    return keys;
}

// Formal Z-combination of conjugacy keys with key(x^-1) identified as
// -key(x); trivial classes dropped. Invariant under all of (I)-(VII).
inline std::map<Word, long long> weak_class_sum(const ElementaryIdentity& id) {
    std::map<Word, long long> sum;
    for (auto& t : id.terms) {
        Word v = free_reduce(term_value(t));
        if (v.empty()) continue;
        Word k = conjugacy_key(v);
        Word ki = conjugacy_key(inverse(v));
        if (k < ki)
            sum[k] += 1;
        else
            sum[ki] -= 1;
    }
    for (auto it = sum.begin(); it != sum.end();) {
        if (it->second == 0)
            it = sum.erase(it);
        else
            ++it;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Commutator factorization (the Theorem-3.3 bubble argument)
// ---------------------------------------------------------------------------

namespace detail {

// Normalizes a letter commutator (g,h) to a CommutatorTerm on positive
// generators via (x^-1,y) = (y,x)^{x^-1}, (x,y^-1) = (y,x)^{y^-1}.
inline CommutatorTerm letter_commutator(const Letter& g, const Letter& h, const Word& suffix) {
    if (g.sign > 0 && h.sign > 0) return CommutatorTerm(g.gen, h.gen, suffix);
    if (g.sign < 0 && h.sign > 0) {
        Word u = concat(Word::single(g.gen, -1), suffix);
        return CommutatorTerm(h.gen, g.gen, u);
    }
    if (g.sign > 0 && h.sign < 0) {
        Word u = concat(Word::single(h.gen, -1), suffix);
        return CommutatorTerm(h.gen, g.gen, u);
    }
    // (x^-1, y^-1) = (x,y)^{y^-1 x^-1}
    Word u = concat(concat(Word::single(h.gen, -1), Word::single(g.gen, -1)), suffix);
    return CommutatorTerm(g.gen, h.gen, u);
}

}  // namespace detail

// Rewrites a zero-exponent-sum word as a product of conjugated generator
// commutators: bubble the letters into generator order, every adjacent
// transposition g h -> h g emitting (g,h)^{suffix}.
inline std::vector<CommutatorTerm> commutator_factorization(const Word& w) {
    if (!in_commutator_subgroup(w))
        throw std::invalid_argument("commutator_factorization: word has nonzero exponent sum");
    std::vector<Letter> ls = free_reduce(w).letters;
    std::vector<CommutatorTerm> emitted;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
            if (ls[i].gen > ls[i + 1].gen) {
                Word suffix(std::vector<Letter>(ls.begin() + static_cast<std::ptrdiff_t>(i) + 2, ls.end()));
                emitted.push_back(detail::letter_commutator(ls[i], ls[i + 1], suffix));
                std::swap(ls[i], ls[i + 1]);
                changed = true;
            }
        }
    }
    std::vector<CommutatorTerm> terms(emitted.rbegin(), emitted.rend());
    for (auto& t : terms) t.u = free_reduce(t.u);
    Word prod;
    for (auto& t : terms) prod = concat(prod, term_value(t));
    if (!freely_equal(prod, w))
        throw std::logic_error("commutator_factorization: internal product mismatch");
    return terms;
}

// ---------------------------------------------------------------------------
// Identity grammar
// ---------------------------------------------------------------------------

inline std::string format_identity(const GeneralIdentity& id) {
    std::string out;
    for (std::size_t i = 0; i < id.terms.size(); ++i) {
        if (i) out += ' ';
        const GeneralTerm& t = id.terms[i];
        if (auto* e = std::get_if<CommutatorTerm>(&t.v)) {
            out += '(' + id.alphabet.name(e->a) + ',' + id.alphabet.name(e->b) + ')';
            if (!e->u.empty()) out += "^[" + format_word(e->u, id.alphabet) + ']';
        } else if (auto* p = std::get_if<PairTerm>(&t.v)) {
            out += "([" + format_word(p->s, id.alphabet) + "],[" + format_word(p->t, id.alphabet) + "])";
            if (!p->u.empty()) out += "^[" + format_word(p->u, id.alphabet) + ']';
        } else {
            out += '{' + format_word(std::get<RawTerm>(t.v).w, id.alphabet) + '}';
        }
    }
    return out;
}

inline std::string format_identity(const ElementaryIdentity& id) { return format_identity(to_general(id)); }

namespace detail {

struct IdentityParser {
    std::string_view text;
    std::size_t pos = 0;
    const Alphabet* alphabet;

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n')) ++pos;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError("identity: " + msg, pos); }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               ((text[pos] >= 'a' && text[pos] <= 'z') || (text[pos] >= '0' && text[pos] <= '9') ||
                text[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected generator name");
        return std::string(text.substr(start, pos - start));
    }

    Word bracket_word() {
        expect('[');
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != ']') ++pos;
        if (pos == text.size()) fail("unterminated '['");
        Word w = parse_word(text.substr(start, pos - start), *alphabet);
        ++pos;
        return w;
    }

    // atom: bare ident (single positive generator) or bracketed word
    std::pair<Word, bool> atom() {  // (word, was_bare_ident)
        skip_ws();
        if (pos < text.size() && text[pos] == '[') return {bracket_word(), false};
        return {Word::single(alphabet->require(ident())), true};
    }

    GeneralTerm cterm() {
        expect('(');
        auto [s, s_bare] = atom();
        expect(',');
        auto [t, t_bare] = atom();
        expect(')');
        Word u;
        if (eat('^')) u = bracket_word();
        if (s_bare && t_bare)
            return GeneralTerm(CommutatorTerm(s.letters[0].gen, t.letters[0].gen, u));
        return GeneralTerm(PairTerm{s, t, u});
    }

    GeneralTerm raw() {
        expect('{');
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != '}') ++pos;
        if (pos == text.size()) fail("unterminated '{'");
        Word w = parse_word(text.substr(start, pos - start), *alphabet);
        ++pos;
        if (!in_commutator_subgroup(w)) fail("raw term has nonzero exponent sums");
        return GeneralTerm(RawTerm{w});
    }

    std::vector<GeneralTerm> run() {
        std::vector<GeneralTerm> terms;
        while (true) {
            skip_ws();
            if (pos >= text.size()) break;
            if (text[pos] == '=') {
                if (text.substr(pos, 2) != "==") fail("expected '=='");
                pos += 2;
                skip_ws();
                if (pos >= text.size() || text[pos] != '1') fail("expected '1' after '=='");
                ++pos;
                skip_ws();
                if (pos < text.size()) fail("trailing input after '== 1'");
                break;
            }
            if (text[pos] == '(')
                terms.push_back(cterm());
            else if (text[pos] == '{')
                terms.push_back(raw());
            else
                fail("expected '(' or '{'");
        }
        return terms;
    }
};

inline void collect_identity_idents(std::string_view text, std::vector<std::string>& out) {
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c >= 'a' && c <= 'z') {
            std::size_t j = i;
            while (j < text.size() &&
                   ((text[j] >= 'a' && text[j] <= 'z') || (text[j] >= '0' && text[j] <= '9') ||
                    text[j] == '_'))
                ++j;
            out.push_back(std::string(text.substr(i, j - i)));
            i = j;
        } else {
            ++i;
        }
    }
}

}  // namespace detail

inline GeneralIdentity parse_identity(std::string_view text, const Alphabet& alphabet) {
    detail::IdentityParser p{text, 0, &alphabet};
    return GeneralIdentity(alphabet, p.run());
}

// Infers the alphabet as the sorted set of generator names mentioned.
inline GeneralIdentity parse_identity(std::string_view text) {
    std::vector<std::string> idents;
    detail::collect_identity_idents(text, idents);
    std::sort(idents.begin(), idents.end());
    idents.erase(std::unique(idents.begin(), idents.end()), idents.end());
    if (idents.empty()) idents.push_back("a");  // empty identity still needs a carrier
    return parse_identity(text, Alphabet(idents));
}

inline ElementaryIdentity parse_elementary_identity(std::string_view text, const Alphabet& alphabet) {
    auto e = to_elementary(parse_identity(text, alphabet));
    if (!e) throw std::invalid_argument("identity: expected an elementary identity (bare generator atoms)");
    return *e;
}

inline ElementaryIdentity parse_elementary_identity(std::string_view text) {
    auto e = to_elementary(parse_identity(text));
    if (!e) throw std::invalid_argument("identity: expected an elementary identity (bare generator atoms)");
    return *e;
}

// ---------------------------------------------------------------------------
// Bounded equivalence search
// ---------------------------------------------------------------------------

struct SearchVerdict {
    enum class Kind { Yes, No, Unknown };
    Kind kind = Kind::Unknown;
    std::vector<MoveDescriptor> path;  // Yes: replays id1 into id2 modulo strict normal form
    std::string separating_invariant;  // No
    long long budget_spent = 0;

    static SearchVerdict yes(std::vector<MoveDescriptor> p, long long spent) {
        SearchVerdict v;
        v.kind = Kind::Yes;
        v.path = std::move(p);
        v.budget_spent = spent;
        return v;
    }
    static SearchVerdict no(std::string inv, long long spent) {
        SearchVerdict v;
        v.kind = Kind::No;
        v.separating_invariant = std::move(inv);
        v.budget_spent = spent;
        return v;
    }
    static SearchVerdict unknown(long long spent) {
        SearchVerdict v;
        v.kind = Kind::Unknown;
        v.budget_spent = spent;
        return v;
    }
};

enum class Relation { Strict, Equiv, Weak };

namespace detail {

inline bool snf_equal(const ElementaryIdentity& x, const ElementaryIdentity& y) {
    return strict_normal_form(x).terms == strict_normal_form(y).terms;
}

inline MoveDescriptor invert_move(const MoveDescriptor& mv, const ElementaryIdentity& before) {
    using K = MoveDescriptor::Kind;
    switch (mv.kind) {
        case K::Sigma: return MoveDescriptor::sigma(mv.index, -mv.sign);
        case K::Conj: return MoveDescriptor::conj(inverse(mv.u));
        case K::LocalII: return MoveDescriptor::local2(mv.index, -mv.sign);
        case K::InsertTrivial: return MoveDescriptor::delete_trivial(mv.index);
        case K::InsertCancelling: return MoveDescriptor::delete_cancelling(mv.index);
        case K::DeleteTrivial: {
            const auto& t = before.terms.at(static_cast<std::size_t>(mv.index));
            return MoveDescriptor::insert_trivial(mv.index, t.a, t.u);
        }
        case K::DeleteCancelling: {
            const auto& t = before.terms.at(static_cast<std::size_t>(mv.index));
            return MoveDescriptor::insert_cancelling(mv.index, t.a, t.b, t.u);
        }
        case K::Rho: return MoveDescriptor::rho();  // handled by caller (needs rho^(m-1))
    }
    return MoveDescriptor::rho();
}

// Appends the inverse of (mv applied to `before`) to `inv`, in reverse-replay
// order (caller reverses the whole list at the end).
inline void push_inverse(std::vector<MoveDescriptor>& inv, const MoveDescriptor& mv,
                         const ElementaryIdentity& before) {
    if (mv.kind == MoveDescriptor::Kind::Rho) {
        std::size_t m = before.terms.size();
        for (std::size_t i = 0; i + 1 < m; ++i) inv.push_back(MoveDescriptor::rho());
        if (m <= 1) {}  // rho is the identity there; nothing to undo
        return;
    }
    inv.push_back(invert_move(mv, before));
}

struct GreedyReduction {
    ElementaryIdentity reduced;
    std::vector<MoveDescriptor> path;          // start -> reduced
    std::vector<MoveDescriptor> inverse_path;  // reduced -> start
    long long moves_used = 0;
};

// Deterministic weak simplification: deletes structurally trivial terms and
// cancelling pairs, using sigma transports to bring value-inverse pairs
// adjacent and LocalII to align their conjugators. Every recorded move is a
// legal MoveDescriptor so the path replays.
inline GreedyReduction greedy_weak_reduce(const ElementaryIdentity& start) {
    GreedyReduction g;
    g.reduced = start;
    std::vector<MoveDescriptor> inv_rev;  // inverses in forward order; reversed at the end

    auto apply_rec = [&](const MoveDescriptor& mv) {
        push_inverse(inv_rev, mv, g.reduced);
        g.reduced = apply_move(g.reduced, mv);
        g.path.push_back(mv);
        ++g.moves_used;
    };

    bool progress = true;
    while (progress) {
        progress = false;
        auto& ts = g.reduced.terms;
        const int m = static_cast<int>(ts.size());

        // (VI)-: structurally trivial terms
        for (int i = 0; i < m; ++i) {
            if (ts[static_cast<std::size_t>(i)].a == ts[static_cast<std::size_t>(i)].b) {
                apply_rec(MoveDescriptor::delete_trivial(i));
                progress = true;
                break;
            }
        }
        if (progress) continue;

        // (VII)-: value-inverse pairs, tested in every cyclic rotation. The
        // sigma(+) transport keeps both endpoint values intact, so the pair
        // (i,j) cancels iff v_i v_j is freely trivial.
        std::vector<Word> vals;
        vals.reserve(ts.size());
        for (auto& t : ts) vals.push_back(free_reduce(term_value(t)));

        for (int rot = 0; rot < std::max(1, m) && !progress; ++rot) {
            auto at = [&](int k) { return (k + rot) % m; };
            for (int i = 0; i < m && !progress; ++i) {
                for (int j = i + 1; j < m && !progress; ++j) {
                    if (!freely_trivial(concat(vals[static_cast<std::size_t>(at(i))],
                                               vals[static_cast<std::size_t>(at(j))])))
                        continue;
                    for (int r = 0; r < rot; ++r) apply_rec(MoveDescriptor::rho());
                    for (int k = j - 1; k > i; --k) apply_rec(MoveDescriptor::sigma(k, +1));
                    // After transport terms i, i+1 hold the pair with their
                    // original values. Mutual-inverse commutator values force
                    // the mirrored shape (a,b)/(b,a) and u2 = (b,a)^k u1.
                    const auto& t1 = g.reduced.terms[static_cast<std::size_t>(i)];
                    const auto& t2 = g.reduced.terms[static_cast<std::size_t>(i) + 1];
                    if (!(t1.a == t2.b && t1.b == t2.a)) break;
                    Word c21 = free_reduce(commutator(Word::single(t2.a), Word::single(t2.b)));
                    Word u1r = free_reduce(t1.u);
                    Word u2r = free_reduce(t2.u);
                    long long span = static_cast<long long>(u1r.size() + u2r.size()) / 4 + 2;
                    std::optional<long long> power;
                    Word up = u1r, dn = u1r;
                    if (u2r == u1r) power = 0;
                    for (long long k = 1; k <= span && !power; ++k) {
                        up = free_reduce(concat(c21, up));
                        dn = free_reduce(concat(inverse(c21), dn));
                        if (u2r == up) power = k;
                        if (u2r == dn) power = -k;
                    }
                    if (!power) break;
                    for (long long k = 0; k < std::llabs(*power); ++k)
                        apply_rec(MoveDescriptor::local2(i + 1, *power > 0 ? +1 : -1));
                    apply_rec(MoveDescriptor::delete_cancelling(i));
                    progress = true;
                }
            }
        }
    }

    g.inverse_path.assign(inv_rev.rbegin(), inv_rev.rend());
    return g;
}

}  // namespace detail

// Bounded decision of strict / plain / weak equivalence. Strict is exact.
// For the searched relations: No only ever comes from a separating invariant,
// Yes always carries a replayable move path, Unknown reports budget spent.
inline SearchVerdict bounded_equiv(const ElementaryIdentity& id1, const ElementaryIdentity& id2,
                                   Relation rel, long long budget = 10000, int insert_len = 1) {
    if (id1.alphabet != id2.alphabet)
        throw std::invalid_argument("bounded_equiv: alphabet mismatch");

    if (rel == Relation::Strict) {
        if (detail::snf_equal(id1, id2)) return SearchVerdict::yes({}, 0);
        return SearchVerdict::no("strict normal forms differ", 0);
    }

    if (detail::snf_equal(id1, id2)) return SearchVerdict::yes({}, 0);

    long long spent = 0;

    if (rel == Relation::Equiv) {
        if (conjugacy_multiset(id1) != conjugacy_multiset(id2))
            return SearchVerdict::no("conjugacy multisets differ", spent);
    } else {
        if (weak_class_sum(id1) != weak_class_sum(id2))
            return SearchVerdict::no("weak class sums differ", spent);
    }

    ElementaryIdentity a = id1, b = id2;
    std::vector<MoveDescriptor> pre_a, post_b;  // id1 -> a, b -> id2
    if (rel == Relation::Weak) {
        auto ga = detail::greedy_weak_reduce(id1);
        auto gb = detail::greedy_weak_reduce(id2);
        spent += ga.moves_used + gb.moves_used;
        a = ga.reduced;
        b = gb.reduced;
        pre_a = ga.path;
        post_b = gb.inverse_path;
        if (detail::snf_equal(a, b)) {
            std::vector<MoveDescriptor> path = pre_a;
            path.insert(path.end(), post_b.begin(), post_b.end());
            return SearchVerdict::yes(std::move(path), spent);
        }
    }

    // Bidirectional BFS on strict-normal-form nodes.
    struct NodeInfo {
        ElementaryIdentity id;
        int parent = -1;
        MoveDescriptor mv;  // move applied to parent to reach this node
        bool has_move = false;
    };

    auto key_of = [](const ElementaryIdentity& id) { return format_identity(id); };

    auto gen_moves = [&](const ElementaryIdentity& id) {
        std::vector<MoveDescriptor> mvs;
        const int m = static_cast<int>(id.size());
        if (m > 1) mvs.push_back(MoveDescriptor::rho());
        for (int j = 0; j + 1 < m; ++j) {
            mvs.push_back(MoveDescriptor::sigma(j, +1));
            mvs.push_back(MoveDescriptor::sigma(j, -1));
        }
        for (GenId g = 0; g < id.alphabet.size(); ++g) {
            mvs.push_back(MoveDescriptor::conj(Word::single(g, +1)));
            mvs.push_back(MoveDescriptor::conj(Word::single(g, -1)));
        }
        if (rel == Relation::Weak) {
            for (int i = 0; i < m; ++i) {
                const auto& t = id.terms[static_cast<std::size_t>(i)];
                if (t.a == t.b) mvs.push_back(MoveDescriptor::delete_trivial(i));
                if (i + 1 < m) {
                    const auto& t2 = id.terms[static_cast<std::size_t>(i) + 1];
                    if (t.a == t2.b && t.b == t2.a && freely_equal(t.u, t2.u))
                        mvs.push_back(MoveDescriptor::delete_cancelling(i));
                }
            }
            if (insert_len >= 0) {
                for (GenId g = 0; g < id.alphabet.size(); ++g)
                    mvs.push_back(MoveDescriptor::insert_trivial(m, g, Word()));
            }
        }
        return mvs;
    };

    std::vector<NodeInfo> nodes;
    std::map<std::string, std::pair<int, int>> seen;  // key -> (side, node index)
    std::deque<std::pair<int, int>> queue;            // (side, node)

    auto add_root = [&](int side, const ElementaryIdentity& id) {
        NodeInfo n;
        n.id = strict_normal_form(id);
        nodes.push_back(n);
        seen[key_of(nodes.back().id)] = {side, static_cast<int>(nodes.size()) - 1};
        queue.emplace_back(side, static_cast<int>(nodes.size()) - 1);
    };

    // Assembles id1 -> a-root -> meet == meet <- b-root <- id2 into one
    // forward path; the b side is replayed from its root to recover correct
    // inverses (rho in particular inverts as rho^(m-1)).
    auto assemble = [&](int a_node, int b_node) {
        std::vector<MoveDescriptor> path = pre_a;
        std::vector<MoveDescriptor> fwd;
        int cur = a_node;
        while (cur >= 0 && nodes[static_cast<std::size_t>(cur)].has_move) {
            fwd.push_back(nodes[static_cast<std::size_t>(cur)].mv);
            cur = nodes[static_cast<std::size_t>(cur)].parent;
        }
        std::reverse(fwd.begin(), fwd.end());
        path.insert(path.end(), fwd.begin(), fwd.end());

        std::vector<MoveDescriptor> b_fwd;
        cur = b_node;
        while (cur >= 0 && nodes[static_cast<std::size_t>(cur)].has_move) {
            b_fwd.push_back(nodes[static_cast<std::size_t>(cur)].mv);
            cur = nodes[static_cast<std::size_t>(cur)].parent;
        }
        std::reverse(b_fwd.begin(), b_fwd.end());
        ElementaryIdentity state = nodes[1].id;  // b-side root
        std::vector<MoveDescriptor> inv_rev;
        for (const auto& bmv : b_fwd) {
            detail::push_inverse(inv_rev, bmv, state);
            state = strict_normal_form(apply_move(state, bmv));
        }
        path.insert(path.end(), inv_rev.rbegin(), inv_rev.rend());
        path.insert(path.end(), post_b.begin(), post_b.end());
        return path;
    };

    add_root(0, a);
    add_root(1, b);

    while (!queue.empty() && spent < budget) {
        auto [side, ni] = queue.front();
        queue.pop_front();
        auto moves = gen_moves(nodes[static_cast<std::size_t>(ni)].id);
        for (const auto& mv : moves) {
            if (spent >= budget) break;
            ++spent;
            ElementaryIdentity before = nodes[static_cast<std::size_t>(ni)].id;
            ElementaryIdentity next;
            try {
                next = strict_normal_form(apply_move(before, mv));
            } catch (const std::invalid_argument&) {
                continue;
            }
            std::string key = key_of(next);
            auto it = seen.find(key);
            if (it != seen.end()) {
                if (it->second.first == side) continue;
                NodeInfo n;
                n.id = next;
                n.parent = ni;
                n.mv = mv;
                n.has_move = true;
                nodes.push_back(n);
                int new_index = static_cast<int>(nodes.size()) - 1;
                int a_node = side == 0 ? new_index : it->second.second;
                int b_node = side == 0 ? it->second.second : new_index;
                return SearchVerdict::yes(assemble(a_node, b_node), spent);
            }
            NodeInfo n;
            n.id = next;
            n.parent = ni;
            n.mv = mv;
            n.has_move = true;
            nodes.push_back(n);
            seen[key] = {side, static_cast<int>(nodes.size()) - 1};
            queue.emplace_back(side, static_cast<int>(nodes.size()) - 1);
        }
    }

    return SearchVerdict::unknown(spent);
}

}  // namespace doodle
