#pragma once

// Words over a finite generator alphabet: free reduction, conjugation,
// commutators, conjugacy canonicalization and the text grammar
//   word := "1" | term+ ; term := ident ("^-1")? ; ident := [a-z][a-z0-9_]*

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace doodle {

using GenId = int;

class Alphabet {
public:
    Alphabet() = default;

    explicit Alphabet(std::vector<std::string> generators) : names_(std::move(generators)) {
        if (names_.empty())
            throw std::invalid_argument("alphabet: must be non-empty");
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (!valid_name(names_[i]))
                throw std::invalid_argument("alphabet: bad generator name '" + names_[i] + "'");
            if (index_.count(names_[i]))
                throw std::invalid_argument("alphabet: duplicate generator '" + names_[i] + "'");
            index_[names_[i]] = static_cast<GenId>(i);
        }
    }

    static bool valid_name(std::string_view s) {
        if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
        for (char c : s)
            if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
        return true;
    }

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(GenId g) const { return names_.at(static_cast<std::size_t>(g)); }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<GenId> find(std::string_view s) const {
        auto it = index_.find(std::string(s));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    GenId require(std::string_view s) const {
        auto g = find(s);
        if (!g) throw std::invalid_argument("unknown generator '" + std::string(s) + "'");
        return *g;
    }

    bool operator==(const Alphabet& other) const { return names_ == other.names_; }
    bool operator!=(const Alphabet& other) const { return !(*this == other); }

private:
    std::vector<std::string> names_;
    std::map<std::string, GenId> index_;
};

struct Letter {
    GenId gen = 0;
    int sign = +1;  // +1 or -1

    Letter() = default;
    Letter(GenId g, int s) : gen(g), sign(s) {}

    Letter inverse() const { return Letter(gen, -sign); }

    bool operator==(const Letter& o) const { return gen == o.gen && sign == o.sign; }
    bool operator!=(const Letter& o) const { return !(*this == o); }

    // Order used by conjugacy_key: generator order first, sign + before -.
    bool operator<(const Letter& o) const {
        if (gen != o.gen) return gen < o.gen;
        return sign > o.sign;
    }
};

// A (possibly unreduced) word in the free monoid on S u S^-1.
struct Word {
    std::vector<Letter> letters;

    Word() = default;
    explicit Word(std::vector<Letter> ls) : letters(std::move(ls)) {}

    static Word single(GenId g, int sign = +1) { return Word({Letter(g, sign)}); }

    bool empty() const { return letters.empty(); }
    std::size_t size() const { return letters.size(); }

    bool operator==(const Word& o) const { return letters == o.letters; }
    bool operator!=(const Word& o) const { return !(*this == o); }
    bool operator<(const Word& o) const {
        return std::lexicographical_compare(letters.begin(), letters.end(),
                                            o.letters.begin(), o.letters.end());
    }
};

inline Word concat(const Word& u, const Word& v) {
    Word w = u;
    w.letters.insert(w.letters.end(), v.letters.begin(), v.letters.end());
    return w;
}

inline Word inverse(const Word& w) {
    Word r;
    r.letters.reserve(w.size());
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it)
        r.letters.push_back(it->inverse());
    return r;
}

inline Word free_reduce(const Word& w) {
    std::vector<Letter> stack;
    stack.reserve(w.size());
    for (const Letter& l : w.letters) {
        if (!stack.empty() && stack.back().gen == l.gen && stack.back().sign == -l.sign)
            stack.pop_back();
        else
            stack.push_back(l);
    }
    return Word(std::move(stack));
}

inline bool freely_equal(const Word& u, const Word& v) {
    return free_reduce(u) == free_reduce(v);
}

inline bool freely_trivial(const Word& w) { return free_reduce(w).empty(); }

// u^v = v^-1 u v, unreduced.
inline Word conjugate(const Word& u, const Word& v) {
    return concat(concat(inverse(v), u), v);
}

// (u,v) = u^-1 v^-1 u v, unreduced.
inline Word commutator(const Word& u, const Word& v) {
    return concat(concat(inverse(u), inverse(v)), concat(u, v));
}

// Cyclically reduces w, i.e. strips matching first/last letters after free
// reduction; result is the shortest word in the cyclic class.
inline Word cyclic_reduce(const Word& w) {
    Word r = free_reduce(w);
    std::size_t lo = 0, hi = r.size();
    while (hi - lo >= 2 && r.letters[lo] == r.letters[hi - 1].inverse()) {
        ++lo;
        --hi;
    }
    return Word(std::vector<Letter>(r.letters.begin() + static_cast<std::ptrdiff_t>(lo),
                                    r.letters.begin() + static_cast<std::ptrdiff_t>(hi)));
}

// Canonical representative of the conjugacy class of w: cyclic reduction,
// then the lexicographically least rotation. Two words are conjugate in the
// free group iff their keys are equal.
inline Word conjugacy_key(const Word& w) {
    Word c = cyclic_reduce(w);
    if (c.size() <= 1) return c;
    Word best = c;
    std::vector<Letter> rot = c.letters;
    for (std::size_t i = 1; i < c.size(); ++i) {
        std::rotate(rot.begin(), rot.begin() + 1, rot.end());
        Word cand{rot};
        if (cand < best) best = cand;
    }
    return best;
}

// Signed count per generator appearing in w (zeros kept for generators that
// occur); all sums zero iff w lies in the commutator subgroup.
inline std::map<GenId, long long> exponent_sums(const Word& w) {
    std::map<GenId, long long> sums;
    for (const Letter& l : w.letters) sums[l.gen] += l.sign;
    return sums;
}

inline bool in_commutator_subgroup(const Word& w) {
    for (auto& [g, s] : exponent_sums(w))
        if (s != 0) return false;
    return true;
}

struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

namespace detail {

inline std::vector<std::pair<std::string, std::size_t>> word_tokens(std::string_view text) {
    std::vector<std::pair<std::string, std::size_t>> toks;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == ' ' || text[i] == '\t') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
        toks.emplace_back(std::string(text.substr(i, j - i)), i);
        i = j;
    }
    return toks;
}

}  // namespace detail

// Parses against a fixed alphabet; rejects unknown generators.
inline Word parse_word(std::string_view text, const Alphabet& alphabet) {
    auto toks = detail::word_tokens(text);
    if (toks.size() == 1 && toks[0].first == "1") return Word();
    Word w;
    for (auto& [tok, pos] : toks) {
        if (tok == "1") throw ParseError("empty-word token '1' must stand alone", pos);
        std::string ident = tok;
        int sign = +1;
        if (auto caret = tok.find('^'); caret != std::string::npos) {
            if (tok.substr(caret) != "^-1")
                throw ParseError("bad exponent '" + tok.substr(caret) + "', only ^-1 allowed", pos);
            ident = tok.substr(0, caret);
            sign = -1;
        }
        if (!Alphabet::valid_name(ident)) throw ParseError("bad generator name '" + ident + "'", pos);
        auto g = alphabet.find(ident);
        if (!g) throw ParseError("unknown generator '" + ident + "'", pos);
        w.letters.emplace_back(*g, sign);
    }
    return w;
}

// Collects the generator names mentioned by a word text (for alphabet inference).
inline void collect_word_idents(std::string_view text, std::vector<std::string>& out) {
    for (auto& [tok, pos] : detail::word_tokens(text)) {
        if (tok == "1") continue;
        std::string ident = tok;
        if (auto caret = tok.find('^'); caret != std::string::npos) ident = tok.substr(0, caret);
        if (Alphabet::valid_name(ident)) out.push_back(ident);
    }
}

inline std::string format_word(const Word& w, const Alphabet& alphabet) {
    if (w.empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        out += alphabet.name(w.letters[i].gen);
        if (w.letters[i].sign < 0) out += "^-1";
    }
    return out;
}

}  // namespace doodle
