#pragma once
// Shared primitives: scalar values, token normalization, deterministic RNG
// helpers, and the error hierarchy used across the runtime.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

namespace cbea {

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DuplicateIdError : Error { using Error::Error; };
struct UnconfirmedHardeningError : Error { using Error::Error; };
struct UnknownIdError : Error { using Error::Error; };
struct EmptyCandidateSetError : Error { using Error::Error; };
struct MissingSurfaceRequirementError : Error { using Error::Error; };
struct PartitionBreachError : Error { using Error::Error; };
struct EmptyDenominatorError : Error { using Error::Error; };
struct EmptySamplesError : Error { using Error::Error; };
struct UnpairedCaseError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Scalar-or-set value used by predicates and commitment slots.

using Value = std::variant<std::monostate, bool, double, std::string,
                           std::vector<std::string>>;

inline bool value_is_absent(const Value& v) {
    if (std::holds_alternative<std::monostate>(v)) return true;
    if (const auto* s = std::get_if<std::string>(&v)) return s->empty();
    if (const auto* l = std::get_if<std::vector<std::string>>(&v)) return l->empty();
    return false;
}

inline std::string value_to_string(const Value& v) {
    struct Fmt {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(double d) const {
            std::ostringstream os;
            os << d;
            return os.str();
        }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(const std::vector<std::string>& l) const {
            std::string out = "{";
            for (size_t i = 0; i < l.size(); ++i) {
                if (i) out += ",";
                out += l[i];
            }
            return out + "}";
        }
    };
    return std::visit(Fmt{}, v);
}

// ---------------------------------------------------------------------------
// Token normalizer: lowercase, strip punctuation, split on whitespace.
// Single declared normalizer shared by Rel, MMR, shadow matching and the
// privacy boundary check.

inline std::vector<std::string> normalize_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char ch : text) {
        if (std::isalnum(ch)) {
            cur.push_back(static_cast<char>(std::tolower(ch)));
        } else if (ch == '_') {
            cur.push_back('_');
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::set<std::string> token_set(const std::string& text) {
    auto toks = normalize_tokens(text);
    return {toks.begin(), toks.end()};
}

// Whitespace token count; payload/cost proxy when no provider count exists.
inline std::size_t whitespace_token_count(const std::string& text) {
    std::size_t n = 0;
    bool in_tok = false;
    for (unsigned char ch : text) {
        if (std::isspace(ch)) {
            in_tok = false;
        } else if (!in_tok) {
            in_tok = true;
            ++n;
        }
    }
    return n;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : a)
        if (b.count(t)) ++inter;
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline std::size_t overlap_count(const std::vector<std::string>& tokens,
                                 const std::set<std::string>& reference) {
    std::size_t n = 0;
    std::unordered_set<std::string> seen;
    for (const auto& t : tokens)
        if (reference.count(t) && seen.insert(t).second) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Deterministic RNG. splitmix64 keeps fixture bytes identical across
// platforms and standard library versions.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform pick in [0, n).
    std::size_t pick(std::size_t n) {
        return n == 0 ? 0 : static_cast<std::size_t>(next() % n);
    }

    double unit_real() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    template <typename T>
    const T& choice(const std::vector<T>& items) {
        return items[pick(items.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i)
            std::swap(items[i - 1], items[pick(i)]);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t hash_combine(std::uint64_t seed, const std::string& s) {
    for (unsigned char ch : s) seed = (seed ^ ch) * 0x100000001b3ull;
    return seed;
}

}  // namespace cbea
