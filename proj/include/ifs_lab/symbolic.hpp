#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace ifs {

//---------------------------------------------------------------------------//
// Alphabet {1..k}
//---------------------------------------------------------------------------//
class Symbol {
public:
    constexpr explicit Symbol(int value) : value_(value)
    {
        if (value < 1) {
            throw Error(ErrorKind::InvalidParameter, "symbols start at 1");
        }
    }

    constexpr int value() const noexcept { return value_; }
    /// Zero-based position in the map list.
    constexpr std::size_t index() const noexcept { return static_cast<std::size_t>(value_ - 1); }

    friend constexpr auto operator<=>(Symbol, Symbol) = default;

private:
    int value_;
};

//---------------------------------------------------------------------------//
/*!
 * Letter weights (p_1..p_k) of the Bernoulli product measure.
 *
 * Sampling is inverse-CDF: u in [0,1) maps to the smallest i with
 * u < p_1 + ... + p_i. The last cumulative entry is pinned to 1.
 */
class ProbabilityVector {
public:
    static constexpr double sum_tolerance = 1e-12;

    explicit ProbabilityVector(std::vector<double> weights) : p_(std::move(weights))
    {
        if (p_.empty()) {
            throw Error(ErrorKind::InvalidParameter, "weights: need at least one symbol");
        }
        double sum = 0.0;
        for (double w : p_) {
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw Error(ErrorKind::InvalidParameter, "weights must be positive");
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > sum_tolerance) {
            throw Error(ErrorKind::InvalidParameter,
                        "weights sum to " + std::to_string(sum) + ", expected 1");
        }
        cumulative_.resize(p_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < p_.size(); ++i) {
            acc += p_[i];
            cumulative_[i] = acc;
        }
        cumulative_.back() = 1.0;
    }

    static ProbabilityVector uniform(std::size_t k)
    {
        if (k == 0) {
            throw Error(ErrorKind::InvalidParameter, "weights: need at least one symbol");
        }
        std::vector<double> w(k, 1.0 / static_cast<double>(k));
        // Spread the rounding residue so the sum check passes for any k.
        double sum = 0.0;
        for (double x : w) {
            sum += x;
        }
        w.back() += 1.0 - sum;
        return ProbabilityVector(std::move(w));
    }

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const { return p_.at(i); }
    double of(Symbol s) const { return p_.at(s.index()); }
    const std::vector<double>& values() const noexcept { return p_; }
    double min() const noexcept { return *std::min_element(p_.begin(), p_.end()); }

    Symbol symbol_for(double u) const noexcept
    {
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) {
            --it;
        }
        return Symbol(static_cast<int>(it - cumulative_.begin()) + 1);
    }

    friend bool operator==(const ProbabilityVector& a, const ProbabilityVector& b)
    {
        return a.p_ == b.p_;
    }

private:
    std::vector<double> p_;
    std::vector<double> cumulative_;
};

//---------------------------------------------------------------------------//
// Finite words. word[i] is the letter omega_{i+1}.
//---------------------------------------------------------------------------//
class FiniteWord {
public:
    FiniteWord() = default;
    explicit FiniteWord(std::vector<Symbol> letters) : letters_(std::move(letters)) {}
    FiniteWord(std::initializer_list<int> letters)
    {
        letters_.reserve(letters.size());
        for (int v : letters) {
            letters_.emplace_back(v);
        }
    }

    std::size_t size() const noexcept { return letters_.size(); }
    bool empty() const noexcept { return letters_.empty(); }
    Symbol operator[](std::size_t i) const { return letters_[i]; }
    Symbol at(std::size_t i) const
    {
        if (i >= letters_.size()) {
            throw Error(ErrorKind::OutOfRange, "word index " + std::to_string(i));
        }
        return letters_[i];
    }
    void push_back(Symbol s) { letters_.push_back(s); }
    auto begin() const noexcept { return letters_.begin(); }
    auto end() const noexcept { return letters_.end(); }
    const std::vector<Symbol>& letters() const noexcept { return letters_; }

    int max_letter() const noexcept
    {
        int m = 0;
        for (Symbol s : letters_) {
            m = std::max(m, s.value());
        }
        return m;
    }

    FiniteWord slice(std::size_t from, std::size_t count) const
    {
        if (from + count > letters_.size()) {
            throw Error(ErrorKind::OutOfRange, "slice past end of word");
        }
        return FiniteWord(std::vector<Symbol>(letters_.begin() + static_cast<std::ptrdiff_t>(from),
                                              letters_.begin() +
                                                  static_cast<std::ptrdiff_t>(from + count)));
    }

    friend bool operator==(const FiniteWord&, const FiniteWord&) = default;

private:
    std::vector<Symbol> letters_;
};

//---------------------------------------------------------------------------//
/*!
 * Lazily generated one-sided word.
 *
 * The letter at absolute position j (0-based, i.e. omega_{j+1} of the
 * unshifted word) is weights.symbol_for(u_j) with u_j the j-th uniform of
 * the counter stream keyed by the seed. Advancing returns a new stream.
 */
class WordStream {
public:
    WordStream(std::uint64_t seed, ProbabilityVector weights, std::uint64_t position = 0)
        : seed_(seed), weights_(std::move(weights)), position_(position)
    {
    }

    /// Letter omega_{i+1} of the (possibly shifted) stream.
    Symbol operator[](std::uint64_t i) const noexcept
    {
        return weights_.symbol_for(to_unit_interval(counter_value(seed_, position_ + i)));
    }

    WordStream advanced(std::uint64_t steps) const
    {
        return WordStream(seed_, weights_, position_ + steps);
    }

    FiniteWord take(std::size_t n) const
    {
        std::vector<Symbol> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back((*this)[i]);
        }
        return FiniteWord(std::move(out));
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t position() const noexcept { return position_; }
    const ProbabilityVector& weights() const noexcept { return weights_; }

private:
    std::uint64_t seed_;
    ProbabilityVector weights_;
    std::uint64_t position_;
};

/// Stream used by trial t of a run keyed by base_seed.
inline WordStream trial_stream(std::uint64_t base_seed, std::uint64_t trial,
                               const ProbabilityVector& weights)
{
    return WordStream(stream_key(base_seed, trial), weights);
}

inline FiniteWord sample_word(const ProbabilityVector& weights, std::size_t n, std::uint64_t seed)
{
    return WordStream(seed, weights).take(n);
}

/// Product measure of the cylinder [w] under the Bernoulli measure.
inline double cylinder_measure(const ProbabilityVector& weights, const FiniteWord& w)
{
    double m = 1.0;
    for (Symbol s : w) {
        if (s.index() >= weights.size()) {
            throw Error(ErrorKind::OutOfRange, "letter " + std::to_string(s.value()) +
                                                   " outside alphabet of size " +
                                                   std::to_string(weights.size()));
        }
        m *= weights.of(s);
    }
    return m;
}

inline FiniteWord shift_word(const FiniteWord& w, std::size_t n)
{
    if (n > w.size()) {
        throw Error(ErrorKind::OutOfRange, "cannot shift a word of length " +
                                               std::to_string(w.size()) + " by " +
                                               std::to_string(n));
    }
    return w.slice(n, w.size() - n);
}

inline WordStream shift_word(const WordStream& w, std::uint64_t n)
{
    return w.advanced(n);
}

//---------------------------------------------------------------------------//
// Finite surrogate for a shift-dense sequence.
//---------------------------------------------------------------------------//
inline constexpr std::size_t universal_word_cap = std::size_t{1} << 20;

/*!
 * Concatenation of all k^L words of length L in lexicographic order. Every
 * word of length <= L occurs as a factor (inside one of the blocks).
 */
inline FiniteWord universal_word(std::size_t k, std::size_t max_factor,
                                 std::size_t cap = universal_word_cap)
{
    if (k < 1 || max_factor < 1) {
        throw Error(ErrorKind::InvalidParameter, "universal_word needs k >= 1 and L >= 1");
    }
    std::size_t blocks = 1;
    for (std::size_t i = 0; i < max_factor; ++i) {
        if (blocks > cap / k) {
            throw Error(ErrorKind::TooLarge, "universal word exceeds letter cap");
        }
        blocks *= k;
    }
    if (blocks > cap / max_factor) {
        throw Error(ErrorKind::TooLarge, "universal word exceeds letter cap");
    }
    std::vector<Symbol> letters;
    letters.reserve(blocks * max_factor);
    std::vector<int> digits(max_factor, 1);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (int d : digits) {
            letters.emplace_back(d);
        }
        // odometer increment, last position fastest
        for (std::size_t pos = max_factor; pos-- > 0;) {
            if (digits[pos] < static_cast<int>(k)) {
                ++digits[pos];
                break;
            }
            digits[pos] = 1;
        }
    }
    return FiniteWord(std::move(letters));
}

/// Cylinder {theta : theta_{base_offset + j} = prefix_j}, j = 1..|prefix|.
struct Cylinder {
    FiniteWord prefix;
    std::int64_t base_offset = 0;

    Cylinder(FiniteWord p, std::int64_t offset = 0) : prefix(std::move(p)), base_offset(offset)
    {
        if (prefix.empty()) {
            throw Error(ErrorKind::InvalidParameter, "cylinder prefix must be nonempty");
        }
    }
};

/*!
 * Smallest n >= max(0, -base_offset), n <= horizon, such that the shifted
 * word sigma^n(w) lies in the cylinder, i.e. w[n + base_offset + j] = prefix[j]
 * for all j (0-based). Empty when no such n exists. Requires
 * horizon + base_offset <= |w| - |prefix|.
 */
inline std::optional<std::size_t> find_cylinder_occurrence(const FiniteWord& w, const Cylinder& c,
                                                           std::size_t horizon)
{
    const auto len = static_cast<std::int64_t>(w.size());
    const auto plen = static_cast<std::int64_t>(c.prefix.size());
    if (static_cast<std::int64_t>(horizon) + c.base_offset > len - plen) {
        throw Error(ErrorKind::OutOfRange, "cylinder window at the horizon runs past the word");
    }
    const std::int64_t start = std::max<std::int64_t>(0, -c.base_offset);
    for (std::int64_t n = start; n <= static_cast<std::int64_t>(horizon); ++n) {
        const std::int64_t first = n + c.base_offset;
        if (first + plen > len) {
            break;
        }
        bool match = true;
        for (std::int64_t j = 0; j < plen && match; ++j) {
            match = w[static_cast<std::size_t>(first + j)] == c.prefix[static_cast<std::size_t>(j)];
        }
        if (match) {
            return static_cast<std::size_t>(n);
        }
    }
    return std::nullopt;
}

//---------------------------------------------------------------------------//
// Text form: digits when k <= 9 ("12121"), comma-separated integers otherwise.
//---------------------------------------------------------------------------//
inline std::string format_word(const FiniteWord& w, std::size_t k)
{
    std::string out;
    if (k <= 9) {
        out.reserve(w.size());
        for (Symbol s : w) {
            out.push_back(static_cast<char>('0' + s.value()));
        }
        return out;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) {
            out.push_back(',');
        }
        out += std::to_string(w[i].value());
    }
    return out;
}

inline FiniteWord parse_word(std::string_view text, std::size_t k)
{
    std::vector<Symbol> letters;
    auto check = [k](int v) {
        if (v < 1 || static_cast<std::size_t>(v) > k) {
            throw Error(ErrorKind::Parse, "letter " + std::to_string(v) + " outside 1.." +
                                              std::to_string(k));
        }
        return Symbol(v);
    };
    if (k <= 9) {
        for (char c : text) {
            if (c < '0' || c > '9') {
                throw Error(ErrorKind::Parse, std::string("bad letter '") + c + "'");
            }
            letters.push_back(check(c - '0'));
        }
        return FiniteWord(std::move(letters));
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) {
            comma = text.size();
        }
        std::string piece(text.substr(pos, comma - pos));
        if (piece.empty() || piece.find_first_not_of("0123456789") != std::string::npos) {
            throw Error(ErrorKind::Parse, "bad letter '" + piece + "'");
        }
        letters.push_back(check(std::stoi(piece)));
        pos = comma + 1;
    }
    return FiniteWord(std::move(letters));
}

}  // namespace ifs
