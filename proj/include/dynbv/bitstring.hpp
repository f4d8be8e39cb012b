#pragma once

/// @file bitstring.hpp
/// @brief Packed fixed-length bitstrings and the two variation operators.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynbv/random.hpp"

namespace dynbv {

/// A point of the hypercube {0,1}^n, stored as 64-bit words.
///
/// Bits past `size()` in the last word are always zero. The ones-count is
/// cached and kept current by every mutating member.
class Bitstring {
public:
    using word_type = std::uint64_t;
    static constexpr std::size_t kWordBits = 64;

    Bitstring() = default;

    /// All-zeros string of length n.
    explicit Bitstring(std::size_t n) : n_(n), words_(word_count(n), 0) {
        if (n == 0) {
            throw std::invalid_argument("Bitstring: length must be at least 1");
        }
    }

    /// Parses a string of '0'/'1' characters; character i is bit i.
    static Bitstring from_string(std::string_view text) {
        Bitstring x(text.size());
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '1') {
                x.set(i, true);
            } else if (text[i] != '0') {
                throw std::invalid_argument("Bitstring::from_string: expected only '0' and '1'");
            }
        }
        return x;
    }

    static Bitstring all_ones(std::size_t n) {
        Bitstring x(n);
        std::fill(x.words_.begin(), x.words_.end(), ~word_type{0});
        x.clear_tail();
        x.ones_ = n;
        return x;
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] std::size_t ones() const noexcept { return ones_; }
    [[nodiscard]] std::size_t zeros() const noexcept { return n_ - ones_; }
    [[nodiscard]] bool is_all_ones() const noexcept { return ones_ == n_; }

    [[nodiscard]] bool test(std::size_t i) const noexcept {
        return ((words_[i / kWordBits] >> (i % kWordBits)) & 1U) != 0;
    }

    void flip(std::size_t i) noexcept {
        word_type& w = words_[i / kWordBits];
        const word_type mask = word_type{1} << (i % kWordBits);
        w ^= mask;
        if ((w & mask) != 0) {
            ++ones_;
        } else {
            --ones_;
        }
    }

    void set(std::size_t i, bool value) noexcept {
        if (test(i) != value) {
            flip(i);
        }
    }

    [[nodiscard]] std::span<const word_type> words() const noexcept { return words_; }

    /// Replaces the word storage wholesale; used by word-parallel operators.
    void assign_words(std::span<const word_type> words) {
        std::copy(words.begin(), words.end(), words_.begin());
        clear_tail();
        recount();
    }

    [[nodiscard]] std::string to_string() const {
        std::string s(n_, '0');
        for (std::size_t i = 0; i < n_; ++i) {
            if (test(i)) {
                s[i] = '1';
            }
        }
        return s;
    }

    friend bool operator==(const Bitstring& a, const Bitstring& b) noexcept {
        return a.n_ == b.n_ && a.ones_ == b.ones_ && a.words_ == b.words_;
    }

    static constexpr std::size_t word_count(std::size_t n) noexcept {
        return (n + kWordBits - 1) / kWordBits;
    }

private:
    void clear_tail() noexcept {
        const std::size_t rem = n_ % kWordBits;
        if (rem != 0 && !words_.empty()) {
            words_.back() &= (word_type{1} << rem) - 1;
        }
    }

    void recount() noexcept {
        std::size_t total = 0;
        for (word_type w : words_) {
            total += static_cast<std::size_t>(std::popcount(w));
        }
        ones_ = total;
    }

    std::size_t n_ = 0;
    std::size_t ones_ = 0;
    std::vector<word_type> words_;
};

/// Hamming distance between two strings of equal length.
[[nodiscard]] inline std::size_t hamming(const Bitstring& a, const Bitstring& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("hamming: length mismatch");
    }
    std::size_t d = 0;
    const auto wa = a.words();
    const auto wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) {
        d += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
    }
    return d;
}

/// Uniformly random string of length n.
[[nodiscard]] inline Bitstring new_uniform(std::size_t n, Rng& rng) {
    if (n == 0) {
        throw std::invalid_argument("new_uniform: length must be at least 1");
    }
    std::vector<Bitstring::word_type> words(Bitstring::word_count(n));
    for (auto& w : words) {
        w = rng();
    }
    Bitstring x(n);
    x.assign_words(words);
    return x;
}

/// Uniformly random string of length n with exactly `zeros` zero-bits.
[[nodiscard]] inline Bitstring with_zero_count(std::size_t n, std::size_t zeros, Rng& rng) {
    if (zeros > n) {
        throw std::invalid_argument("with_zero_count: more zeros than bits");
    }
    Bitstring x = Bitstring::all_ones(n);
    // Partial Fisher-Yates over positions.
    std::vector<std::size_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
        pos[i] = i;
    }
    for (std::size_t i = 0; i < zeros; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(pos[i], pos[j]);
        x.flip(pos[i]);
    }
    return x;
}

/// Standard bit mutation with rate c/n.
///
/// The flip count is drawn from Binomial(n, c/n) and that many distinct
/// positions are chosen uniformly (Floyd's algorithm), which has the same
/// law as n independent coins but costs O(flips).
class StandardBitMutation {
public:
    StandardBitMutation(std::size_t n, double c) : n_(n), c_(c) {
        if (n == 0) {
            throw std::invalid_argument("mutation: length must be at least 1");
        }
        if (!(c >= 0.0) || c > static_cast<double>(n)) {
            throw std::invalid_argument("mutation: parameter c must lie in [0, n]");
        }
        const double p = c / static_cast<double>(n);
        if (p > 0.0 && p < 1.0) {
            flips_ = std::binomial_distribution<std::uint64_t>(n, p);
        }
    }

    [[nodiscard]] std::size_t length() const noexcept { return n_; }
    [[nodiscard]] double parameter() const noexcept { return c_; }

    /// Writes the mutant of `parent` into `out`, reusing its storage.
    /// Returns the number of flipped positions.
    std::size_t apply(const Bitstring& parent, Bitstring& out, Rng& rng) {
        if (parent.size() != n_) {
            throw std::invalid_argument("mutation: parent length differs from operator length");
        }
        out = parent;
        const std::size_t k = draw_flip_count(rng);
        if (k == 0) {
            return 0;
        }
        if (k == n_) {
            for (std::size_t i = 0; i < n_; ++i) {
                out.flip(i);
            }
            return k;
        }
        chosen_.clear();
        if (k <= kSmallSet) {
            for (std::size_t j = n_ - k; j < n_; ++j) {
                const std::size_t t = rng.below(j + 1);
                const bool seen = std::find(chosen_.begin(), chosen_.end(), t) != chosen_.end();
                chosen_.push_back(seen ? j : t);
            }
        } else {
            marks_.assign(n_, false);
            for (std::size_t j = n_ - k; j < n_; ++j) {
                const std::size_t t = rng.below(j + 1);
                const std::size_t pick = marks_[t] ? j : t;
                marks_[pick] = true;
                chosen_.push_back(pick);
            }
        }
        for (std::size_t i : chosen_) {
            out.flip(i);
        }
        return k;
    }

    [[nodiscard]] Bitstring operator()(const Bitstring& parent, Rng& rng) {
        Bitstring out;
        apply(parent, out, rng);
        return out;
    }

private:
    static constexpr std::size_t kSmallSet = 32;

    std::size_t draw_flip_count(Rng& rng) {
        if (c_ <= 0.0) {
            return 0;
        }
        if (c_ >= static_cast<double>(n_)) {
            return n_;
        }
        return static_cast<std::size_t>(flips_(rng));
    }

    std::size_t n_;
    double c_;
    std::binomial_distribution<std::uint64_t> flips_;
    std::vector<std::size_t> chosen_;
    std::vector<bool> marks_;
};

/// Returns a copy of x with each bit flipped independently with probability c/n.
[[nodiscard]] inline Bitstring mutate(const Bitstring& x, double c, Rng& rng) {
    StandardBitMutation op(x.size(), c);
    return op(x, rng);
}

namespace detail {
inline std::vector<std::uint64_t>& crossover_scratch() {
    thread_local std::vector<std::uint64_t> buffer;
    return buffer;
}
} // namespace detail

/// Bitwise uniform crossover into `out`: each bit from a or b with probability 1/2.
inline void uniform_crossover_into(const Bitstring& a, const Bitstring& b, Bitstring& out, Rng& rng) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("uniform_crossover: parent lengths differ");
    }
    out = a;
    if (&a == &b || a == b) {
        return;
    }
    const auto wa = a.words();
    const auto wb = b.words();
    auto& child = detail::crossover_scratch();
    child.resize(wa.size());
    for (std::size_t i = 0; i < wa.size(); ++i) {
        const std::uint64_t diff = wa[i] ^ wb[i];
        // Only draw where the parents disagree so agreement words cost nothing.
        child[i] = diff == 0 ? wa[i] : (wa[i] ^ (diff & rng()));
    }
    out.assign_words(child);
}

[[nodiscard]] inline Bitstring uniform_crossover(const Bitstring& a, const Bitstring& b, Rng& rng) {
    Bitstring out;
    uniform_crossover_into(a, b, out, rng);
    return out;
}

} // namespace dynbv
