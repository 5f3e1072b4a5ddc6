#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sgalab/error.hpp"

namespace sgalab {

// Fixed-length bit string packed into 64-bit words. Position 0 is the leftmost
// character of the textual form. Bits past `length()` in the last word are kept
// at zero so word-wise comparisons and popcounts stay exact.
class Chromosome {
public:
    Chromosome() = default;

    explicit Chromosome(std::size_t length, bool value = false)
        : words_((length + 63) / 64, value ? ~std::uint64_t{0} : 0)
        , length_(length)
    {
        clear_padding();
    }

    static Chromosome from_string(std::string_view text)
    {
        Chromosome c(text.size());
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '1') {
                c.set(i, true);
            } else if (text[i] != '0') {
                throw ParseError("bit string contains a character other than 0/1: " + std::string(text));
            }
        }
        return c;
    }

    std::size_t length() const noexcept { return length_; }

    bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }

    void set(std::size_t i, bool v) noexcept
    {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    std::size_t count_ones() const noexcept
    {
        std::size_t n = 0;
        for (auto w : words_) {
            n += static_cast<std::size_t>(std::popcount(w));
        }
        return n;
    }

    bool all_ones() const noexcept { return count_ones() == length_; }

    // Genotype as an integer, position 0 being the most significant bit.
    // Only meaningful for length <= 64.
    std::uint64_t to_index() const noexcept
    {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < length_; ++i) {
            v = (v << 1) | static_cast<std::uint64_t>(get(i));
        }
        return v;
    }

    static Chromosome from_index(std::uint64_t index, std::size_t length)
    {
        Chromosome c(length);
        for (std::size_t i = 0; i < length; ++i) {
            c.set(length - 1 - i, (index >> i) & 1U);
        }
        return c;
    }

    std::string to_string() const
    {
        std::string s(length_, '0');
        for (std::size_t i = 0; i < length_; ++i) {
            if (get(i)) {
                s[i] = '1';
            }
        }
        return s;
    }

    // Replace positions [cut, length) with those of `other`.
    void splice_suffix(const Chromosome& other, std::size_t cut) noexcept
    {
        const std::size_t w = cut >> 6;
        const std::size_t b = cut & 63;
        std::size_t first_full = w;
        if (b != 0) {
            const std::uint64_t low = (std::uint64_t{1} << b) - 1;
            words_[w] = (words_[w] & low) | (other.words_[w] & ~low);
            first_full = w + 1;
        }
        std::copy(other.words_.begin() + static_cast<std::ptrdiff_t>(first_full), other.words_.end(),
            words_.begin() + static_cast<std::ptrdiff_t>(first_full));
    }

    bool descendant = false;

    friend bool operator==(const Chromosome& a, const Chromosome& b) noexcept
    {
        return a.length_ == b.length_ && a.words_ == b.words_;
    }

private:
    void clear_padding() noexcept
    {
        if (length_ % 64 != 0 && !words_.empty()) {
            words_.back() &= (std::uint64_t{1} << (length_ % 64)) - 1;
        }
    }

    std::vector<std::uint64_t> words_;
    std::size_t length_ = 0;
};

} // namespace sgalab
