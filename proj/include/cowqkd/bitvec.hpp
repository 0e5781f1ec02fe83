#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cowqkd/rng.hpp"

namespace cowqkd {

// Packed bit string, LSB-first within each 64-bit word. Bits past size()
// in the last word are kept zero (relied on by the word-level consumers:
// hashing, Toeplitz convolution, popcount).
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    static BitVec random(std::size_t n, Rng& rng) {
        BitVec v(n);
        for (auto& w : v.w_) w = rng.next_u64();
        v.mask_tail();
        return v;
    }

    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }

    void set(std::size_t i, bool b) {
        const std::uint64_t m = 1ULL << (i & 63);
        if (b) w_[i >> 6] |= m; else w_[i >> 6] &= ~m;
    }

    void flip(std::size_t i) { w_[i >> 6] ^= 1ULL << (i & 63); }

    std::size_t count_ones() const {
        std::size_t c = 0;
        for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    const std::vector<std::uint64_t>& words() const { return w_; }
    std::vector<std::uint64_t>& words() { return w_; }

    void xor_assign(const BitVec& o) {
        if (o.n_ != n_) throw std::invalid_argument("BitVec: length mismatch");
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    }

    // this[j] ^= src[offset + j] for all j < size(); reads past src.size()
    // are zero. Word-level; used by the Toeplitz fast path.
    void xor_window(const BitVec& src, std::size_t offset) {
        const std::size_t word0 = offset >> 6;
        const unsigned sh = offset & 63;
        for (std::size_t i = 0; i < w_.size(); ++i) {
            std::uint64_t lo = src.word_or_zero(word0 + i);
            std::uint64_t v = lo >> sh;
            if (sh != 0) v |= src.word_or_zero(word0 + i + 1) << (64 - sh);
            w_[i] ^= v;
        }
        mask_tail();
    }

    static std::size_t hamming(const BitVec& a, const BitVec& b) {
        if (a.n_ != b.n_) throw std::invalid_argument("BitVec: length mismatch");
        std::size_t c = 0;
        for (std::size_t i = 0; i < a.w_.size(); ++i)
            c += static_cast<std::size_t>(std::popcount(a.w_[i] ^ b.w_[i]));
        return c;
    }

    bool operator==(const BitVec& o) const { return n_ == o.n_ && w_ == o.w_; }
    bool operator!=(const BitVec& o) const { return !(*this == o); }

    // hex encoding: nibble k holds bits [4k, 4k+4), bit 4k as the nibble LSB
    std::string to_hex() const {
        static const char* digits = "0123456789abcdef";
        std::string s;
        s.reserve((n_ + 3) / 4);
        for (std::size_t k = 0; k < (n_ + 3) / 4; ++k) {
            unsigned nib = (w_[(4 * k) >> 6] >> ((4 * k) & 63)) & 0xF;
            s.push_back(digits[nib]);
        }
        return s;
    }

private:
    std::uint64_t word_or_zero(std::size_t i) const { return i < w_.size() ? w_[i] : 0; }

    void mask_tail() {
        if (n_ & 63) w_.back() &= (~0ULL) >> (64 - (n_ & 63));
    }

    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

} // namespace cowqkd
