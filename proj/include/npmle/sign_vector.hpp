#ifndef NPMLE_SIGN_VECTOR_HPP
#define NPMLE_SIGN_VECTOR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace npmle {

// A {+1,-1} pattern packed one bit per entry (bit set = +1).
// Unused high bits of the last word are always zero, so word-wise
// comparison and hashing are exact.
class SignVector {
public:
    SignVector() = default;
    explicit SignVector(std::size_t size, bool positive = false);

    static SignVector from_signs(const std::vector<int>& signs);

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool positive(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    int operator[](std::size_t i) const { return positive(i) ? 1 : -1; }

    void set(std::size_t i, bool positive);
    void flip(std::size_t i) { words_[i >> 6] ^= (std::uint64_t{1} << (i & 63)); }
    void push_back(bool positive);

    std::size_t count_positive() const;
    std::size_t hamming(const SignVector& other) const;

    std::vector<int> to_signs() const;
    // Most significant hex digit first; bit i of the pattern is bit i of the number.
    std::string to_hex() const;

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& mutable_words() { return words_; }

    friend bool operator==(const SignVector& a, const SignVector& b) {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }
    friend bool operator!=(const SignVector& a, const SignVector& b) { return !(a == b); }
    friend bool operator<(const SignVector& a, const SignVector& b);

private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

// Random 64-bit keys for XOR (Zobrist) hashing of sign patterns; flipping
// entry i of a pattern toggles its hash by key(i).
class ZobristKeys {
public:
    explicit ZobristKeys(std::size_t n, std::uint64_t seed = 0x9e3779b97f4a7c15ULL);
    std::uint64_t key(std::size_t i) const { return keys_[i]; }
    std::uint64_t hash(const SignVector& s) const;
    std::size_t size() const { return keys_.size(); }

private:
    std::vector<std::uint64_t> keys_;
};

// Open-addressing map from a 64-bit hash to a cell index; several cells may
// share a hash, callers confirm candidates with a full comparison.
class HashIndex {
public:
    explicit HashIndex(std::size_t expected = 16);
    void clear(std::size_t expected);
    void insert(std::uint64_t hash, std::uint32_t value);

    // Calls visit(value) for every entry stored under hash until it returns true.
    template <class Visit>
    bool find_if(std::uint64_t hash, Visit&& visit) const {
        std::size_t mask = slots_.size() - 1;
        for (std::size_t pos = mix(hash) & mask;; pos = (pos + 1) & mask) {
            const Slot& s = slots_[pos];
            if (s.value == kEmpty) return false;
            if (s.hash == hash && visit(s.value)) return true;
        }
    }

private:
    static constexpr std::uint32_t kEmpty = 0xffffffffu;
    struct Slot {
        std::uint64_t hash = 0;
        std::uint32_t value = kEmpty;
    };
    static std::uint64_t mix(std::uint64_t h) {
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        return h;
    }
    void grow();

    std::vector<Slot> slots_;
    std::size_t used_ = 0;
};

} // namespace npmle

template <>
struct std::hash<npmle::SignVector> {
    std::size_t operator()(const npmle::SignVector& s) const noexcept;
};

#endif
