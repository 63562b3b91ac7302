#include "npmle/sign_vector.hpp"

#include <bit>
#include <stdexcept>

namespace npmle {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

SignVector::SignVector(std::size_t size, bool positive)
    : size_(size), words_((size + 63) / 64, positive ? ~std::uint64_t{0} : 0) {
    if (positive && (size & 63)) words_.back() &= (std::uint64_t{1} << (size & 63)) - 1;
}

SignVector SignVector::from_signs(const std::vector<int>& signs) {
    SignVector s(signs.size());
    for (std::size_t i = 0; i < signs.size(); ++i) {
        if (signs[i] != 1 && signs[i] != -1) throw std::invalid_argument("sign entries must be +1 or -1");
        s.set(i, signs[i] == 1);
    }
    return s;
}

void SignVector::set(std::size_t i, bool positive) {
    std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (positive)
        words_[i >> 6] |= bit;
    else
        words_[i >> 6] &= ~bit;
}

void SignVector::push_back(bool positive) {
    if ((size_ & 63) == 0) words_.push_back(0);
    ++size_;
    set(size_ - 1, positive);
}

std::size_t SignVector::count_positive() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

std::size_t SignVector::hamming(const SignVector& other) const {
    if (other.size_ != size_) throw std::invalid_argument("hamming: size mismatch");
    std::size_t c = 0;
    for (std::size_t k = 0; k < words_.size(); ++k)
        c += static_cast<std::size_t>(std::popcount(words_[k] ^ other.words_[k]));
    return c;
}

std::vector<int> SignVector::to_signs() const {
    std::vector<int> out(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = (*this)[i];
    return out;
}

std::string SignVector::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::size_t nibbles = (size_ + 3) / 4;
    if (nibbles == 0) return "0";
    std::string out(nibbles, '0');
    for (std::size_t k = 0; k < nibbles; ++k) {
        std::size_t bit = 4 * k;
        unsigned v = static_cast<unsigned>((words_[bit >> 6] >> (bit & 63)) & 0xfu);
        out[nibbles - 1 - k] = digits[v];
    }
    return out;
}

bool operator<(const SignVector& a, const SignVector& b) {
    if (a.size_ != b.size_) return a.size_ < b.size_;
    for (std::size_t k = a.words_.size(); k-- > 0;) {
        if (a.words_[k] != b.words_[k]) return a.words_[k] < b.words_[k];
    }
    return false;
}

ZobristKeys::ZobristKeys(std::size_t n, std::uint64_t seed) : keys_(n) {
    std::uint64_t state = seed;
    for (auto& k : keys_) k = splitmix64(state);
}

std::uint64_t ZobristKeys::hash(const SignVector& s) const {
    std::uint64_t h = 0;
    const auto& w = s.words();
    for (std::size_t k = 0; k < w.size(); ++k) {
        std::uint64_t bits = w[k];
        while (bits) {
            int b = std::countr_zero(bits);
            h ^= keys_[64 * k + static_cast<std::size_t>(b)];
            bits &= bits - 1;
        }
    }
    return h;
}

HashIndex::HashIndex(std::size_t expected) { clear(expected); }

void HashIndex::clear(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected + 2) cap <<= 1;
    slots_.assign(cap, Slot{});
    used_ = 0;
}

void HashIndex::insert(std::uint64_t hash, std::uint32_t value) {
    if (2 * (used_ + 1) > slots_.size()) grow();
    std::size_t mask = slots_.size() - 1;
    std::size_t pos = mix(hash) & mask;
    while (slots_[pos].value != kEmpty) pos = (pos + 1) & mask;
    slots_[pos] = Slot{hash, value};
    ++used_;
}

void HashIndex::grow() {
    std::vector<Slot> old = std::move(slots_);
    slots_.assign(old.size() * 2, Slot{});
    used_ = 0;
    for (const auto& s : old)
        if (s.value != kEmpty) insert(s.hash, s.value);
}

} // namespace npmle

std::size_t std::hash<npmle::SignVector>::operator()(const npmle::SignVector& s) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ s.size();
    for (auto w : s.words()) {
        h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}
