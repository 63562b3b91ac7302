#include "npmle/error.hpp"
#include "npmle/lp.hpp"
#include "npmle/sign_vector.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <unordered_set>

using namespace npmle;

TEST_SUITE("lp") {

TEST_CASE("max_min_slack matches vertex enumeration on random planar systems") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + static_cast<std::size_t>(trial % 30);
        std::vector<double> coef(2 * n), rhs(n);
        for (auto& x : coef) x = g(rng);
        for (auto& x : rhs) x = g(rng);
        double cap = trial % 3 == 0 ? 0.25 : 1.0;
        SlackLpResult r = max_min_slack(coef, rhs, 2, cap);
        double expect = oracle::lp_value_2d(coef, rhs, cap);
        CHECK(r.value == doctest::Approx(expect).epsilon(1e-9));
        CHECK(r.achieved == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("working-set solve agrees with the oracle on large row counts") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 60 + static_cast<std::size_t>(trial) * 7;
        std::vector<double> coef(2 * n), rhs(n);
        for (auto& x : coef) x = g(rng);
        for (auto& x : rhs) x = 3.0 * g(rng);
        std::vector<double> hint{g(rng), g(rng)};
        SlackLpResult a = max_min_slack(coef, rhs, 2, 1.0, hint);
        SlackLpResult b = max_min_slack(coef, rhs, 2, 1.0);
        double expect = oracle::lp_value_2d(coef, rhs, 1.0);
        CHECK(a.value == doctest::Approx(expect).epsilon(1e-9));
        CHECK(b.value == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("no rows gives the cap") {
    SlackLpResult r = max_min_slack({}, {}, 3, 1.0);
    CHECK(r.value == 1.0);
    CHECK(r.point.size() == 3);
}

TEST_CASE("contradictory rows are infeasible") {
    // eta1 >= eps and -eta1 >= eps
    std::vector<double> coef{1, 0, -1, 0}, rhs{0, 0};
    SlackLpResult r = max_min_slack(coef, rhs, 2, 1.0);
    CHECK(r.value <= 1e-12);
}

TEST_CASE("bounded cell reports its inradius-like slack") {
    // 0 <= eta1 <= 1 as two rows: best eps = 0.5 at eta1 = 0.5
    std::vector<double> coef{1, -1}, rhs{0, -1};
    SlackLpResult r = max_min_slack(coef, rhs, 1, 1.0);
    CHECK(r.value == doctest::Approx(0.5));
    CHECK(r.point[0] == doctest::Approx(0.5));
}

TEST_CASE("non-finite input is rejected") {
    std::vector<double> coef{1, NAN}, rhs{0};
    CHECK_THROWS_AS(max_min_slack(coef, rhs, 2, 1.0), InputError);
}

} // TEST_SUITE

TEST_SUITE("sign_vector") {

TEST_CASE("packing, flipping and ordering") {
    SignVector s = SignVector::from_signs({1, -1, -1, 1});
    CHECK(s.size() == 4);
    CHECK(s[0] == 1);
    CHECK(s[1] == -1);
    CHECK(s.count_positive() == 2);
    SignVector t = s;
    t.flip(1);
    CHECK(s.hamming(t) == 1);
    CHECK(s != t);
    CHECK((s < t) != (t < s));
    CHECK(t.to_signs() == std::vector<int>{1, 1, -1, 1});
    CHECK(s.to_hex() == "9");
}

TEST_CASE("push_back across word boundaries") {
    SignVector s;
    for (int i = 0; i < 130; ++i) s.push_back(i % 3 == 0);
    CHECK(s.size() == 130);
    for (int i = 0; i < 130; ++i) CHECK(s.positive(static_cast<std::size_t>(i)) == (i % 3 == 0));
    SignVector t(130);
    for (int i = 0; i < 130; i += 3) t.set(static_cast<std::size_t>(i), true);
    CHECK(s == t);
    CHECK(std::hash<SignVector>{}(s) == std::hash<SignVector>{}(t));
}

TEST_CASE("Zobrist hash toggles by the flipped key") {
    ZobristKeys keys(100, 3);
    SignVector s(100);
    for (std::size_t i = 0; i < 100; i += 7) s.set(i, true);
    std::uint64_t h = keys.hash(s);
    s.flip(42);
    CHECK(keys.hash(s) == (h ^ keys.key(42)));
}

TEST_CASE("hash index returns every value stored under a hash") {
    HashIndex idx(4);
    for (std::uint32_t v = 0; v < 1000; ++v) idx.insert(v % 37, v);
    int found = 0;
    idx.find_if(5, [&](std::uint32_t v) {
        CHECK(v % 37 == 5);
        ++found;
        return false;
    });
    CHECK(found == 27);
    CHECK_FALSE(idx.find_if(99, [](std::uint32_t) { return true; }));
}

} // TEST_SUITE
