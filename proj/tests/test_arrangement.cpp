#include "npmle/arrangement.hpp"
#include "npmle/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

using namespace npmle;

namespace {

Hyperplane line(double z, double v, int y = 1) {
    double zz[1] = {z};
    return Hyperplane::make(zz, v, y);
}

// Three lines in general position, scaled so the eta1 coefficient is 1:  -eta1 + eta2 - 1 = 0,  eta1 + eta2 - 1 = 0,
// 0.2 eta1 + eta2 + 2 = 0.
std::vector<Hyperplane> three_lines() { return {line(-1.0, -1.0), line(1.0, 1.0), line(5.0, -10.0)}; }

// Toy sample: rows (1, z, x3) of the design with v = -x3.
std::vector<Hyperplane> toy() {
    const double z[5] = {0.41, 0.40, 0.17, -0.79, -0.94};
    const double x3[5] = {1.22, 0.36, 0.24, 0.99, 0.55};
    const int y[5] = {1, 0, 1, 0, 0};
    std::vector<Hyperplane> hs;
    for (int i = 0; i < 5; ++i) hs.push_back(line(z[i], -x3[i], y[i]));
    return hs;
}

void check_partition(const Arrangement& arr, std::uint64_t seed, int probes) {
    auto cells = oracle::pattern_set(arr);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int p = 0; p < probes; ++p) {
        std::vector<double> eta(arr.dim);
        for (auto& x : eta) x = g(rng);
        std::string s = oracle::pattern(arr.hyperplanes, eta);
        if (s.empty()) continue;
        CHECK(cells.count(s) == 1);
    }
}

void check_certificates(const Arrangement& arr) {
    for (const auto& c : arr.cells) {
        CHECK(c.eps > kInteriorTol);
        for (std::size_t i = 0; i < arr.hyperplanes.size(); ++i)
            CHECK(c.sign[i] * arr.hyperplanes[i].eval(c.interior) >= c.eps - kInteriorTol);
    }
}

} // namespace

TEST_SUITE("arrangement") {

TEST_CASE("interior point examples") {
    std::vector<Hyperplane> h2{line(1.0, 1.0)};
    InteriorPoint ip = interior_point(SignVector(1, true), h2);
    CHECK(ip.eps == doctest::Approx(1.0));
    CHECK(ip.point[0] + ip.point[1] - 1.0 >= 1.0 - 1e-9);

    InteriorPoint none = interior_point(SignVector(), std::vector<Hyperplane>{});
    CHECK(none.eps == 1.0);

    std::vector<Hyperplane> twice{line(0.0, 0.0), line(0.0, 0.0)};
    InteriorPoint bad = interior_point(SignVector::from_signs({1, -1}), twice);
    CHECK(bad.eps == 0.0);

    CHECK_THROWS_AS(interior_point(SignVector(2), h2), InputError);
}

TEST_CASE("hyperplane validation") {
    Hyperplane h = line(0.5, 1.0);
    h.normal[0] = 2.0;
    CHECK_THROWS_AS(h.validate(), InputError);
    Hyperplane nf = line(NAN, 1.0);
    CHECK_THROWS_AS(enumerate_ie(std::vector<Hyperplane>{nf}), InputError);
}

TEST_CASE("three lines: four then seven cells, all methods agree") {
    auto hs = three_lines();
    std::vector<Hyperplane> two(hs.begin(), hs.begin() + 2);
    CHECK(enumerate_ie(two).cells.size() == 4);
    CHECK(enumerate_bruteforce(two).cells.size() == 4);
    Arrangement ie = enumerate_ie(hs), aie = enumerate_aie(hs), bf = enumerate_bruteforce(hs);
    CHECK(ie.cells.size() == 7);
    CHECK(oracle::pattern_set(ie) == oracle::pattern_set(aie));
    CHECK(oracle::pattern_set(ie) == oracle::pattern_set(bf));
    check_certificates(aie);
}

TEST_CASE("one line gives two cells") {
    std::vector<Hyperplane> hs{line(0.3, 0.1)};
    CHECK(enumerate_bruteforce(hs).cells.size() == 2);
    CHECK(enumerate_ie(hs).cells.size() == 2);
    CHECK(enumerate_aie(hs).cells.size() == 2);
}

TEST_CASE("general-position cell count and partition property for random general-position input") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (std::size_t d : {2u, 3u}) {
            auto hs = oracle::random_hyperplanes(10, d, seed * 31 + d);
            Arrangement arr = enumerate_ie(hs);
            CHECK(arr.cells.size() == oracle::general_position_cells(10, d));
            check_certificates(arr);
            check_partition(arr, seed, 1000);
        }
        auto hs = oracle::random_hyperplanes(5, 2, seed);
        CHECK(enumerate_aie(hs).cells.size() == 16);
    }
}

TEST_CASE("cell count bound holds") {
    auto hs = oracle::random_hyperplanes(12, 2, 99);
    CHECK(enumerate_aie(hs).cells.size() <= oracle::general_position_cells(12, 2));
}

TEST_CASE("order invariance") {
    auto hs = oracle::random_hyperplanes(9, 2, 5);
    auto perm = hs;
    std::mt19937_64 rng(3);
    std::vector<std::size_t> idx(hs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i) perm[i] = hs[idx[i]];
    // Compare in the original hyperplane order.
    auto remap = [&](const Arrangement& a) {
        std::set<std::string> out;
        for (const auto& c : a.cells) {
            std::string s(hs.size(), '?');
            for (std::size_t i = 0; i < idx.size(); ++i) s[idx[i]] = c.sign.positive(i) ? '+' : '-';
            out.insert(s);
        }
        return out;
    };
    CHECK(remap(enumerate_aie(perm)) == oracle::pattern_set(enumerate_aie(hs)));
    CHECK(remap(enumerate_ie(perm)) == oracle::pattern_set(enumerate_ie(hs)));
}

TEST_CASE("degeneracies in the plane") {
    SUBCASE("three concurrent lines through the origin") {
        std::vector<Hyperplane> hs{line(1.0, 0.0), line(-1.0, 0.0), line(0.0, 0.0)};
        // line(0,0) is eta1 = 0, all three pass through the origin.
        Arrangement aie = enumerate_aie(hs), bf = enumerate_bruteforce(hs), ie = enumerate_ie(hs);
        CHECK(aie.cells.size() == 6);
        CHECK(oracle::pattern_set(aie) == oracle::pattern_set(bf));
        CHECK(oracle::pattern_set(ie) == oracle::pattern_set(bf));
    }
    SUBCASE("repeated line") {
        auto hs = oracle::random_hyperplanes(6, 2, 17);
        auto dup = hs;
        dup.insert(dup.begin() + 3, hs[1]);
        Arrangement a = enumerate_aie(dup);
        CHECK(a.cells.size() == enumerate_aie(hs).cells.size());
        CHECK(a.stats.duplicates == 1);
        CHECK(oracle::pattern_set(a) == oracle::pattern_set(enumerate_bruteforce(dup)));
    }
    SUBCASE("parallel lines") {
        std::vector<Hyperplane> hs{line(0.5, 0.0), line(0.5, 1.0), line(0.5, -2.0), line(-1.0, 0.3)};
        Arrangement a = enumerate_aie(hs);
        CHECK(a.cells.size() == 8);
        CHECK(oracle::pattern_set(a) == oracle::pattern_set(enumerate_bruteforce(hs)));
    }
    SUBCASE("all lines parallel") {
        std::vector<Hyperplane> hs{line(2.0, 0.0), line(2.0, 1.0), line(2.0, 5.0)};
        CHECK(enumerate_aie(hs).cells.size() == 4);
    }
}

TEST_CASE("AIE zone bound on general-position input") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto hs = oracle::random_hyperplanes(12, 2, 1000 + seed);
        Arrangement a = enumerate_aie(hs);
        for (std::size_t k = 0; k < a.stats.lps_per_step.size(); ++k) CHECK(a.stats.lps_per_step[k] <= k + 1);
    }
}

TEST_CASE("AIE rejects other dimensions, brute force refuses large n") {
    CHECK_THROWS_AS(enumerate_aie(oracle::random_hyperplanes(4, 3, 1)), InputError);
    CHECK_THROWS_AS(enumerate_bruteforce(oracle::random_hyperplanes(21, 2, 1)), InputError);
}

TEST_CASE("line sweep matches the incremental algorithm for d = 1") {
    std::vector<Hyperplane> hs;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int i = 0; i < 15; ++i) hs.push_back(Hyperplane::make({}, g(rng), i % 2));
    hs.push_back(hs[3]);
    Arrangement line_arr = enumerate_line(hs), ie = enumerate_ie(hs);
    CHECK(line_arr.cells.size() == 16);
    CHECK(oracle::pattern_set(line_arr) == oracle::pattern_set(ie));
}

TEST_CASE("adjacency on the toy sample") {
    Arrangement arr = enumerate(toy());
    AdjacencyMatrix adj = build_adjacency(arr);
    auto lm = locally_maximal(arr, adj);
    REQUIRE(lm.size() == 3);
    std::set<std::string> sets;
    std::vector<std::size_t> counts;
    for (auto j : lm) {
        std::string s;
        for (std::size_t i = 0; i < 5; ++i)
            if (adj.entries.get(i, j)) s += char('1' + i);
        sets.insert(s);
        counts.push_back(adj.column_counts[j]);
    }
    CHECK(sets == std::set<std::string>{"1345", "1245", "123"});
    std::sort(counts.begin(), counts.end());
    CHECK(counts == std::vector<std::size_t>{3, 4, 4});

    auto best = max_score_cells(adj);
    CHECK(best.size() == 2);
    for (auto j : best) CHECK(adj.column_counts[j] == 4);

    for (std::size_t j = 0; j < arr.cells.size(); ++j) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < 5; ++i) c += adj.entries.get(i, j);
        CHECK(c == adj.column_counts[j]);
        CHECK(arr.cells[j].count == c);
    }
}

TEST_CASE("adjacency columns are the y-flipped sign vectors; flipping y complements them") {
    auto hs = oracle::random_hyperplanes(8, 2, 21);
    Arrangement arr = enumerate(hs);
    AdjacencyMatrix adj = build_adjacency(arr);
    auto flipped = arr;
    for (auto& h : flipped.hyperplanes) h.y = 1 - h.y;
    AdjacencyMatrix adj2 = build_adjacency(flipped);
    for (std::size_t j = 0; j < arr.cells.size(); ++j)
        for (std::size_t i = 0; i < hs.size(); ++i) {
            bool expect = arr.cells[j].sign.positive(i) == (hs[i].y == 1);
            CHECK(adj.entries.get(i, j) == expect);
            CHECK(adj.entries.get(i, j) + adj2.entries.get(i, j) == 1);
        }
}

TEST_CASE("single observation: the y-consistent side is the maximal and max-score cell") {
    std::vector<Hyperplane> hs{line(0.2, 0.4, 1)};
    Arrangement arr = enumerate(hs);
    AdjacencyMatrix adj = build_adjacency(arr);
    auto lm = locally_maximal(arr, adj);
    REQUIRE(lm.size() == 1);
    CHECK(arr.cells[lm[0]].sign.positive(0));
    CHECK(adj.column_counts[lm[0]] == 1);
    auto ms = max_score_cells(adj);
    CHECK(ms == lm);
}

TEST_CASE("all responses satisfiable together: one cell has count n") {
    // every line passes below the point (0, 0) region with y = 1 on the side containing it
    std::vector<Hyperplane> hs{line(0.5, -1.0, 1), line(-0.3, -2.0, 1), line(1.2, -0.5, 1), line(0.0, -3.0, 1)};
    Arrangement arr = enumerate(hs);
    AdjacencyMatrix adj = build_adjacency(arr);
    auto ms = max_score_cells(adj);
    REQUIRE(ms.size() == 1);
    CHECK(adj.column_counts[ms[0]] == hs.size());
    CHECK(oracle::pattern(hs, {0.0, 0.0}) == oracle::pattern(arr.cells[ms[0]].sign));
}

TEST_CASE("locally maximal cells have no Hamming-1 neighbour with a larger count") {
    auto hs = oracle::random_hyperplanes(11, 2, 8);
    Arrangement arr = enumerate(hs);
    AdjacencyMatrix adj = build_adjacency(arr);
    auto lm = locally_maximal(arr, adj);
    std::set<std::size_t> in(lm.begin(), lm.end());
    for (std::size_t j = 0; j < arr.cells.size(); ++j) {
        bool dominated = false;
        for (std::size_t k = 0; k < arr.cells.size(); ++k)
            if (arr.cells[j].sign.hamming(arr.cells[k].sign) == 1 && adj.column_counts[k] > adj.column_counts[j])
                dominated = true;
        CHECK(in.count(j) == (dominated ? 0u : 1u));
    }
}

TEST_CASE("perturbation is deterministic and tiny") {
    auto hs = oracle::random_hyperplanes(6, 3, 2);
    auto a = perturb_thresholds(hs, 5), b = perturb_thresholds(hs, 5);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        CHECK(a[i].threshold == b[i].threshold);
        CHECK(std::abs(a[i].threshold - hs[i].threshold) <= 1e-7 * (1.0 + std::abs(hs[i].threshold)));
    }
}

TEST_CASE("parallel IE is identical to serial") {
    auto hs = oracle::random_hyperplanes(10, 3, 44);
    EnumerateOptions serial, par;
    par.threads = 4;
    Arrangement a = enumerate_ie(hs, serial), b = enumerate_ie(hs, par);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t j = 0; j < a.cells.size(); ++j) {
        CHECK(a.cells[j].sign == b.cells[j].sign);
        CHECK(a.cells[j].interior == b.cells[j].interior);
    }
}

TEST_CASE("CSV dump has one row per cell") {
    Arrangement arr = enumerate(three_lines());
    std::ostringstream os;
    write_csv(os, arr);
    std::string s = os.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 8);
    CHECK(s.rfind("cell_id,eps,eta1,eta2,count,sign_hex", 0) == 0);
}

} // TEST_SUITE
