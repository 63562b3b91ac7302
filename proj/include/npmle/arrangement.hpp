#ifndef NPMLE_ARRANGEMENT_HPP
#define NPMLE_ARRANGEMENT_HPP

#include "npmle/binary_matrix.hpp"
#include "npmle/sign_vector.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace npmle {

// Feasibility floor on the interior-point LP value: eps <= kInteriorTol means
// the sign pattern has no open cell.
inline constexpr double kInteriorTol = 1e-9;

// One observation in coefficient space: the hyperplane normal . eta = threshold
// with normal = (1, z).  The side normal . eta - threshold > 0 is the one
// consistent with y = 1.
struct Hyperplane {
    std::vector<double> normal;
    double threshold = 0.0;
    int y = 1;

    static Hyperplane make(std::span<const double> z, double threshold, int y = 1);
    std::size_t dim() const { return normal.size(); }
    double eval(std::span<const double> eta) const;
    void validate() const;
};

struct Cell {
    SignVector sign;
    std::vector<double> interior;
    double eps = 0.0;       // min over hyperplanes of sign_i (Z_i . interior - v_i), capped at 1
    std::size_t count = 0;  // observations compatible with the cell
};

struct EnumerationStats {
    std::vector<std::size_t> lps_per_step; // entry k-1: LPs solved when adding the k-th hyperplane
    std::size_t total_lps = 0;
    std::size_t resolves = 0;     // extra LPs for interior points lying on a new hyperplane
    std::size_t duplicates = 0;   // hyperplanes skipped as copies of earlier ones (AIE)
};

struct Arrangement {
    std::size_t dim = 0;
    std::vector<Hyperplane> hyperplanes;
    std::vector<Cell> cells;
    EnumerationStats stats;
};

struct AdjacencyMatrix {
    BinaryMatrix entries;                  // n x M, a_ij = 1 iff cell j is on the y_i side of H_i
    std::vector<std::size_t> column_counts;
};

struct InteriorPoint {
    std::vector<double> point;
    double eps = 0.0; // 0 when the pattern is infeasible
};

enum class Method { Auto, Incremental, Accelerated, BruteForce };

struct EnumerateOptions {
    std::uint64_t seed = 1;   // initial point draw
    double tol = kInteriorTol;
    unsigned threads = 1;
};

// max { eps : signs_i (Z_i . eta - v_i) >= eps, eps <= 1 }.
InteriorPoint interior_point(const SignVector& signs, std::span<const Hyperplane> hyperplanes);

Arrangement enumerate_ie(std::span<const Hyperplane> hyperplanes, const EnumerateOptions& opts = {});
// Line arrangements only.
Arrangement enumerate_aie(std::span<const Hyperplane> hyperplanes, const EnumerateOptions& opts = {});
// Exhaustive search over {+-1}^n; n <= 20.
Arrangement enumerate_bruteforce(std::span<const Hyperplane> hyperplanes, const EnumerateOptions& opts = {});
// d = 1: sort the thresholds; same cell set as the incremental algorithms.
Arrangement enumerate_line(std::span<const Hyperplane> hyperplanes, const EnumerateOptions& opts = {});
// Auto picks enumerate_line for d = 1, enumerate_aie for d = 2, enumerate_ie otherwise.
Arrangement enumerate(std::span<const Hyperplane> hyperplanes, Method method = Method::Auto,
                      const EnumerateOptions& opts = {});

// Seeded uniform jitter of relative magnitude `magnitude` on the thresholds.
std::vector<Hyperplane> perturb_thresholds(std::span<const Hyperplane> hyperplanes, std::uint64_t seed,
                                           double magnitude = 1e-8);

// Fills Cell::count as a side effect.
AdjacencyMatrix build_adjacency(Arrangement& arr);
AdjacencyMatrix build_adjacency(const Arrangement& arr);

// Cells none of whose existing Hamming-1 neighbours has a strictly larger count.
std::vector<std::size_t> locally_maximal(const Arrangement& arr, const AdjacencyMatrix& adj);

// Cells attaining the global maximum count (maximum score argmax set).
std::vector<std::size_t> max_score_cells(const AdjacencyMatrix& adj);

// One row per cell: cell_id, eps, interior coordinates, count, sign vector hex.
void write_csv(std::ostream& out, const Arrangement& arr);

} // namespace npmle

#endif
