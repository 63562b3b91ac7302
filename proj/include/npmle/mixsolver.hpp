#ifndef NPMLE_MIXSOLVER_HPP
#define NPMLE_MIXSOLVER_HPP

#include "npmle/binary_matrix.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace npmle {

// Optimum of  max { sum_i log g_i : g = A p, p in the simplex }  and its dual
// max { sum_i log q_i : A'q <= n }.
struct MixtureSolution {
    std::vector<double> p; // cell masses, length M
    std::vector<double> g; // fitted likelihoods A p, length n
    std::vector<double> q; // dual point, 1/g rescaled onto the dual feasible set
    double loglik = 0.0;      // total, sum_i log g_i
    double mean_loglik = 0.0; // loglik / n
    double gap = 0.0;         // kkt_residual(A, p, q)
    int iterations = 0;       // interior-point + EM iterations over all rounds
    int rounds = 0;           // column-generation rounds
    bool converged = false;   // gap <= SolveOptions::tol
    std::string method;       // "ipm", "ipm+em", ...
};

struct SolveOptions {
    double tol = 1e-6;     // certificate required for `converged`
    double target = 1e-12; // interior-point stopping gap (mean log scale)
    int max_iter = 10000;  // EM fallback iteration cap
    std::size_t initial_columns = 400;
    bool basic_solution = true; // reduce p to linearly independent support columns
    double polish_below = 1e-5; // re-solve without smaller masses; kept if it still certifies
};

MixtureSolution solve(const BinaryMatrix& A, const SolveOptions& opts = {});

// max of primal infeasibility, dual infeasibility max_j (A'q - n)_+/n, and
// complementarity (max_j p_j |n - (A'q)_j| / n, max_i |q_i g_i - 1|).
// Zero exactly at an optimal primal/dual pair.
double kkt_residual(const BinaryMatrix& A, std::span<const double> p, std::span<const double> q);

// Number of masses strictly above `threshold`.
std::size_t support_size(std::span<const double> p, double threshold = 0.0);

struct GridSpec {
    std::vector<double> lower, upper;     // per coordinate
    std::vector<std::size_t> resolution;  // points per coordinate, >= 2
};

struct DensityGrid {
    GridSpec spec;
    std::vector<double> values; // row-major, last coordinate fastest
    double cell_volume() const;
    double riemann_sum() const;
    std::vector<double> point(std::size_t flat_index) const;
};

// Mixture of Gaussians N(support_j, diag(variance)) with weights `masses`,
// evaluated on a regular grid.
DensityGrid smooth(const std::vector<std::vector<double>>& support, std::span<const double> masses,
                   std::span<const double> variance, const GridSpec& grid);

// Mass the smoothed mixture puts on { eta : normal . eta - threshold >= 0 }.
double smoothed_halfspace_mass(const std::vector<std::vector<double>>& support, std::span<const double> masses,
                               std::span<const double> variance, std::span<const double> normal,
                               double threshold);

// Same quantity by summing a density grid over the halfspace.
double grid_halfspace_mass(const DensityGrid& grid, std::span<const double> normal, double threshold);

} // namespace npmle

#endif
