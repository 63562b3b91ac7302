#ifndef NPMLE_LP_HPP
#define NPMLE_LP_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace npmle {

struct SlackLpResult {
    std::vector<double> point; // maximizer eta
    double value = 0.0;        // optimal eps of the LP, in [-inf, cap]
    double achieved = 0.0;     // min(cap, min_i a_i.eta - b_i) recomputed at `point`
    int pivots = 0;
};

// Solves  max { eps : a_i . eta - b_i >= eps for all i, eps <= cap }  over
// eta in R^dim, eps free.  `coef` is row-major (rows x dim).
//
// The LP has dim+1 free variables and many rows, so the dense simplex runs on
// its dual, a (dim+1)-row standard-form problem, and eta/eps are read back as
// the simplex multipliers.  Large problems are solved over a working set of
// rows (the last row plus those tightest at `hint`), adding violated rows
// until the working optimum is feasible for all of them.  Always feasible
// and bounded.
SlackLpResult max_min_slack(std::span<const double> coef, std::span<const double> rhs,
                            std::size_t dim, double cap = 1.0, std::span<const double> hint = {});

} // namespace npmle

#endif
