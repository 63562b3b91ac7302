#ifndef NPMLE_UNIVARIATE_HPP
#define NPMLE_UNIVARIATE_HPP

#include "npmle/mixsolver.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace npmle {

// Which side of the threshold a response y = 1 reports.
//   CurrentStatus: y = 1 iff eta <= v   (interval counts below use this form)
//   Threshold:     y = 1 iff eta >= v   (the hyperplane convention, d = 1)
enum class Convention { CurrentStatus, Threshold };

// Intervals I_1 = (-inf, v_(1)], I_j = (v_(j-1), v_(j)], I_{n+1} = (v_(n), inf)
// in the current-status orientation.
struct IntervalPartition {
    std::vector<double> breakpoints;  // sorted v
    std::vector<std::size_t> counts;  // length n+1
    std::vector<std::size_t> maximal; // one representative per locally maximal run (its rightmost interval)
    std::vector<std::size_t> order;   // breakpoints[k] = v[order[k]]

    std::size_t intervals() const { return counts.size(); }
    double left(std::size_t j) const;  // -inf for j = 0
    double right(std::size_t j) const; // +inf for j = n
};

IntervalPartition interval_counts(std::span<const double> v, std::span<const int> y);

// A_ij = 1{v_(j) <= v_i} for y_i = 1 and 1{v_(j) > v_i} for y_i = 0, with
// v_(n+1) = +inf.  One column per entry of `columns`.
BinaryMatrix interval_matrix(const IntervalPartition& part, std::span<const double> v, std::span<const int> y,
                             std::span<const std::size_t> columns);

// Shifts y = 0 members of tied groups by +delta.  delta <= 0 selects half the
// minimum positive gap (floor 1e-10).
std::vector<double> tie_adjust(std::span<const double> v, std::span<const int> y, double delta = 0.0);

// True when some value carries both responses.
bool has_conflicting_ties(std::span<const double> v, std::span<const int> y);

struct UnivariateFit {
    IntervalPartition partition; // in the current-status orientation of the adjusted data
    std::vector<double> adjusted_v;
    // One entry per maximal interval, reported in the caller's orientation:
    // [lower, upper] bounds of the interval and its mass.  `location` is the
    // right end (left end under Convention::Threshold), infinite for an
    // unbounded interval.
    std::vector<double> lower, upper, location, mass;
    MixtureSolution solution;
};

UnivariateFit fit_univariate(std::span<const double> v, std::span<const int> y,
                             Convention convention = Convention::CurrentStatus, const SolveOptions& opts = {});

// Same program on all n+1 intervals (no pruning).
MixtureSolution fit_univariate_full(std::span<const double> v, std::span<const int> y,
                                    Convention convention = Convention::CurrentStatus, const SolveOptions& opts = {});

} // namespace npmle

#endif
