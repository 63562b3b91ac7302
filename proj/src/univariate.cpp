#include "npmle/univariate.hpp"

#include "npmle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace npmle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_input(std::span<const double> v, std::span<const int> y) {
    if (v.empty()) throw InputError("univariate: empty sample");
    if (v.size() != y.size()) throw InputError("univariate: v and y lengths differ");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw InputError("univariate: non-finite v at row " + std::to_string(i));
        if (y[i] != 0 && y[i] != 1) throw InputError("univariate: y must be 0/1 at row " + std::to_string(i));
    }
}

std::vector<double> oriented(std::span<const double> v, Convention c) {
    std::vector<double> out(v.begin(), v.end());
    if (c == Convention::Threshold)
        for (double& x : out) x = -x;
    return out;
}

std::vector<std::size_t> all_columns(const IntervalPartition& part) {
    std::vector<std::size_t> cols(part.intervals());
    std::iota(cols.begin(), cols.end(), 0);
    return cols;
}

} // namespace

double IntervalPartition::left(std::size_t j) const { return j == 0 ? -kInf : breakpoints[j - 1]; }

double IntervalPartition::right(std::size_t j) const { return j >= breakpoints.size() ? kInf : breakpoints[j]; }

IntervalPartition interval_counts(std::span<const double> v, std::span<const int> y) {
    check_input(v, y);
    const std::size_t n = v.size();
    IntervalPartition part;
    part.order.resize(n);
    std::iota(part.order.begin(), part.order.end(), 0);
    std::stable_sort(part.order.begin(), part.order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    part.breakpoints.resize(n);
    for (std::size_t k = 0; k < n; ++k) part.breakpoints[k] = v[part.order[k]];

    std::vector<double> zeros, ones;
    for (std::size_t i = 0; i < n; ++i) (y[i] ? ones : zeros).push_back(v[i]);
    std::sort(zeros.begin(), zeros.end());
    std::sort(ones.begin(), ones.end());

    part.counts.resize(n + 1);
    for (std::size_t j = 0; j < n; ++j) {
        double t = part.breakpoints[j];
        auto below0 = std::lower_bound(zeros.begin(), zeros.end(), t) - zeros.begin();
        auto atleast1 = ones.end() - std::lower_bound(ones.begin(), ones.end(), t);
        part.counts[j] = static_cast<std::size_t>(below0 + atleast1);
    }
    part.counts[n] = zeros.size();

    const auto& c = part.counts;
    for (std::size_t a = 0; a <= n;) {
        std::size_t b = a;
        while (b < n && c[b + 1] == c[a]) ++b;
        bool left_ok = a == 0 || c[a - 1] < c[a];
        bool right_ok = b == n || c[b + 1] < c[b];
        if (left_ok && right_ok) part.maximal.push_back(b);
        a = b + 1;
    }
    return part;
}

BinaryMatrix interval_matrix(const IntervalPartition& part, std::span<const double> v, std::span<const int> y,
                             std::span<const std::size_t> columns) {
    const std::size_t n = v.size();
    std::vector<SignVector> cols;
    cols.reserve(columns.size());
    for (std::size_t j : columns) {
        SignVector col(n);
        double t = part.right(j);
        for (std::size_t i = 0; i < n; ++i) {
            bool a = y[i] ? (t <= v[i]) : (t > v[i]);
            if (a) col.set(i, true);
        }
        cols.push_back(std::move(col));
    }
    return BinaryMatrix(n, cols);
}

bool has_conflicting_ties(std::span<const double> v, std::span<const int> y) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    for (std::size_t a = 0; a < idx.size();) {
        std::size_t b = a;
        int seen = 0;
        while (b < idx.size() && v[idx[b]] == v[idx[a]]) seen |= 1 << y[idx[b++]];
        if (seen == 3) return true;
        a = b;
    }
    return false;
}

std::vector<double> tie_adjust(std::span<const double> v, std::span<const int> y, double delta) {
    check_input(v, y);
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    double min_gap = kInf;
    for (std::size_t k = 1; k < sorted.size(); ++k)
        if (sorted[k] > sorted[k - 1]) min_gap = std::min(min_gap, sorted[k] - sorted[k - 1]);
    if (delta <= 0.0) delta = std::isfinite(min_gap) ? std::max(0.5 * min_gap, 1e-10) : 1e-10;
    if (delta >= min_gap)
        throw InputError("tie_adjust: delta " + std::to_string(delta) + " not below the minimum gap " +
                         std::to_string(min_gap));

    std::vector<double> out(v.begin(), v.end());
    for (std::size_t a = 0; a < sorted.size();) {
        std::size_t b = a;
        while (b < sorted.size() && sorted[b] == sorted[a]) ++b;
        if (b - a > 1) {
            for (std::size_t i = 0; i < v.size(); ++i)
                if (v[i] == sorted[a] && y[i] == 0) out[i] = v[i] + delta;
        }
        a = b;
    }
    return out;
}

UnivariateFit fit_univariate(std::span<const double> v, std::span<const int> y, Convention convention,
                             const SolveOptions& opts) {
    check_input(v, y);
    UnivariateFit fit;
    fit.adjusted_v = has_conflicting_ties(v, y) ? tie_adjust(v, y) : std::vector<double>(v.begin(), v.end());
    std::vector<double> w = oriented(fit.adjusted_v, convention);
    fit.partition = interval_counts(w, y);
    BinaryMatrix A = interval_matrix(fit.partition, w, y, fit.partition.maximal);
    fit.solution = solve(A, opts);

    for (std::size_t k = 0; k < fit.partition.maximal.size(); ++k) {
        std::size_t j = fit.partition.maximal[k];
        double lo = fit.partition.left(j), hi = fit.partition.right(j);
        if (convention == Convention::Threshold) {
            fit.lower.push_back(-hi);
            fit.upper.push_back(-lo);
            fit.location.push_back(-hi);
        } else {
            fit.lower.push_back(lo);
            fit.upper.push_back(hi);
            fit.location.push_back(hi);
        }
        fit.mass.push_back(fit.solution.p[k]);
    }
    return fit;
}

MixtureSolution fit_univariate_full(std::span<const double> v, std::span<const int> y, Convention convention,
                                    const SolveOptions& opts) {
    check_input(v, y);
    std::vector<double> adj = has_conflicting_ties(v, y) ? tie_adjust(v, y) : std::vector<double>(v.begin(), v.end());
    std::vector<double> w = oriented(adj, convention);
    IntervalPartition part = interval_counts(w, y);
    return solve(interval_matrix(part, w, y, all_columns(part)), opts);
}

} // namespace npmle
