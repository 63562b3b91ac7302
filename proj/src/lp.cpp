#include "npmle/lp.hpp"

#include "npmle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace npmle {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-12;
constexpr int kMaxPivots = 20000;
constexpr int kBlandAfter = 64;

// Dense tableau for  min c'x  s.t.  T x = rhs, x >= 0, with m rows.
struct Tableau {
    std::size_t m = 0, cols = 0;
    std::vector<double> t;   // m x cols, row-major
    std::vector<double> rhs; // m
    std::vector<std::size_t> basis;

    double& at(std::size_t r, std::size_t c) { return t[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return t[r * cols + c]; }

    void pivot(std::size_t row, std::size_t col) {
        double inv = 1.0 / at(row, col);
        double* prow = &t[row * cols];
        for (std::size_t c = 0; c < cols; ++c) prow[c] *= inv;
        prow[col] = 1.0;
        rhs[row] *= inv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == row) continue;
            double f = at(r, col);
            if (f == 0.0) continue;
            double* trow = &t[r * cols];
            for (std::size_t c = 0; c < cols; ++c) trow[c] -= f * prow[c];
            trow[col] = 0.0;
            rhs[r] -= f * rhs[row];
            if (rhs[r] < 0.0 && rhs[r] > -1e-13) rhs[r] = 0.0;
        }
        basis[row] = col;
    }
};

// Dense dual simplex on the rows listed in `rows`.  Returns eta and the LP
// value over those rows only.
SlackLpResult solve_rows(std::span<const double> coef, std::span<const double> rhs, std::size_t dim, double cap,
                         const std::vector<std::size_t>& rows) {
    const std::size_t n = rows.size();
    SlackLpResult out;
    out.point.assign(dim, 0.0);

    // Dual columns: lambda_0..lambda_{n-1}, mu, artificial_0..artificial_{dim-1}.
    // Rows 0..dim-1:  sum_i lambda_i (-a_ik) = 0
    // Row dim:        sum_i lambda_i + mu    = 1
    const std::size_t m = dim + 1;
    const std::size_t mu = n;
    const std::size_t art0 = n + 1;
    Tableau tab;
    tab.m = m;
    tab.cols = n + 1 + dim;
    tab.t.assign(m * tab.cols, 0.0);
    tab.rhs.assign(m, 0.0);
    tab.rhs[dim] = 1.0;
    tab.basis.resize(m);
    std::vector<double> cost(tab.cols, 0.0);
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = rows[i];
        for (std::size_t k = 0; k < dim; ++k) {
            double a = coef[src * dim + k];
            tab.at(k, i) = -a;
            scale = std::max(scale, std::abs(a));
        }
        tab.at(dim, i) = 1.0;
        cost[i] = -rhs[src];
    }
    tab.at(dim, mu) = 1.0;
    cost[mu] = cap;
    for (std::size_t k = 0; k < dim; ++k) {
        tab.at(k, art0 + k) = 1.0;
        tab.basis[k] = art0 + k;
    }
    tab.basis[dim] = mu;

    // Drive artificials out of the basis.  Their rows have zero right-hand
    // side, so any nonzero pivot keeps the basis feasible; rows without one
    // are redundant and their artificial stays basic at zero.
    for (std::size_t r = 0; r < dim; ++r) {
        std::size_t best = tab.cols;
        double best_abs = kPivotTol * scale;
        for (std::size_t c = 0; c < n; ++c) {
            double v = std::abs(tab.at(r, c));
            if (v > best_abs) {
                best_abs = v;
                best = c;
            }
        }
        if (best != tab.cols) {
            tab.pivot(r, best);
            ++out.pivots;
        }
    }

    std::vector<double> cb(m);
    for (int iter = 0;; ++iter) {
        if (out.pivots > kMaxPivots)
            throw NumericalError("max_min_slack: pivot limit reached (n=" + std::to_string(n) + ")");
        for (std::size_t r = 0; r < m; ++r) cb[r] = cost[tab.basis[r]];
        const bool bland = iter >= kBlandAfter;
        std::size_t enter = tab.cols;
        double best_rc = -kCostTol * (1.0 + scale);
        for (std::size_t c = 0; c <= mu; ++c) {
            double rc = cost[c];
            for (std::size_t r = 0; r < m; ++r) rc -= cb[r] * tab.at(r, c);
            if (rc < best_rc) {
                enter = c;
                if (bland) break;
                best_rc = rc;
            }
        }
        if (enter == tab.cols) break;

        std::size_t leave = m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < m; ++r) {
            double a = tab.at(r, enter);
            if (a <= kPivotTol) continue;
            double ratio = tab.rhs[r] / a;
            if (ratio < best_ratio - 1e-15 ||
                (ratio <= best_ratio + 1e-15 && leave < m && tab.basis[r] < tab.basis[leave])) {
                best_ratio = ratio;
                leave = r;
            }
        }
        // Cannot happen for a bounded dual; treat as numerical breakdown.
        if (leave == m) throw NumericalError("max_min_slack: unbounded dual");
        tab.pivot(leave, enter);
        ++out.pivots;
    }

    // Multipliers y = c_B' B^{-1}; columns of the initial identity basis hold B^{-1}.
    for (std::size_t r = 0; r < m; ++r) cb[r] = cost[tab.basis[r]];
    auto multiplier = [&](std::size_t init_col) {
        double y = 0.0;
        for (std::size_t r = 0; r < m; ++r) y += cb[r] * tab.at(r, init_col);
        return y;
    };
    for (std::size_t k = 0; k < dim; ++k) out.point[k] = multiplier(art0 + k);
    out.value = multiplier(mu);
    return out;
}

double row_slack(std::span<const double> coef, std::span<const double> rhs, std::size_t dim, std::size_t i,
                 const std::vector<double>& eta) {
    double s = -rhs[i];
    for (std::size_t k = 0; k < dim; ++k) s += coef[i * dim + k] * eta[k];
    return s;
}

} // namespace

SlackLpResult max_min_slack(std::span<const double> coef, std::span<const double> rhs,
                            std::size_t dim, double cap, std::span<const double> hint) {
    const std::size_t n = rhs.size();
    if (coef.size() != n * dim) throw InputError("max_min_slack: coefficient size mismatch");
    if (!hint.empty() && hint.size() != dim) throw InputError("max_min_slack: hint has the wrong dimension");
    for (double x : coef)
        if (!std::isfinite(x)) throw InputError("max_min_slack: non-finite coefficient");
    for (double x : rhs)
        if (!std::isfinite(x)) throw InputError("max_min_slack: non-finite right-hand side");

    if (n == 0) {
        SlackLpResult out;
        out.point.assign(dim, 0.0);
        out.value = cap;
        out.achieved = cap;
        return out;
    }

    std::vector<double> slack(n);
    std::vector<double> start(dim, 0.0);
    if (!hint.empty()) start.assign(hint.begin(), hint.end());
    for (std::size_t i = 0; i < n; ++i) slack[i] = row_slack(coef, rhs, dim, i, start);

    // Working set: the last row plus the rows tightest at the hint.
    const std::size_t batch = 2 * (dim + 1);
    std::vector<std::size_t> rows;
    std::vector<char> in(n, 0);
    if (n <= 4 * batch) {
        rows.resize(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        std::fill(in.begin(), in.end(), 1);
    } else {
        rows.push_back(n - 1);
        in[n - 1] = 1;
        std::vector<std::size_t> order(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) order[i] = i;
        std::partial_sort(order.begin(), order.begin() + static_cast<long>(batch), order.end(),
                          [&](std::size_t a, std::size_t b) { return slack[a] < slack[b] || (slack[a] == slack[b] && a < b); });
        for (std::size_t q = 0; q < batch; ++q) rows.push_back(order[q]), in[order[q]] = 1;
    }

    SlackLpResult out;
    int pivots = 0;
    for (;;) {
        out = solve_rows(coef, rhs, dim, cap, rows);
        pivots += out.pivots;
        double achieved = cap;
        std::vector<std::pair<double, std::size_t>> violated;
        double scale = 1.0 + std::abs(out.value);
        for (std::size_t i = 0; i < n; ++i) {
            slack[i] = row_slack(coef, rhs, dim, i, out.point);
            achieved = std::min(achieved, slack[i]);
            if (!in[i] && slack[i] < out.value - 1e-12 * scale) violated.emplace_back(slack[i], i);
        }
        out.achieved = achieved;
        if (violated.empty()) break;
        std::size_t take = std::min(violated.size(), batch);
        std::partial_sort(violated.begin(), violated.begin() + static_cast<long>(take), violated.end());
        for (std::size_t q = 0; q < take; ++q) rows.push_back(violated[q].second), in[violated[q].second] = 1;
    }
    out.pivots = pivots;
    return out;
}

} // namespace npmle
