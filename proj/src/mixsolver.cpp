#include "npmle/mixsolver.hpp"

#include "npmle/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace npmle {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Weighted restricted problem: rows of B are distinct observation patterns
// over the working columns, w their multiplicities.
struct Restricted {
    MatrixXd B;
    VectorXd w;
    std::vector<std::size_t> row_of_group; // representative observation per group
};

Restricted collapse_rows(const BinaryMatrix& A, const std::vector<std::size_t>& cols) {
    const std::size_t n = A.rows();
    const std::size_t m = cols.size();
    const std::size_t wpr = (m + 63) / 64;
    std::vector<std::uint64_t> pat(n * wpr, 0);
    for (std::size_t c = 0; c < m; ++c) {
        A.for_each_in_column(cols[c], [&](std::size_t i) { pat[i * wpr + (c >> 6)] |= std::uint64_t{1} << (c & 63); });
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
        for (std::size_t k = 0; k < wpr; ++k) {
            auto x = pat[a * wpr + k], y = pat[b * wpr + k];
            if (x != y) return x < y;
        }
        return a < b;
    };
    auto same = [&](std::size_t a, std::size_t b) {
        for (std::size_t k = 0; k < wpr; ++k)
            if (pat[a * wpr + k] != pat[b * wpr + k]) return false;
        return true;
    };
    std::sort(order.begin(), order.end(), less);
    Restricted out;
    std::vector<double> weights;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || !same(order[k], order[k - 1])) {
            out.row_of_group.push_back(order[k]);
            weights.push_back(1.0);
        } else {
            weights.back() += 1.0;
        }
    }
    const std::size_t r = weights.size();
    out.B = MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m));
    out.w = Eigen::Map<VectorXd>(weights.data(), static_cast<Eigen::Index>(r));
    for (std::size_t g = 0; g < r; ++g) {
        std::size_t i = out.row_of_group[g];
        for (std::size_t c = 0; c < m; ++c)
            if ((pat[i * wpr + (c >> 6)] >> (c & 63)) & 1u) out.B(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(c)) = 1.0;
    }
    return out;
}

// log of the factor by which 1/g must be shrunk to become dual feasible,
// evaluated at p normalized onto the simplex.  Bounds the mean log-likelihood
// suboptimality of p.
double restricted_gap(const Restricted& R, const VectorXd& p) {
    double total = p.sum();
    if (!(total > 0.0)) return kInf;
    VectorXd g = R.B * (p / total);
    if (g.minCoeff() <= 0.0) return kInf;
    VectorXd t = R.B.transpose() * R.w.cwiseQuotient(g);
    return std::log(std::max(1.0, t.maxCoeff() / R.w.sum()));
}

double max_step(const VectorXd& x, const VectorXd& dx) {
    double a = kInf;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
    return a;
}

struct IpmOutcome {
    VectorXd p;
    double gap = kInf;
    int iterations = 0;
    bool ok = false;
};

// Mehrotra predictor-corrector on the pair
//   A'u + s = W,  u o (Bp) = w,  p o s = mu,   p, s, u > 0.
// The Newton system is reduced to whichever of the row or column space is smaller.
IpmOutcome interior_point(const Restricted& R, double target) {
    const MatrixXd& B = R.B;
    const VectorXd& w = R.w;
    const Eigen::Index r = B.rows(), m = B.cols();
    const double W = w.sum();
    const bool column_space = m <= r;

    VectorXd p = VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    VectorXd g = B * p;
    VectorXd u = w.cwiseQuotient(g);
    VectorXd s = (VectorXd::Constant(m, W) - B.transpose() * u).cwiseMax(0.1 * W);

    IpmOutcome best;
    int best_iter = 0;
    const int max_iter = 300;
    MatrixXd K;
    Eigen::LLT<MatrixXd> llt;
    for (int it = 0; it < max_iter; ++it) {
        double gap = restricted_gap(R, p);
        if (gap < best.gap) {
            best.gap = gap;
            best.p = p / p.sum();
            best_iter = it;
        }
        best.iterations = it;
        if (gap <= target) break;
        if (it - best_iter > 25) break;

        VectorXd rd = B.transpose() * u + s - VectorXd::Constant(m, W);
        VectorXd rg = u.cwiseProduct(g) - w;
        double mu = p.dot(s) / static_cast<double>(m);

        if (column_space) {
            VectorXd d = u.cwiseQuotient(g).cwiseSqrt();
            MatrixXd BD = d.asDiagonal() * B;
            K.setZero(m, m);
            K.selfadjointView<Eigen::Lower>().rankUpdate(BD.transpose());
            K.diagonal() += s.cwiseQuotient(p);
        } else {
            VectorXd d = p.cwiseQuotient(s).cwiseSqrt();
            MatrixXd BD = B * d.asDiagonal();
            K.setZero(r, r);
            K.selfadjointView<Eigen::Lower>().rankUpdate(BD);
            K.diagonal() += g.cwiseQuotient(u);
        }
        llt.compute(K);
        if (llt.info() != Eigen::Success) {
            double ridge = 1e-14 * K.diagonal().cwiseAbs().maxCoeff();
            K.diagonal().array() += ridge;
            llt.compute(K);
            if (llt.info() != Eigen::Success) break;
        }

        auto direction = [&](const VectorXd& rc, VectorXd& dp, VectorXd& du, VectorXd& ds) {
            if (column_space) {
                VectorXd rhs = -rc.cwiseQuotient(p) + rd - B.transpose() * rg.cwiseQuotient(g);
                dp = llt.solve(rhs);
                VectorXd dg = B * dp;
                du = -(rg + u.cwiseProduct(dg)).cwiseQuotient(g);
                ds = -rd - B.transpose() * du;
            } else {
                VectorXd rhs = -rg.cwiseQuotient(u) - B * (-rc + p.cwiseProduct(rd)).cwiseQuotient(s);
                du = llt.solve(rhs);
                ds = -rd - B.transpose() * du;
                dp = (-rc - p.cwiseProduct(ds)).cwiseQuotient(s);
            }
        };
        auto step_limit = [&](const VectorXd& dp, const VectorXd& du, const VectorXd& ds) {
            double a = 1.0;
            a = std::min(a, max_step(p, dp));
            a = std::min(a, max_step(s, ds));
            a = std::min(a, max_step(u, du));
            a = std::min(a, max_step(g, B * dp));
            return a;
        };

        VectorXd dp, du, ds;
        VectorXd rc = p.cwiseProduct(s);
        direction(rc, dp, du, ds);
        double a_aff = step_limit(dp, du, ds);
        double mu_aff = (p + a_aff * dp).dot(s + a_aff * ds) / static_cast<double>(m);
        double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

        rc = p.cwiseProduct(s) + dp.cwiseProduct(ds) - VectorXd::Constant(m, sigma * mu);
        direction(rc, dp, du, ds);
        double a = std::min(1.0, 0.99 * step_limit(dp, du, ds));
        if (!(a > 0.0) || !std::isfinite(a)) break;

        p += a * dp;
        s += a * ds;
        u += a * du;
        g = B * p;
        if (!p.allFinite() || !s.allFinite() || !u.allFinite()) break;
    }
    best.ok = best.gap <= target;
    return best;
}

// Multiplicative-gradient (EM) iterations p_j <- p_j (1/W) sum_r w_r b_rj / g_r.
void em_refine(const Restricted& R, VectorXd& p, double target, int max_iter, int& iterations) {
    const double W = R.w.sum();
    p = p.cwiseMax(0.0);
    p /= p.sum();
    // Leave room to revive columns the interior point drove to zero.
    p = 0.99 * p + VectorXd::Constant(p.size(), 0.01 / static_cast<double>(p.size()));
    for (int it = 0; it < max_iter; ++it) {
        ++iterations;
        VectorXd g = R.B * p;
        VectorXd t = R.B.transpose() * R.w.cwiseQuotient(g);
        if (std::log(std::max(1.0, t.maxCoeff() / W)) <= target) break;
        p = p.cwiseProduct(t) / W;
        p /= p.sum();
    }
}

// Moves p within { p >= 0 : Bp = const, 1'p = 1 } until its support columns
// (with the simplex row) are linearly independent.
void reduce_to_basic(const Restricted& R, VectorXd& p) {
    const Eigen::Index m = p.size();
    for (Eigen::Index j = 0; j < m; ++j)
        if (p[j] < 1e-13) p[j] = 0.0;
    for (int guard = 0; guard < m; ++guard) {
        std::vector<Eigen::Index> S;
        for (Eigen::Index j = 0; j < m; ++j)
            if (p[j] > 0.0) S.push_back(j);
        const auto k = static_cast<Eigen::Index>(S.size());
        if (k <= 1) break;
        MatrixXd M(R.B.rows() + 1, k);
        for (Eigen::Index c = 0; c < k; ++c) {
            M.col(c).head(R.B.rows()) = R.B.col(S[static_cast<std::size_t>(c)]);
            M(R.B.rows(), c) = 1.0;
        }
        Eigen::FullPivLU<MatrixXd> lu(M);
        lu.setThreshold(1e-9);
        if (lu.rank() == k) break;
        VectorXd z = lu.kernel().col(0);
        if (z.maxCoeff() <= 0.0) z = -z;
        double t = kInf;
        Eigen::Index hit = -1;
        for (Eigen::Index c = 0; c < k; ++c) {
            if (z[c] > 1e-12) {
                double ratio = p[S[static_cast<std::size_t>(c)]] / z[c];
                if (ratio < t) {
                    t = ratio;
                    hit = c;
                }
            }
        }
        if (hit < 0) break;
        for (Eigen::Index c = 0; c < k; ++c) {
            auto j = S[static_cast<std::size_t>(c)];
            p[j] = std::max(0.0, p[j] - t * z[c]);
        }
        p[S[static_cast<std::size_t>(hit)]] = 0.0;
    }
    p /= p.sum();
}

} // namespace

double kkt_residual(const BinaryMatrix& A, std::span<const double> p, std::span<const double> q) {
    const std::size_t n = A.rows(), M = A.cols();
    if (p.size() != M || q.size() != n) throw InputError("kkt_residual: dimension mismatch");
    const double nn = static_cast<double>(n);
    double total = 0.0, neg = 0.0;
    for (double x : p) {
        total += x;
        neg = std::max(neg, -x);
    }
    double res = std::max(std::abs(total - 1.0), neg);
    std::vector<double> g = A.times(p);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(g[i] > 0.0) || !(q[i] > 0.0)) return kInf;
        res = std::max(res, std::abs(q[i] * g[i] - 1.0));
    }
    std::vector<double> t = A.transpose_times(q);
    for (std::size_t j = 0; j < M; ++j) {
        res = std::max(res, std::max(0.0, t[j] - nn) / nn);
        res = std::max(res, std::max(0.0, p[j]) * std::abs(nn - t[j]) / nn);
    }
    return res;
}

std::size_t support_size(std::span<const double> p, double threshold) {
    return static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [&](double x) { return x > threshold; }));
}

MixtureSolution solve(const BinaryMatrix& A, const SolveOptions& opts) {
    const std::size_t n = A.rows(), M = A.cols();
    if (n == 0 || M == 0) throw InputError("solve: empty likelihood matrix");
    const std::vector<std::size_t> rc = A.row_counts();
    for (std::size_t i = 0; i < n; ++i)
        if (rc[i] == 0)
            throw InputError("solve: observation row " + std::to_string(i) +
                             " is compatible with no cell (all-zero row)");

    MixtureSolution sol;
    std::vector<double> counts(M);
    for (std::size_t j = 0; j < M; ++j) counts[j] = static_cast<double>(A.column_count(j));

    // Working set: the highest-count columns, plus cover for every row.
    std::vector<char> in_set(M, 0);
    std::vector<std::size_t> work;
    if (M <= opts.initial_columns) {
        work.resize(M);
        std::iota(work.begin(), work.end(), 0);
    } else {
        std::vector<std::size_t> order(M);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
        work.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(opts.initial_columns));
    }
    for (std::size_t j : work) in_set[j] = 1;
    {
        std::vector<char> covered(n, 0);
        for (std::size_t j : work) A.for_each_in_column(j, [&](std::size_t i) { covered[i] = 1; });
        std::vector<std::size_t> best(n, M);
        for (std::size_t j = 0; j < M; ++j) {
            A.for_each_in_column(j, [&](std::size_t i) {
                if (!covered[i] && (best[i] == M || counts[j] > counts[best[i]])) best[i] = j;
            });
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!covered[i] && !in_set[best[i]]) {
                in_set[best[i]] = 1;
                work.push_back(best[i]);
                A.for_each_in_column(best[i], [&](std::size_t k) { covered[k] = 1; });
            }
        }
    }

    std::vector<double> p_full(M, 0.0);
    std::vector<std::string> methods;
    const double violation_tol = 1e-10;
    for (int round = 0; round < 100; ++round) {
        ++sol.rounds;
        std::sort(work.begin(), work.end());
        Restricted R = collapse_rows(A, work);
        IpmOutcome ipm = interior_point(R, opts.target);
        sol.iterations += ipm.iterations;
        VectorXd p = ipm.p;
        std::string method = "ipm";
        if (!ipm.ok && ipm.gap > 1e-9) {
            if (p.size() == 0) p = VectorXd::Constant(static_cast<Eigen::Index>(work.size()), 1.0 / work.size());
            em_refine(R, p, opts.target, opts.max_iter, sol.iterations);
            method = "ipm+em";
        }
        if (opts.basic_solution) reduce_to_basic(R, p);
        methods.push_back(method);

        std::fill(p_full.begin(), p_full.end(), 0.0);
        for (std::size_t c = 0; c < work.size(); ++c) p_full[work[c]] = p[static_cast<Eigen::Index>(c)];
        std::vector<double> g = A.times(p_full);
        std::vector<double> q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = 1.0 / g[i];
        std::vector<double> t = A.transpose_times(q);

        std::vector<std::pair<double, std::size_t>> violators;
        for (std::size_t j = 0; j < M; ++j)
            if (!in_set[j] && t[j] > static_cast<double>(n) * (1.0 + violation_tol)) violators.emplace_back(t[j], j);
        if (violators.empty()) break;
        std::stable_sort(violators.begin(), violators.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        std::size_t add = std::min(violators.size(), std::max<std::size_t>(50, work.size() / 2));
        for (std::size_t k = 0; k < add; ++k) {
            in_set[violators[k].second] = 1;
            work.push_back(violators[k].second);
        }
    }

    auto certify = [&](std::vector<double> p) {
        MixtureSolution s;
        s.p = std::move(p);
        s.g = A.times(s.p);
        s.q.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.q[i] = 1.0 / s.g[i];
        std::vector<double> t = A.transpose_times(s.q);
        double scale = std::max(1.0, *std::max_element(t.begin(), t.end()) / static_cast<double>(n));
        for (auto& x : s.q) x /= scale;
        for (double gi : s.g) s.loglik += std::log(gi);
        s.gap = kkt_residual(A, s.p, s.q);
        return s;
    };
    MixtureSolution best = certify(p_full);
    // Non-strict complementarity leaves O(sqrt(mu)) mass on dual-tight
    // columns; re-solve without the small ones and keep that if it certifies.
    if (opts.polish_below > 0.0) {
        std::vector<std::size_t> keep;
        bool small = false;
        for (std::size_t j = 0; j < M; ++j) {
            if (best.p[j] >= opts.polish_below) keep.push_back(j);
            else if (best.p[j] > 0.0) small = true;
        }
        if (small && !keep.empty()) {
            Restricted R = collapse_rows(A, keep);
            IpmOutcome ipm = interior_point(R, opts.target);
            sol.iterations += ipm.iterations;
            VectorXd p = ipm.p;
            if (p.size() == static_cast<Eigen::Index>(keep.size()) && p.allFinite() && p.sum() > 0.0 &&
                (R.B * p).minCoeff() > 0.0) {
                if (opts.basic_solution) reduce_to_basic(R, p);
                std::vector<double> trimmed(M, 0.0);
                for (std::size_t c = 0; c < keep.size(); ++c) trimmed[keep[c]] = p[static_cast<Eigen::Index>(c)];
                MixtureSolution alt = certify(std::move(trimmed));
                if (alt.gap <= std::max(best.gap, opts.tol) && alt.loglik >= best.loglik - 1e-9) best = std::move(alt);
            }
        }
    }
    sol.p = std::move(best.p);
    sol.g = std::move(best.g);
    sol.q = std::move(best.q);
    sol.loglik = best.loglik;
    sol.mean_loglik = sol.loglik / static_cast<double>(n);
    sol.gap = best.gap;
    sol.converged = sol.gap <= opts.tol;
    sol.method = methods.empty() ? "ipm" : methods.back();
    return sol;
}

double DensityGrid::cell_volume() const {
    double v = 1.0;
    for (std::size_t k = 0; k < spec.resolution.size(); ++k)
        v *= (spec.upper[k] - spec.lower[k]) / static_cast<double>(spec.resolution[k] - 1);
    return v;
}

double DensityGrid::riemann_sum() const {
    return std::accumulate(values.begin(), values.end(), 0.0) * cell_volume();
}

std::vector<double> DensityGrid::point(std::size_t flat) const {
    const std::size_t d = spec.resolution.size();
    std::vector<double> x(d);
    for (std::size_t k = d; k-- > 0;) {
        std::size_t idx = flat % spec.resolution[k];
        flat /= spec.resolution[k];
        x[k] = spec.lower[k] + (spec.upper[k] - spec.lower[k]) * static_cast<double>(idx) /
                                   static_cast<double>(spec.resolution[k] - 1);
    }
    return x;
}

DensityGrid smooth(const std::vector<std::vector<double>>& support, std::span<const double> masses,
                   std::span<const double> variance, const GridSpec& grid) {
    const std::size_t d = variance.size();
    if (support.size() != masses.size()) throw InputError("smooth: support/mass length mismatch");
    if (grid.lower.size() != d || grid.upper.size() != d || grid.resolution.size() != d)
        throw InputError("smooth: grid dimension differs from bandwidth dimension");
    for (double v : variance)
        if (!(v > 0.0)) throw InputError("smooth: bandwidth entries must be positive");
    for (std::size_t k = 0; k < d; ++k)
        if (grid.resolution[k] < 2 || !(grid.upper[k] > grid.lower[k])) throw InputError("smooth: degenerate grid");
    for (const auto& s : support)
        if (s.size() != d) throw InputError("smooth: support point dimension mismatch");

    DensityGrid out;
    out.spec = grid;
    std::size_t total = 1;
    for (auto r : grid.resolution) total *= r;
    out.values.assign(total, 0.0);
    double norm = 1.0;
    for (double v : variance) norm *= 2.0 * M_PI * v;
    norm = 1.0 / std::sqrt(norm);
    for (std::size_t f = 0; f < total; ++f) {
        std::vector<double> x = out.point(f);
        double dens = 0.0;
        for (std::size_t j = 0; j < support.size(); ++j) {
            if (masses[j] == 0.0) continue;
            double e = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                double z = x[k] - support[j][k];
                e += z * z / variance[k];
            }
            dens += masses[j] * std::exp(-0.5 * e);
        }
        out.values[f] = norm * dens;
    }
    return out;
}

double smoothed_halfspace_mass(const std::vector<std::vector<double>>& support, std::span<const double> masses,
                               std::span<const double> variance, std::span<const double> normal,
                               double threshold) {
    if (normal.size() != variance.size()) throw InputError("smoothed_halfspace_mass: dimension mismatch");
    double sd = 0.0;
    for (std::size_t k = 0; k < normal.size(); ++k) sd += normal[k] * normal[k] * variance[k];
    sd = std::sqrt(sd);
    double total = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
        double mean = -threshold;
        for (std::size_t k = 0; k < normal.size(); ++k) mean += normal[k] * support[j][k];
        total += masses[j] * 0.5 * std::erfc(-mean / (sd * std::sqrt(2.0)));
    }
    return total;
}

double grid_halfspace_mass(const DensityGrid& grid, std::span<const double> normal, double threshold) {
    double sum = 0.0;
    for (std::size_t f = 0; f < grid.values.size(); ++f) {
        std::vector<double> x = grid.point(f);
        double s = -threshold;
        for (std::size_t k = 0; k < x.size(); ++k) s += normal[k] * x[k];
        if (s >= 0.0) sum += grid.values[f];
    }
    return sum * grid.cell_volume();
}

} // namespace npmle
