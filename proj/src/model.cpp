#include "npmle/model.hpp"

#include "npmle/error.hpp"
#include "npmle/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace npmle {

void Dataset::validate() const {
    const std::size_t n = y.size();
    if (n == 0) throw InputError("dataset is empty");
    if (v.size() != n || static_cast<std::size_t>(z.rows()) != n)
        throw InputError("dataset columns have different lengths");
    if (w.cols() > 0 && static_cast<std::size_t>(w.rows()) != n) throw InputError("w has the wrong number of rows");
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] != 0 && y[i] != 1) throw InputError("y must be 0/1 (row " + std::to_string(i) + ")");
        if (!std::isfinite(v[i])) throw InputError("v is not finite (row " + std::to_string(i) + ")");
    }
    if (!z.allFinite()) throw InputError("z has non-finite entries");
    if (w.cols() > 0 && !w.allFinite()) throw InputError("w has non-finite entries");
    std::set<double> distinct(v.begin(), v.end());
    if (distinct.size() < dim())
        throw InputError("v takes " + std::to_string(distinct.size()) + " distinct values; at least " +
                         std::to_string(dim()) + " are needed for dimension " + std::to_string(dim()));
}

Dataset normalize(const Eigen::MatrixXd& raw_x, std::span<const int> y, const NormalizeConvention& conv,
                  const Eigen::MatrixXd& w) {
    const long n = raw_x.rows(), cols = raw_x.cols();
    if (cols < 2) throw InputError("normalize: need at least two design columns");
    if (static_cast<std::size_t>(n) != y.size()) throw InputError("normalize: x and y lengths differ");
    const long known = conv.known < 0 ? cols - 1 : conv.known;
    const long scale = conv.scale;
    if (known >= cols || scale < 0 || scale >= cols || known == scale)
        throw InputError("normalize: invalid column designation");

    Dataset out;
    out.y.assign(y.begin(), y.end());
    out.z.resize(n, cols - 2);
    out.v.resize(static_cast<std::size_t>(n));
    out.w = w.cols() > 0 ? w : Eigen::MatrixXd(n, 0);
    for (long i = 0; i < n; ++i) {
        double s = raw_x(i, scale);
        if (s == 0.0 || !std::isfinite(s))
            throw InputError("normalize: zero entry in column " + std::to_string(scale) + " at row " + std::to_string(i));
        long c = 0;
        for (long k = 0; k < cols; ++k)
            if (k != known && k != scale) out.z(i, c++) = raw_x(i, k) / s;
        out.v[static_cast<std::size_t>(i)] = -raw_x(i, known) / s;
        if (out.w.cols() > 0) out.w.row(i) /= s;
        if (s < 0.0) out.y[static_cast<std::size_t>(i)] = 1 - out.y[static_cast<std::size_t>(i)];
    }
    return out;
}

std::vector<std::size_t> ModelFit::support(double threshold) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < cells.size(); ++j)
        if (cells[j].mass > threshold) out.push_back(j);
    return out;
}

std::vector<Hyperplane> hyperplanes_at(const Dataset& data, std::span<const double> theta) {
    if (theta.size() != data.covariates())
        throw InputError("theta has length " + std::to_string(theta.size()) + ", expected " +
                         std::to_string(data.covariates()));
    const std::size_t n = data.size(), dz = static_cast<std::size_t>(data.z.cols());
    std::vector<Hyperplane> hs;
    hs.reserve(n);
    std::vector<double> z(dz);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < dz; ++k) z[k] = data.z(static_cast<long>(i), static_cast<long>(k));
        double t = data.v[i];
        for (std::size_t k = 0; k < theta.size(); ++k) t -= data.w(static_cast<long>(i), static_cast<long>(k)) * theta[k];
        hs.push_back(Hyperplane::make(z, t, data.y[i]));
    }
    return hs;
}

ModelFit fit_given_theta(const Dataset& data, std::span<const double> theta, const FitOptions& opts) {
    data.validate();
    ModelFit fit;
    fit.theta.assign(theta.begin(), theta.end());
    fit.dim = data.dim();
    fit.hyperplanes = hyperplanes_at(data, theta);

    bool perturb = opts.perturb;
    if (fit.dim > 3 && !perturb) {
        perturb = true;
        fit.warnings.push_back("dimension " + std::to_string(fit.dim) +
                               " > 3: thresholds perturbed; degenerate inputs are not enumerated exactly");
    }
    if (perturb) fit.hyperplanes = perturb_thresholds(fit.hyperplanes, opts.enumerate.seed);

    Arrangement arr = enumerate(fit.hyperplanes, opts.method, opts.enumerate);
    AdjacencyMatrix adj = build_adjacency(arr);
    std::vector<std::size_t> keep;
    if (opts.prune) {
        keep = locally_maximal(arr, adj);
    } else {
        keep.resize(arr.cells.size());
        std::iota(keep.begin(), keep.end(), 0);
    }
    fit.M = arr.cells.size();
    fit.n_maximal = opts.prune ? keep.size() : locally_maximal(arr, adj).size();

    MixtureSolution sol = solve(adj.entries.select_columns(keep), opts.solve);
    fit.loglik = sol.loglik;
    fit.mean_loglik = sol.mean_loglik;
    fit.gap = sol.gap;
    fit.converged = sol.converged;
    fit.cells.reserve(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        Cell& c = arr.cells[keep[k]];
        fit.cells.push_back(FittedCell{std::move(c.interior), sol.p[k], c.eps, c.count, std::move(c.sign)});
    }
    return fit;
}

namespace {

// (loglik, theta) ordering: larger loglik wins, ties go to the lexicographically
// smaller theta.
bool better(double la, const std::vector<double>& ta, double lb, const std::vector<double>& tb) {
    if (la != lb) return la > lb;
    return ta < tb;
}

} // namespace

ModelFit profile_fit(const Dataset& data, std::span<const double> lower, std::span<const double> upper,
                     const FitOptions& fit_opts, const ProfileOptions& opts) {
    const std::size_t p = data.covariates();
    if (lower.size() != p || upper.size() != p) throw InputError("profile_fit: box dimension does not match w");
    for (std::size_t k = 0; k < p; ++k)
        if (!(lower[k] <= upper[k]) || !std::isfinite(lower[k]) || !std::isfinite(upper[k]))
            throw InputError("profile_fit: invalid box");
    if (p == 0) {
        ModelFit fit = fit_given_theta(data, {}, fit_opts);
        fit.profile.push_back({{}, fit.loglik});
        return fit;
    }

    const std::size_t g = std::max<std::size_t>(opts.grid_points, 1);
    std::size_t grid_total = 1;
    for (std::size_t k = 0; k < p; ++k) grid_total *= g;
    const std::size_t budget = opts.max_evaluations ? opts.max_evaluations : grid_total + opts.refine;

    std::vector<ProfilePoint> profile;
    std::vector<double> best_theta;
    double best = -std::numeric_limits<double>::infinity();
    auto record = [&](const std::vector<double>& th, double ll) {
        profile.push_back({th, ll});
        if (best_theta.empty() || better(ll, th, best, best_theta)) {
            best = ll;
            best_theta = th;
        }
    };

    // Grid stage (parallel, merged in grid order).
    std::size_t n_grid = std::min(grid_total, budget);
    std::vector<std::vector<double>> grid(n_grid, std::vector<double>(p));
    for (std::size_t idx = 0; idx < n_grid; ++idx) {
        std::size_t r = idx;
        for (std::size_t k = p; k-- > 0;) {
            std::size_t i = r % g;
            r /= g;
            grid[idx][k] = g == 1 ? 0.5 * (lower[k] + upper[k])
                                  : lower[k] + (upper[k] - lower[k]) * static_cast<double>(i) / static_cast<double>(g - 1);
        }
    }
    std::vector<double> ll(n_grid);
    parallel_for(n_grid, opts.threads, [&](std::size_t i) { ll[i] = fit_given_theta(data, grid[i], fit_opts).loglik; });
    for (std::size_t i = 0; i < n_grid; ++i) record(grid[i], ll[i]);

    // Nelder-Mead on the box, started from the best grid point.
    auto clamp = [&](std::vector<double> th) {
        for (std::size_t k = 0; k < p; ++k) th[k] = std::clamp(th[k], lower[k], upper[k]);
        return th;
    };
    auto eval = [&](const std::vector<double>& th) {
        double v = fit_given_theta(data, th, fit_opts).loglik;
        record(th, v);
        return -v;
    };
    bool converged = grid_total <= budget && opts.refine == 0;
    if (profile.size() < budget && opts.refine > 0) {
        std::vector<std::vector<double>> simplex{best_theta};
        std::vector<double> f{-best};
        for (std::size_t k = 0; k < p && profile.size() < budget; ++k) {
            std::vector<double> th = best_theta;
            double step = 0.5 * (upper[k] - lower[k]) / static_cast<double>(std::max<std::size_t>(g - 1, 1));
            if (step == 0.0) step = 1e-3;
            th[k] = th[k] + step <= upper[k] ? th[k] + step : th[k] - step;
            th = clamp(th);
            simplex.push_back(th);
            f.push_back(eval(th));
        }
        double width = 0.0;
        for (std::size_t k = 0; k < p; ++k) width = std::max(width, upper[k] - lower[k]);
        const double xtol = 1e-6 * std::max(width, 1.0);

        while (simplex.size() == p + 1 && profile.size() < budget) {
            std::vector<std::size_t> ord(p + 1);
            std::iota(ord.begin(), ord.end(), 0);
            std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
                return f[a] != f[b] ? f[a] < f[b] : simplex[a] < simplex[b];
            });
            std::vector<std::vector<double>> s2;
            std::vector<double> f2;
            for (auto o : ord) {
                s2.push_back(simplex[o]);
                f2.push_back(f[o]);
            }
            simplex.swap(s2);
            f.swap(f2);

            double size = 0.0;
            for (std::size_t j = 1; j <= p; ++j)
                for (std::size_t k = 0; k < p; ++k) size = std::max(size, std::abs(simplex[j][k] - simplex[0][k]));
            if (size <= xtol) {
                converged = true;
                break;
            }

            std::vector<double> centroid(p, 0.0);
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t k = 0; k < p; ++k) centroid[k] += simplex[j][k] / static_cast<double>(p);
            auto along = [&](double t) {
                std::vector<double> th(p);
                for (std::size_t k = 0; k < p; ++k) th[k] = centroid[k] + t * (simplex[p][k] - centroid[k]);
                return clamp(th);
            };
            std::vector<double> xr = along(-1.0);
            double fr = eval(xr);
            if (fr < f[0]) {
                if (profile.size() >= budget) {
                    simplex[p] = xr, f[p] = fr;
                    break;
                }
                std::vector<double> xe = along(-2.0);
                double fe = eval(xe);
                if (fe < fr) simplex[p] = xe, f[p] = fe;
                else simplex[p] = xr, f[p] = fr;
            } else if (fr < f[p - 1]) {
                simplex[p] = xr, f[p] = fr;
            } else {
                if (profile.size() >= budget) break;
                std::vector<double> xc = fr < f[p] ? along(-0.5) : along(0.5);
                double fc = eval(xc);
                if (fc < std::min(fr, f[p])) {
                    simplex[p] = xc, f[p] = fc;
                } else {
                    for (std::size_t j = 1; j <= p && profile.size() < budget; ++j) {
                        for (std::size_t k = 0; k < p; ++k) simplex[j][k] = simplex[0][k] + 0.5 * (simplex[j][k] - simplex[0][k]);
                        f[j] = eval(simplex[j]);
                    }
                }
            }
        }
    }

    ModelFit fit = fit_given_theta(data, best_theta, fit_opts);
    fit.profile = std::move(profile);
    fit.budget_exhausted = !converged;
    return fit;
}

} // namespace npmle
