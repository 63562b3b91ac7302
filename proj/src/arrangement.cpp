#include "npmle/arrangement.hpp"

#include "npmle/error.hpp"
#include "npmle/lp.hpp"
#include "npmle/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

namespace npmle {

Hyperplane Hyperplane::make(std::span<const double> z, double threshold, int y) {
    Hyperplane h;
    h.normal.reserve(z.size() + 1);
    h.normal.push_back(1.0);
    h.normal.insert(h.normal.end(), z.begin(), z.end());
    h.threshold = threshold;
    h.y = y;
    return h;
}

double Hyperplane::eval(std::span<const double> eta) const {
    double s = -threshold;
    for (std::size_t k = 0; k < normal.size(); ++k) s += normal[k] * eta[k];
    return s;
}

void Hyperplane::validate() const {
    if (normal.empty()) throw InputError("hyperplane has empty normal");
    if (normal[0] != 1.0) throw InputError("hyperplane normal must start with an intercept entry of exactly 1");
    for (double x : normal)
        if (!std::isfinite(x)) throw InputError("hyperplane normal has a non-finite entry");
    if (!std::isfinite(threshold)) throw InputError("hyperplane threshold is not finite");
    if (y != 0 && y != 1) throw InputError("response must be 0 or 1");
}

namespace {

std::size_t validate_all(std::span<const Hyperplane> hs) {
    if (hs.empty()) throw InputError("arrangement needs at least one hyperplane");
    const std::size_t d = hs[0].dim();
    if (d == 0) throw InputError("arrangement dimension must be at least 1");
    for (const auto& h : hs) {
        h.validate();
        if (h.dim() != d) throw InputError("hyperplanes have mixed dimensions");
    }
    return d;
}

// LP for the first `rows` hyperplanes with the given sign pattern.  `hint`
// seeds the LP's working set with the rows tightest there.
InteriorPoint solve_pattern(const SignVector& signs, std::span<const Hyperplane> hs, std::size_t rows,
                            std::span<const double> hint = {}) {
    const std::size_t d = hs[0].dim();
    std::vector<double> coef(rows * d), rhs(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double s = signs.positive(i) ? 1.0 : -1.0;
        for (std::size_t k = 0; k < d; ++k) coef[i * d + k] = s * hs[i].normal[k];
        rhs[i] = s * hs[i].threshold;
    }
    SlackLpResult lp = max_min_slack(coef, rhs, d, 1.0, hint);
    return InteriorPoint{std::move(lp.point), std::max(0.0, lp.achieved)};
}

std::vector<double> initial_point(std::span<const Hyperplane> hs, std::uint64_t seed, double tol) {
    const std::size_t d = hs[0].dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> eta(d);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (auto& x : eta) x = gauss(rng);
        bool clear = std::all_of(hs.begin(), hs.end(), [&](const Hyperplane& h) { return std::abs(h.eval(eta)) > tol; });
        if (clear) return eta;
    }
    throw NumericalError("could not draw an initial point off every hyperplane");
}

double min_slack(const Cell& c, std::span<const Hyperplane> hs) {
    double e = 1.0;
    for (std::size_t i = 0; i < hs.size(); ++i) e = std::min(e, (c.sign.positive(i) ? 1.0 : -1.0) * hs[i].eval(c.interior));
    return e;
}

void finalize(Arrangement& arr) {
    for (auto& c : arr.cells) c.eps = std::max(0.0, min_slack(c, arr.hyperplanes));
}

// First hyperplane: the initial point's side plus one LP for the other half.
void start(Arrangement& arr, const EnumerateOptions& opts) {
    std::span<const Hyperplane> hs = arr.hyperplanes;
    std::vector<double> eta = initial_point(hs, opts.seed, opts.tol);
    bool side = hs[0].eval(eta) > 0.0;
    Cell first;
    first.sign = SignVector(1, side);
    first.interior = eta;
    SignVector other(1, !side);
    InteriorPoint ip = solve_pattern(other, hs, 1);
    arr.cells.push_back(std::move(first));
    arr.cells.push_back(Cell{other, std::move(ip.point), ip.eps, 0});
    arr.stats.lps_per_step.assign(hs.size(), 0);
    arr.stats.lps_per_step[0] = 1;
    arr.stats.total_lps = 1;
}

// One incremental step adding hyperplane k.  Cells flagged in `candidate` get
// an LP for the far side of H_k; cells whose interior point lies within tol of
// H_k are re-solved on both sides.
void add_hyperplane(Arrangement& arr, std::size_t k, const std::vector<char>& candidate, const EnumerateOptions& opts) {
    std::span<const Hyperplane> hs = arr.hyperplanes;
    const Hyperplane& h = hs[k];
    const std::size_t old = arr.cells.size();

    struct Task {
        std::size_t cell;
        bool side;
        bool both; // near-touching resolve
    };
    std::vector<Task> tasks;
    std::vector<double> value(old);
    for (std::size_t l = 0; l < old; ++l) {
        value[l] = h.eval(arr.cells[l].interior);
        if (std::abs(value[l]) <= opts.tol) {
            tasks.push_back({l, true, true});
            tasks.push_back({l, false, true});
        } else if (candidate[l]) {
            tasks.push_back({l, !(value[l] > 0.0), false});
        }
    }

    std::vector<InteriorPoint> results(tasks.size());
    parallel_for(tasks.size(), opts.threads, [&](std::size_t t) {
        SignVector pattern = arr.cells[tasks[t].cell].sign;
        pattern.push_back(tasks[t].side);
        results[t] = solve_pattern(pattern, hs, k + 1, arr.cells[tasks[t].cell].interior);
    });

    std::size_t lps = tasks.size();
    for (std::size_t l = 0; l < old; ++l) {
        if (std::abs(value[l]) > opts.tol) arr.cells[l].sign.push_back(value[l] > 0.0);
    }
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const Task& task = tasks[t];
        if (task.both) {
            ++arr.stats.resolves;
            const InteriorPoint& plus = results[t];
            const InteriorPoint& minus = results[t + 1];
            Cell& c = arr.cells[task.cell];
            bool plus_ok = plus.eps > opts.tol, minus_ok = minus.eps > opts.tol;
            if (plus_ok && minus_ok) {
                Cell split{c.sign, minus.point, minus.eps, 0};
                split.sign.push_back(false);
                c.sign.push_back(true);
                c.interior = plus.point;
                arr.cells.push_back(std::move(split));
            } else if (plus_ok || minus_ok) {
                c.sign.push_back(plus_ok);
                c.interior = plus_ok ? plus.point : minus.point;
            } else {
                c.sign.push_back(value[task.cell] > 0.0);
            }
            ++t;
            continue;
        }
        if (results[t].eps > opts.tol) {
            Cell fresh{arr.cells[task.cell].sign, std::move(results[t].point), results[t].eps, 0};
            fresh.sign.flip(k);
            arr.cells.push_back(std::move(fresh));
        }
    }
    arr.stats.lps_per_step[k] = lps;
    arr.stats.total_lps += lps;
}

bool same_line(const Hyperplane& a, const Hyperplane& b) {
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x) + std::abs(y)); };
    for (std::size_t q = 0; q < a.normal.size(); ++q)
        if (!close(a.normal[q], b.normal[q])) return false;
    return close(a.threshold, b.threshold);
}

} // namespace

InteriorPoint interior_point(const SignVector& signs, std::span<const Hyperplane> hyperplanes) {
    if (signs.size() != hyperplanes.size()) throw InputError("interior_point: sign vector length differs from hyperplane count");
    if (hyperplanes.empty()) return InteriorPoint{{}, 1.0};
    validate_all(hyperplanes);
    return solve_pattern(signs, hyperplanes, hyperplanes.size());
}

Arrangement enumerate_ie(std::span<const Hyperplane> hyperplanes, const EnumerateOptions& opts) {
    Arrangement arr;
    arr.dim = validate_all(hyperplanes);
    arr.hyperplanes.assign(hyperplanes.begin(), hyperplanes.end());
    start(arr, opts);
    for (std::size_t k = 1; k < arr.hyperplanes.size(); ++k) {
        std::vector<char> all(arr.cells.size(), 1);
        add_hyperplane(arr, k, all, opts);
    }
    finalize(arr);
    return arr;
}

Arrangement enumerate_aie(std::span<const Hyperplane> hyperplanes, const EnumerateOptions& opts) {
    Arrangement arr;
    arr.dim = validate_all(hyperplanes);
    if (arr.dim != 2) throw InputError("enumerate_aie requires d = 2, got d = " + std::to_string(arr.dim));
    arr.hyperplanes.assign(hyperplanes.begin(), hyperplanes.end());
    const auto& hs = arr.hyperplanes;
    const std::size_t n = hs.size();
    start(arr, opts);

    ZobristKeys keys(n);
    std::vector<std::uint64_t> hash(arr.cells.size());
    for (std::size_t l = 0; l < arr.cells.size(); ++l) hash[l] = keys.hash(arr.cells[l].sign);
    HashIndex index;

    for (std::size_t k = 1; k < n; ++k) {
        const double zk = hs[k].normal[1], vk = hs[k].threshold;

        // Case 1: a repeated line creates no cells; copy the earlier sign.
        std::size_t dup = k;
        for (std::size_t j = 0; j < k && dup == k; ++j)
            if (same_line(hs[j], hs[k])) dup = j;
        if (dup != k) {
            for (std::size_t l = 0; l < arr.cells.size(); ++l) {
                bool b = arr.cells[l].sign.positive(dup);
                arr.cells[l].sign.push_back(b);
                if (b) hash[l] ^= keys.key(k);
            }
            ++arr.stats.duplicates;
            continue;
        }

        index.clear(arr.cells.size());
        for (std::size_t l = 0; l < arr.cells.size(); ++l) index.insert(hash[l], static_cast<std::uint32_t>(l));

        std::vector<char> candidate(arr.cells.size(), 0);
        std::vector<char> done(k, 0);
        bool any_vertex = false;
        for (std::size_t j = 0; j < k; ++j) {
            const double zj = hs[j].normal[1], vj = hs[j].threshold;
            double det = zk - zj;
            // Case 2: parallel lines contribute no vertex.
            if (std::abs(det) < 1e-12) continue;
            any_vertex = true;
            if (done[j]) continue;
            const double t1 = (vk - vj) / det;
            const double t0 = vk - zk * t1;

            SignVector base(k);
            std::uint64_t h = 0;
            std::vector<std::size_t> zeros;
            for (std::size_t i = 0; i < k; ++i) {
                double val = t0 + hs[i].normal[1] * t1 - hs[i].threshold;
                double tol = 1e-9 * (1.0 + std::abs(t0) + std::abs(hs[i].normal[1] * t1) + std::abs(hs[i].threshold));
                if (i == j || std::abs(val) <= tol) {
                    zeros.push_back(i);
                    done[i] = 1;
                } else if (val > 0.0) {
                    base.set(i, true);
                    h ^= keys.key(i);
                }
            }

            // Case 3: every line through the vertex leaves a zero; expand them over {+-1}^a.
            const std::size_t a = zeros.size();
            if (a <= 16) {
                for (std::uint32_t mask = 0; mask < (1u << a); ++mask) {
                    SignVector cand = base;
                    std::uint64_t hc = h;
                    for (std::size_t b = 0; b < a; ++b) {
                        if ((mask >> b) & 1u) {
                            cand.set(zeros[b], true);
                            hc ^= keys.key(zeros[b]);
                        }
                    }
                    index.find_if(hc, [&](std::uint32_t l) {
                        if (arr.cells[l].sign != cand) return false;
                        candidate[l] = 1;
                        return true;
                    });
                }
            } else {
                SignVector known(k, true);
                for (std::size_t z : zeros) known.set(z, false);
                const auto& kw = known.words();
                const auto& bw = base.words();
                for (std::size_t l = 0; l < arr.cells.size(); ++l) {
                    const auto& cw = arr.cells[l].sign.words();
                    bool match = true;
                    for (std::size_t q = 0; q < kw.size() && match; ++q) match = ((cw[q] ^ bw[q]) & kw[q]) == 0;
                    if (match) candidate[l] = 1;
                }
            }
        }
        // All earlier lines parallel to H_k: no vertex to locate the crossed cell.
        if (!any_vertex) std::fill(candidate.begin(), candidate.end(), 1);

        const std::size_t old = arr.cells.size();
        add_hyperplane(arr, k, candidate, opts);
        for (std::size_t l = 0; l < old; ++l)
            if (arr.cells[l].sign.positive(k)) hash[l] ^= keys.key(k);
        for (std::size_t l = old; l < arr.cells.size(); ++l) hash.push_back(keys.hash(arr.cells[l].sign));
    }
    finalize(arr);
    return arr;
}

Arrangement enumerate_bruteforce(std::span<const Hyperplane> hyperplanes, const EnumerateOptions& opts) {
    Arrangement arr;
    arr.dim = validate_all(hyperplanes);
    const std::size_t n = hyperplanes.size();
    if (n > 20) throw InputError("enumerate_bruteforce refuses n > 20 (2^n LPs), got n = " + std::to_string(n));
    arr.hyperplanes.assign(hyperplanes.begin(), hyperplanes.end());
    const std::size_t total = std::size_t{1} << n;
    std::vector<InteriorPoint> results(total);
    parallel_for(total, opts.threads, [&](std::size_t mask) {
        SignVector s(n);
        for (std::size_t i = 0; i < n; ++i) s.set(i, (mask >> i) & 1u);
        results[mask] = solve_pattern(s, arr.hyperplanes, n);
    });
    for (std::size_t mask = 0; mask < total; ++mask) {
        if (results[mask].eps <= opts.tol) continue;
        SignVector s(n);
        for (std::size_t i = 0; i < n; ++i) s.set(i, (mask >> i) & 1u);
        arr.cells.push_back(Cell{std::move(s), std::move(results[mask].point), results[mask].eps, 0});
    }
    arr.stats.total_lps = total;
    finalize(arr);
    return arr;
}

Arrangement enumerate_line(std::span<const Hyperplane> hyperplanes, const EnumerateOptions& opts) {
    Arrangement arr;
    arr.dim = validate_all(hyperplanes);
    if (arr.dim != 1) throw InputError("enumerate_line requires d = 1");
    arr.hyperplanes.assign(hyperplanes.begin(), hyperplanes.end());
    const std::size_t n = hyperplanes.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = hyperplanes[i].threshold;
    std::sort(v.begin(), v.end());
    // Breakpoints closer than 2 tol bound an interval with LP value <= tol.
    std::vector<double> u;
    for (double x : v)
        if (u.empty() || x - u.back() > 2.0 * opts.tol) u.push_back(x);
    std::vector<double> points;
    points.push_back(u.front() - 1.0);
    for (std::size_t a = 0; a + 1 < u.size(); ++a) points.push_back(0.5 * (u[a] + u[a + 1]));
    points.push_back(u.back() + 1.0);
    for (double eta : points) {
        Cell c;
        c.sign = SignVector(n);
        c.interior = {eta};
        for (std::size_t i = 0; i < n; ++i) c.sign.set(i, eta - hyperplanes[i].threshold > 0.0);
        arr.cells.push_back(std::move(c));
    }
    arr.stats.lps_per_step.assign(n, 0);
    finalize(arr);
    return arr;
}

Arrangement enumerate(std::span<const Hyperplane> hyperplanes, Method method, const EnumerateOptions& opts) {
    std::size_t d = validate_all(hyperplanes);
    switch (method) {
    case Method::Incremental: return enumerate_ie(hyperplanes, opts);
    case Method::Accelerated: return enumerate_aie(hyperplanes, opts);
    case Method::BruteForce: return enumerate_bruteforce(hyperplanes, opts);
    case Method::Auto: break;
    }
    if (d == 1) return enumerate_line(hyperplanes, opts);
    if (d == 2) return enumerate_aie(hyperplanes, opts);
    return enumerate_ie(hyperplanes, opts);
}

std::vector<Hyperplane> perturb_thresholds(std::span<const Hyperplane> hyperplanes, std::uint64_t seed, double magnitude) {
    std::vector<Hyperplane> out(hyperplanes.begin(), hyperplanes.end());
    double scale = 1.0;
    for (const auto& h : out) scale = std::max(scale, std::abs(h.threshold));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (auto& h : out) h.threshold += magnitude * scale * unif(rng);
    return out;
}

AdjacencyMatrix build_adjacency(const Arrangement& arr) {
    const std::size_t n = arr.hyperplanes.size();
    SignVector ymask(n);
    for (std::size_t i = 0; i < n; ++i) ymask.set(i, arr.hyperplanes[i].y == 1);
    SignVector valid(n, true);
    std::vector<SignVector> columns;
    columns.reserve(arr.cells.size());
    AdjacencyMatrix adj;
    adj.column_counts.reserve(arr.cells.size());
    for (const auto& c : arr.cells) {
        if (c.sign.size() != n) throw InputError("build_adjacency: cell sign length differs from hyperplane count");
        SignVector col(n);
        auto& w = col.mutable_words();
        for (std::size_t q = 0; q < w.size(); ++q)
            w[q] = ~(c.sign.words()[q] ^ ymask.words()[q]) & valid.words()[q];
        adj.column_counts.push_back(col.count_positive());
        columns.push_back(std::move(col));
    }
    adj.entries = BinaryMatrix(n, columns);
    return adj;
}

AdjacencyMatrix build_adjacency(Arrangement& arr) {
    AdjacencyMatrix adj = build_adjacency(static_cast<const Arrangement&>(arr));
    for (std::size_t j = 0; j < arr.cells.size(); ++j) arr.cells[j].count = adj.column_counts[j];
    return adj;
}

std::vector<std::size_t> locally_maximal(const Arrangement& arr, const AdjacencyMatrix& adj) {
    const std::size_t n = arr.hyperplanes.size();
    const std::size_t M = arr.cells.size();
    ZobristKeys keys(n);
    std::vector<std::uint64_t> hash(M);
    HashIndex index(M);
    for (std::size_t j = 0; j < M; ++j) {
        hash[j] = keys.hash(arr.cells[j].sign);
        index.insert(hash[j], static_cast<std::uint32_t>(j));
    }
    auto differs_only_at = [](const SignVector& a, const SignVector& b, std::size_t i) {
        const auto& aw = a.words();
        const auto& bw = b.words();
        for (std::size_t q = 0; q < aw.size(); ++q) {
            std::uint64_t expect = (q == (i >> 6)) ? (std::uint64_t{1} << (i & 63)) : 0;
            if ((aw[q] ^ bw[q]) != expect) return false;
        }
        return true;
    };
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < M; ++j) {
        const std::size_t cj = adj.column_counts[j];
        bool maximal = true;
        // Crossing H_i changes the count by exactly one: up when cell j sits on
        // the side inconsistent with y_i, down otherwise.  Only the former can
        // beat c_j.
        for (std::size_t i = 0; i < n && maximal; ++i) {
            if (adj.entries.get(i, j)) continue;
            index.find_if(hash[j] ^ keys.key(i), [&](std::uint32_t l) {
                if (!differs_only_at(arr.cells[l].sign, arr.cells[j].sign, i)) return false;
                if (adj.column_counts[l] > cj) maximal = false;
                return true;
            });
        }
        if (maximal) out.push_back(j);
    }
    return out;
}

std::vector<std::size_t> max_score_cells(const AdjacencyMatrix& adj) {
    std::vector<std::size_t> out;
    if (adj.column_counts.empty()) return out;
    std::size_t best = *std::max_element(adj.column_counts.begin(), adj.column_counts.end());
    for (std::size_t j = 0; j < adj.column_counts.size(); ++j)
        if (adj.column_counts[j] == best) out.push_back(j);
    return out;
}

void write_csv(std::ostream& out, const Arrangement& arr) {
    out << "cell_id,eps";
    for (std::size_t k = 0; k < arr.dim; ++k) out << ",eta" << (k + 1);
    out << ",count,sign_hex\n";
    auto old = out.precision(17);
    for (std::size_t j = 0; j < arr.cells.size(); ++j) {
        const Cell& c = arr.cells[j];
        out << j << ',' << c.eps;
        for (double x : c.interior) out << ',' << x;
        out << ',' << c.count << ',' << c.sign.to_hex() << '\n';
    }
    out.precision(old);
}

} // namespace npmle
