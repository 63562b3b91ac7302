#include "npmle/effects.hpp"

#include "npmle/error.hpp"
#include "npmle/lp.hpp"

#include <algorithm>
#include <cmath>

namespace npmle {

namespace {

void check_query(const ModelFit& fit, std::span<const double> z0, double v0) {
    if (z0.size() + 1 != fit.dim)
        throw InputError("query has " + std::to_string(z0.size()) + " covariates, expected " + std::to_string(fit.dim - 1));
    for (double x : z0)
        if (!std::isfinite(x)) throw InputError("query covariate is not finite");
    if (!std::isfinite(v0)) throw InputError("query threshold is not finite");
}

// LP value for the cell intersected with one side of the query.
double side_eps(const ModelFit& fit, const FittedCell& cell, std::span<const double> z0, double v0, double side) {
    const std::size_t d = fit.dim, n = fit.hyperplanes.size();
    std::vector<double> coef((n + 1) * d), rhs(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double s = cell.sign.positive(i) ? 1.0 : -1.0;
        for (std::size_t k = 0; k < d; ++k) coef[i * d + k] = s * fit.hyperplanes[i].normal[k];
        rhs[i] = s * fit.hyperplanes[i].threshold;
    }
    coef[n * d] = side;
    for (std::size_t k = 1; k < d; ++k) coef[n * d + k] = side * z0[k - 1];
    rhs[n] = side * v0;
    return max_min_slack(coef, rhs, d, 1.0, cell.interior).achieved;
}

} // namespace

std::string to_string(EffectKind kind) {
    switch (kind) {
    case EffectKind::Level: return "level";
    case EffectKind::Fare: return "fare";
    case EffectKind::Time: return "time";
    }
    return "level";
}

EffectKind parse_effect_kind(const std::string& name) {
    if (name == "level") return EffectKind::Level;
    if (name == "fare") return EffectKind::Fare;
    if (name == "time") return EffectKind::Time;
    throw InputError("unknown effect kind '" + name + "' (expected level, fare or time)");
}

CellSide classify(const ModelFit& fit, std::size_t j, std::span<const double> z0, double v0) {
    check_query(fit, z0, v0);
    const FittedCell& cell = fit.cells.at(j);
    bool plus = side_eps(fit, cell, z0, v0, 1.0) > kInteriorTol;
    bool minus = side_eps(fit, cell, z0, v0, -1.0) > kInteriorTol;
    if (plus && minus) return CellSide::Crossed;
    if (plus) return CellSide::Inside;
    if (minus) return CellSide::Outside;
    throw NumericalError("cell " + std::to_string(j) + " has no interior on either side of the query");
}

EffectBound prob_bounds(const ModelFit& fit, std::span<const double> z0, double v0, const BoundOptions& opts) {
    check_query(fit, z0, v0);
    double total = 0.0, inside = 0.0, crossed = 0.0;
    for (std::size_t j = 0; j < fit.cells.size(); ++j) {
        double m = fit.cells[j].mass;
        if (!(m > opts.mass_threshold)) continue;
        total += m;
        switch (classify(fit, j, z0, v0)) {
        case CellSide::Inside: inside += m; break;
        case CellSide::Crossed: crossed += m; break;
        case CellSide::Outside: break;
        }
    }
    EffectBound b;
    b.z0.assign(z0.begin(), z0.end());
    b.v0 = v0;
    if (total > 0.0) {
        b.lower = std::clamp(inside / total, 0.0, 1.0);
        b.upper = std::clamp((inside + crossed) / total, b.lower, 1.0);
    }
    return b;
}

EffectBound marginal_effect(const ModelFit& fit, std::span<const double> z0, double v0, double delta, EffectKind kind,
                            const BoundOptions& opts, std::size_t coordinate) {
    if (!(delta >= 0.0)) throw InputError("marginal effect step must be nonnegative");
    EffectBound base = prob_bounds(fit, z0, v0, opts);
    if (kind == EffectKind::Level) return base;
    std::vector<double> z1(z0.begin(), z0.end());
    double v1 = v0;
    if (kind == EffectKind::Time) {
        if (coordinate >= z1.size()) throw InputError("time effect needs a covariate to shift");
        z1[coordinate] -= delta;
    } else {
        v1 -= delta;
    }
    EffectBound shifted = prob_bounds(fit, z1, v1, opts);
    EffectBound b;
    b.z0.assign(z0.begin(), z0.end());
    b.v0 = v0;
    b.delta = delta;
    b.kind = kind;
    b.lower = base.lower - shifted.upper;
    b.upper = base.upper - shifted.lower;
    return b;
}

double plugin_probability(const ModelFit& fit, std::span<const double> z0, double v0) {
    check_query(fit, z0, v0);
    double total = 0.0, inside = 0.0;
    for (const auto& c : fit.cells) {
        total += c.mass;
        double s = c.interior[0] - v0;
        for (std::size_t k = 1; k < fit.dim; ++k) s += z0[k - 1] * c.interior[k];
        if (s >= 0.0) inside += c.mass;
    }
    return total > 0.0 ? inside / total : 0.0;
}

} // namespace npmle
