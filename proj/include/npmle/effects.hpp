#ifndef NPMLE_EFFECTS_HPP
#define NPMLE_EFFECTS_HPP

#include "npmle/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace npmle {

enum class EffectKind { Level, Fare, Time };

std::string to_string(EffectKind kind);
EffectKind parse_effect_kind(const std::string& name);

struct EffectBound {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> z0;
    double v0 = 0.0;
    double delta = 0.0;
    EffectKind kind = EffectKind::Level;

    double midpoint() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
};

enum class CellSide { Inside, Outside, Crossed };

// Position of fitted cell j relative to { eta : eta_1 + z0' eta_rest - v0 >= 0 }.
// Decided by two interior-point LPs, one per side of the query; a side whose
// LP value is at most kInteriorTol does not count, so cells that only touch
// the query line are not crossed.
CellSide classify(const ModelFit& fit, std::size_t j, std::span<const double> z0, double v0);

struct BoundOptions {
    double mass_threshold = 0.0; // cells at or below are dropped, the rest renormalized
};

EffectBound prob_bounds(const ModelFit& fit, std::span<const double> z0, double v0, const BoundOptions& opts = {});

// kind = Time shifts z0[coordinate] down by delta, Fare shifts v0 down by delta:
// [L(q0) - U(q1), U(q0) - L(q1)] with q0 the base query and q1 the shifted one.
EffectBound marginal_effect(const ModelFit& fit, std::span<const double> z0, double v0, double delta, EffectKind kind,
                            const BoundOptions& opts = {}, std::size_t coordinate = 0);

// Probability of the query halfspace under the stored interior points.
double plugin_probability(const ModelFit& fit, std::span<const double> z0, double v0);

} // namespace npmle

#endif
