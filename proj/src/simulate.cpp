#include "npmle/simulate.hpp"

#include "npmle/error.hpp"

#include <cmath>
#include <random>

namespace npmle {

namespace {

constexpr double kMu = 0.7;
constexpr double kVar = 0.3;
constexpr double kCov = 0.15;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::size_t design_width(Design d) { return d == Design::UnivariateGaussian ? 2 : 3; }

void draw_row(Design design, std::mt19937_64& rng, std::normal_distribution<double>& gauss, double* x) {
    if (design == Design::UnivariateGaussian) {
        x[0] = 1.0;
        x[1] = -gauss(rng);
        return;
    }
    x[0] = 1.0;
    x[1] = gauss(rng);
    x[2] = gauss(rng);
    double len = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    for (int k = 0; k < 3; ++k) x[k] /= len;
}

void draw_beta(Design design, std::mt19937_64& rng, std::normal_distribution<double>& gauss, double* b) {
    switch (design) {
    case Design::UnivariateGaussian:
        b[0] = gauss(rng);
        b[1] = 1.0;
        return;
    case Design::TwoPoint: {
        double s = (rng() >> 63) ? 1.0 : -1.0;
        b[0] = s * kMu;
        b[1] = -s * kMu;
        b[2] = 1.0;
        return;
    }
    case Design::GaussMixture: {
        double s = (rng() >> 63) ? 1.0 : -1.0;
        // Cholesky factor of [[v, c], [c, v]].
        double l11 = std::sqrt(kVar), l21 = kCov / l11, l22 = std::sqrt(kVar - l21 * l21);
        double e1 = gauss(rng), e2 = gauss(rng);
        b[0] = s * kMu + l11 * e1;
        b[1] = -s * kMu + l21 * e1 + l22 * e2;
        b[2] = 1.0;
        return;
    }
    }
}

} // namespace

std::string to_string(Design design) {
    switch (design) {
    case Design::TwoPoint: return "two_point";
    case Design::GaussMixture: return "gauss_mixture";
    case Design::UnivariateGaussian: return "univariate_gaussian";
    }
    return "two_point";
}

Design parse_design(const std::string& name) {
    if (name == "two_point") return Design::TwoPoint;
    if (name == "gauss_mixture") return Design::GaussMixture;
    if (name == "univariate_gaussian") return Design::UnivariateGaussian;
    throw InputError("unknown design '" + name + "' (expected two_point, gauss_mixture or univariate_gaussian)");
}

SimData simulate(const SimConfig& config) {
    if (config.n == 0) throw InputError("simulate: n must be positive");
    const std::size_t n = config.n, k = design_width(config.design);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SimData out;
    out.x.resize(static_cast<long>(n), static_cast<long>(k));
    out.beta.resize(static_cast<long>(n), static_cast<long>(k));
    std::vector<int> y(n);
    double x[3], b[3];
    for (std::size_t i = 0; i < n; ++i) {
        draw_row(config.design, rng, gauss, x);
        draw_beta(config.design, rng, gauss, b);
        double s = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            out.x(static_cast<long>(i), static_cast<long>(c)) = x[c];
            out.beta(static_cast<long>(i), static_cast<long>(c)) = b[c];
            s += x[c] * b[c];
        }
        y[i] = s >= 0.0 ? 1 : 0;
    }
    out.data = normalize(out.x, y);
    return out;
}

Eigen::MatrixXd draw_design(Design design, std::size_t count, std::uint64_t seed) {
    const std::size_t k = design_width(design);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x65766131u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd X(static_cast<long>(count), static_cast<long>(k));
    double x[3];
    for (std::size_t i = 0; i < count; ++i) {
        draw_row(design, rng, gauss, x);
        for (std::size_t c = 0; c < k; ++c) X(static_cast<long>(i), static_cast<long>(c)) = x[c];
    }
    return X;
}

double true_prob(Design design, std::span<const double> x) {
    if (x.size() != design_width(design)) throw InputError("true_prob: design row has the wrong length");
    switch (design) {
    case Design::UnivariateGaussian:
        // P(eta + x1 >= 0), eta ~ N(0,1)
        return norm_cdf(x[1] / x[0]);
    case Design::TwoPoint: {
        double a = x[0] * kMu - x[1] * kMu + x[2];
        double b = -x[0] * kMu + x[1] * kMu + x[2];
        return 0.5 * ((a >= 0.0 ? 1.0 : 0.0) + (b >= 0.0 ? 1.0 : 0.0));
    }
    case Design::GaussMixture: {
        double var = kVar * (x[0] * x[0] + x[1] * x[1]) + 2.0 * kCov * x[0] * x[1];
        double sd = std::sqrt(var);
        double m1 = x[0] * kMu - x[1] * kMu + x[2];
        double m2 = -x[0] * kMu + x[1] * kMu + x[2];
        if (sd == 0.0) return 0.5 * ((m1 >= 0.0 ? 1.0 : 0.0) + (m2 >= 0.0 ? 1.0 : 0.0));
        return 0.5 * (norm_cdf(m1 / sd) + norm_cdf(m2 / sd));
    }
    }
    return 0.0;
}

void design_query(std::span<const double> x, std::vector<double>& z0, double& v0) {
    if (x.size() < 2 || !(x[0] > 0.0)) throw InputError("design_query: leading coordinate must be positive");
    z0.assign(x.size() - 2, 0.0);
    for (std::size_t k = 1; k + 1 < x.size(); ++k) z0[k - 1] = x[k] / x[0];
    v0 = -x.back() / x[0];
}

} // namespace npmle
