#ifndef NPMLE_SIMULATE_HPP
#define NPMLE_SIMULATE_HPP

#include "npmle/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace npmle {

enum class Design { TwoPoint, GaussMixture, UnivariateGaussian };

std::string to_string(Design design);
Design parse_design(const std::string& name);

// Random coefficients beta = (eta, 1); y = 1{ x' beta >= 0 }.
//   two_point:           eta uniform on {(0.7,-0.7), (-0.7,0.7)}
//   gauss_mixture:       eta ~ 0.5 N((0.7,-0.7), S) + 0.5 N((-0.7,0.7), S), S = [[0.3,0.15],[0.15,0.3]]
//   univariate_gaussian: eta ~ N(0,1), x = (1, -v) with v ~ N(0,1)
// The bivariate designs draw x = (1, x1, x2) with standard Gaussian x1, x2
// and rescale each row to unit length.
struct SimConfig {
    Design design = Design::TwoPoint;
    std::size_t n = 500;
    std::uint64_t seed = 1;
    std::size_t eval_n = 500;
    std::vector<double> bandwidth{0.04, 0.04}; // smoothing variances
};

struct SimData {
    Dataset data;         // normalized: z = x1/x0, v = -x_last/x0
    Eigen::MatrixXd x;    // raw design rows
    Eigen::MatrixXd beta; // coefficient draws, one row per observation
};

SimData simulate(const SimConfig& config);

// Fresh design rows only (no responses).
Eigen::MatrixXd draw_design(Design design, std::size_t count, std::uint64_t seed);

// Exact P(y = 1 | x) under the design.
double true_prob(Design design, std::span<const double> x);

// Query (z0, v0) of the halfspace eta_1 + z0' eta_rest >= v0 equivalent to
// x' (eta, 1) >= 0.  Requires x[0] > 0.
void design_query(std::span<const double> x, std::vector<double>& z0, double& v0);

} // namespace npmle

#endif
