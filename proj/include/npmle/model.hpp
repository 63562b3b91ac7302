#ifndef NPMLE_MODEL_HPP
#define NPMLE_MODEL_HPP

#include "npmle/arrangement.hpp"
#include "npmle/mixsolver.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace npmle {

// y_i = 1{ eta_1 + z_i' eta_rest + w_i' theta >= v_i },  eta random in R^d.
struct Dataset {
    std::vector<int> y;
    Eigen::MatrixXd z; // n x (d-1)
    std::vector<double> v;
    Eigen::MatrixXd w; // n x p, p may be 0

    std::size_t size() const { return y.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(z.cols()) + 1; }
    std::size_t covariates() const { return static_cast<std::size_t>(w.cols()); }
    void validate() const;
};

// Raw design rows x_i of length d+1 with y_i = 1{ x_i' beta >= 0 }, where the
// coefficient on column `known` is fixed at 1 and the others are random.
// Rows are divided by the entry in column `scale` (which becomes the
// intercept); rows with a negative divisor have y flipped.
struct NormalizeConvention {
    long known = -1; // -1: last column
    long scale = 0;
};

Dataset normalize(const Eigen::MatrixXd& raw_x, std::span<const int> y, const NormalizeConvention& conv = {},
                  const Eigen::MatrixXd& w = Eigen::MatrixXd());

struct FittedCell {
    std::vector<double> interior; // an arbitrary interior point of the cell
    double mass = 0.0;
    double eps = 0.0;
    std::size_t count = 0;
    SignVector sign;
};

struct ProfilePoint {
    std::vector<double> theta;
    double loglik = 0.0;
};

struct ModelFit {
    std::vector<double> theta;
    std::size_t dim = 0;
    std::vector<Hyperplane> hyperplanes; // thresholds v_i - w_i' theta
    std::vector<FittedCell> cells;       // locally maximal cells (all cells when pruning is off)
    double loglik = 0.0;                 // total
    double mean_loglik = 0.0;
    double gap = 0.0;
    bool converged = false;
    std::size_t M = 0;         // cells in the arrangement
    std::size_t n_maximal = 0; // locally maximal cells
    std::vector<ProfilePoint> profile;
    bool budget_exhausted = false;
    std::vector<std::string> warnings;

    // Cells with mass above `threshold`.
    std::vector<std::size_t> support(double threshold = 1e-3) const;
};

struct FitOptions {
    Method method = Method::Auto;
    EnumerateOptions enumerate;
    SolveOptions solve;
    bool prune = true;   // restrict the mixture program to locally maximal cells
    bool perturb = false; // jitter thresholds before enumeration (forced for d > 3)
};

std::vector<Hyperplane> hyperplanes_at(const Dataset& data, std::span<const double> theta);

ModelFit fit_given_theta(const Dataset& data, std::span<const double> theta, const FitOptions& opts = {});

struct ProfileOptions {
    std::size_t grid_points = 11;    // per coordinate
    std::size_t refine = 200;        // Nelder-Mead evaluations after the grid
    std::size_t max_evaluations = 0; // 0: grid + refine
    unsigned threads = 1;
};

// Coarse grid over the box followed by Nelder-Mead from the best grid point.
ModelFit profile_fit(const Dataset& data, std::span<const double> lower, std::span<const double> upper,
                     const FitOptions& fit_opts = {}, const ProfileOptions& opts = {});

} // namespace npmle

#endif
