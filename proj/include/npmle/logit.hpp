#ifndef NPMLE_LOGIT_HPP
#define NPMLE_LOGIT_HPP

#include <Eigen/Core>

#include <span>
#include <vector>

namespace npmle {

struct LogitFit {
    Eigen::VectorXd coef;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    bool separated = false; // coefficients diverged and were capped

    double predict(std::span<const double> x) const;
};

// Logistic regression of y on the columns of X by Newton-Raphson.
LogitFit fit_logit(const Eigen::MatrixXd& X, std::span<const int> y, double tol = 1e-8, int max_iter = 100,
                   double cap = 1e3);

} // namespace npmle

#endif
