#include "npmle/logit.hpp"

#include "npmle/error.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace npmle {

namespace {

double log1pexp(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    double e = std::exp(t);
    return e / (1.0 + e);
}

double loglik(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& b) {
    Eigen::VectorXd eta = X * b;
    double ll = 0.0;
    for (long i = 0; i < X.rows(); ++i) ll += y[static_cast<std::size_t>(i)] * eta(i) - log1pexp(eta(i));
    return ll;
}

} // namespace

double LogitFit::predict(std::span<const double> x) const {
    if (static_cast<long>(x.size()) != coef.size()) throw InputError("logit predict: wrong covariate count");
    double t = 0.0;
    for (long k = 0; k < coef.size(); ++k) t += coef(k) * x[static_cast<std::size_t>(k)];
    return sigmoid(t);
}

LogitFit fit_logit(const Eigen::MatrixXd& X, std::span<const int> y, double tol, int max_iter, double cap) {
    const long n = X.rows(), k = X.cols();
    if (static_cast<std::size_t>(n) != y.size()) throw InputError("logit: X and y lengths differ");
    if (n == 0 || k == 0) throw InputError("logit: empty design");

    LogitFit fit;
    fit.coef = Eigen::VectorXd::Zero(k);
    double ll = loglik(X, y, fit.coef);
    for (int it = 0; it < max_iter; ++it) {
        fit.iterations = it + 1;
        Eigen::VectorXd eta = X * fit.coef;
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(k);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k, k);
        for (long i = 0; i < n; ++i) {
            double p = sigmoid(eta(i));
            grad += (y[static_cast<std::size_t>(i)] - p) * X.row(i).transpose();
            H.selfadjointView<Eigen::Lower>().rankUpdate(X.row(i).transpose(), p * (1.0 - p));
        }
        H = H.selfadjointView<Eigen::Lower>();
        H.diagonal().array() += 1e-12;
        Eigen::VectorXd step = H.ldlt().solve(grad);
        if (!step.allFinite()) break;

        double t = 1.0, next = -INFINITY;
        Eigen::VectorXd trial;
        for (int h = 0; h < 50; ++h, t *= 0.5) {
            trial = fit.coef + t * step;
            next = loglik(X, y, trial);
            if (next >= ll - 1e-12) break;
        }
        fit.coef = trial;
        ll = next;
        if (fit.coef.lpNorm<Eigen::Infinity>() > cap) {
            fit.coef *= cap / fit.coef.lpNorm<Eigen::Infinity>();
            fit.separated = true;
            ll = loglik(X, y, fit.coef);
            break;
        }
        if ((t * step).lpNorm<Eigen::Infinity>() <= tol * (1.0 + fit.coef.lpNorm<Eigen::Infinity>())) {
            fit.converged = true;
            break;
        }
    }
    // Under separation the steps never shrink and some fitted probabilities
    // are pinned at 0 or 1.
    if (!fit.converged && !fit.separated && (X * fit.coef).lpNorm<Eigen::Infinity>() > 30.0) fit.separated = true;
    fit.loglik = ll;
    return fit;
}

} // namespace npmle
