#include "npmle/evaluate.hpp"

#include "npmle/effects.hpp"
#include "npmle/error.hpp"
#include "npmle/logit.hpp"
#include "npmle/parallel.hpp"

#include <cmath>
#include <sstream>

namespace npmle {

std::vector<std::string> parse_estimators(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item != "npmle" && item != "npmle_smoothed" && item != "logit")
            throw InputError("unknown estimator '" + item + "' (expected npmle, npmle_smoothed or logit)");
        out.push_back(item);
    }
    if (out.empty()) throw InputError("no estimators requested");
    return out;
}

EvalReport evaluate_replication(const SimConfig& config, const std::vector<std::string>& estimators, std::size_t rep,
                                const FitOptions& fit_opts) {
    SimConfig cfg = config;
    cfg.seed = config.seed + rep;
    SimData sim = simulate(cfg);
    Eigen::MatrixXd X = draw_design(config.design, config.eval_n, cfg.seed);
    const std::size_t m = static_cast<std::size_t>(X.rows()), k = static_cast<std::size_t>(X.cols());

    EvalReport report;
    report.replication = rep;
    report.seed = cfg.seed;

    bool need_npmle = false;
    for (const auto& e : estimators) need_npmle |= e != "logit";
    ModelFit fit;
    std::vector<std::vector<double>> support;
    std::vector<double> masses;
    if (need_npmle) {
        fit = fit_given_theta(sim.data, {}, fit_opts);
        report.cells = fit.M;
        report.support = fit.support().size();
        for (const auto& c : fit.cells) {
            if (c.mass > 0.0) {
                support.push_back(c.interior);
                masses.push_back(c.mass);
            }
        }
        if (config.bandwidth.size() != fit.dim) throw InputError("bandwidth length must equal the coefficient dimension");
    }

    std::vector<double> truth(m), row(k);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < k; ++c) row[c] = X(static_cast<long>(i), static_cast<long>(c));
        truth[i] = true_prob(config.design, row);
    }

    for (const auto& name : estimators) {
        std::vector<double> pred(m);
        if (name == "logit") {
            LogitFit lf = fit_logit(sim.x, sim.data.y);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t c = 0; c < k; ++c) row[c] = X(static_cast<long>(i), static_cast<long>(c));
                pred[i] = lf.predict(row);
            }
        } else {
            std::vector<double> z0, normal(fit.dim);
            double v0 = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t c = 0; c < k; ++c) row[c] = X(static_cast<long>(i), static_cast<long>(c));
                design_query(row, z0, v0);
                if (name == "npmle") {
                    pred[i] = prob_bounds(fit, z0, v0).midpoint();
                } else {
                    normal[0] = 1.0;
                    for (std::size_t c = 1; c < fit.dim; ++c) normal[c] = z0[c - 1];
                    pred[i] = smoothed_halfspace_mass(support, masses, config.bandwidth, normal, v0);
                }
            }
        }
        double abs_sum = 0.0, sq_sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double e = pred[i] - truth[i];
            abs_sum += std::abs(e);
            sq_sum += e * e;
        }
        report.errors.push_back({name, abs_sum / static_cast<double>(m), std::sqrt(sq_sum / static_cast<double>(m))});
    }
    return report;
}

std::vector<EvalReport> evaluate(const SimConfig& config, const std::vector<std::string>& estimators, std::size_t reps,
                                 unsigned threads, const FitOptions& fit_opts) {
    std::vector<EvalReport> out(reps);
    parallel_for(reps, threads, [&](std::size_t r) { out[r] = evaluate_replication(config, estimators, r, fit_opts); });
    return out;
}

std::vector<EstimatorError> average(const std::vector<EvalReport>& reports) {
    std::vector<EstimatorError> out;
    if (reports.empty()) return out;
    out = reports[0].errors;
    for (auto& e : out) e.mae = e.rmse = 0.0;
    for (const auto& r : reports)
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k].mae += r.errors[k].mae;
            out[k].rmse += r.errors[k].rmse;
        }
    for (auto& e : out) {
        e.mae /= static_cast<double>(reports.size());
        e.rmse /= static_cast<double>(reports.size());
    }
    return out;
}

} // namespace npmle
