#ifndef NPMLE_EVALUATE_HPP
#define NPMLE_EVALUATE_HPP

#include "npmle/model.hpp"
#include "npmle/simulate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace npmle {

struct EstimatorError {
    std::string estimator;
    double mae = 0.0;
    double rmse = 0.0;
};

struct EvalReport {
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    std::vector<EstimatorError> errors; // in the order requested
    std::size_t cells = 0;              // arrangement size of the NPMLE fit (0 if not fitted)
    std::size_t support = 0;            // NPMLE cells with mass > 1e-3
};

// Recognized names: npmle, npmle_smoothed, logit.
std::vector<std::string> parse_estimators(const std::string& list);

// Replication r uses seed config.seed + r for its estimation sample and an
// independent stream for the evaluation sample.  NPMLE predictions are the
// midpoints of the probability bounds; the smoothed NPMLE is the mass the
// Gaussian-convolved estimate assigns to the query halfspace.
std::vector<EvalReport> evaluate(const SimConfig& config, const std::vector<std::string>& estimators, std::size_t reps,
                                 unsigned threads = 1, const FitOptions& fit_opts = {});

EvalReport evaluate_replication(const SimConfig& config, const std::vector<std::string>& estimators,
                                std::size_t rep, const FitOptions& fit_opts = {});

// Mean of each estimator's MAE and RMSE across replications.
std::vector<EstimatorError> average(const std::vector<EvalReport>& reports);

} // namespace npmle

#endif
