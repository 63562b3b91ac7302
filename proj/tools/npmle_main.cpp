#include "npmle/effects.hpp"
#include "npmle/error.hpp"
#include "npmle/evaluate.hpp"
#include "npmle/io.hpp"
#include "npmle/model.hpp"
#include "npmle/simulate.hpp"
#include "npmle/univariate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace npmle;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double tol = 1e-6;
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    return out;
}

FitOptions fit_options(const Globals& g) {
    FitOptions o;
    o.enumerate.seed = g.seed;
    o.enumerate.threads = g.threads;
    o.solve.tol = g.tol;
    return o;
}

Method parse_method(const std::string& m) {
    if (m == "auto") return Method::Auto;
    if (m == "ie") return Method::Incremental;
    if (m == "aie") return Method::Accelerated;
    if (m == "brute") return Method::BruteForce;
    throw InputError("unknown method '" + m + "' (expected auto, ie, aie or brute)");
}

double quantile(std::vector<double> x, double q) {
    std::sort(x.begin(), x.end());
    double pos = q * static_cast<double>(x.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

void require_converged(const ModelFit& fit, double tol, const std::string& label) {
    if (!fit.converged)
        throw NumericalError("fit" + (label.empty() ? std::string() : " for group " + label) + " reached gap " +
                             std::to_string(fit.gap) + " > " + std::to_string(tol));
}

ModelFit fit_group(const Dataset& data, const Globals& g, const FitOptions& fo, const std::vector<double>& lower,
                   const std::vector<double>& upper, std::size_t grid, std::size_t refine) {
    const std::size_t p = data.covariates();
    if (p == 0) return fit_given_theta(data, {}, fo);
    if (lower.size() != p || upper.size() != p)
        throw InputError("data has " + std::to_string(p) + " w columns; give --theta-lower/--theta-upper of that length");
    ProfileOptions po;
    po.grid_points = grid;
    po.refine = refine;
    po.threads = g.threads;
    return profile_fit(data, lower, upper, fo, po);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric maximum likelihood for random-coefficient binary response"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads")->capture_default_str();
    app.add_option("--tol", g.tol, "Required KKT residual")->capture_default_str();

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit the NPMLE to a CSV dataset (columns y, v, z1.., w1..)");
    std::string fit_in, fit_out, fit_masses, fit_contours, group_col;
    bool raw = false, no_prune = false;
    std::vector<double> lower, upper, bandwidth{0.04, 0.04};
    std::size_t grid = 11, refine = 200, resolution = 101;
    fit_cmd->add_option("input", fit_in, "Input CSV")->required();
    fit_cmd->add_option("--out", fit_out, "Fit JSON");
    fit_cmd->add_option("--masses", fit_masses, "Cell masses CSV (mass > 1e-3)");
    fit_cmd->add_option("--contours", fit_contours, "Smoothed density grid CSV");
    fit_cmd->add_option("--bandwidth", bandwidth, "Smoothing variances, one per coefficient")->capture_default_str();
    fit_cmd->add_option("--resolution", resolution, "Grid points per axis for --contours")->capture_default_str();
    fit_cmd->add_option("--group-col", group_col, "Fit a separate distribution per value of this column");
    fit_cmd->add_flag("--normalize", raw, "Input has raw design columns x1..x{d+1}; last coefficient fixed at 1");
    fit_cmd->add_flag("--no-prune", no_prune, "Solve over all cells instead of locally maximal ones");
    fit_cmd->add_option("--theta-lower", lower, "Lower corner of the theta box");
    fit_cmd->add_option("--theta-upper", upper, "Upper corner of the theta box");
    fit_cmd->add_option("--grid", grid, "Profile grid points per coordinate")->capture_default_str();
    fit_cmd->add_option("--refine", refine, "Nelder-Mead evaluations after the grid")->capture_default_str();

    // univariate
    auto* uni_cmd = app.add_subcommand("univariate", "Interval NPMLE for d = 1 (columns y, v)");
    std::string uni_in, uni_out, convention = "current-status";
    uni_cmd->add_option("input", uni_in, "Input CSV")->required();
    uni_cmd->add_option("--out", uni_out, "Support/mass CSV (default stdout)");
    uni_cmd->add_option("--convention", convention, "current-status (y=1 iff eta<=v) or threshold (y=1 iff eta>=v)")
        ->capture_default_str();

    // enumerate
    auto* enum_cmd = app.add_subcommand("enumerate", "Enumerate arrangement cells and dump them as CSV");
    std::string enum_in, enum_out, method = "auto";
    enum_cmd->add_option("input", enum_in, "Input CSV")->required();
    enum_cmd->add_option("--out", enum_out, "Cell CSV (default stdout)");
    enum_cmd->add_option("--method", method, "auto, ie, aie or brute")->capture_default_str();
    enum_cmd->add_flag("--normalize", raw, "Input has raw design columns");

    // effects
    auto* eff_cmd = app.add_subcommand("effects", "Probability and marginal-effect bounds");
    std::string eff_in, eff_out, kind = "fare";
    std::vector<double> z0;
    double v0 = NAN, delta_max = 1.0, quant = 0.75;
    std::size_t steps = 20;
    eff_cmd->add_option("input", eff_in, "Input CSV")->required();
    eff_cmd->add_option("--out", eff_out, "Bounds CSV (default stdout)");
    eff_cmd->add_option("--kind", kind, "level, fare or time")->capture_default_str();
    eff_cmd->add_option("--z0", z0, "Query covariates (default: quantile of the data)");
    eff_cmd->add_option("--v0", v0, "Query threshold (default: quantile of the data)");
    eff_cmd->add_option("--quantile", quant, "Quantile used for default queries")->capture_default_str();
    eff_cmd->add_option("--delta-max", delta_max, "Largest step")->capture_default_str();
    eff_cmd->add_option("--steps", steps, "Number of steps after 0")->capture_default_str();
    eff_cmd->add_option("--group-col", group_col, "Separate fits per value of this column");
    eff_cmd->add_flag("--normalize", raw, "Input has raw design columns");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Draw a dataset from a simulation design");
    SimConfig sim;
    std::string design = "two_point", sim_out;
    sim_cmd->add_option("--design", design, "two_point, gauss_mixture or univariate_gaussian")->capture_default_str();
    sim_cmd->add_option("--n", sim.n, "Sample size")->capture_default_str();
    sim_cmd->add_option("--out", sim_out, "Output CSV (default stdout)");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Monte Carlo prediction errors against the true probabilities");
    std::string estimators = "npmle,npmle_smoothed,logit", eval_out;
    std::size_t reps = 20;
    eval_cmd->add_option("--design", design, "Simulation design")->capture_default_str();
    eval_cmd->add_option("--n", sim.n, "Estimation sample size")->capture_default_str();
    eval_cmd->add_option("--eval-n", sim.eval_n, "Evaluation sample size")->capture_default_str();
    eval_cmd->add_option("--reps", reps, "Replications")->capture_default_str();
    eval_cmd->add_option("--estimators", estimators, "Comma-separated list")->capture_default_str();
    eval_cmd->add_option("--bandwidth", sim.bandwidth, "Smoothing variances")->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "Per-replication CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*fit_cmd) {
            auto groups = load_dataset(read_csv_file(fit_in), raw, group_col);
            FitOptions fo = fit_options(g);
            fo.prune = !no_prune;
            nlohmann::json all = nlohmann::json::array();
            std::ofstream masses, contours;
            if (!fit_masses.empty()) masses = open_out(fit_masses);
            if (!fit_contours.empty()) contours = open_out(fit_contours);
            bool first = true;
            for (const auto& gd : groups) {
                ModelFit fit = fit_group(gd.data, g, fo, lower, upper, grid, refine);
                for (const auto& w : fit.warnings) std::cerr << "warning: " << w << '\n';
                std::cout << (gd.label.empty() ? "" : "group " + gd.label + ": ") << "n=" << gd.data.size()
                          << " cells=" << fit.M << " maximal=" << fit.n_maximal << " loglik=" << fit.loglik
                          << " gap=" << fit.gap << " support(>1e-3)=" << fit.support().size() << '\n';
                require_converged(fit, g.tol, gd.label);
                nlohmann::json j = to_json(fit);
                if (!gd.label.empty()) j["group"] = gd.label;
                all.push_back(std::move(j));
                if (masses.is_open()) {
                    std::ostringstream os;
                    write_masses_csv(os, fit, 1e-3, gd.label);
                    std::string s = os.str();
                    masses << (first ? s : s.substr(s.find('\n') + 1));
                }
                if (contours.is_open()) {
                    std::ostringstream os;
                    write_contours_csv(os, fit, bandwidth, resolution, gd.label);
                    std::string s = os.str();
                    contours << (first ? s : s.substr(s.find('\n') + 1));
                }
                first = false;
            }
            if (!fit_out.empty()) open_out(fit_out) << (group_col.empty() ? all[0] : all).dump(2) << '\n';
        } else if (*uni_cmd) {
            Table t = read_csv_file(uni_in);
            std::vector<double> yv = t.numeric("y"), v = t.numeric("v");
            std::vector<int> y(yv.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                if (yv[i] != 0.0 && yv[i] != 1.0) throw InputError("y must be 0/1");
                y[i] = static_cast<int>(yv[i]);
            }
            Convention c;
            if (convention == "current-status") c = Convention::CurrentStatus;
            else if (convention == "threshold") c = Convention::Threshold;
            else throw InputError("unknown convention '" + convention + "'");
            SolveOptions so;
            so.tol = g.tol;
            UnivariateFit fit = fit_univariate(v, y, c, so);
            std::cerr << "n=" << v.size() << " local maxima=" << fit.partition.maximal.size()
                      << " loglik=" << fit.solution.loglik << " gap=" << fit.solution.gap << '\n';
            if (uni_out.empty()) write_univariate_csv(std::cout, fit);
            else {
                auto out = open_out(uni_out);
                write_univariate_csv(out, fit);
            }
            if (!fit.solution.converged) throw NumericalError("univariate fit did not reach the gap tolerance");
        } else if (*enum_cmd) {
            auto groups = load_dataset(read_csv_file(enum_in), raw);
            const Dataset& d = groups[0].data;
            std::vector<double> theta(d.covariates(), 0.0);
            EnumerateOptions eo;
            eo.seed = g.seed;
            eo.threads = g.threads;
            Arrangement arr = enumerate(hyperplanes_at(d, theta), parse_method(method), eo);
            AdjacencyMatrix adj = build_adjacency(arr);
            std::cerr << "cells=" << arr.cells.size() << " lps=" << arr.stats.total_lps
                      << " maximal=" << locally_maximal(arr, adj).size() << '\n';
            if (enum_out.empty()) write_csv(std::cout, arr);
            else {
                auto out = open_out(enum_out);
                write_csv(out, arr);
            }
        } else if (*eff_cmd) {
            EffectKind k = parse_effect_kind(kind);
            auto groups = load_dataset(read_csv_file(eff_in), raw, group_col);
            FitOptions fo = fit_options(g);
            std::ofstream file;
            if (!eff_out.empty()) file = open_out(eff_out);
            std::ostream& out = eff_out.empty() ? std::cout : file;
            bool header = true;
            for (const auto& gd : groups) {
                const Dataset& d = gd.data;
                if (d.covariates() > 0) throw InputError("effects supports datasets without w columns");
                ModelFit fit = fit_given_theta(d, {}, fo);
                require_converged(fit, g.tol, gd.label);
                std::vector<double> zq = z0;
                if (zq.empty())
                    for (long c = 0; c < d.z.cols(); ++c) {
                        std::vector<double> col(d.z.col(c).data(), d.z.col(c).data() + d.z.rows());
                        zq.push_back(quantile(col, quant));
                    }
                double vq = std::isnan(v0) ? quantile(d.v, quant) : v0;
                std::vector<EffectBound> bounds;
                for (std::size_t s = 0; s <= steps; ++s) {
                    double delta = steps == 0 ? 0.0 : delta_max * static_cast<double>(s) / static_cast<double>(steps);
                    bounds.push_back(marginal_effect(fit, zq, vq, delta, k));
                    if (k == EffectKind::Level) {
                        bounds.back().delta = 0.0;
                        break;
                    }
                }
                write_effects_csv(out, bounds, gd.label, header);
                header = false;
            }
        } else if (*sim_cmd) {
            sim.design = parse_design(design);
            sim.seed = g.seed;
            SimData data = simulate(sim);
            if (sim_out.empty()) write_dataset_csv(std::cout, data.data);
            else {
                auto out = open_out(sim_out);
                write_dataset_csv(out, data.data);
            }
        } else if (*eval_cmd) {
            sim.design = parse_design(design);
            sim.seed = g.seed;
            auto names = parse_estimators(estimators);
            FitOptions fo = fit_options(g);
            fo.enumerate.threads = 1;
            auto reports = evaluate(sim, names, reps, g.threads, fo);
            if (!eval_out.empty()) {
                auto out = open_out(eval_out);
                write_eval_csv(out, reports);
            }
            std::cout << "estimator,mean_mae,mean_rmse\n";
            for (const auto& e : average(reports)) std::cout << e.estimator << ',' << e.mae << ',' << e.rmse << '\n';
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
