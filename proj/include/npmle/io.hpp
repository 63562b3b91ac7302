#ifndef NPMLE_IO_HPP
#define NPMLE_IO_HPP

#include "npmle/effects.hpp"
#include "npmle/evaluate.hpp"
#include "npmle/model.hpp"
#include "npmle/univariate.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace npmle {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    bool has(const std::string& name) const;
    std::size_t column(const std::string& name) const; // throws InputError if absent
    std::vector<double> numeric(const std::string& name) const;
};

Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);

struct GroupData {
    std::string label; // empty when ungrouped
    Dataset data;
};

// Columns: y, v, z1..z{d-1}, w1..wp.  With `raw_design`, x1..x{d+1} replace
// v and z and pass through normalize() (coefficient on the last x fixed at 1).
// A non-empty `group_col` splits the rows by its value, in order of first
// appearance.
std::vector<GroupData> load_dataset(const Table& table, bool raw_design = false, const std::string& group_col = "");

void write_dataset_csv(std::ostream& out, const Dataset& data);

nlohmann::json to_json(const ModelFit& fit, double mass_threshold = 0.0);

// interior coordinates + mass for cells above the threshold.
void write_masses_csv(std::ostream& out, const ModelFit& fit, double threshold = 1e-3, const std::string& group = "");

// Gaussian-smoothed estimate on a regular grid covering the support.
void write_contours_csv(std::ostream& out, const ModelFit& fit, const std::vector<double>& variance,
                        std::size_t resolution = 101, const std::string& group = "");

void write_univariate_csv(std::ostream& out, const UnivariateFit& fit);

void write_effects_csv(std::ostream& out, const std::vector<EffectBound>& bounds, const std::string& group = "",
                       bool header = true);

void write_eval_csv(std::ostream& out, const std::vector<EvalReport>& reports);

} // namespace npmle

#endif
