#include "npmle/io.hpp"

#include "npmle/error.hpp"
#include "npmle/mixsolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace npmle {

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
            else if (c == '"') quoted = false;
            else cur += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_number(const std::string& s, const std::string& col, std::size_t row) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(x))
        throw InputError("column '" + col + "' row " + std::to_string(row + 1) + ": '" + s + "' is not a finite number");
    return x;
}

std::size_t count_indexed(const Table& t, const std::string& prefix) {
    std::size_t k = 0;
    while (t.has(prefix + std::to_string(k + 1))) ++k;
    return k;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

} // namespace

bool Table::has(const std::string& name) const { return std::find(header.begin(), header.end(), name) != header.end(); }

std::size_t Table::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> Table::numeric(const std::string& name) const {
    std::size_t c = column(name);
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = parse_number(rows[i][c], name, i);
    return out;
}

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        if (t.header.empty()) {
            if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0] = fields[0].substr(3);
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size())
            throw InputError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                             " fields, found " + std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw InputError("CSV input is empty");
    return t;
}

Table read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_csv(in);
}

std::vector<GroupData> load_dataset(const Table& table, bool raw_design, const std::string& group_col) {
    std::vector<double> yv = table.numeric("y");
    std::vector<int> y(yv.size());
    for (std::size_t i = 0; i < yv.size(); ++i) {
        if (yv[i] != 0.0 && yv[i] != 1.0) throw InputError("column 'y' row " + std::to_string(i + 1) + " is not 0/1");
        y[i] = static_cast<int>(yv[i]);
    }
    const std::size_t n = y.size();
    const std::size_t p = count_indexed(table, "w");
    Eigen::MatrixXd w(static_cast<long>(n), static_cast<long>(p));
    for (std::size_t k = 0; k < p; ++k) {
        auto col = table.numeric("w" + std::to_string(k + 1));
        for (std::size_t i = 0; i < n; ++i) w(static_cast<long>(i), static_cast<long>(k)) = col[i];
    }

    Dataset all;
    if (raw_design) {
        const std::size_t cols = count_indexed(table, "x");
        if (cols < 2) throw InputError("raw design needs columns x1, x2, ...");
        Eigen::MatrixXd x(static_cast<long>(n), static_cast<long>(cols));
        for (std::size_t k = 0; k < cols; ++k) {
            auto col = table.numeric("x" + std::to_string(k + 1));
            for (std::size_t i = 0; i < n; ++i) x(static_cast<long>(i), static_cast<long>(k)) = col[i];
        }
        all = normalize(x, y, {}, w);
    } else {
        const std::size_t dz = count_indexed(table, "z");
        all.y = y;
        all.v = table.numeric("v");
        all.z.resize(static_cast<long>(n), static_cast<long>(dz));
        for (std::size_t k = 0; k < dz; ++k) {
            auto col = table.numeric("z" + std::to_string(k + 1));
            for (std::size_t i = 0; i < n; ++i) all.z(static_cast<long>(i), static_cast<long>(k)) = col[i];
        }
        all.w = w;
    }

    if (group_col.empty()) return {GroupData{"", std::move(all)}};

    const std::size_t gc = table.column(group_col);
    std::vector<std::string> labels;
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& g = table.rows[i][gc];
        if (!members.count(g)) labels.push_back(g);
        members[g].push_back(i);
    }
    std::vector<GroupData> out;
    for (const auto& label : labels) {
        const auto& idx = members[label];
        Dataset d;
        d.z.resize(static_cast<long>(idx.size()), all.z.cols());
        d.w.resize(static_cast<long>(idx.size()), all.w.cols());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            d.y.push_back(all.y[idx[r]]);
            d.v.push_back(all.v[idx[r]]);
            d.z.row(static_cast<long>(r)) = all.z.row(static_cast<long>(idx[r]));
            d.w.row(static_cast<long>(r)) = all.w.row(static_cast<long>(idx[r]));
        }
        out.push_back({label, std::move(d)});
    }
    return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    out << "y,v";
    for (long k = 0; k < data.z.cols(); ++k) out << ",z" << k + 1;
    for (long k = 0; k < data.w.cols(); ++k) out << ",w" << k + 1;
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.y[i] << ',' << data.v[i];
        for (long k = 0; k < data.z.cols(); ++k) out << ',' << data.z(static_cast<long>(i), k);
        for (long k = 0; k < data.w.cols(); ++k) out << ',' << data.w(static_cast<long>(i), k);
        out << '\n';
    }
}

nlohmann::json to_json(const ModelFit& fit, double mass_threshold) {
    using nlohmann::json;
    json j;
    j["theta"] = fit.theta;
    j["loglik"] = fit.loglik;
    j["mean_loglik"] = fit.mean_loglik;
    j["gap"] = fit.gap;
    j["converged"] = fit.converged;
    j["M"] = fit.M;
    j["n_maximal"] = fit.n_maximal;
    j["interior_points_are_arbitrary"] = true;
    json cells = json::array();
    for (const auto& c : fit.cells) {
        if (!(c.mass > mass_threshold)) continue;
        cells.push_back({{"interior", c.interior}, {"mass", c.mass}, {"eps", c.eps}, {"count", c.count},
                         {"sign", c.sign.to_hex()}});
    }
    j["cells"] = std::move(cells);
    json profile = json::array();
    for (const auto& p : fit.profile) profile.push_back({{"theta", p.theta}, {"loglik", p.loglik}});
    j["profile"] = std::move(profile);
    j["budget_exhausted"] = fit.budget_exhausted;
    j["warnings"] = fit.warnings;
    return j;
}

void write_masses_csv(std::ostream& out, const ModelFit& fit, double threshold, const std::string& group) {
    if (!group.empty()) out << "group,";
    for (std::size_t k = 0; k < fit.dim; ++k) out << "eta" << k + 1 << ',';
    out << "mass\n";
    for (const auto& c : fit.cells) {
        if (!(c.mass > threshold)) continue;
        if (!group.empty()) out << group << ',';
        for (double x : c.interior) out << fmt(x) << ',';
        out << fmt(c.mass) << '\n';
    }
}

void write_contours_csv(std::ostream& out, const ModelFit& fit, const std::vector<double>& variance,
                        std::size_t resolution, const std::string& group) {
    if (variance.size() != fit.dim) throw InputError("bandwidth length must equal the coefficient dimension");
    std::vector<std::vector<double>> support;
    std::vector<double> masses;
    for (const auto& c : fit.cells)
        if (c.mass > 0.0) support.push_back(c.interior), masses.push_back(c.mass);
    GridSpec grid;
    for (std::size_t k = 0; k < fit.dim; ++k) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& s : support) lo = std::min(lo, s[k]), hi = std::max(hi, s[k]);
        double pad = 4.0 * std::sqrt(variance[k]);
        grid.lower.push_back(lo - pad);
        grid.upper.push_back(hi + pad);
        grid.resolution.push_back(std::max<std::size_t>(resolution, 2));
    }
    DensityGrid dens = smooth(support, masses, variance, grid);
    if (!group.empty()) out << "group,";
    for (std::size_t k = 0; k < fit.dim; ++k) out << "eta" << k + 1 << ',';
    out << "density\n";
    for (std::size_t i = 0; i < dens.values.size(); ++i) {
        if (!group.empty()) out << group << ',';
        for (double x : dens.point(i)) out << fmt(x) << ',';
        out << fmt(dens.values[i]) << '\n';
    }
}

void write_univariate_csv(std::ostream& out, const UnivariateFit& fit) {
    out << "lower,upper,location,mass\n";
    for (std::size_t k = 0; k < fit.mass.size(); ++k)
        out << fmt(fit.lower[k]) << ',' << fmt(fit.upper[k]) << ',' << fmt(fit.location[k]) << ',' << fmt(fit.mass[k])
            << '\n';
}

void write_effects_csv(std::ostream& out, const std::vector<EffectBound>& bounds, const std::string& group,
                       bool header) {
    if (header) out << "delta,lower,upper,kind,subgroup\n";
    for (const auto& b : bounds)
        out << fmt(b.delta) << ',' << fmt(b.lower) << ',' << fmt(b.upper) << ',' << to_string(b.kind) << ',' << group
            << '\n';
}

void write_eval_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
    out << "replication,seed,estimator,mae,rmse,cells,support\n";
    for (const auto& r : reports)
        for (const auto& e : r.errors)
            out << r.replication << ',' << r.seed << ',' << e.estimator << ',' << fmt(e.mae) << ',' << fmt(e.rmse) << ','
                << r.cells << ',' << r.support << '\n';
}

} // namespace npmle
