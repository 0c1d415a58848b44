#pragma once

// CSV/JSON serialization and atomic file output.  CSV numbers use 17
// significant digits so round-trips are exact; writes go through a temp file
// plus rename so partial output never lands at the destination path.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evolution.hpp"
#include "protocol.hpp"
#include "rwa.hpp"

namespace paraosc {

using Json = nlohmann::json;

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out.good()) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

inline std::string trajectory_csv_header() { return "t_s,P_up,n_x,n_y,N_para,leakage"; }

inline std::string to_csv(const Trajectory& tr) {
    std::ostringstream out;
    out << trajectory_csv_header() << '\n';
    for (size_t i = 0; i < tr.size(); ++i)
        out << fmt_g17(tr.times[i]) << ',' << fmt_g17(tr.p_up[i]) << ','
            << fmt_g17(tr.n_x[i]) << ',' << fmt_g17(tr.n_y[i]) << ','
            << fmt_g17(tr.n_para[i]) << ',' << fmt_g17(tr.leakage[i]) << '\n';
    return out.str();
}

namespace detail {
inline Json interleaved(const Vec& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v[i].real());
        arr.push_back(v[i].imag());
    }
    return arr;
}
}  // namespace detail

inline Json to_json(const Trajectory& tr, bool include_snapshots = false) {
    Json j;
    j["times"] = tr.times;
    j["p_up"] = tr.p_up;
    j["n_x"] = tr.n_x;
    j["n_y"] = tr.n_y;
    j["n_para"] = tr.n_para;
    j["leakage"] = tr.leakage;
    j["max_leakage"] = tr.max_leakage;
    j["warnings"] = tr.warnings;
    j["truncation"] = {{"d_x", tr.space.d_x}, {"d_y", tr.space.d_y}};
    if (include_snapshots) {
        if (!tr.state_snapshots.empty()) {
            j["snapshot_kind"] = "state";
            Json snaps = Json::array();
            for (const Vec& s : tr.state_snapshots) snaps.push_back(detail::interleaved(s));
            j["snapshots"] = std::move(snaps);
        } else if (!tr.density_snapshots.empty()) {
            j["snapshot_kind"] = "density_row_major";
            Json snaps = Json::array();
            for (const DenseMat& r : tr.density_snapshots) {
                Json arr = Json::array();
                for (Eigen::Index row = 0; row < r.rows(); ++row)
                    for (Eigen::Index col = 0; col < r.cols(); ++col) {
                        arr.push_back(r(row, col).real());
                        arr.push_back(r(row, col).imag());
                    }
                snaps.push_back(std::move(arr));
            }
            j["snapshots"] = std::move(snaps);
        }
    }
    return j;
}

// ---------------------------------------------------------------------------
// Relation reports
// ---------------------------------------------------------------------------

inline Json to_json(const RelationReport& rep) {
    Json checks = Json::array();
    for (const RelationCheck& c : rep.checks)
        checks.push_back({{"name", c.name},
                          {"residual", c.residual},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass}});
    return Json{{"model",
                 {{"kind", to_string(rep.model.kind)},
                  {"order", rep.model.order},
                  {"branch", to_string(rep.model.branch)}}},
                {"truncation", {{"d_x", rep.space.d_x}, {"d_y", rep.space.d_y}}},
                {"ladder_depth", rep.ladder_depth},
                {"parity_spin_sign", rep.parity_spin_sign},
                {"checks", std::move(checks)},
                {"all_pass", rep.all_pass}};
}

// ---------------------------------------------------------------------------
// Protocol types
// ---------------------------------------------------------------------------

inline Json to_json(const PrepPlan& plan) {
    Json steps = Json::array();
    for (const PulseStep& s : plan.steps)
        steps.push_back({{"kind", to_string(s.kind)},
                         {"duration_s", s.duration},
                         {"phase_rad", s.phase}});
    return Json{{"mode", to_string(plan.mode)},
                {"target_n", plan.target_n},
                {"omega01_rad_s", plan.omega01},
                {"steps", std::move(steps)}};
}

inline std::string to_csv(const ReadoutScan& scan) {
    std::ostringstream out;
    out << "t_s,P_up,shots\n";
    for (size_t i = 0; i < scan.times.size(); ++i)
        out << fmt_g17(scan.times[i]) << ',' << fmt_g17(scan.p_up[i]) << ','
            << scan.shots << '\n';
    return out.str();
}

inline Json to_json(const ReadoutScan& scan) {
    return Json{{"mode", to_string(scan.mode)},
                {"times", scan.times},
                {"p_up", scan.p_up},
                {"shots", scan.shots},
                {"seed", scan.seed},
                {"omega01_rad_s", scan.omega01},
                {"gamma_per_s", scan.gamma},
                {"polarity", to_string(scan.polarity)}};
}

inline Json to_json(const PopulationFit& fit) {
    return Json{{"populations", fit.populations},
                {"residual_rms", fit.residual_rms},
                {"condition_number", fit.condition_number},
                {"omega01_rad_s", fit.omega01},
                {"gamma_per_s", fit.gamma},
                {"warnings", fit.warnings}};
}

inline Json to_json(const RabiRatioReport& rep) {
    Json fits = Json::array();
    for (const RabiFit& f : rep.fits)
        fits.push_back({{"omega", f.omega},
                        {"gamma", f.gamma},
                        {"converged", f.converged},
                        {"rms", f.rms}});
    return Json{{"fits", std::move(fits)},
                {"ratios", rep.ratios},
                {"expected", rep.expected},
                {"max_rel_error", rep.max_rel_error},
                {"warnings", rep.warnings}};
}

// ---------------------------------------------------------------------------
// CSV input
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }

    std::vector<double> column(const std::string& name) const {
        const int idx = column_index(name);
        if (idx < 0) throw std::invalid_argument("CSV: missing column '" + name + "'");
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[static_cast<size_t>(idx)]);
        return out;
    }
};

inline double parse_double_strict(const std::string& field, size_t line_no) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::invalid_argument("CSV: bad numeric field '" + field + "' on line " +
                                    std::to_string(line_no));
    return v;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open CSV file: " + path.string());
    CsvTable table;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t start = 0;
        while (true) {
            const size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string::npos
                                                    ? std::string::npos
                                                    : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (table.columns.empty()) {
            table.columns = std::move(fields);
            continue;
        }
        if (fields.size() != table.columns.size())
            throw std::invalid_argument("CSV: wrong field count on line " +
                                        std::to_string(line_no));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const std::string& f : fields) row.push_back(parse_double_strict(f, line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.columns.empty())
        throw std::invalid_argument("CSV: empty file: " + path.string());
    return table;
}

inline ReadoutScan read_scan_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    for (const char* col : {"t_s", "P_up", "shots"})
        if (table.column_index(col) < 0)
            throw std::invalid_argument("scan CSV: missing column '" + std::string(col) +
                                        "' in " + path.string());
    if (table.rows.empty())
        throw std::invalid_argument("scan CSV: no data rows in " + path.string());
    ReadoutScan scan;
    scan.times = table.column("t_s");
    scan.p_up = table.column("P_up");
    const std::vector<double> shots = table.column("shots");
    scan.shots = static_cast<int>(shots.front());
    detail::check_times(scan.times);
    for (double p : scan.p_up)
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("scan CSV: P_up outside [0,1] in " + path.string());
    return scan;
}

}  // namespace paraosc
