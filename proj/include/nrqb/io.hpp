#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "nrqb/analysis.hpp"
#include "nrqb/moments.hpp"
#include "nrqb/params.hpp"
#include "nrqb/verify.hpp"

namespace nrqb {

using json = nlohmann::ordered_json;

// 17 significant digits: lossless double round-trip, so emitted files are
// byte-stable golden references. NaN sign bits are noise and serialize as
// plain "nan".
inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline const std::array<const char*, 12>& config_keys() {
    static const std::array<const char*, 12> keys = {
        "omega",  "kappa_a", "kappa_b", "p_a_re", "p_a_im",          "p_b_re",
        "p_b_im", "J_re",    "J_im",    "Gamma",  "drive_amplitude", "omega_L",
    };
    return keys;
}

inline json config_to_json(const SystemConfig& cfg) {
    json j;
    j["omega"] = cfg.charger.omega;
    j["kappa_a"] = cfg.charger.kappa;
    j["kappa_b"] = cfg.battery.kappa;
    j["p_a_re"] = cfg.charger.p.real();
    j["p_a_im"] = cfg.charger.p.imag();
    j["p_b_re"] = cfg.battery.p.real();
    j["p_b_im"] = cfg.battery.p.imag();
    j["J_re"] = cfg.J.real();
    j["J_im"] = cfg.J.imag();
    j["Gamma"] = cfg.Gamma;
    j["drive_amplitude"] = cfg.drive.amplitude;
    j["omega_L"] = cfg.drive.omega_L;
    return j;
}

// Missing keys take their defaults (omega = 1, unit real weights, all rates
// and the drive zero, omega_L = omega); unknown keys are rejected rather
// than ignored so typos cannot silently produce the default physics.
inline SystemConfig config_from_json(const json& j) {
    double omega = 1.0, kappa_a = 0.0, kappa_b = 0.0;
    double p_a_re = 1.0, p_a_im = 0.0, p_b_re = 1.0, p_b_im = 0.0;
    double j_re = 0.0, j_im = 0.0, gamma = 0.0, amp = 0.0;
    double omega_l = 0.0;
    bool has_omega_l = false;

    if (!j.is_object())
        throw std::runtime_error("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number())
            throw std::runtime_error("config key " + key + " must be a number");
        const double v = value.get<double>();
        if (key == "omega") omega = v;
        else if (key == "kappa_a") kappa_a = v;
        else if (key == "kappa_b") kappa_b = v;
        else if (key == "p_a_re") p_a_re = v;
        else if (key == "p_a_im") p_a_im = v;
        else if (key == "p_b_re") p_b_re = v;
        else if (key == "p_b_im") p_b_im = v;
        else if (key == "J_re") j_re = v;
        else if (key == "J_im") j_im = v;
        else if (key == "Gamma") gamma = v;
        else if (key == "drive_amplitude") amp = v;
        else if (key == "omega_L") { omega_l = v; has_omega_l = true; }
        else throw std::runtime_error("unknown config key: " + key);
    }

    SystemConfig cfg;
    cfg.charger.omega = omega;
    cfg.battery.omega = omega;
    cfg.charger.kappa = kappa_a;
    cfg.battery.kappa = kappa_b;
    cfg.charger.p = {p_a_re, p_a_im};
    cfg.battery.p = {p_b_re, p_b_im};
    cfg.J = {j_re, j_im};
    cfg.Gamma = gamma;
    cfg.drive.amplitude = amp;
    cfg.drive.omega_L = has_omega_l ? omega_l : omega;
    return cfg;
}

inline json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open config file: " + path);
    return json::parse(f);
}

// KEY=VALUE override onto a config JSON object. The key must belong to the
// schema and the value must parse fully as a number.
inline void apply_override(json& j, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::runtime_error("override must be KEY=VALUE: " + kv);
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    bool known = false;
    for (const char* k : config_keys()) known |= key == k;
    if (!known)
        throw std::runtime_error("unknown config key: " + key);
    double v = 0.0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw std::runtime_error("override value for " + key + " is not a number: " + value);
    j[key] = v;
}

struct Column {
    std::string name;
    std::vector<double> values;
};

inline void write_columns_csv(std::ostream& os, const std::vector<Column>& cols) {
    if (cols.empty())
        throw std::invalid_argument("no columns to write");
    for (size_t c = 0; c < cols.size(); ++c) {
        if (cols[c].values.size() != cols[0].values.size())
            throw std::invalid_argument("column length mismatch: " + cols[c].name);
        os << (c ? "," : "") << cols[c].name;
    }
    os << "\n";
    for (size_t r = 0; r < cols[0].values.size(); ++r) {
        for (size_t c = 0; c < cols.size(); ++c)
            os << (c ? "," : "") << fmt17(cols[c].values[r]);
        os << "\n";
    }
}

inline json columns_to_json(const std::vector<Column>& cols) {
    json j;
    for (const auto& col : cols) j[col.name] = col.values;
    return j;
}

inline std::vector<Column> trajectory_columns(const Trajectory& traj) {
    const size_t n = traj.times.size();
    std::vector<Column> cols(11);
    const char* names[] = {"t",   "re_a", "im_a",  "re_b",  "im_b", "n_a",
                           "n_b", "re_ab", "im_ab", "E_A",   "E_B"};
    for (size_t c = 0; c < cols.size(); ++c) {
        cols[c].name = names[c];
        cols[c].values.resize(n);
    }
    for (size_t i = 0; i < n; ++i) {
        const MomentState& s = traj.states[i];
        cols[0].values[i] = traj.times[i];
        cols[1].values[i] = s.mean_a.real();
        cols[2].values[i] = s.mean_a.imag();
        cols[3].values[i] = s.mean_b.real();
        cols[4].values[i] = s.mean_b.imag();
        cols[5].values[i] = s.n_a;
        cols[6].values[i] = s.n_b;
        cols[7].values[i] = s.coh_ab.real();
        cols[8].values[i] = s.coh_ab.imag();
        cols[9].values[i] = traj.energy_a[i];
        cols[10].values[i] = traj.energy_b[i];
    }
    return cols;
}

inline void write_scan_csv(std::ostream& os, const AdvantageScan& scan) {
    os << "r,y,chi\n";
    const size_t ny = scan.y_grid.size();
    for (size_t i = 0; i < scan.r_grid.size(); ++i)
        for (size_t j = 0; j < ny; ++j)
            os << fmt17(scan.r_grid[i]) << "," << fmt17(scan.y_grid[j]) << ","
               << fmt17(scan.chi_values[i * ny + j]) << "\n";
}

inline json scan_summary_json(const AdvantageScan& scan) {
    json j;
    j["min_gap"] = scan.min_gap;
    j["argmin_r"] = scan.argmin_r;
    j["argmin_y"] = scan.argmin_y;
    json v = json::array();
    for (const auto& [r, y] : scan.violation_points) v.push_back({r, y});
    j["violations"] = v;
    return j;
}

inline json verify_report_to_json(const VerifyReport& rep) {
    json j;
    j["tolerance"] = rep.tolerance;
    j["grid_size"] = rep.grid_size;
    j["t_end"] = rep.t_end;
    json variants;
    for (const auto& v : rep.variants) {
        json e;
        e["status"] = verify_status_name(v.status);
        if (v.status == verify_status::skipped) {
            e["note"] = v.note;
        } else {
            e["max_relative_error"] = v.max_rel_err;
            e["grid_size"] = v.grid_size;
        }
        variants[v.name] = e;
    }
    j["variants"] = variants;
    j["all_pass"] = rep.all_pass;
    return j;
}

inline json optimization_to_json(const OptimizationResult& res, const SystemConfig& rescaled) {
    json j;
    j["x_opt"] = res.x_opt;
    j["energy_opt"] = res.energy_opt;
    j["config"] = config_to_json(rescaled);
    j["x_grid"] = res.x_grid;
    j["energy_grid"] = res.energy_grid;
    return j;
}

}  // namespace nrqb
