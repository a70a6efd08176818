#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrqb/closedform.hpp"
#include "nrqb/moments.hpp"
#include "nrqb/params.hpp"

namespace nrqb {

enum class verify_status { pass, fail, skipped };

struct VariantReport {
    std::string name;
    verify_status status = verify_status::skipped;
    double max_rel_err = 0.0;
    int grid_size = 0;
    std::string note;  // reason when skipped
};

struct VerifyReport {
    double tolerance = 1e-6;
    int grid_size = 0;
    double t_end = 0.0;
    std::vector<VariantReport> variants;
    bool all_pass = true;  // no applicable variant failed
};

namespace detail {

// Occupations sampled from vacuum at grid_points equally spaced times over
// [0, t_end]. Integration proceeds segment by segment so every sample sits
// exactly on a grid time; the inner step keeps the fastest rate resolved
// well below the accuracy needed by the 1e-6 equivalence tolerance.
inline void sample_occupations(const SystemConfig& cfg, double t_end, int grid_points,
                               std::vector<double>& n_a, std::vector<double>& n_b) {
    const DerivedParams d = derive(cfg);
    const double rate = std::max({d.lambda_a, d.lambda_b, 4.0 * std::abs(cfg.J),
                                  4.0 * std::abs(d.delta)});
    const double ts = t_end / (grid_points - 1);
    const double h_target = rate > 0.0 ? std::min(ts, 0.02 / rate) : ts;
    const int m = std::max(1, static_cast<int>(std::ceil(ts / h_target)));
    // nudge keeps integrate's own ceil from adding a step
    const double dt = ts / m * (1.0 + 1e-12);
    n_a.assign(grid_points, 0.0);
    n_b.assign(grid_points, 0.0);
    MomentState s;
    for (int k = 1; k < grid_points; ++k) {
        s = integrate(cfg, s, ts, dt).states.back();
        n_a[k] = s.n_a;
        n_b[k] = s.n_b;
    }
}

}  // namespace detail

// Checks every closed-form energy expression against direct moment
// integration of the same configuration on a shared time grid. A variant
// whose preconditions the configuration does not meet is reported as
// skipped, not failed. Error metric: |closed - numeric| / (1 + closed).
inline VerifyReport verify_config(const SystemConfig& cfg, int grid_points = 1000) {
    if (grid_points < 2)
        throw std::invalid_argument("verification grid needs at least 2 points");

    VerifyReport rep;
    rep.grid_size = grid_points;
    const DerivedParams d = derive(cfg);

    double min_rate = 0.0;
    for (double rate : {d.lambda_a, d.lambda_b, d.kappa_ab})
        if (rate > 0.0 && (min_rate == 0.0 || rate < min_rate)) min_rate = rate;

    const double res_tol = 1e-12 * (1.0 + std::abs(cfg.J) + 0.5 * cfg.Gamma);
    const bool nr_ok = nonreciprocity_residual(cfg) <= res_tol;
    const bool have_route = d.gamma_a * d.gamma_b > 0.0;
    const bool resonant = d.delta == 0.0;
    const bool symmetric =
        std::abs(d.lambda_a - d.lambda_b) <= 1e-8 * (d.lambda_a + d.lambda_b);
    const bool recip_ok = cfg.charger.kappa * cfg.battery.kappa > 0.0;

    struct VariantSpec {
        const char* name;
        bool applicable;
        std::string note;
        double (*closed)(const SystemConfig&, double);
        bool charger_side;   // compare against n_a instead of n_b
        bool without_shared; // evaluate on the Gamma = 0 copy
    };
    const std::string no_match = "coupling not matched to the reservoir";
    const std::string no_route = "no shared-reservoir route into the battery";
    const std::string detuned = "detuned drive";
    const std::string uneven = "total rates differ";
    const std::string no_local = "needs local damping on both modes";
    auto first_reason = [](std::initializer_list<std::pair<bool, const std::string*>> rs) {
        for (const auto& [bad, why] : rs)
            if (bad) return *why;
        return std::string{};
    };

    const VariantSpec specs[] = {
        {"nonreciprocal_resonant", nr_ok && have_route && resonant,
         first_reason({{!nr_ok, &no_match}, {!have_route, &no_route}, {!resonant, &detuned}}),
         energy_battery_nr, false, false},
        {"nonreciprocal_general", nr_ok && have_route,
         first_reason({{!nr_ok, &no_match}, {!have_route, &no_route}}),
         energy_battery_nr_detuned, false, false},
        {"nonreciprocal_symmetric", nr_ok && have_route && resonant && symmetric,
         first_reason({{!nr_ok, &no_match}, {!have_route, &no_route},
                       {!resonant, &detuned}, {!symmetric, &uneven}}),
         energy_battery_nr_symmetric, false, false},
        {"charger_nonreciprocal", nr_ok && have_route && resonant,
         first_reason({{!nr_ok, &no_match}, {!have_route, &no_route}, {!resonant, &detuned}}),
         energy_charger_nr, true, false},
        {"reciprocal", recip_ok && resonant,
         first_reason({{!recip_ok, &no_local}, {!resonant, &detuned}}),
         energy_battery_reciprocal, false, true},
    };

    if (min_rate == 0.0) {
        for (const auto& spec : specs) {
            VariantReport v;
            v.name = spec.name;
            v.grid_size = grid_points;
            v.note = "no relaxation rate, no finite horizon";
            rep.variants.push_back(v);
        }
        return rep;
    }
    rep.t_end = 20.0 / min_rate;
    const double ts = rep.t_end / (grid_points - 1);

    SystemConfig recip_cfg = cfg;
    recip_cfg.Gamma = 0.0;

    bool need_main = false;
    bool need_recip = false;
    for (const auto& spec : specs)
        (spec.without_shared ? need_recip : need_main) |= spec.applicable;

    std::vector<double> main_na, main_nb, recip_na, recip_nb;
    if (need_main)
        detail::sample_occupations(cfg, rep.t_end, grid_points, main_na, main_nb);
    if (need_recip)
        detail::sample_occupations(recip_cfg, rep.t_end, grid_points, recip_na, recip_nb);

    const double omega = cfg.charger.omega;
    for (const auto& spec : specs) {
        VariantReport v;
        v.name = spec.name;
        v.grid_size = grid_points;
        if (!spec.applicable) {
            v.note = spec.note;
            rep.variants.push_back(v);
            continue;
        }
        const SystemConfig& ecfg = spec.without_shared ? recip_cfg : cfg;
        const std::vector<double>& occ =
            spec.without_shared ? recip_nb : (spec.charger_side ? main_na : main_nb);
        double worst = 0.0;
        for (int k = 0; k < grid_points; ++k) {
            const double cf = spec.closed(ecfg, ts * k);
            const double err = std::abs(cf - omega * occ[k]) / (1.0 + cf);
            worst = std::max(worst, err);
        }
        v.max_rel_err = worst;
        v.status = worst <= rep.tolerance ? verify_status::pass : verify_status::fail;
        if (v.status == verify_status::fail) rep.all_pass = false;
        rep.variants.push_back(v);
    }
    return rep;
}

inline const char* verify_status_name(verify_status s) {
    switch (s) {
    case verify_status::pass: return "pass";
    case verify_status::fail: return "fail";
    case verify_status::skipped: return "skipped";
    }
    return "unknown";
}

}  // namespace nrqb
