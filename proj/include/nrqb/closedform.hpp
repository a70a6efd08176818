#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "nrqb/params.hpp"

namespace nrqb {

enum class energy_variant {
    nonreciprocal_general,    // decoupled charger, any detuning
    nonreciprocal_resonant,   // decoupled charger, resonant drive
    nonreciprocal_symmetric,  // equal total rates, resonant
    charger_nonreciprocal,    // charger occupation under decoupling
    reciprocal,               // local damping only, no shared reservoir
};

struct EnergyCurveSpec {
    SystemConfig config;
    energy_variant variant = energy_variant::nonreciprocal_resonant;
};

inline void require_nonreciprocal(const SystemConfig& cfg) {
    const double res = nonreciprocity_residual(cfg);
    if (res > 1e-12 * (1.0 + std::abs(cfg.J) + 0.5 * cfg.Gamma))
        throw error(errc::not_nonreciprocal,
                    "J must equal -i mu Gamma / 2 (residual " + detail::num(res) + ")");
}

inline void require_resonant(double delta) {
    if (delta != 0.0)
        throw error(errc::not_resonant,
                    "drive must be resonant (delta = " + detail::num(delta) + ")");
}

namespace detail {

// expm1(z)/z, regular at z = 0.
inline double phi1(double z) {
    return z == 0.0 ? 1.0 : std::expm1(z) / z;
}

// Battery energy under the decoupling condition, any detuning. The battery
// mean is the driven charger mean filtered once more through the battery
// pole; |.|^2 of the two-pole response gives the energy. The removable
// Lambda_a = Lambda_b singularity is evaluated through expm1 instead of a
// threshold switch, so the formula is uniformly accurate in the splitting.
inline double battery_energy_decoupled(const DerivedParams& d, double omega,
                                       double amp, double t) {
    if (d.gamma_a * d.gamma_b == 0.0) return 0.0;  // no reservoir route into the battery
    const double la = d.lambda_a;
    const double lb = d.lambda_b;
    const double phi_a = la * la + 4.0 * d.delta * d.delta;
    const double phi_b = lb * lb + 4.0 * d.delta * d.delta;
    const double pref = 16.0 * omega * d.gamma_a * d.gamma_b * amp * amp / (phi_a * phi_b);
    const complex atil{0.5 * la, -d.delta};
    const complex ctil{0.5 * lb, -d.delta};
    const complex mtil = 0.5 * (atil + ctil);
    const double D = la - lb;
    const complex u = std::exp(-atil * t);
    const complex v = std::exp(-ctil * t);
    // w = m * (exp(-a t) - exp(-c t)) / (c - a); both forms are exact, the
    // second avoids overflow in expm1 once the exponentials are resolved.
    complex w = std::abs(D) * t < 2.0 ? mtil * t * phi1(0.5 * D * t) * u
                                      : (2.0 * mtil / D) * (v - u);
    w += 0.5 * (u + v);
    return pref * std::norm(1.0 - w);
}

}  // namespace detail

// Stored battery energy with a decoupled charger, resonant drive.
inline double energy_battery_nr(const SystemConfig& cfg, double t) {
    require_nonreciprocal(cfg);
    const DerivedParams d = derive(cfg);
    require_resonant(d.delta);
    return detail::battery_energy_decoupled(d, cfg.charger.omega, cfg.drive.amplitude, t);
}

// Same quantity at arbitrary detuning; reduces bit-for-bit to the resonant
// evaluator at delta = 0 because both share one code path.
inline double energy_battery_nr_detuned(const SystemConfig& cfg, double t) {
    require_nonreciprocal(cfg);
    const DerivedParams d = derive(cfg);
    return detail::battery_energy_decoupled(d, cfg.charger.omega, cfg.drive.amplitude, t);
}

// t -> infinity limit of the above (any detuning).
inline double energy_battery_nr_steady(const SystemConfig& cfg) {
    require_nonreciprocal(cfg);
    const DerivedParams d = derive(cfg);
    if (d.gamma_a * d.gamma_b == 0.0) return 0.0;
    const double phi_a = d.lambda_a * d.lambda_a + 4.0 * d.delta * d.delta;
    const double phi_b = d.lambda_b * d.lambda_b + 4.0 * d.delta * d.delta;
    return 16.0 * cfg.charger.omega * d.gamma_a * d.gamma_b *
           detail::sq(cfg.drive.amplitude) / (phi_a * phi_b);
}

// Equal-rate special case evaluated through its own secular expression,
// kept as an independent cross-check of the general evaluator.
inline double energy_battery_nr_symmetric(const SystemConfig& cfg, double t) {
    require_nonreciprocal(cfg);
    const DerivedParams d = derive(cfg);
    require_resonant(d.delta);
    if (std::abs(d.lambda_a - d.lambda_b) > 1e-8 * (d.lambda_a + d.lambda_b))
        throw std::invalid_argument("symmetric variant needs Lambda_a = Lambda_b");
    if (d.gamma_a * d.gamma_b == 0.0) return 0.0;
    const double l = 0.5 * (d.lambda_a + d.lambda_b);
    const double x = 0.5 * l * t;
    const double pref = 16.0 * cfg.charger.omega * d.gamma_a * d.gamma_b *
                        detail::sq(cfg.drive.amplitude) / detail::sq(l * l);
    return pref * detail::sq(1.0 - (1.0 + x) * std::exp(-x));
}

// Charger energy under the decoupling condition: the charger sees only its
// own total rate.
inline double energy_charger_nr(const SystemConfig& cfg, double t) {
    require_nonreciprocal(cfg);
    const DerivedParams d = derive(cfg);
    require_resonant(d.delta);
    const double omega = cfg.charger.omega;
    const double amp = cfg.drive.amplitude;
    if (d.lambda_a == 0.0) return omega * detail::sq(amp * t);
    return 4.0 * omega * detail::sq(amp * std::expm1(-0.5 * d.lambda_a * t) / d.lambda_a);
}

inline double energy_charger_nr_steady(const SystemConfig& cfg) {
    require_nonreciprocal(cfg);
    const DerivedParams d = derive(cfg);
    require_resonant(d.delta);
    if (d.lambda_a == 0.0)
        throw error(errc::singular_system, "undamped charger has no steady state");
    return 4.0 * cfg.charger.omega * detail::sq(cfg.drive.amplitude / d.lambda_a);
}

// Battery energy without the shared reservoir: only kappa_a, kappa_b, J and
// the drive enter, so the evaluator can be handed any config and ignores
// Gamma by construction. One complex expression covers the underdamped,
// overdamped and (via the short series) critically damped regimes.
inline double energy_battery_reciprocal(const SystemConfig& cfg, double t) {
    const double ka = cfg.charger.kappa;
    const double kb = cfg.battery.kappa;
    if (ka * kb == 0.0)
        throw error(errc::zero_local_damping,
                    "reciprocal energy needs kappa_a, kappa_b > 0");
    const DerivedParams d = derive(cfg);
    require_resonant(d.delta);
    const double absJ2 = std::norm(cfg.J);
    const double zeta = 16.0 * cfg.charger.omega * detail::sq(cfg.drive.amplitude) *
                        absJ2 / detail::sq(4.0 * absJ2 + ka * kb);
    const double kab = d.kappa_ab;
    double env;
    if (std::abs(d.delta_cap) * t < 1e-6) {
        env = std::exp(-0.25 * kab * t) * (2.0 + 0.5 * kab * t);
    } else {
        const complex z = 0.25 * t * d.delta_cap;
        const complex bracket = 2.0 * std::cosh(z) +
                                (2.0 * kab) * std::sinh(z) / d.delta_cap;
        if (std::abs(bracket.imag()) > 1e-10 * (1.0 + std::abs(bracket.real())))
            throw std::logic_error("reciprocal energy: imaginary residue out of bounds");
        env = std::exp(-0.25 * kab * t) * bracket.real();
    }
    return zeta * detail::sq(1.0 - 0.5 * env);
}

// t -> infinity limit of the reciprocal energy.
inline double energy_battery_reciprocal_steady(const SystemConfig& cfg) {
    const double ka = cfg.charger.kappa;
    const double kb = cfg.battery.kappa;
    if (ka * kb == 0.0)
        throw error(errc::zero_local_damping,
                    "reciprocal energy needs kappa_a, kappa_b > 0");
    const double absJ2 = std::norm(cfg.J);
    return 16.0 * cfg.charger.omega * detail::sq(cfg.drive.amplitude) * absJ2 /
           detail::sq(4.0 * absJ2 + ka * kb);
}

inline double energy_curve(const EnergyCurveSpec& spec, double t) {
    switch (spec.variant) {
    case energy_variant::nonreciprocal_general:
        return energy_battery_nr_detuned(spec.config, t);
    case energy_variant::nonreciprocal_resonant:
        return energy_battery_nr(spec.config, t);
    case energy_variant::nonreciprocal_symmetric:
        return energy_battery_nr_symmetric(spec.config, t);
    case energy_variant::charger_nonreciprocal:
        return energy_charger_nr(spec.config, t);
    case energy_variant::reciprocal:
        return energy_battery_reciprocal(spec.config, t);
    }
    throw std::logic_error("unhandled energy variant");
}

// Battery-to-charger energy ratio in the decoupled regime, t > 0.
inline double eta_ab(const SystemConfig& cfg, double t) {
    if (!(t > 0.0))
        throw error(errc::division_by_zero, "eta_ab is defined only for t > 0");
    const double ea = energy_charger_nr(cfg, t);
    if (ea == 0.0)
        throw error(errc::division_by_zero, "charger energy vanishes");
    return energy_battery_nr(cfg, t) / ea;
}

// Its steady limit, 4 Gamma_a Gamma_b / Lambda_b^2. Equals the dissipative
// cooperativity when the total rates coincide; otherwise this is the
// asymmetric generalization.
inline double eta_ab_steady(const SystemConfig& cfg) {
    require_nonreciprocal(cfg);
    const DerivedParams d = derive(cfg);
    require_resonant(d.delta);
    if (d.lambda_b == 0.0)
        throw error(errc::division_by_zero, "eta_ab steady limit needs Lambda_b > 0");
    return 4.0 * d.gamma_a * d.gamma_b / detail::sq(d.lambda_b);
}

// Decoupled-to-reciprocal battery energy ratio at matched kappa's and
// |Gamma| = 2|J| (which the decoupling condition with |mu| = 1 implies).
inline double eta_bb(const SystemConfig& cfg, double t) {
    if (!(t > 0.0))
        throw error(errc::division_by_zero, "eta_bb is defined only for t > 0");
    const double eb = energy_battery_reciprocal(cfg, t);
    if (eb == 0.0)
        throw error(errc::division_by_zero,
                    "reciprocal battery energy vanishes at t = " + detail::num(t));
    return energy_battery_nr(cfg, t) / eb;
}

inline double eta_bb_steady(const SystemConfig& cfg) {
    return energy_battery_nr_steady(cfg) / energy_battery_reciprocal_steady(cfg);
}

// Steady ratio as a function of cooperativity C and damping ratio xi.
inline double eta_bb_inf(double C, double xi) {
    const double rc = std::sqrt(C);
    return 4.0 * detail::sq((1.0 + C) / ((rc + xi) * (rc + 1.0 / xi)));
}

// Same with the reservoir weights rebalanced optimally; xi drops out.
inline double eta_bb_opt_inf(double C) {
    const double rc = std::sqrt(C);
    return 4.0 * detail::sq((1.0 + C) / detail::sq(rc + 1.0));
}

}  // namespace nrqb
