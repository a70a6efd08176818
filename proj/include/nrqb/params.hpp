#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace nrqb {

using complex = std::complex<double>;

// Error taxonomy shared by every module. what() is always a single line of
// the form "CodeName: detail" so front ends can print it verbatim.
enum class errc {
    negative_rate,
    frequency_mismatch,
    zero_shared_coupling,
    step_too_large,
    singular_system,
    not_nonreciprocal,
    not_resonant,
    zero_local_damping,
    not_underdamped,
    division_by_zero,
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::negative_rate:        return "NegativeRate";
    case errc::frequency_mismatch:   return "FrequencyMismatch";
    case errc::zero_shared_coupling: return "ZeroSharedCoupling";
    case errc::step_too_large:       return "StepTooLarge";
    case errc::singular_system:      return "SingularSystem";
    case errc::not_nonreciprocal:    return "NotNonreciprocal";
    case errc::not_resonant:         return "NotResonant";
    case errc::zero_local_damping:   return "ZeroLocalDamping";
    case errc::not_underdamped:      return "NotUnderdamped";
    case errc::division_by_zero:     return "DivisionByZero";
    }
    return "UnknownError";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
          code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline double sq(double x) { return x * x; }

}  // namespace detail

// One bosonic mode: frequency, local damping, shared-reservoir weight.
// All rates and energies are expressed in units of the mode frequency
// (hbar = 1), so omega is usually left at 1.
struct ModeParams {
    double omega = 1.0;
    double kappa = 0.0;   // local damping rate, >= 0
    complex p{1.0, 0.0};  // shared-reservoir coupling weight
};

struct DriveParams {
    double amplitude = 0.0;  // drive strength, >= 0
    double omega_L = 1.0;    // drive frequency
};

// Full physical parameter set of the charger-battery-reservoir-drive system.
struct SystemConfig {
    ModeParams charger;
    ModeParams battery;
    complex J{0.0, 0.0};  // coherent charger-battery coupling
    double Gamma = 0.0;   // shared-reservoir rate, >= 0
    DriveParams drive;
};

// Everything computable from a SystemConfig. Fields hold plain IEEE results:
// xi is inf when kappa_b = 0 (see xi_finite) and the cooperativities may be
// inf or nan for lossless modes.
struct DerivedParams {
    complex mu;                     // -p_b * conj(p_a)
    double gamma_a = 0.0;           // Gamma |p_a|^2
    double gamma_b = 0.0;           // Gamma |p_b|^2
    double lambda_a = 0.0;          // gamma_a + kappa_a
    double lambda_b = 0.0;          // gamma_b + kappa_b
    double delta = 0.0;             // omega_L - omega
    complex delta_cap;              // sqrt((kappa_a-kappa_b)^2 - 16|J|^2)
    double kappa_ab = 0.0;          // kappa_a + kappa_b
    double xi = 0.0;                // sqrt(kappa_a / kappa_b)
    bool xi_finite = false;
    double coop_coherent = 0.0;     // C   = 4|J|^2 / (kappa_a kappa_b)
    double coop_dissipative = 0.0;  // C_d = 4 Gamma_a Gamma_b / (Lambda_a Lambda_b)
    complex g_ab;                   // J + i mu Gamma / 2, drives <a> from <b>
    complex g_ba;                   // conj(J) + i conj(mu) Gamma / 2
};

// Checks the type invariants and normalizes the reservoir weights so that
// |mu| = 1, absorbing the leftover magnitude into Gamma. The normalization
// preserves Gamma_a, Gamma_b and mu*Gamma exactly (up to roundoff) and is
// skipped when |p_a||p_b| is already 1 to within 1e-12, which makes it
// idempotent. Weights are left alone when either is zero unless
// require_unit_mu demands the normalization.
inline SystemConfig validate(SystemConfig cfg, bool require_unit_mu = false) {
    if (!(cfg.charger.kappa >= 0.0))
        throw error(errc::negative_rate,
                    "kappa_a must be >= 0 (got " + detail::num(cfg.charger.kappa) + ")");
    if (!(cfg.battery.kappa >= 0.0))
        throw error(errc::negative_rate,
                    "kappa_b must be >= 0 (got " + detail::num(cfg.battery.kappa) + ")");
    if (!(cfg.Gamma >= 0.0))
        throw error(errc::negative_rate,
                    "Gamma must be >= 0 (got " + detail::num(cfg.Gamma) + ")");
    if (!(cfg.drive.amplitude >= 0.0))
        throw error(errc::negative_rate,
                    "drive_amplitude must be >= 0 (got " + detail::num(cfg.drive.amplitude) + ")");
    if (!(cfg.charger.omega > 0.0))
        throw error(errc::negative_rate,
                    "omega must be > 0 (got " + detail::num(cfg.charger.omega) + ")");
    if (cfg.charger.omega != cfg.battery.omega)
        throw error(errc::frequency_mismatch,
                    "mode frequencies must be equal (got " + detail::num(cfg.charger.omega) +
                    " and " + detail::num(cfg.battery.omega) + ")");
    const double m = std::abs(cfg.charger.p) * std::abs(cfg.battery.p);
    if (m == 0.0) {
        if (require_unit_mu)
            throw error(errc::zero_shared_coupling,
                        "|mu| = 1 normalization needs p_a * p_b != 0");
        return cfg;
    }
    if (std::abs(m - 1.0) > 1e-12) {
        const double s = std::sqrt(m);
        cfg.charger.p /= s;
        cfg.battery.p /= s;
        cfg.Gamma *= m;
    }
    return cfg;
}

inline DerivedParams derive(const SystemConfig& cfg) {
    DerivedParams d;
    const double ka = cfg.charger.kappa;
    const double kb = cfg.battery.kappa;
    d.mu = -cfg.battery.p * std::conj(cfg.charger.p);
    d.gamma_a = cfg.Gamma * std::norm(cfg.charger.p);
    d.gamma_b = cfg.Gamma * std::norm(cfg.battery.p);
    d.lambda_a = d.gamma_a + ka;
    d.lambda_b = d.gamma_b + kb;
    d.delta = cfg.drive.omega_L - cfg.charger.omega;
    // Branch: Re >= 0, and purely imaginary with Im >= 0 in the underdamped
    // case, so delta_cap^2 reproduces the discriminant exactly.
    const double disc = detail::sq(ka - kb) - 16.0 * std::norm(cfg.J);
    d.delta_cap = disc >= 0.0 ? complex{std::sqrt(disc), 0.0}
                              : complex{0.0, std::sqrt(-disc)};
    d.kappa_ab = ka + kb;
    d.xi_finite = kb > 0.0;
    d.xi = std::sqrt(ka / kb);
    d.coop_coherent = 4.0 * std::norm(cfg.J) / (ka * kb);
    d.coop_dissipative = 4.0 * d.gamma_a * d.gamma_b / (d.lambda_a * d.lambda_b);
    const complex half{0.0, 0.5 * cfg.Gamma};
    d.g_ab = cfg.J + half * d.mu;
    d.g_ba = std::conj(cfg.J) + half * std::conj(d.mu);
    return d;
}

// |J - (-i mu Gamma / 2)|. Zero iff the charger equations decouple from the
// battery (the effective coupling g_ab vanishes).
inline double nonreciprocity_residual(const SystemConfig& cfg) {
    const complex mu = -cfg.battery.p * std::conj(cfg.charger.p);
    return std::abs(cfg.J + complex{0.0, 0.5 * cfg.Gamma} * mu);
}

// Replaces J by -i mu Gamma / 2. The same expression feeds derive(), so the
// residual of the result is exactly zero.
inline SystemConfig make_nonreciprocal(SystemConfig cfg) {
    const complex mu = -cfg.battery.p * std::conj(cfg.charger.p);
    if (cfg.Gamma == 0.0 || mu == complex{0.0, 0.0})
        throw error(errc::zero_shared_coupling,
                    "decoupling condition needs Gamma > 0 and p_a * p_b != 0");
    cfg.J = -(complex{0.0, 0.5 * cfg.Gamma} * mu);
    return cfg;
}

// p_a -> p_a sqrt(x), p_b -> p_b / sqrt(x): shifts reservoir weight between
// the modes while leaving mu and Gamma_a * Gamma_b unchanged.
inline SystemConfig apply_rescaling(SystemConfig cfg, double x) {
    if (!(x > 0.0))
        throw error(errc::negative_rate,
                    "rescaling factor must be > 0 (got " + detail::num(x) + ")");
    const double s = std::sqrt(x);
    cfg.charger.p *= s;
    cfg.battery.p /= s;
    return cfg;
}

}  // namespace nrqb
