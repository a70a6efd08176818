#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nrqb/params.hpp"

namespace nrqb {

// The five moments <a>, <b>, <a^dag a>, <b^dag b>, <a^dag b> in the frame
// rotating at the drive frequency. Occupations and the cross coherence are
// frame-invariant because both modes share one frequency.
struct MomentState {
    complex mean_a{0.0, 0.0};
    complex mean_b{0.0, 0.0};
    double n_a = 0.0;
    double n_b = 0.0;
    complex coh_ab{0.0, 0.0};
};

inline MomentState operator+(const MomentState& u, const MomentState& v) {
    return {u.mean_a + v.mean_a, u.mean_b + v.mean_b,
            u.n_a + v.n_a, u.n_b + v.n_b, u.coh_ab + v.coh_ab};
}

inline MomentState operator*(double c, const MomentState& v) {
    return {c * v.mean_a, c * v.mean_b, c * v.n_a, c * v.n_b, c * v.coh_ab};
}

struct Trajectory {
    std::vector<double> times;
    std::vector<MomentState> states;
    std::vector<double> energy_a;  // omega * n_a
    std::vector<double> energy_b;  // omega * n_b
};

// Time derivative of the moments. The rotating frame turns the drive into a
// constant and puts the detuning on the diagonal of the mean equations; the
// second moments close on themselves because the system is linear.
inline MomentState rhs(const MomentState& s, const DerivedParams& d,
                       const DriveParams& drive) {
    const complex I{0.0, 1.0};
    const double E = drive.amplitude;
    const complex da{-0.5 * d.lambda_a, d.delta};
    const complex db{-0.5 * d.lambda_b, d.delta};
    MomentState out;
    out.mean_a = da * s.mean_a - I * d.g_ab * s.mean_b - complex{0.0, E};
    out.mean_b = db * s.mean_b - I * d.g_ba * s.mean_a;
    out.n_a = -d.lambda_a * s.n_a - 2.0 * std::real(I * d.g_ab * s.coh_ab)
              - 2.0 * E * s.mean_a.imag();
    out.n_b = -d.lambda_b * s.n_b + 2.0 * std::real(I * std::conj(d.g_ba) * s.coh_ab);
    out.coh_ab = -0.5 * (d.lambda_a + d.lambda_b) * s.coh_ab
                 - I * d.g_ba * s.n_a + I * std::conj(d.g_ab) * s.n_b
                 + complex{0.0, E} * s.mean_b;
    return out;
}

// Classical fixed-step RK4 with an integer number of steps; every accepted
// step is recorded. The guard keeps the explicit scheme well inside its
// stability region for this linear system.
inline Trajectory integrate(const SystemConfig& cfg, const MomentState& initial,
                            double t_end, double dt_max) {
    if (!(t_end > 0.0))
        throw std::invalid_argument("integrate: t_end must be > 0");
    if (!(dt_max > 0.0))
        throw std::invalid_argument("integrate: dt_max must be > 0");
    const DerivedParams d = derive(cfg);
    const double rate = std::max({d.lambda_a, d.lambda_b,
                                  4.0 * std::abs(cfg.J), 4.0 * std::abs(d.delta)});
    if (dt_max * rate > 0.5)
        throw error(errc::step_too_large,
                    "dt_max * max(Lambda_a, Lambda_b, 4|J|, 4|delta|) = " +
                    detail::num(dt_max * rate) + " exceeds 0.5");
    const auto n = static_cast<std::size_t>(std::ceil(t_end / dt_max));
    const double h = t_end / static_cast<double>(n);
    const double w = cfg.charger.omega;

    Trajectory traj;
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    traj.energy_a.reserve(n + 1);
    traj.energy_b.reserve(n + 1);
    auto record = [&](double t, const MomentState& s) {
        traj.times.push_back(t);
        traj.states.push_back(s);
        traj.energy_a.push_back(w * s.n_a);
        traj.energy_b.push_back(w * s.n_b);
    };

    MomentState s = initial;
    record(0.0, s);
    for (std::size_t k = 0; k < n; ++k) {
        const MomentState k1 = rhs(s, d, cfg.drive);
        const MomentState k2 = rhs(s + 0.5 * h * k1, d, cfg.drive);
        const MomentState k3 = rhs(s + 0.5 * h * k2, d, cfg.drive);
        const MomentState k4 = rhs(s + h * k3, d, cfg.drive);
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        record(h * static_cast<double>(k + 1), s);
    }
    return traj;
}

namespace detail {

// Gaussian elimination with partial pivoting on an n x (n+1) augmented
// system; the pivot check catches undamped normal modes.
template <std::size_t N>
inline std::array<double, N> solve_linear(std::array<std::array<double, N + 1>, N> m) {
    double scale = 0.0;
    for (const auto& row : m)
        for (std::size_t j = 0; j < N; ++j) scale = std::max(scale, std::abs(row[j]));
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) <= 1e-14 * scale)
            throw error(errc::singular_system, "second-moment system is singular");
        std::swap(m[col], m[piv]);
        for (std::size_t r = col + 1; r < N; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t j = col; j <= N; ++j) m[r][j] -= f * m[col][j];
        }
    }
    std::array<double, N> x{};
    for (std::size_t i = N; i-- > 0;) {
        double acc = m[i][N];
        for (std::size_t j = i + 1; j < N; ++j) acc -= m[i][j] * x[j];
        x[i] = acc / m[i][i];
    }
    return x;
}

}  // namespace detail

// Fixed point of the rotating-frame moment equations by direct linear solve;
// no time stepping involved.
inline MomentState steady_state(const SystemConfig& cfg) {
    const DerivedParams d = derive(cfg);
    if (d.lambda_a == 0.0 || d.lambda_b == 0.0)
        throw error(errc::singular_system, "steady state needs Lambda_a, Lambda_b > 0");
    const double E = cfg.drive.amplitude;
    const complex I{0.0, 1.0};

    // Means: (Lambda_a/2 - i delta) a + i g_ab b = -i E
    //        i g_ba a + (Lambda_b/2 - i delta) b = 0
    const complex A{0.5 * d.lambda_a, -d.delta};
    const complex B = I * d.g_ab;
    const complex C = I * d.g_ba;
    const complex D{0.5 * d.lambda_b, -d.delta};
    const complex det = A * D - B * C;
    if (std::abs(det) <= 1e-14 * (std::abs(A) * std::abs(D) + std::abs(B) * std::abs(C)))
        throw error(errc::singular_system, "first-moment system is singular");
    const complex rhs_a{0.0, -E};
    MomentState s;
    s.mean_a = rhs_a * D / det;
    s.mean_b = -C * rhs_a / det;

    // Occupations and coherence, unknowns (n_a, n_b, Re coh, Im coh).
    const complex b = d.g_ba;
    const complex q = std::conj(d.g_ab);
    const double ls = 0.5 * (d.lambda_a + d.lambda_b);
    std::array<std::array<double, 5>, 4> m{{
        {d.lambda_a, 0.0, -2.0 * d.g_ab.imag(), -2.0 * d.g_ab.real(),
         -2.0 * E * s.mean_a.imag()},
        {0.0, d.lambda_b, -2.0 * b.imag(), 2.0 * b.real(), 0.0},
        {-b.imag(), q.imag(), ls, 0.0, -E * s.mean_b.imag()},
        {b.real(), -q.real(), 0.0, ls, E * s.mean_b.real()},
    }};
    const std::array<double, 4> v = detail::solve_linear<4>(m);
    s.n_a = v[0];
    s.n_b = v[1];
    s.coh_ab = {v[2], v[3]};
    return s;
}

}  // namespace nrqb
