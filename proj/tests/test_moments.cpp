#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "nrqb/moments.hpp"
#include "nrqb/params.hpp"
#include "nrqb/presets.hpp"

using namespace nrqb;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Asymmetric rates plus detuning: exercises every term of the mean equations
// while staying exactly solvable.
SystemConfig detuned_asymmetric() {
    SystemConfig cfg;
    cfg.charger.kappa = 0.05;
    cfg.battery.kappa = 0.01;
    cfg.Gamma = 0.04;
    cfg.drive.amplitude = 0.1;
    cfg.drive.omega_L = 1.01;
    return make_nonreciprocal(validate(cfg));
}

struct ExactMeans {
    complex alpha;
    complex beta;
};

// With the coupling matched to the reservoir the charger mean relaxes on its
// own pole and the battery mean is that response filtered once more through
// the battery pole.
ExactMeans exact_means(const SystemConfig& cfg, double t) {
    const DerivedParams d = derive(cfg);
    const complex atil{0.5 * d.lambda_a, -d.delta};
    const complex ctil{0.5 * d.lambda_b, -d.delta};
    const complex alpha_ss = complex{0.0, -cfg.drive.amplitude} / atil;
    const complex ea = std::exp(-atil * t);
    const complex ec = std::exp(-ctil * t);
    return {alpha_ss * (1.0 - ea),
            std::conj(d.mu) * cfg.Gamma * alpha_ss *
                ((1.0 - ec) / ctil - (ea - ec) / (ctil - atil))};
}

// Largest deviation of a state from the exact coherent solution, covering
// first and second moments.
double state_error(const SystemConfig& cfg, const MomentState& s, double t) {
    const ExactMeans ex = exact_means(cfg, t);
    double err = std::abs(s.mean_a - ex.alpha);
    err = std::max(err, std::abs(s.mean_b - ex.beta));
    err = std::max(err, std::abs(s.n_a - std::norm(ex.alpha)));
    err = std::max(err, std::abs(s.n_b - std::norm(ex.beta)));
    err = std::max(err, std::abs(s.coh_ab - std::conj(ex.alpha) * ex.beta));
    return err;
}

}  // namespace

TEST_CASE("integrated moments track the exact coherent solution") {
    const SystemConfig cfg = detuned_asymmetric();
    const Trajectory traj = integrate(cfg, {}, 100.0, 0.01);
    REQUIRE(traj.states.size() == 10001u);
    for (size_t k : {1000u, 5000u, 10000u})
        CHECK(state_error(cfg, traj.states[k], traj.times[k]) <= 1e-9);
}

TEST_CASE("halving the step shrinks the error by the fourth-order factor") {
    SystemConfig cfg = validate(presets::fig2());
    cfg.drive.omega_L = 1.01;
    const double t_end = 200.0;
    const auto err_at = [&](double dt) {
        const Trajectory traj = integrate(cfg, {}, t_end, dt);
        return state_error(cfg, traj.states.back(), traj.times.back());
    };
    const double coarse = err_at(0.4);
    const double fine = err_at(0.2);
    CHECK(coarse / fine > 12.0);
    CHECK(coarse / fine < 20.0);
}

TEST_CASE("step guard tracks the fastest rate in the system") {
    const SystemConfig cfg = validate(presets::fig2());  // fastest rate 4|J| = 0.08
    CHECK_THROWS_AS(integrate(cfg, {}, 10.0, 6.3), error);
    try {
        integrate(cfg, {}, 10.0, 6.3);
    } catch (const error& e) {
        CHECK(e.code() == errc::step_too_large);
    }
    CHECK_NOTHROW(integrate(cfg, {}, 10.0, 6.2));

    CHECK_THROWS_AS(integrate(cfg, {}, 0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(integrate(cfg, {}, -1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(integrate(cfg, {}, 10.0, 0.0), std::invalid_argument);
}

TEST_CASE("charger moments are blind to the battery") {
    const SystemConfig cfg = validate(presets::fig2());
    const Trajectory base = integrate(cfg, {}, 50.0, 0.05);

    MomentState displaced;
    displaced.mean_b = {0.3, -0.2};
    displaced.n_b = std::norm(displaced.mean_b);
    const Trajectory kicked = integrate(cfg, displaced, 50.0, 0.05);

    SystemConfig lossy = cfg;
    lossy.battery.kappa = 0.03;
    const Trajectory damped = integrate(validate(lossy), {}, 50.0, 0.05);

    REQUIRE(kicked.states.size() == base.states.size());
    REQUIRE(damped.states.size() == base.states.size());
    for (size_t k = 0; k < base.states.size(); ++k) {
        CHECK(std::abs(base.states[k].mean_a - kicked.states[k].mean_a) <= 1e-12);
        CHECK(std::abs(base.states[k].n_a - kicked.states[k].n_a) <= 1e-12);
        CHECK(std::abs(base.states[k].mean_a - damped.states[k].mean_a) <= 1e-12);
        CHECK(std::abs(base.states[k].n_a - damped.states[k].n_a) <= 1e-12);
    }
}

TEST_CASE("stationary state matches the frozen fixed point") {
    const SystemConfig cfg = validate(presets::fig2());
    const MomentState s = steady_state(cfg);
    CHECK_THAT(s.n_b, WithinRel(74.88005297763746, 1e-12));
    CHECK_THAT(s.n_a, WithinRel(21.63331530557058, 1e-12));
    CHECK_THAT(s.mean_a.real(), WithinAbs(0.0, 1e-14));
    CHECK_THAT(s.mean_a.imag(), WithinRel(-4.651162790697675, 1e-12));
    CHECK_THAT(s.mean_b.real(), WithinAbs(0.0, 1e-13));
    CHECK_THAT(s.mean_b.imag(), WithinRel(8.653326122228233, 1e-12));
    CHECK_THAT(s.coh_ab.real(), WithinRel(-40.248028475480154, 1e-12));
    CHECK_THAT(s.coh_ab.imag(), WithinAbs(0.0, 1e-12));
    // the fixed point inherits the coherent factorization
    CHECK_THAT(s.n_a, WithinRel(std::norm(s.mean_a), 1e-12));
    CHECK_THAT(s.n_b, WithinRel(std::norm(s.mean_b), 1e-12));
}

TEST_CASE("long integration relaxes onto the stationary state") {
    const SystemConfig cfg = validate(presets::fig2());
    const MomentState target = steady_state(cfg);
    const Trajectory traj = integrate(cfg, {}, 1200.0, 0.2);
    const MomentState& last = traj.states.back();
    CHECK_THAT(last.n_b, WithinRel(target.n_b, 1e-7));
    CHECK_THAT(last.n_a, WithinRel(target.n_a, 1e-7));
    CHECK(std::abs(last.coh_ab - target.coh_ab) <= 1e-7 * std::abs(target.coh_ab));
}

TEST_CASE("detuned stationary occupation matches the response formula") {
    SystemConfig cfg = validate(presets::fig2());
    cfg.drive.omega_L = 1.01;
    const MomentState s = steady_state(cfg);
    CHECK_THAT(s.n_b, WithinRel(50.61288046404101, 1e-12));
}

TEST_CASE("the shared-reservoir dark state makes the fixed point singular") {
    SystemConfig cfg;
    cfg.Gamma = 0.1;
    cfg.drive.amplitude = 0.1;
    cfg = validate(cfg);  // no local damping, no coherent coupling
    CHECK_THROWS_AS(steady_state(cfg), error);
    try {
        steady_state(cfg);
    } catch (const error& e) {
        CHECK(e.code() == errc::singular_system);
    }
}

TEST_CASE("recorded energies mirror the occupations and grow monotonically") {
    const SystemConfig cfg = validate(presets::fig2());
    const Trajectory traj = integrate(cfg, {}, 50.0, 0.05);
    REQUIRE(traj.energy_b.size() == traj.states.size());
    CHECK(traj.times.front() == 0.0);
    CHECK_THAT(traj.times.back(), WithinAbs(50.0, 1e-10));
    for (size_t k = 0; k < traj.states.size(); ++k) {
        CHECK(traj.energy_a[k] == cfg.charger.omega * traj.states[k].n_a);
        CHECK(traj.energy_b[k] == cfg.charger.omega * traj.states[k].n_b);
        if (k > 0) {
            CHECK(traj.energy_a[k] >= traj.energy_a[k - 1] - 1e-12);
            CHECK(traj.energy_b[k] >= traj.energy_b[k - 1] - 1e-12);
        }
    }
}
