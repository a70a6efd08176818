#pragma once

#include "nrqb/params.hpp"

// Bundled parameter sets for the reference figures emitted by the CLI. All
// of them drive resonantly with unit weights, so mu = -1 and the
// unidirectional coupling is J = i Gamma / 2 exactly.
namespace nrqb::presets {

// Symmetric rates: kappa_a = kappa_b, moderate shared rate.
inline SystemConfig fig2() {
    SystemConfig cfg;
    cfg.charger.kappa = 0.003;
    cfg.battery.kappa = 0.003;
    cfg.Gamma = 0.04;
    cfg.J = {0.0, 0.02};
    cfg.drive.amplitude = 0.1;
    return cfg;
}

// Same rates as fig2; the figure contrasts the shared-reservoir curve with
// the purely coherent one.
inline SystemConfig fig3() { return fig2(); }

// Strongly asymmetric local damping, weak shared rate (overdamped
// reciprocal comparison).
inline SystemConfig fig4() {
    SystemConfig cfg;
    cfg.charger.kappa = 0.1;
    cfg.battery.kappa = 0.003;
    cfg.Gamma = 0.01;
    cfg.J = {0.0, 0.005};
    cfg.drive.amplitude = 0.1;
    return cfg;
}

// Fast shared rate against mildly asymmetric local damping; the weight
// rebalancing study runs on this set.
inline SystemConfig fig5() {
    SystemConfig cfg;
    cfg.charger.kappa = 0.05;
    cfg.battery.kappa = 0.01;
    cfg.Gamma = 0.4;
    cfg.J = {0.0, 0.2};
    cfg.drive.amplitude = 0.1;
    return cfg;
}

}  // namespace nrqb::presets
