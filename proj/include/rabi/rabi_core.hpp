#pragma once

#include "rabi/model.hpp"

#include <utility>

namespace rabi {

// Closed-form two-level dynamics in the rotating wave approximation.
struct RabiParams {
    double Omega = 0.0;        // Rabi frequency E0 * z_ba
    double delta_omega = 0.0;  // detuning omega - omega_ba

    RabiParams() = default;
    RabiParams(double omega_rabi, double detuning) : Omega(omega_rabi), delta_omega(detuning) {}
    static RabiParams from(const AtomModel& atom, const PulseParams& pulse);

    // Generalized Rabi frequency sqrt(Omega^2 + delta_omega^2).
    double W() const;
    // Delta_omega / W, taken as 0 in the uncoupled resonant limit W = 0.
    double detuning_ratio() const;
};

struct RabiAmplitudes {
    cplx a;
    cplx b;
    double t = 0.0;
};

RabiAmplitudes rabi_amplitudes(double t, const RabiParams& p);

// P_b = (Omega/W)^2 sin^2(W t / 2).
double excited_population(double t, const RabiParams& p);

struct DressedPair {
    double plus = 0.0;
    double minus = 0.0;

    double gap() const { return plus - minus; }
};

// epsilon_pm = (eps_a + eps_b + omega +- W) / 2.
DressedPair dressed_energies(const AtomModel& atom, const PulseParams& pulse);

// Kinetic energies one photon above the dressed states, counted from the
// ionization threshold: epsilon_pm + omega with absolute level energies.
DressedPair dressed_kinetic_energies(const AtomModel& atom, const PulseParams& pulse);

// sin(x t / 2) / x, continuous through x = 0 where it equals t / 2.
double half_sinc(double x, double t);

} // namespace rabi
