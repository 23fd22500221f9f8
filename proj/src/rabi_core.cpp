#include "rabi/rabi_core.hpp"

#include "rabi/errors.hpp"

#include <cmath>

namespace rabi {

using namespace std::complex_literals;

RabiParams RabiParams::from(const AtomModel& atom, const PulseParams& pulse)
{
    return {pulse.rabi_frequency(atom), pulse.detuning(atom)};
}

double RabiParams::W() const
{
    return std::hypot(Omega, delta_omega);
}

double RabiParams::detuning_ratio() const
{
    const double w = W();
    return w > 0.0 ? delta_omega / w : 0.0;
}

double half_sinc(double x, double t)
{
    const double arg = 0.5 * x * t;
    if (std::abs(x) < 1e-8) {
        // sin(arg)/x = (t/2)(1 - arg^2/6 + arg^4/120)
        const double a2 = arg * arg;
        return 0.5 * t * (1.0 - a2 / 6.0 + a2 * a2 / 120.0);
    }
    return std::sin(arg) / x;
}

RabiAmplitudes rabi_amplitudes(double t, const RabiParams& p)
{
    if (!(t >= 0.0))
        throw ConfigError("rabi_amplitudes: time must be non-negative");
    const double w = p.W();
    const double c = std::cos(0.5 * w * t);
    // sin(Wt/2)/W -> t/2 as W -> 0
    const double s_over_w = half_sinc(w, t);
    const cplx a = (c - 1i * p.delta_omega * s_over_w) * std::exp(0.5i * p.delta_omega * t);
    const cplx b = -1i * p.Omega * s_over_w * std::exp(-0.5i * p.delta_omega * t);
    return {a, b, t};
}

double excited_population(double t, const RabiParams& p)
{
    if (!(t >= 0.0))
        throw ConfigError("excited_population: time must be non-negative");
    const double s = p.Omega * half_sinc(p.W(), t);
    return s * s;
}

DressedPair dressed_energies(const AtomModel& atom, const PulseParams& pulse)
{
    const double w = RabiParams::from(atom, pulse).W();
    const double mid = 0.5 * (atom.eps_a + atom.eps_b + pulse.omega);
    return {mid + 0.5 * w, mid - 0.5 * w};
}

DressedPair dressed_kinetic_energies(const AtomModel& atom, const PulseParams& pulse)
{
    // Referencing the dressed energies to the ground state, epsilon_pm - eps_a,
    // gives the familiar form epsilon_pm + omega - I_p.
    const DressedPair e = dressed_energies(atom, pulse);
    const double shift = pulse.omega - atom.ionization_potential() - atom.eps_a;
    return {e.plus + shift, e.minus + shift};
}

} // namespace rabi
