#pragma once

#include "rabi/model.hpp"
#include "rabi/rabi_core.hpp"

#include <span>
#include <string_view>

namespace rabi {

// Which ionization pathway contributes to a spectrum.
enum class Pathway { OnePhotonOnly, TwoPhotonOnly, CoherentTotal };

std::string_view to_string(Pathway pathway);
Pathway parse_pathway(std::string_view name);

struct TwoPhotonOptions {
    // Adds the term resonant with the nearest neglected intermediate state.
    bool include_transient_term = false;
    double effective_eps_c = 0.0;  // absolute energy (a.u.), must exceed eps_b

    // Term off; eps_c = eps_b + eps_c_nearest (0.3 eV when the atom has none).
    static TwoPhotonOptions defaults(const AtomModel& atom);
    void validate(const AtomModel& atom) const;
};

// The two Autler-Townes components of a flat-top amplitude: `lower` peaks at
// delta = 3 dw/2 - W/2 and `upper` at delta = 3 dw/2 + W/2. `extra` holds the
// intermediate-state resonant term of the two-photon amplitude.
struct AmplitudeTerms {
    cplx lower;
    cplx upper;
    cplx extra;

    cplx total() const { return lower + upper + extra; }
};

// Photoelectron energy relative to the two-resonant-photon line.
inline double relative_energy(double eps, const AtomModel& atom)
{
    return eps - 2.0 * atom.omega_ba() - atom.eps_a;
}

// First-order amplitude for one-photon ionization from |b> at time t of a
// flat-top pulse. eps is the photoelectron kinetic energy.
AmplitudeTerms alpha1_terms(double eps, double t, const AtomModel& atom, const PulseParams& pulse,
                            PartialWave ell);
cplx alpha1(double eps, double t, const AtomModel& atom, const PulseParams& pulse, PartialWave ell);

// Second-order amplitude for two-photon ionization from |a>, with the
// intermediate-state sum collapsed onto the effective element z_cont_from_rho.
AmplitudeTerms alpha2_terms(double eps, double t, const AtomModel& atom, const PulseParams& pulse,
                            PartialWave ell, const TwoPhotonOptions& opts);
cplx alpha2(double eps, double t, const AtomModel& atom, const PulseParams& pulse, PartialWave ell,
            const TwoPhotonOptions& opts);

// |E0/2 * z_rho / z_b| for the given partial wave.
double amplitude_ratio(const AtomModel& atom, const PulseParams& pulse, PartialWave ell);

// Angle-integrated single-atom spectrum at time t: within a partial wave the
// selected pathways add coherently, partial waves add incoherently.
Spectrum single_atom_spectrum(const SpectrumGrid& grid, double t, const AtomModel& atom,
                              const PulseParams& pulse, const TwoPhotonOptions& opts,
                              Pathway pathway);

// Per-channel intensities of single_atom_spectrum written into caller buffers.
void single_atom_intensities(const SpectrumGrid& grid, double t, const AtomModel& atom,
                             const PulseParams& pulse, const TwoPhotonOptions& opts,
                             Pathway pathway, std::span<double> s_out, std::span<double> d_out);

} // namespace rabi
