#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rabi {

using cplx = std::complex<double>;

// Photoelectron partial waves reachable from the s ground state by two photons.
enum class PartialWave { S, D };
inline constexpr std::array<PartialWave, 2> all_partial_waves{PartialWave::S, PartialWave::D};

std::string_view to_string(PartialWave ell);
PartialWave parse_partial_wave(std::string_view name);

struct ChannelDipoles {
    double s = 0.0;
    double d = 0.0;

    double operator[](PartialWave ell) const { return ell == PartialWave::S ? s : d; }
};

// Two-level atom coupled to the photoionization continuum. Energies and
// dipoles in atomic units; dipole signs are kept exactly as given.
struct AtomModel {
    double eps_a = 0.0;  // ground state, equals -I_p
    double eps_b = 0.0;  // resonantly coupled excited state
    double z_ba = 0.0;   // bound-bound dipole
    ChannelDipoles z_cont_from_b;    // one photon from |b>
    ChannelDipoles z_cont_from_rho;  // effective two-photon element via the perturbed wave
    std::optional<double> eps_c_nearest;  // nearest neglected intermediate, offset above eps_b

    double omega_ba() const { return eps_b - eps_a; }
    double ionization_potential() const { return -eps_a; }
    // Kinetic energy of a photoelectron that absorbed two resonant photons.
    double two_photon_line() const { return 2.0 * omega_ba() + eps_a; }

    void validate() const;
};

// CIS values used by the model curves: omega_ba = 24.1432 eV, I_p = 24.9788 eV,
// z_ba = 0.124 a0 and the tabulated continuum elements.
AtomModel helium_cis_default();
// Same continuum elements with the spectroscopic transition energy, ionization
// potential and z_ba = 0.1318 a0.
AtomModel helium_experimental();
AtomModel atom_preset(std::string_view name);

enum class Envelope { FlatTop, Gaussian };

std::string_view to_string(Envelope envelope);
Envelope parse_envelope(std::string_view name);

// Linearly polarized pulse. For FlatTop, duration is the total on-time t_f.
// For Gaussian, duration is tau in A(t) = A0 sin(wt) exp(-2 ln2 t^2 / tau^2):
// tau is the intensity FWHM, the field envelope FWHM is tau * sqrt(2).
struct PulseParams {
    double E0 = 0.0;
    double omega = 0.0;
    Envelope envelope = Envelope::FlatTop;
    double duration = 0.0;

    double detuning(const AtomModel& atom) const { return omega - atom.omega_ba(); }
    double rabi_frequency(const AtomModel& atom) const { return E0 * atom.z_ba; }

    void validate() const;
};

double rabi_period(const AtomModel& atom, double E0);

// Flat-top pulse lasting `periods` resonant Rabi periods 2 pi / Omega.
PulseParams flat_top_pulse(const AtomModel& atom, double E0, double detuning, double periods);

// Photoelectron kinetic-energy axis (a.u.), strictly increasing.
class SpectrumGrid {
public:
    SpectrumGrid() = default;
    explicit SpectrumGrid(std::vector<double> energies);

    static SpectrumGrid uniform(double lo, double hi, std::size_t n);
    // Uniform grid in delta = eps - (2 omega_ba + eps_a); bounds in eV.
    static SpectrumGrid around_two_photon_line(const AtomModel& atom,
                                               double delta_lo_eV = -0.6,
                                               double delta_hi_eV = 0.6,
                                               std::size_t n = 2401);

    const std::vector<double>& energies() const { return energies_; }
    std::size_t size() const { return energies_.size(); }
    double operator[](std::size_t i) const { return energies_[i]; }
    double front() const { return energies_.front(); }
    double back() const { return energies_.back(); }
    bool is_uniform() const { return uniform_; }
    // Spacing of a uniform grid; throws for non-uniform grids.
    double step() const;

private:
    std::vector<double> energies_;
    bool uniform_ = false;
};

struct ChannelSpectrum {
    PartialWave ell = PartialWave::S;
    std::vector<cplx> amplitude;   // empty for incoherent (averaged) spectra
    std::vector<double> intensity;
};

// Angle-integrated spectrum: partial waves add incoherently.
struct Spectrum {
    SpectrumGrid grid;
    std::vector<ChannelSpectrum> channels;

    std::vector<double> intensity() const;
    const ChannelSpectrum* channel(PartialWave ell) const;
};

} // namespace rabi
