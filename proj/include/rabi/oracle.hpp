#pragma once

#include "rabi/ionization.hpp"
#include "rabi/model.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace rabi {

// Brute-force propagation of a few bound levels plus energy-discretized
// continua. Amplitudes are kept in a frame rotating with the photon number of
// each state: |a> carries no photon, |b> one, the continuum two.

enum class CouplingMode { Rwa, FullOscillating };

std::string_view to_string(CouplingMode mode);
CouplingMode parse_coupling_mode(std::string_view name);

// Kinetic-energy window of the continuum bins (a.u.). n_bins = 0 removes the
// continua altogether.
struct ContinuumSpec {
    double emin = 0.0;
    double emax = 0.0;
    std::size_t n_bins = 1024;

    // +-1.5 eV around the resonant two-photon line.
    static ContinuumSpec around_two_photon_line(const AtomModel& atom, double half_width_eV = 1.5,
                                                std::size_t n_bins = 1024);
};

// Explicit p-type intermediate reached from |a> by one photon and ionized by
// the next one.
struct IntermediateState {
    std::string label;
    double energy = 0.0;
    double z_from_a = 0.0;
    ChannelDipoles z_to_continuum;
};

struct SystemOptions {
    bool one_photon = true;  // |b> -> continuum
    bool two_photon = true;  // |a> -> continuum
    // Non-empty: the two-photon pathway runs through these states instead of
    // the effective perturbed-wave coupling.
    std::vector<IntermediateState> intermediates;

    static SystemOptions for_pathway(Pathway pathway);
};

struct BoundLevel {
    std::string label;
    double energy = 0.0;  // absolute, a.u.
    int photons = 0;      // photons absorbed on the way to this level
};

struct BoundCoupling {
    std::size_t upper = 0;  // level with one more photon
    std::size_t lower = 0;
    double z = 0.0;
};

struct EssentialStatesSystem {
    AtomModel atom;
    CouplingMode mode = CouplingMode::Rwa;
    std::vector<BoundLevel> bound;
    std::vector<BoundCoupling> bound_couplings;
    ContinuumSpec window;
    std::vector<double> bin_energies;  // bin centres, shared by all channels
    double bin_width = 0.0;
    std::vector<PartialWave> channels;
    // Energy-normalized bin couplings z * sqrt(d eps), [channel][bound level].
    // Levels with one photon couple by one photon, levels with none by two.
    std::vector<std::vector<double>> continuum_dipoles;

    std::size_t dimension() const { return bound.size() + channels.size() * bin_energies.size(); }
    // Frame Hamiltonian at time t, dense; intended for checks on small systems.
    Eigen::MatrixXcd hamiltonian(double t, const PulseParams& pulse) const;
};

EssentialStatesSystem build_system(const AtomModel& atom, const ContinuumSpec& window,
                                   CouplingMode mode, const SystemOptions& options = {});

// Field envelope f(t) with E(t) = E0 f(t) cos(omega t). Flat top: 1 on
// [0, duration], with a one-cycle sin^2 turn-on in full-oscillating mode.
// Gaussian: exp(-2 ln2 (t - t_c)^2 / tau^2), centred so that f starts at 1e-6.
double envelope_value(const PulseParams& pulse, CouplingMode mode, double t);
double pulse_end_time(const PulseParams& pulse);

struct PropagationResult {
    std::vector<double> times;
    std::vector<std::string> bound_labels;
    std::vector<std::vector<double>> bound_populations;  // [sample][level]
    std::vector<double> norm_history;
    std::vector<PartialWave> channels;
    std::vector<double> bin_energies;
    double bin_width = 0.0;
    std::vector<std::vector<cplx>> continuum_amplitudes;  // [channel][bin], final
    double dt = 0.0;
    std::size_t steps = 0;
};

// Crank-Nicolson steps from t = 0 to the end of the pulse, starting in |a>.
// dt is shrunk slightly so that an integer number of steps hits the end.
// Every observer_stride steps (and at the end) populations and the norm are
// recorded. Throws NumericalError when the norm drifts by more than 1e-6.
PropagationResult propagate(const EssentialStatesSystem& system, const PulseParams& pulse,
                            double dt, std::size_t observer_stride = 100);

// Default step: 0.2 / omega in full-oscillating mode, otherwise
// min(0.25, 1e-3 / W) so that the Rabi phase is resolved to about 1e-6.
double default_time_step(const EssentialStatesSystem& system, const PulseParams& pulse);

// Bin densities |c_k|^2 / d eps interpolated linearly onto the grid and
// rescaled so the grid integral equals the probability in the covered bins.
Spectrum oracle_spectrum(const PropagationResult& result, const SpectrumGrid& grid);

// || a / ||a|| - b / ||b|| ||, the shape mismatch of two spectra on one grid.
double normalized_l2_mismatch(const std::vector<double>& a, const std::vector<double>& b);

// Checkpoint blob: "RABIORCL", uint32 version, then counts and raw
// little-endian doubles. Not stable across versions.
inline constexpr std::uint32_t checkpoint_version = 1;
void write_checkpoint(const std::filesystem::path& path, const PropagationResult& result);
PropagationResult read_checkpoint(const std::filesystem::path& path);

} // namespace rabi
