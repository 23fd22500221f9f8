#pragma once

#include "rabi/ionization.hpp"
#include "rabi/model.hpp"
#include "rabi/quadrature.hpp"

#include <optional>

namespace rabi {

// Gaussian focus crossing a box-shaped gas target. Lengths in metres, peak
// intensity in W/cm^2.
struct BeamGeometry {
    double I0 = 2e13;
    double w0 = 10.2e-6;
    double zR = 6.3e-3;
    double L = 2e-3;
    double rho_max_in_waists = 5.0;
    // Test hook: replaces the Gaussian profile by the constant I0.
    bool uniform_intensity = false;

    double waist(double z) const;
    void validate() const;
};

// I(rho, z) = I0 (w0 / w(z))^2 exp(-2 rho^2 / w(z)^2).
double beam_intensity(double rho, double z, const BeamGeometry& geom);

struct AveragingOptions {
    std::size_t nz = 65;
    std::size_t nrho = 129;
    // When set, node counts are doubled until the relative L2 change of S
    // drops below this value.
    std::optional<double> adaptive_tolerance;
    int max_refinements = 4;
    bool use_intensity_cache = true;
    std::size_t cache_points = 200;
    double cache_min_fraction = 1e-4;
};

struct AveragedSpectrum {
    Spectrum spectrum;       // per-channel intensities, no amplitudes
    double error_estimate;   // relative L2 difference to the half-node rule
    std::size_t nz = 0;
    std::size_t nrho = 0;
};

// S(eps) = 2 pi int_{-L/2}^{L/2} dz int_0^{rho_max} drho rho |c(eps, I(rho, z))|^2,
// where c is the flat-top single-atom amplitude at the local field strength
// E0 sqrt(I / I0) with the pulse duration held fixed. Volume in m^3.
AveragedSpectrum volume_averaged_spectrum(const SpectrumGrid& grid, double t,
                                          const AtomModel& atom, const PulseParams& pulse_at_I0,
                                          const BeamGeometry& geom, const TwoPhotonOptions& opts,
                                          Pathway pathway, const AveragingOptions& options = {});

// Single-atom channel intensities tabulated on Chebyshev points of
// s = ln(I / I0) in [ln(cache_min_fraction), 0]. Values are stored as
// |c|^2 / (I/I0)^2, which tends to a fixed shape at low intensity; below the
// table range that shape is extrapolated with the (I/I0)^2 law.
class IntensityCache {
public:
    IntensityCache(const SpectrumGrid& grid, double t, const AtomModel& atom,
                   const PulseParams& pulse_at_I0, const TwoPhotonOptions& opts, Pathway pathway,
                   std::size_t points, double min_fraction);

    // Cardinal weights times the (I/I0)^2 factor for a relative intensity.
    std::vector<double> weights(double fraction) const;
    // Accumulates sum_j coefficient_j * table_j into the two channel buffers.
    void contract(const std::vector<double>& coefficients, std::vector<double>& s_out,
                  std::vector<double>& d_out) const;
    void evaluate(double fraction, std::vector<double>& s_out, std::vector<double>& d_out) const;

    std::size_t points() const { return interp_.size(); }

private:
    ChebyshevInterpolator interp_;
    std::size_t n_energy_;
    std::vector<double> table_s_;  // [node][energy]
    std::vector<double> table_d_;
};

} // namespace rabi
