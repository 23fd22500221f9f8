#pragma once

#include "rabi/ionization.hpp"
#include "rabi/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rabi {

struct Peak {
    double position = 0.0;  // a.u., sub-grid refined
    double height = 0.0;
    std::size_t index = 0;  // grid index of the sampled maximum
};

// Two strongest peaks of a spectrum. With fewer than two peaks above the noise
// floor only `peaks` is filled and splitting/asymmetry stay empty.
struct DoubletAnalysis {
    std::vector<Peak> peaks;  // ordered by energy
    std::optional<double> splitting;
    std::optional<double> asymmetry;  // (h_upper - h_lower) / (h_upper + h_lower)

    bool is_doublet() const { return splitting.has_value(); }
};

inline constexpr double default_noise_floor = 1e-4;

// All maxima above noise_floor times the global maximum, ordered by energy.
std::vector<Peak> local_maxima(const std::vector<double>& energies,
                               const std::vector<double>& intensity,
                               double noise_floor = default_noise_floor);

DoubletAnalysis analyze_doublet(const std::vector<double>& energies,
                                const std::vector<double>& intensity,
                                double noise_floor = default_noise_floor);
DoubletAnalysis analyze_doublet(const Spectrum& spectrum, double noise_floor = default_noise_floor);

// Local minimum near `centre` that lies deeper than `threshold` times the
// lower of the two flanking maxima.
struct DipReport {
    bool local_minimum = false;
    double depth_ratio = 1.0;  // I(dip) / min(flanking maxima)
    std::size_t index = 0;

    bool present(double threshold = 0.8) const { return local_minimum && depth_ratio < threshold; }
};

DipReport central_dip(const std::vector<double>& energies, const std::vector<double>& intensity,
                      double centre);

// Pulse length of a scan column: multiples of the resonant Rabi period 2 pi /
// Omega, or an absolute time in a.u.
struct ScanDuration {
    enum class Mode { RabiPeriods, Absolute };
    Mode mode = Mode::RabiPeriods;
    double value = 1.5;

    double time(const AtomModel& atom, double E0) const;
};

// Produces the spectrum of one scan column for the given pulse.
using ColumnModel = std::function<Spectrum(const PulseParams&)>;

ColumnModel single_atom_column(const AtomModel& atom, const SpectrumGrid& grid,
                               const TwoPhotonOptions& opts, Pathway pathway);

struct ScanResult2D {
    std::vector<double> detunings;        // a.u.
    std::vector<double> photon_energies;  // a.u.
    SpectrumGrid kinetic_energies;
    std::vector<double> intensity;  // row-major [detuning][energy]
    Pathway pathway = Pathway::CoherentTotal;
    double pulse_duration = 0.0;
    double E0 = 0.0;
    std::string column_model = "single_atom";

    double at(std::size_t column, std::size_t energy) const
    {
        return intensity[column * kinetic_energies.size() + energy];
    }
    std::vector<double> column(std::size_t c) const;
};

ScanResult2D detuning_scan(const AtomModel& atom, const PulseParams& pulse_template,
                           const std::vector<double>& detunings, const ScanDuration& duration,
                           const SpectrumGrid& grid, Pathway pathway, const ColumnModel& model);
ScanResult2D detuning_scan(const AtomModel& atom, const PulseParams& pulse_template,
                           const std::vector<double>& detunings, const ScanDuration& duration,
                           const SpectrumGrid& grid, Pathway pathway,
                           const TwoPhotonOptions& opts);

struct BranchPoint {
    double detuning = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
    std::optional<double> gap;
};

// Branches are seeded at the most balanced doublet and followed column by
// column to the nearest maximum; a branch ends where no maximum is close.
std::vector<BranchPoint> extract_branches(const ScanResult2D& scan,
                                          double noise_floor = default_noise_floor);

struct AvoidedCrossing {
    double min_gap = 0.0;
    double detuning_at_min = 0.0;
};

// Smallest branch gap over the columns that show a doublet. Throws if none do.
AvoidedCrossing avoided_crossing(const std::vector<BranchPoint>& branches);

// Root of a detuning -> asymmetry function by bisection. Values with
// |asymmetry| <= zero_tol count as roots. When the asymmetry vanishes at both
// ends of the bracket the midpoint is returned if it vanishes there too.
// Throws if the bracket shows no sign change.
double bisect_symmetric_detuning(const std::function<double(double)>& asymmetry, double lo,
                                 double hi, double tolerance, double zero_tol = 1e-9);

// Asymmetry of a single-peaked spectrum is +-1 depending on which side of
// 3 dw / 2 the peak sits.
double doublet_asymmetry(const Spectrum& spectrum, const AtomModel& atom, double detuning);

double find_symmetric_detuning(const AtomModel& atom, const PulseParams& pulse_template,
                               double lo, double hi, const ScanDuration& duration,
                               const SpectrumGrid& grid, Pathway pathway,
                               const TwoPhotonOptions& opts, double tolerance);

// Spectra after `multiples` completed Rabi periods, each from a flat-top pulse
// truncated at that time.
std::vector<Spectrum> buildup_sequence(const AtomModel& atom, const PulseParams& pulse_template,
                                       const std::vector<double>& multiples,
                                       const SpectrumGrid& grid, Pathway pathway,
                                       const TwoPhotonOptions& opts);

} // namespace rabi
