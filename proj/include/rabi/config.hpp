#pragma once

#include "rabi/deconvolution.hpp"
#include "rabi/focal.hpp"
#include "rabi/ionization.hpp"
#include "rabi/io.hpp"
#include "rabi/model.hpp"
#include "rabi/oracle.hpp"
#include "rabi/scans.hpp"
#include "rabi/units.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rabi {

// Energies in a config carry their unit in the key: detuning_meV,
// detuning_eV or detuning_au (exactly one). Lengths use _um / _mm. Unknown
// keys are rejected with their JSON pointer.

struct GridSection {
    double delta_min = eV_to_au(-0.6);
    double delta_max = eV_to_au(0.6);
    std::size_t points = 2401;
};

struct SpectrumSection {
    std::vector<Pathway> pathways{Pathway::OnePhotonOnly, Pathway::TwoPhotonOnly,
                                  Pathway::CoherentTotal};
    std::vector<double> buildup_periods;  // extra spectra after these Rabi periods
    double noise_floor = default_noise_floor;
};

struct ScanSection {
    double detuning_min = meV_to_au(-150.0);
    double detuning_max = meV_to_au(150.0);
    std::size_t points = 61;
    ScanDuration duration;  // defaults to the pulse length in Rabi periods
    Pathway pathway = Pathway::CoherentTotal;
};

struct AverageSection {
    BeamGeometry geometry;  // I0 follows the pulse
    AveragingOptions options;
    std::vector<Pathway> pathways{Pathway::OnePhotonOnly, Pathway::TwoPhotonOnly};
};

struct OracleSection {
    CouplingMode mode = CouplingMode::Rwa;
    double half_width = eV_to_au(1.5);
    std::size_t n_bins = 1024;
    std::optional<double> dt;
    std::size_t observer_stride = 100;
    Pathway pathway = Pathway::CoherentTotal;
    bool checkpoint = false;
    std::vector<IntermediateState> intermediates;
};

struct SyntheticSection {
    Pathway pathway = Pathway::OnePhotonOnly;
    double blur_fwhm = meV_to_au(70.0);
    double noise_relative = 0.01;
    std::optional<std::uint64_t> seed;  // no seed, no noise
};

struct DeconvolveSection {
    std::optional<std::filesystem::path> input;  // two-column CSV; otherwise synthetic
    SyntheticSection synthetic;
    DeconvolutionConfig config;
};

struct OutputSection {
    std::filesystem::path directory = "out";
    bool csv = true;
    bool json = true;
};

struct RunConfig {
    std::string atom_preset = "helium_cis";
    AtomModel atom;
    PulseParams pulse;
    std::optional<double> pulse_periods;  // duration given in Rabi periods
    TwoPhotonOptions two_photon;
    GridSection grid_section;
    SpectrumGrid grid;
    SpectrumSection spectrum;
    ScanSection scan;
    AverageSection average;
    OracleSection oracle;
    DeconvolveSection deconvolve;
    OutputSection output;
    std::filesystem::path source;  // file the config came from, for messages
};

// Parses and validates. `source` only labels error messages.
RunConfig parse_config(const json& document, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Fully resolved config (atomic-unit keys) that parse_config accepts again.
json resolved_config_json(const RunConfig& config);

} // namespace rabi
