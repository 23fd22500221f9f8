#pragma once

#include "rabi/deconvolution.hpp"
#include "rabi/model.hpp"
#include "rabi/oracle.hpp"
#include "rabi/scans.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace rabi {

using json = nlohmann::ordered_json;

// Fixed-format number rendering used by every CSV writer ("%.12g").
std::string format_number(double v);

// Writes text in one go; throws NumericalError when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& value);

// Columns: kinetic_energy_eV, delta_eV, then one intensity column per channel
// (intensity_s, intensity_d) and intensity_total.
std::string spectrum_csv(const Spectrum& spectrum, const AtomModel& atom);
// Same data as JSON; complex amplitudes are [re, im] pairs when present.
json spectrum_json(const Spectrum& spectrum, const AtomModel& atom);
json doublet_json(const DoubletAnalysis& analysis, const AtomModel& atom);

// Matrix layout: first row "kinetic_energy_eV \ detuning_meV" then the
// detunings; second row "photon_energy_eV" and the photon energies; then one
// row per kinetic energy.
std::string scan_csv(const ScanResult2D& scan);
json scan_json(const ScanResult2D& scan);
std::string branches_csv(const std::vector<BranchPoint>& branches, const AtomModel& atom,
                         const PulseParams& pulse_template);

// Time, one population column per bound level, norm; for a bare two-level
// RWA flat-top run also the closed-form excited population.
std::string populations_csv(const PropagationResult& result,
                            const std::vector<double>* closed_form_pb = nullptr);
json propagation_json(const PropagationResult& result);

std::string deconvolution_csv(const SpectrumGrid& grid, const std::vector<double>& measured,
                              const DeconvolutionResult& result);
std::string kernel_csv(const std::vector<double>& kernel, double step);
json deconvolution_json(const DeconvolutionResult& result);

// Two numeric columns (energy in eV, counts); '#' comments and one optional
// header line are skipped.
struct TwoColumnData {
    std::vector<double> energies_eV;
    std::vector<double> values;
};
TwoColumnData read_two_column_csv(const std::filesystem::path& path);

// gnuplot scripts for the written data files.
std::string spectrum_plot_script(const std::vector<std::string>& csv_files);
// Scan in gnuplot's nonuniform-matrix layout (comma separated).
std::string scan_plot_matrix(const ScanResult2D& scan);
std::string scan_plot_script(const std::string& matrix_file, const std::string& branches_file);
std::string populations_plot_script(const std::string& csv_file, std::size_t levels);
std::string deconvolution_plot_script(const std::string& csv_file);

} // namespace rabi
