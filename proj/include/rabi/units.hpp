#pragma once

#include <string_view>

namespace rabi {

// All internal quantities are in atomic units (e = hbar = m_e = 1).
// eV, meV and fs only appear at the I/O boundary.
namespace constants {
inline constexpr double hartree_in_eV = 27.211386;
inline constexpr double atomic_time_in_fs = 0.02418884;
// W/cm^2 per squared atomic field unit, I = E0^2 * intensity_conversion.
inline constexpr double intensity_conversion = 3.51e16;
inline constexpr std::string_view bohr_radius_label = "a0";
inline constexpr double pi = 3.14159265358979323846;
} // namespace constants

enum class EnergyUnit { AtomicUnits, ElectronVolt, MilliElectronVolt };

EnergyUnit parse_energy_unit(std::string_view name);
std::string_view to_string(EnergyUnit unit);

double convert_energy(double value, EnergyUnit from, EnergyUnit to);

inline double eV_to_au(double eV) { return eV / constants::hartree_in_eV; }
inline double au_to_eV(double au) { return au * constants::hartree_in_eV; }
inline double meV_to_au(double meV) { return meV / (1e3 * constants::hartree_in_eV); }
inline double au_to_meV(double au) { return au * 1e3 * constants::hartree_in_eV; }
inline double fs_to_au(double fs) { return fs / constants::atomic_time_in_fs; }
inline double au_to_fs(double au) { return au * constants::atomic_time_in_fs; }

// Peak field amplitude (a.u.) for a peak intensity in W/cm^2. Throws on I < 0.
double field_from_intensity(double intensity_W_cm2);
double intensity_from_field(double field_au);

} // namespace rabi
