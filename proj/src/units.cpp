#include "rabi/units.hpp"

#include "rabi/errors.hpp"

#include <cmath>
#include <string>

namespace rabi {

EnergyUnit parse_energy_unit(std::string_view name)
{
    if (name == "au" || name == "a.u." || name == "hartree")
        return EnergyUnit::AtomicUnits;
    if (name == "eV")
        return EnergyUnit::ElectronVolt;
    if (name == "meV")
        return EnergyUnit::MilliElectronVolt;
    throw ConfigError("unknown energy unit '" + std::string(name) + "'");
}

std::string_view to_string(EnergyUnit unit)
{
    switch (unit) {
    case EnergyUnit::AtomicUnits: return "au";
    case EnergyUnit::ElectronVolt: return "eV";
    case EnergyUnit::MilliElectronVolt: return "meV";
    }
    return "?";
}

namespace {

double hartree_in(EnergyUnit unit)
{
    switch (unit) {
    case EnergyUnit::AtomicUnits: return 1.0;
    case EnergyUnit::ElectronVolt: return constants::hartree_in_eV;
    case EnergyUnit::MilliElectronVolt: return 1e3 * constants::hartree_in_eV;
    }
    return 1.0;
}

} // namespace

double convert_energy(double value, EnergyUnit from, EnergyUnit to)
{
    if (from == to)
        return value;
    return value / hartree_in(from) * hartree_in(to);
}

double field_from_intensity(double intensity_W_cm2)
{
    if (!(intensity_W_cm2 >= 0.0))
        throw ConfigError("intensity must be non-negative");
    return std::sqrt(intensity_W_cm2 / constants::intensity_conversion);
}

double intensity_from_field(double field_au)
{
    return field_au * field_au * constants::intensity_conversion;
}

} // namespace rabi
