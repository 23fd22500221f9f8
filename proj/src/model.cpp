#include "rabi/model.hpp"

#include "rabi/errors.hpp"
#include "rabi/units.hpp"

#include <cmath>

namespace rabi {

std::string_view to_string(PartialWave ell)
{
    return ell == PartialWave::S ? "s" : "d";
}

PartialWave parse_partial_wave(std::string_view name)
{
    if (name == "s")
        return PartialWave::S;
    if (name == "d")
        return PartialWave::D;
    throw ConfigError("unknown partial wave '" + std::string(name) + "' (expected s or d)");
}

void AtomModel::validate() const
{
    if (!(eps_a < 0.0))
        throw ConfigError("atom: eps_a must be negative (I_p > 0)");
    if (!(eps_b > eps_a))
        throw ConfigError("atom: eps_b must lie above eps_a");
    for (double z : {z_ba, z_cont_from_b.s, z_cont_from_b.d, z_cont_from_rho.s, z_cont_from_rho.d})
        if (!std::isfinite(z))
            throw ConfigError("atom: dipole elements must be finite");
    if (eps_c_nearest && !(*eps_c_nearest > 0.0))
        throw ConfigError("atom: eps_c_nearest offset must be positive");
}

AtomModel helium_cis_default()
{
    AtomModel atom;
    atom.eps_a = eV_to_au(-24.9788);
    atom.eps_b = atom.eps_a + 0.887246;
    atom.z_ba = 0.124;
    atom.z_cont_from_b = {0.009311, 0.01298};
    atom.z_cont_from_rho = {0.1056, -1.300};
    atom.eps_c_nearest = eV_to_au(0.3);
    return atom;
}

AtomModel helium_experimental()
{
    AtomModel atom = helium_cis_default();
    atom.eps_a = eV_to_au(-24.5873);
    atom.eps_b = atom.eps_a + eV_to_au(23.742);
    atom.z_ba = 0.1318;
    return atom;
}

AtomModel atom_preset(std::string_view name)
{
    if (name == "helium_cis")
        return helium_cis_default();
    if (name == "helium_experimental")
        return helium_experimental();
    throw ConfigError("unknown atom preset '" + std::string(name) +
                      "' (expected helium_cis or helium_experimental)");
}

std::string_view to_string(Envelope envelope)
{
    return envelope == Envelope::FlatTop ? "flat_top" : "gaussian";
}

Envelope parse_envelope(std::string_view name)
{
    if (name == "flat_top")
        return Envelope::FlatTop;
    if (name == "gaussian")
        return Envelope::Gaussian;
    throw ConfigError("unknown envelope '" + std::string(name) + "' (expected flat_top or gaussian)");
}

void PulseParams::validate() const
{
    if (!(E0 >= 0.0) || !std::isfinite(E0))
        throw ConfigError("pulse: E0 must be finite and non-negative");
    if (!(omega > 0.0))
        throw ConfigError("pulse: omega must be positive");
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw ConfigError("pulse: duration must be positive");
}

double rabi_period(const AtomModel& atom, double E0)
{
    const double omega_rabi = E0 * atom.z_ba;
    if (!(omega_rabi > 0.0))
        throw ConfigError("Rabi period undefined for vanishing Rabi frequency");
    return 2.0 * constants::pi / omega_rabi;
}

PulseParams flat_top_pulse(const AtomModel& atom, double E0, double detuning, double periods)
{
    PulseParams pulse;
    pulse.E0 = E0;
    pulse.omega = atom.omega_ba() + detuning;
    pulse.envelope = Envelope::FlatTop;
    pulse.duration = periods * rabi_period(atom, E0);
    return pulse;
}

SpectrumGrid::SpectrumGrid(std::vector<double> energies) : energies_(std::move(energies))
{
    if (energies_.size() < 2)
        throw ConfigError("spectrum grid needs at least two points");
    for (std::size_t i = 1; i < energies_.size(); ++i)
        if (!(energies_[i] > energies_[i - 1]))
            throw ConfigError("spectrum grid must be strictly increasing");
    const double h = (energies_.back() - energies_.front()) / double(energies_.size() - 1);
    uniform_ = true;
    for (std::size_t i = 1; i < energies_.size(); ++i)
        if (std::abs((energies_[i] - energies_[i - 1]) - h) > 1e-9 * h) {
            uniform_ = false;
            break;
        }
}

SpectrumGrid SpectrumGrid::uniform(double lo, double hi, std::size_t n)
{
    if (n < 2 || !(hi > lo))
        throw ConfigError("uniform grid needs hi > lo and n >= 2");
    std::vector<double> e(n);
    const double h = (hi - lo) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        e[i] = lo + h * double(i);
    e.back() = hi;
    return SpectrumGrid(std::move(e));
}

SpectrumGrid SpectrumGrid::around_two_photon_line(const AtomModel& atom, double delta_lo_eV,
                                                  double delta_hi_eV, std::size_t n)
{
    const double centre = atom.two_photon_line();
    return uniform(centre + eV_to_au(delta_lo_eV), centre + eV_to_au(delta_hi_eV), n);
}

double SpectrumGrid::step() const
{
    if (!uniform_)
        throw ConfigError("operation requires a uniform energy grid");
    return (energies_.back() - energies_.front()) / double(energies_.size() - 1);
}

std::vector<double> Spectrum::intensity() const
{
    std::vector<double> total(grid.size(), 0.0);
    for (const auto& ch : channels)
        for (std::size_t i = 0; i < total.size(); ++i)
            total[i] += ch.intensity[i];
    return total;
}

const ChannelSpectrum* Spectrum::channel(PartialWave ell) const
{
    for (const auto& ch : channels)
        if (ch.ell == ell)
            return &ch;
    return nullptr;
}

} // namespace rabi
