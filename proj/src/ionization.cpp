#include "rabi/ionization.hpp"

#include "rabi/errors.hpp"
#include "rabi/units.hpp"

#include <array>
#include <cmath>
#include <string>

namespace rabi {

using namespace std::complex_literals;

std::string_view to_string(Pathway pathway)
{
    switch (pathway) {
    case Pathway::OnePhotonOnly: return "one_photon_only";
    case Pathway::TwoPhotonOnly: return "two_photon_only";
    case Pathway::CoherentTotal: return "coherent_total";
    }
    return "?";
}

Pathway parse_pathway(std::string_view name)
{
    if (name == "one_photon_only")
        return Pathway::OnePhotonOnly;
    if (name == "two_photon_only")
        return Pathway::TwoPhotonOnly;
    if (name == "coherent_total")
        return Pathway::CoherentTotal;
    throw ConfigError("unknown pathway '" + std::string(name) +
                      "' (expected one_photon_only, two_photon_only or coherent_total)");
}

TwoPhotonOptions TwoPhotonOptions::defaults(const AtomModel& atom)
{
    TwoPhotonOptions opts;
    opts.effective_eps_c = atom.eps_b + atom.eps_c_nearest.value_or(eV_to_au(0.3));
    return opts;
}

void TwoPhotonOptions::validate(const AtomModel& atom) const
{
    if (include_transient_term && !(effective_eps_c > atom.eps_b))
        throw ConfigError("two-photon options: effective_eps_c must lie above eps_b");
}

namespace {

void require_flat_top(const PulseParams& pulse, double t)
{
    if (pulse.envelope != Envelope::FlatTop)
        throw ConfigError("analytic amplitudes support only the flat-top envelope");
    if (!(t >= 0.0))
        throw ConfigError("analytic amplitudes: time must be non-negative");
    if (t > pulse.duration * (1.0 + 1e-12))
        throw ConfigError("analytic amplitudes: time exceeds the flat-top duration");
}

// e^{+i y t/2} sin(y t/2)/y and e^{-i y t/2} sin(y t/2)/y
cplx rising(double y, double t) { return std::exp(0.5i * y * t) * half_sinc(y, t); }
cplx falling(double y, double t) { return std::exp(-0.5i * y * t) * half_sinc(y, t); }

struct Detunings {
    double lower;  // W/2 - 3dw/2 + delta, zero at the lower AT peak
    double upper;  // W/2 + 3dw/2 - delta, zero at the upper AT peak
};

Detunings at_detunings(double delta, const RabiParams& rp)
{
    const double half_w = 0.5 * rp.W();
    const double shift = 1.5 * rp.delta_omega;
    return {half_w - shift + delta, half_w + shift - delta};
}

} // namespace

AmplitudeTerms alpha1_terms(double eps, double t, const AtomModel& atom, const PulseParams& pulse,
                            PartialWave ell)
{
    require_flat_top(pulse, t);
    const RabiParams rp = RabiParams::from(atom, pulse);
    const double w = rp.W();
    if (w == 0.0)
        return {};
    const double delta = relative_energy(eps, atom);
    const Detunings y = at_detunings(delta, rp);
    const cplx pre = 1i * atom.z_cont_from_b[ell] * pulse.E0 * rp.Omega / (2.0 * w);
    return {pre * rising(y.lower, t), -pre * falling(y.upper, t), 0.0};
}

cplx alpha1(double eps, double t, const AtomModel& atom, const PulseParams& pulse, PartialWave ell)
{
    return alpha1_terms(eps, t, atom, pulse, ell).total();
}

AmplitudeTerms alpha2_terms(double eps, double t, const AtomModel& atom, const PulseParams& pulse,
                            PartialWave ell, const TwoPhotonOptions& opts)
{
    require_flat_top(pulse, t);
    opts.validate(atom);
    const RabiParams rp = RabiParams::from(atom, pulse);
    const double u = rp.detuning_ratio();
    const double delta = relative_energy(eps, atom);
    const Detunings y = at_detunings(delta, rp);
    const double z_rho = atom.z_cont_from_rho[ell];
    const cplx pre = -1i * z_rho * pulse.E0 * pulse.E0 / 4.0;

    AmplitudeTerms terms;
    terms.lower = pre * (1.0 - u) * rising(y.lower, t);
    terms.upper = pre * (1.0 + u) * falling(y.upper, t);

    if (opts.include_transient_term) {
        // Attribute the whole effective element to one state at eps_c:
        // z_ec z_ca = z_rho * (eps_a + omega - eps_c).
        const double eps_c = opts.effective_eps_c;
        const double w_bare = atom.eps_a + pulse.omega - eps_c;
        const double w_minus = w_bare - 0.5 * rp.delta_omega - 0.5 * rp.W();
        const double w_plus = w_bare - 0.5 * rp.delta_omega + 0.5 * rp.W();
        const double d = delta + atom.eps_b - eps_c - rp.delta_omega;
        const double weight = ((1.0 - u) * w_plus + (1.0 + u) * w_minus) / (w_minus * w_plus);
        terms.extra = -pre * w_bare * weight * rising(d, t);
    }
    return terms;
}

cplx alpha2(double eps, double t, const AtomModel& atom, const PulseParams& pulse, PartialWave ell,
            const TwoPhotonOptions& opts)
{
    return alpha2_terms(eps, t, atom, pulse, ell, opts).total();
}

double amplitude_ratio(const AtomModel& atom, const PulseParams& pulse, PartialWave ell)
{
    const double zb = atom.z_cont_from_b[ell];
    if (zb == 0.0)
        throw ConfigError("amplitude_ratio: vanishing one-photon dipole");
    return std::abs(0.5 * pulse.E0 * atom.z_cont_from_rho[ell] / zb);
}

namespace {

// Per-channel coefficients of the three basis functions shared by alpha1 and alpha2.
struct ChannelCoefficients {
    cplx lower;
    cplx upper;
    cplx extra;
};

template <class Sink>
void evaluate_flat_top(const SpectrumGrid& grid, double t, const AtomModel& atom,
                       const PulseParams& pulse, const TwoPhotonOptions& opts, Pathway pathway,
                       Sink&& sink)
{
    require_flat_top(pulse, t);
    opts.validate(atom);
    const RabiParams rp = RabiParams::from(atom, pulse);
    const double w = rp.W();
    const double u = rp.detuning_ratio();
    const bool one = pathway != Pathway::TwoPhotonOnly && w > 0.0;
    const bool two = pathway != Pathway::OnePhotonOnly;
    const bool extra = two && opts.include_transient_term;

    double extra_weight = 0.0;
    double extra_shift = 0.0;
    if (extra) {
        const double eps_c = opts.effective_eps_c;
        const double w_bare = atom.eps_a + pulse.omega - eps_c;
        const double w_minus = w_bare - 0.5 * rp.delta_omega - 0.5 * w;
        const double w_plus = w_bare - 0.5 * rp.delta_omega + 0.5 * w;
        extra_weight = -w_bare * ((1.0 - u) * w_plus + (1.0 + u) * w_minus) / (w_minus * w_plus);
        extra_shift = atom.eps_b - eps_c - rp.delta_omega;
    }

    std::array<ChannelCoefficients, 2> coef{};
    for (std::size_t k = 0; k < 2; ++k) {
        const PartialWave ell = all_partial_waves[k];
        if (one) {
            const cplx c1 = 1i * atom.z_cont_from_b[ell] * pulse.E0 * rp.Omega / (2.0 * w);
            coef[k].lower += c1;
            coef[k].upper -= c1;
        }
        if (two) {
            const cplx c2 = -1i * atom.z_cont_from_rho[ell] * pulse.E0 * pulse.E0 / 4.0;
            coef[k].lower += c2 * (1.0 - u);
            coef[k].upper += c2 * (1.0 + u);
            coef[k].extra = c2 * extra_weight;
        }
    }

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double delta = relative_energy(grid[i], atom);
        const Detunings y = at_detunings(delta, rp);
        const cplx lo = rising(y.lower, t);
        const cplx up = falling(y.upper, t);
        const cplx ex = extra ? rising(delta + extra_shift, t) : cplx{};
        for (std::size_t k = 0; k < 2; ++k)
            sink(k, i, coef[k].lower * lo + coef[k].upper * up + coef[k].extra * ex);
    }
}

} // namespace

Spectrum single_atom_spectrum(const SpectrumGrid& grid, double t, const AtomModel& atom,
                              const PulseParams& pulse, const TwoPhotonOptions& opts,
                              Pathway pathway)
{
    Spectrum spec;
    spec.grid = grid;
    spec.channels.resize(2);
    for (std::size_t k = 0; k < 2; ++k) {
        spec.channels[k].ell = all_partial_waves[k];
        spec.channels[k].amplitude.resize(grid.size());
        spec.channels[k].intensity.resize(grid.size());
    }
    evaluate_flat_top(grid, t, atom, pulse, opts, pathway, [&](std::size_t k, std::size_t i, cplx amp) {
        spec.channels[k].amplitude[i] = amp;
        spec.channels[k].intensity[i] = std::norm(amp);
    });
    return spec;
}

void single_atom_intensities(const SpectrumGrid& grid, double t, const AtomModel& atom,
                             const PulseParams& pulse, const TwoPhotonOptions& opts,
                             Pathway pathway, std::span<double> s_out, std::span<double> d_out)
{
    if (s_out.size() != grid.size() || d_out.size() != grid.size())
        throw ConfigError("single_atom_intensities: output size mismatch");
    evaluate_flat_top(grid, t, atom, pulse, opts, pathway, [&](std::size_t k, std::size_t i, cplx amp) {
        (k == 0 ? s_out : d_out)[i] = std::norm(amp);
    });
}

} // namespace rabi
