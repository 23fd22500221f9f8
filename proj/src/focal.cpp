#include "rabi/focal.hpp"

#include "rabi/errors.hpp"
#include "rabi/parallel.hpp"
#include "rabi/quadrature.hpp"
#include "rabi/units.hpp"

#include <cmath>
#include <string>

namespace rabi {

double BeamGeometry::waist(double z) const
{
    return w0 * std::sqrt(1.0 + (z / zR) * (z / zR));
}

void BeamGeometry::validate() const
{
    if (!(I0 > 0.0) || !(w0 > 0.0) || !(zR > 0.0) || !(L > 0.0) || !(rho_max_in_waists > 0.0))
        throw ConfigError("beam geometry: I0, w0, zR, L and rho_max must all be positive");
}

double beam_intensity(double rho, double z, const BeamGeometry& geom)
{
    if (!(rho >= 0.0))
        throw ConfigError("beam_intensity: rho must be non-negative");
    if (geom.uniform_intensity)
        return geom.I0;
    const double w = geom.waist(z);
    return geom.I0 * (geom.w0 / w) * (geom.w0 / w) * std::exp(-2.0 * rho * rho / (w * w));
}

IntensityCache::IntensityCache(const SpectrumGrid& grid, double t, const AtomModel& atom,
                               const PulseParams& pulse_at_I0, const TwoPhotonOptions& opts,
                               Pathway pathway, std::size_t points, double min_fraction)
    : interp_(std::log(min_fraction), 0.0, points), n_energy_(grid.size())
{
    if (!(min_fraction > 0.0 && min_fraction < 1.0))
        throw ConfigError("intensity cache: min_fraction must lie in (0, 1)");
    table_s_.assign(points * n_energy_, 0.0);
    table_d_.assign(points * n_energy_, 0.0);
    parallel_for(points, [&](std::size_t j) {
        const double fraction = std::exp(interp_.nodes()[j]);
        PulseParams pulse = pulse_at_I0;
        pulse.E0 = pulse_at_I0.E0 * std::sqrt(fraction);
        std::span<double> s(table_s_.data() + j * n_energy_, n_energy_);
        std::span<double> d(table_d_.data() + j * n_energy_, n_energy_);
        single_atom_intensities(grid, t, atom, pulse, opts, pathway, s, d);
        const double scale = 1.0 / (fraction * fraction);
        for (std::size_t i = 0; i < n_energy_; ++i) {
            s[i] *= scale;
            d[i] *= scale;
        }
    });
}

std::vector<double> IntensityCache::weights(double fraction) const
{
    const double s = std::log(fraction);
    std::vector<double> l = interp_.cardinal(std::max(s, interp_.lower()));
    for (double& v : l)
        v *= fraction * fraction;
    return l;
}

void IntensityCache::contract(const std::vector<double>& coefficients, std::vector<double>& s_out,
                              std::vector<double>& d_out) const
{
    s_out.assign(n_energy_, 0.0);
    d_out.assign(n_energy_, 0.0);
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
        const double c = coefficients[j];
        if (c == 0.0)
            continue;
        const double* ts = table_s_.data() + j * n_energy_;
        const double* td = table_d_.data() + j * n_energy_;
        for (std::size_t i = 0; i < n_energy_; ++i) {
            s_out[i] += c * ts[i];
            d_out[i] += c * td[i];
        }
    }
}

void IntensityCache::evaluate(double fraction, std::vector<double>& s_out,
                              std::vector<double>& d_out) const
{
    contract(weights(fraction), s_out, d_out);
}

namespace {

struct WeightedNode {
    double fraction;  // I / I0
    double weight;    // volume element
};

// Quadrature nodes of the focal volume in (z, s = ln(I / I(0, z))). The
// transverse measure rho drho becomes (w(z)^2 / 4) ds.
std::vector<std::vector<WeightedNode>> volume_nodes(const BeamGeometry& geom, std::size_t nz,
                                                    std::size_t nrho)
{
    const QuadratureRule zr = gauss_legendre(nz).mapped(-0.5 * geom.L, 0.5 * geom.L);
    const QuadratureRule unit_rho = gauss_legendre(nrho);
    const double rho_max = geom.rho_max_in_waists * geom.w0;
    std::vector<std::vector<WeightedNode>> out(nz);
    for (std::size_t iz = 0; iz < nz; ++iz) {
        const double wz = zr.weights[iz];
        if (geom.uniform_intensity) {
            out[iz].push_back({1.0, 2.0 * constants::pi * wz * 0.5 * rho_max * rho_max});
            continue;
        }
        const double w = geom.waist(zr.nodes[iz]);
        const double axis_fraction = (geom.w0 / w) * (geom.w0 / w);
        const double s_min = -2.0 * rho_max * rho_max / (w * w);
        const QuadratureRule sr = unit_rho.mapped(s_min, 0.0);
        for (std::size_t k = 0; k < sr.size(); ++k)
            out[iz].push_back({axis_fraction * std::exp(sr.nodes[k]),
                               2.0 * constants::pi * wz * 0.25 * w * w * sr.weights[k]});
    }
    return out;
}

struct ChannelSums {
    std::vector<double> s;
    std::vector<double> d;
};

ChannelSums integrate_direct(const SpectrumGrid& grid, double t, const AtomModel& atom,
                             const PulseParams& pulse_at_I0, const BeamGeometry& geom,
                             const TwoPhotonOptions& opts, Pathway pathway, std::size_t nz,
                             std::size_t nrho)
{
    const auto nodes = volume_nodes(geom, nz, nrho);
    const std::size_t n = grid.size();
    std::vector<ChannelSums> partial(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t iz) {
        ChannelSums acc{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
        std::vector<double> s(n), d(n);
        for (const WeightedNode& node : nodes[iz]) {
            PulseParams pulse = pulse_at_I0;
            pulse.E0 = pulse_at_I0.E0 * std::sqrt(node.fraction);
            single_atom_intensities(grid, t, atom, pulse, opts, pathway, s, d);
            for (std::size_t i = 0; i < n; ++i) {
                acc.s[i] += node.weight * s[i];
                acc.d[i] += node.weight * d[i];
            }
        }
        partial[iz] = std::move(acc);
    });
    ChannelSums total{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (const ChannelSums& p : partial)
        for (std::size_t i = 0; i < n; ++i) {
            total.s[i] += p.s[i];
            total.d[i] += p.d[i];
        }
    return total;
}

ChannelSums integrate_cached(const IntensityCache& cache, const BeamGeometry& geom, std::size_t nz,
                             std::size_t nrho)
{
    // Sum the interpolation weights of all nodes first; S is then a single
    // contraction with the tabulated spectra.
    std::vector<double> coefficients(cache.points(), 0.0);
    for (const auto& column : volume_nodes(geom, nz, nrho))
        for (const WeightedNode& node : column) {
            const std::vector<double> l = cache.weights(node.fraction);
            for (std::size_t j = 0; j < l.size(); ++j)
                coefficients[j] += node.weight * l[j];
        }
    ChannelSums out;
    cache.contract(coefficients, out.s, out.d);
    return out;
}

double relative_l2(const ChannelSums& a, const ChannelSums& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.s.size(); ++i) {
        const double ta = a.s[i] + a.d[i];
        const double tb = b.s[i] + b.d[i];
        num += (ta - tb) * (ta - tb);
        den += ta * ta;
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

} // namespace

AveragedSpectrum volume_averaged_spectrum(const SpectrumGrid& grid, double t,
                                          const AtomModel& atom, const PulseParams& pulse_at_I0,
                                          const BeamGeometry& geom, const TwoPhotonOptions& opts,
                                          Pathway pathway, const AveragingOptions& options)
{
    geom.validate();
    if (options.nz < 2 || options.nrho < 2)
        throw ConfigError("volume averaging needs at least two nodes per direction");

    std::optional<IntensityCache> cache;
    if (options.use_intensity_cache && !geom.uniform_intensity)
        cache.emplace(grid, t, atom, pulse_at_I0, opts, pathway, options.cache_points,
                      options.cache_min_fraction);

    auto integrate = [&](std::size_t nz, std::size_t nrho) {
        if (cache)
            return integrate_cached(*cache, geom, nz, nrho);
        return integrate_direct(grid, t, atom, pulse_at_I0, geom, opts, pathway, nz, nrho);
    };

    std::size_t nz = options.nz;
    std::size_t nrho = options.nrho;
    ChannelSums result = integrate(nz, nrho);
    double error = relative_l2(result, integrate((nz + 1) / 2, (nrho + 1) / 2));

    if (options.adaptive_tolerance) {
        int refinements = 0;
        while (error > *options.adaptive_tolerance) {
            if (refinements++ >= options.max_refinements)
                throw NumericalError("volume averaging did not converge to relative tolerance " +
                                     std::to_string(*options.adaptive_tolerance) +
                                     " (last change " + std::to_string(error) + ")");
            nz = 2 * nz - 1;
            nrho = 2 * nrho - 1;
            ChannelSums finer = integrate(nz, nrho);
            error = relative_l2(finer, result);
            result = std::move(finer);
        }
    }

    AveragedSpectrum out;
    out.spectrum.grid = grid;
    out.spectrum.channels = {{PartialWave::S, {}, std::move(result.s)},
                             {PartialWave::D, {}, std::move(result.d)}};
    out.error_estimate = error;
    out.nz = nz;
    out.nrho = nrho;
    return out;
}

} // namespace rabi
