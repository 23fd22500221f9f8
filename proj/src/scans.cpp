#include "rabi/scans.hpp"

#include "rabi/errors.hpp"
#include "rabi/parallel.hpp"
#include "rabi/units.hpp"

#include <algorithm>
#include <cmath>

namespace rabi {

namespace {

// Vertex of the parabola through three points. A fit in log y would be exact
// for Gaussian tops but blows up isolated spikes next to near-zero samples.
Peak refine_peak(const std::vector<double>& x, const std::vector<double>& y, std::size_t i)
{
    Peak p{x[i], y[i], i};
    if (i == 0 || i + 1 >= x.size())
        return p;
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double d01 = (y[i] - y[i - 1]) / (x1 - x0);
    const double d12 = (y[i + 1] - y[i]) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (!(curv < 0.0))
        return p;
    // y(x) = y1 + s (x - x1) + curv (x - x1)^2 with s the centred slope
    const double slope = d01 + curv * (x1 - x0);
    const double dx = std::clamp(-slope / (2.0 * curv), x0 - x1, x2 - x1);
    p.position = x1 + dx;
    p.height = y[i] + slope * dx + curv * dx * dx;
    return p;
}

// First side lobe of sinc^2 relative to its main lobe.
constexpr double side_lobe_level = 0.0472;

} // namespace

std::vector<Peak> local_maxima(const std::vector<double>& energies,
                               const std::vector<double>& intensity, double noise_floor)
{
    if (energies.size() != intensity.size() || energies.size() < 3)
        throw ConfigError("local_maxima: need at least three matching samples");
    const double peak = *std::max_element(intensity.begin(), intensity.end());
    const double floor = noise_floor * peak;
    std::vector<Peak> out;
    for (std::size_t i = 1; i + 1 < intensity.size(); ++i) {
        if (!(intensity[i] > floor))
            continue;
        if (intensity[i] > intensity[i - 1] && intensity[i] >= intensity[i + 1])
            out.push_back(refine_peak(energies, intensity, i));
    }
    return out;
}

DoubletAnalysis analyze_doublet(const std::vector<double>& energies,
                                const std::vector<double>& intensity, double noise_floor)
{
    std::vector<Peak> maxima = local_maxima(energies, intensity, noise_floor);
    // stable sort keeps lower energy first among equal heights
    std::stable_sort(maxima.begin(), maxima.end(),
                     [](const Peak& a, const Peak& b) { return a.height > b.height; });
    if (maxima.size() > 2)
        maxima.resize(2);
    std::sort(maxima.begin(), maxima.end(),
              [](const Peak& a, const Peak& b) { return a.index < b.index; });

    DoubletAnalysis out;
    out.peaks = maxima;
    if (out.peaks.size() == 2) {
        const Peak& lo = out.peaks[0];
        const Peak& hi = out.peaks[1];
        out.splitting = hi.position - lo.position;
        out.asymmetry = (hi.height - lo.height) / (hi.height + lo.height);
    }
    return out;
}

DoubletAnalysis analyze_doublet(const Spectrum& spectrum, double noise_floor)
{
    return analyze_doublet(spectrum.grid.energies(), spectrum.intensity(), noise_floor);
}

DipReport central_dip(const std::vector<double>& energies, const std::vector<double>& intensity,
                      double centre)
{
    DipReport report;
    const std::size_t n = energies.size();
    if (n < 3 || centre <= energies.front() || centre >= energies.back())
        return report;
    auto it = std::lower_bound(energies.begin(), energies.end(), centre);
    std::size_t c = std::size_t(it - energies.begin());
    if (c > 0 && centre - energies[c - 1] < energies[c] - centre)
        --c;
    // the true minimum may fall between samples: take the lowest neighbour
    std::size_t best = c;
    for (std::size_t j : {c - 1, c + 1})
        if (j > 0 && j + 1 < n && intensity[j] < intensity[best])
            best = j;
    report.index = best;
    if (best == 0 || best + 1 >= n)
        return report;
    // a flat bottom (equal samples) counts when both sides then rise
    std::size_t left_edge = best, right_edge = best;
    while (left_edge > 0 && intensity[left_edge - 1] == intensity[best])
        --left_edge;
    while (right_edge + 1 < n && intensity[right_edge + 1] == intensity[best])
        ++right_edge;
    report.local_minimum = left_edge > 0 && right_edge + 1 < n &&
                           intensity[best] < intensity[left_edge - 1] &&
                           intensity[best] < intensity[right_edge + 1];
    const double left = *std::max_element(intensity.begin(), intensity.begin() + long(best));
    const double right = *std::max_element(intensity.begin() + long(best) + 1, intensity.end());
    const double flank = std::min(left, right);
    report.depth_ratio = flank > 0.0 ? intensity[best] / flank : 1.0;
    return report;
}

double ScanDuration::time(const AtomModel& atom, double E0) const
{
    if (!(value > 0.0))
        throw ConfigError("scan duration must be positive");
    return mode == Mode::Absolute ? value : value * rabi_period(atom, E0);
}

ColumnModel single_atom_column(const AtomModel& atom, const SpectrumGrid& grid,
                               const TwoPhotonOptions& opts, Pathway pathway)
{
    return [atom, grid, opts, pathway](const PulseParams& pulse) {
        return single_atom_spectrum(grid, pulse.duration, atom, pulse, opts, pathway);
    };
}

std::vector<double> ScanResult2D::column(std::size_t c) const
{
    const std::size_t n = kinetic_energies.size();
    return {intensity.begin() + long(c * n), intensity.begin() + long((c + 1) * n)};
}

ScanResult2D detuning_scan(const AtomModel& atom, const PulseParams& pulse_template,
                           const std::vector<double>& detunings, const ScanDuration& duration,
                           const SpectrumGrid& grid, Pathway pathway, const ColumnModel& model)
{
    if (detunings.empty())
        throw ConfigError("detuning_scan: no detunings given");
    ScanResult2D scan;
    scan.detunings = detunings;
    scan.kinetic_energies = grid;
    scan.pathway = pathway;
    scan.E0 = pulse_template.E0;
    scan.pulse_duration = duration.time(atom, pulse_template.E0);
    scan.intensity.assign(detunings.size() * grid.size(), 0.0);
    for (double dw : detunings)
        scan.photon_energies.push_back(atom.omega_ba() + dw);

    parallel_for(detunings.size(), [&](std::size_t c) {
        PulseParams pulse = pulse_template;
        pulse.omega = atom.omega_ba() + detunings[c];
        pulse.duration = scan.pulse_duration;
        const std::vector<double> col = model(pulse).intensity();
        std::copy(col.begin(), col.end(), scan.intensity.begin() + long(c * grid.size()));
    });
    return scan;
}

ScanResult2D detuning_scan(const AtomModel& atom, const PulseParams& pulse_template,
                           const std::vector<double>& detunings, const ScanDuration& duration,
                           const SpectrumGrid& grid, Pathway pathway,
                           const TwoPhotonOptions& opts)
{
    return detuning_scan(atom, pulse_template, detunings, duration, grid, pathway,
                         single_atom_column(atom, grid, opts, pathway));
}

std::vector<BranchPoint> extract_branches(const ScanResult2D& scan, double noise_floor)
{
    const std::size_t nc = scan.detunings.size();
    const std::vector<double> energies = scan.kinetic_energies.energies();
    std::vector<std::vector<Peak>> maxima(nc);
    std::vector<DoubletAnalysis> doublets(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const std::vector<double> col = scan.column(c);
        maxima[c] = local_maxima(energies, col, noise_floor);
        doublets[c] = analyze_doublet(energies, col, noise_floor);
    }

    std::vector<double> column_max(nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c)
        for (const Peak& p : maxima[c])
            column_max[c] = std::max(column_max[c], p.height);

    std::vector<BranchPoint> out(nc);
    for (std::size_t c = 0; c < nc; ++c)
        out[c].detuning = scan.detunings[c];

    // seed: the most balanced doublet
    std::optional<std::size_t> seed;
    for (std::size_t c = 0; c < nc; ++c)
        if (doublets[c].is_doublet() &&
            (!seed || std::abs(*doublets[c].asymmetry) < std::abs(*doublets[*seed].asymmetry)))
            seed = c;
    if (!seed) {
        for (std::size_t c = 0; c < nc; ++c)
            if (!doublets[c].peaks.empty())
                out[c].lower = doublets[c].peaks[0].position;
        return out;
    }
    out[*seed].lower = doublets[*seed].peaks[0].position;
    out[*seed].upper = doublets[*seed].peaks[1].position;

    // Follow each branch outward to the nearest maximum of the next column,
    // extrapolating linearly. Jumps beyond a quarter of the current gap end the
    // branch; otherwise sinc side lobes of the dominant line get picked up once
    // the weak branch fades.
    struct Branch {
        bool alive = true;
        double position = 0.0;
        double velocity = 0.0;  // change per column, 0 until two points exist
        bool moving = false;
    };
    auto track = [&](long step) {
        Branch lo{true, *out[*seed].lower}, hi{true, *out[*seed].upper};
        double gap = hi.position - lo.position;
        for (long c = long(*seed) + step; c >= 0 && c < long(nc); c += step) {
            const std::vector<Peak>& cand = maxima[std::size_t(c)];
            const double min_height = side_lobe_level * column_max[std::size_t(c)];
            auto follow = [&](Branch& b, long exclude) -> long {
                if (!b.alive)
                    return -1;
                const double expect = b.position + (b.moving ? b.velocity : 0.0);
                long best = -1;
                for (std::size_t k = 0; k < cand.size(); ++k) {
                    const double d = std::abs(cand[k].position - expect);
                    if (long(k) == exclude || d > 0.25 * gap || cand[k].height < min_height)
                        continue;
                    if (best < 0 || d < std::abs(cand[std::size_t(best)].position - expect))
                        best = long(k);
                }
                if (best < 0) {
                    b.alive = false;
                    return -1;
                }
                b.velocity = cand[std::size_t(best)].position - b.position;
                b.moving = true;
                b.position = cand[std::size_t(best)].position;
                return best;
            };
            follow(hi, follow(lo, -1));
            BranchPoint& bp = out[std::size_t(c)];
            if (lo.alive)
                bp.lower = lo.position;
            if (hi.alive)
                bp.upper = hi.position;
            if (lo.alive && hi.alive) {
                gap = hi.position - lo.position;
                bp.gap = gap;
            } else if (!lo.alive && !hi.alive) {
                break;
            }
        }
    };
    out[*seed].gap = *out[*seed].upper - *out[*seed].lower;
    track(-1);
    track(+1);
    return out;
}

AvoidedCrossing avoided_crossing(const std::vector<BranchPoint>& branches)
{
    std::optional<AvoidedCrossing> best;
    for (const BranchPoint& bp : branches)
        if (bp.gap && (!best || *bp.gap < best->min_gap))
            best = AvoidedCrossing{*bp.gap, bp.detuning};
    if (!best)
        throw NumericalError("avoided_crossing: no column shows two branches");
    return *best;
}

double bisect_symmetric_detuning(const std::function<double(double)>& asymmetry, double lo,
                                 double hi, double tolerance, double zero_tol)
{
    if (!(hi > lo) || !(tolerance > 0.0))
        throw ConfigError("symmetric detuning search: need lo < hi and a positive tolerance");
    auto sign = [zero_tol](double v) { return std::abs(v) <= zero_tol ? 0 : (v > 0 ? 1 : -1); };
    const int s_lo = sign(asymmetry(lo));
    const int s_hi = sign(asymmetry(hi));
    if (s_lo == 0 && s_hi == 0) {
        // asymmetry vanishes at both ends: accept the midpoint only if it does too
        const double mid = 0.5 * (lo + hi);
        if (sign(asymmetry(mid)) == 0)
            return mid;
        throw NumericalError("symmetric detuning search: no unique root in window");
    }
    if (s_lo == 0)
        return lo;
    if (s_hi == 0)
        return hi;
    if (s_lo == s_hi)
        throw NumericalError("symmetric detuning search: asymmetry has no sign change in window");
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        const int s_mid = sign(asymmetry(mid));
        if (s_mid == 0)
            return mid;
        (s_mid == s_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double doublet_asymmetry(const Spectrum& spectrum, const AtomModel& atom, double detuning)
{
    const DoubletAnalysis d = analyze_doublet(spectrum);
    if (d.asymmetry)
        return *d.asymmetry;
    if (d.peaks.empty())
        throw NumericalError("doublet asymmetry: spectrum has no peak");
    const double centre = relative_energy(d.peaks[0].position, atom) - 1.5 * detuning;
    return centre > 0.0 ? 1.0 : -1.0;
}

double find_symmetric_detuning(const AtomModel& atom, const PulseParams& pulse_template,
                               double lo, double hi, const ScanDuration& duration,
                               const SpectrumGrid& grid, Pathway pathway,
                               const TwoPhotonOptions& opts, double tolerance)
{
    const double t = duration.time(atom, pulse_template.E0);
    auto asym = [&](double dw) {
        PulseParams pulse = pulse_template;
        pulse.omega = atom.omega_ba() + dw;
        pulse.duration = t;
        return doublet_asymmetry(single_atom_spectrum(grid, t, atom, pulse, opts, pathway), atom, dw);
    };
    return bisect_symmetric_detuning(asym, lo, hi, tolerance);
}

std::vector<Spectrum> buildup_sequence(const AtomModel& atom, const PulseParams& pulse_template,
                                       const std::vector<double>& multiples,
                                       const SpectrumGrid& grid, Pathway pathway,
                                       const TwoPhotonOptions& opts)
{
    const double period = rabi_period(atom, pulse_template.E0);
    std::vector<Spectrum> out(multiples.size());
    for (double m : multiples)
        if (!(m > 0.0))
            throw ConfigError("buildup_sequence: times must be positive");
    parallel_for(multiples.size(), [&](std::size_t k) {
        PulseParams pulse = pulse_template;
        pulse.duration = multiples[k] * period;
        out[k] = single_atom_spectrum(grid, pulse.duration, atom, pulse, opts, pathway);
    });
    return out;
}

} // namespace rabi
