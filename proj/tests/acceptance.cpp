// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "rabi/deconvolution.hpp"
#include "rabi/focal.hpp"
#include "rabi/ionization.hpp"
#include "rabi/oracle.hpp"
#include "rabi/rabi_core.hpp"
#include "rabi/scans.hpp"
#include "rabi/units.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace rabi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

const AtomModel atom = helium_cis_default();
const double E0 = field_from_intensity(2e13);

std::string fmt(double v, int digits = 4)
{
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

double relative_to_line(double eps) { return au_to_meV(relative_energy(eps, atom)); }

// ---------------------------------------------------------------------------

Outcome amplitude_ratios()
{
    PulseParams p = flat_top_pulse(atom, 0.023880, 0.0, 1.5);
    const double rs = amplitude_ratio(atom, p, PartialWave::S);
    const double rd = amplitude_ratio(atom, p, PartialWave::D);
    const double es = std::abs(rs / 0.13546 - 1.0);
    const double ed = std::abs(rd / 1.1958 - 1.0);
    return {es < 1e-3 && ed < 1e-3,
            "R^s = " + fmt(rs, 6) + " (rel. err " + fmt(es, 2) + "), R^d = " + fmt(rd, 6) +
                " (rel. err " + fmt(ed, 2) + ")"};
}

Outcome peak_positions()
{
    const SpectrumGrid grid = SpectrumGrid::around_two_photon_line(atom, -0.6, 0.6, 2401);
    const double step = grid.step();
    int good = 0, total = 0;
    double worst = 0.0;
    std::string first_bad;
    for (int k = 0; k < 20; ++k) {
        const double dw = meV_to_au(-100.0 + 200.0 * k / 19.0);
        const PulseParams p = flat_top_pulse(atom, E0, dw, 1.5);
        const RabiParams rp = RabiParams::from(atom, p);
        const double expected[2] = {atom.two_photon_line() + 1.5 * dw - 0.5 * rp.W(),
                                    atom.two_photon_line() + 1.5 * dw + 0.5 * rp.W()};
        for (Pathway pw : {Pathway::OnePhotonOnly, Pathway::TwoPhotonOnly}) {
            ++total;
            const Spectrum s = single_atom_spectrum(grid, p.duration, atom, p, TwoPhotonOptions::defaults(atom), pw);
            const auto maxima = local_maxima(grid.energies(), s.intensity(), default_noise_floor);
            // nearest maximum to each predicted position
            double err = 0.0;
            double found[2] = {std::nan(""), std::nan("")};
            for (int j = 0; j < 2; ++j) {
                double best = 1e9;
                for (const Peak& pk : maxima)
                    if (std::abs(pk.position - expected[j]) < best) {
                        best = std::abs(pk.position - expected[j]);
                        found[j] = pk.position;
                    }
                err = std::max(err, best);
            }
            worst = std::max(worst, err);
            if (err <= step) {
                ++good;
            } else if (first_bad.empty()) {
                first_bad = std::string(to_string(pw)) + " at " + fmt(au_to_meV(dw)) + " meV: nearest maxima " +
                            fmt(relative_to_line(found[0])) + ", " + fmt(relative_to_line(found[1])) +
                            " vs predicted " + fmt(relative_to_line(expected[0])) + ", " +
                            fmt(relative_to_line(expected[1])) + " meV";
            }
        }
    }
    std::string detail = std::to_string(good) + "/" + std::to_string(total) +
                         " spectra within one step (" + fmt(au_to_meV(step)) + " meV)";
    if (worst < 1e8)
        detail += ", worst " + fmt(au_to_meV(worst)) + " meV";
    if (!first_bad.empty())
        detail += "; first miss " + first_bad;
    return {good == total, detail};
}

Outcome splitting()
{
    const SpectrumGrid grid = SpectrumGrid::around_two_photon_line(atom);
    const PulseParams p = flat_top_pulse(atom, E0, 0.0, 1.5);
    const Spectrum s = single_atom_spectrum(grid, p.duration, atom, p, {}, Pathway::OnePhotonOnly);
    const DoubletAnalysis d = analyze_doublet(s);
    if (!d.splitting)
        return {false, "no doublet found"};
    const double meV = au_to_meV(*d.splitting);
    return {std::abs(meV - 80.6) <= 1.5,
            "splitting " + fmt(meV) + " meV, Omega " + fmt(au_to_meV(p.rabi_frequency(atom))) + " meV"};
}

Outcome symmetric_detuning()
{
    const SpectrumGrid grid = SpectrumGrid::around_two_photon_line(atom);
    const PulseParams tmpl = flat_top_pulse(atom, E0, 0.0, 1.5);
    const double dw = find_symmetric_detuning(atom, tmpl, meV_to_au(30.0), meV_to_au(100.0), ScanDuration{},
                                              grid, Pathway::CoherentTotal, TwoPhotonOptions::defaults(atom),
                                              meV_to_au(0.1));
    const double meV = au_to_meV(dw);
    return {std::abs(meV - 62.0) <= 3.0, "symmetric doublet at " + fmt(meV) + " meV"};
}

Outcome buildup()
{
    const SpectrumGrid grid = SpectrumGrid::around_two_photon_line(atom);
    const PulseParams tmpl = flat_top_pulse(atom, E0, 0.0, 1.5);
    const double centre = atom.two_photon_line();
    auto dip = [&](Pathway pw, double periods) {
        const auto spectra = buildup_sequence(atom, tmpl, {periods}, grid, pw, {});
        return central_dip(grid.energies(), spectra.front().intensity(), centre);
    };
    const DipReport two_half = dip(Pathway::TwoPhotonOnly, 0.5);
    const DipReport one_half = dip(Pathway::OnePhotonOnly, 0.5);
    const DipReport one_three = dip(Pathway::OnePhotonOnly, 1.5);
    // first appearance of each dip, for the record
    auto onset = [&](Pathway pw) {
        for (int k = 1; k <= 150; ++k)
            if (dip(pw, 0.01 * k).present())
                return 0.01 * k;
        return std::nan("");
    };
    auto state = [](const DipReport& d) {
        return std::string(d.present() ? "present" : "absent") + " (ratio " +
               (d.local_minimum ? fmt(d.depth_ratio, 3) : std::string("no minimum")) + ")";
    };
    const bool a = two_half.present(), b = !one_half.present(), c = one_three.present();
    return {a && b && c, "two-photon @1/2 " + state(two_half) + "; one-photon @1/2 " + state(one_half) +
                             "; one-photon @3/2 " + state(one_three) + "; onsets: two-photon " +
                             fmt(onset(Pathway::TwoPhotonOnly), 3) + ", one-photon " +
                             fmt(onset(Pathway::OnePhotonOnly), 3) + " periods"};
}

Outcome avoided_crossing_scan()
{
    const SpectrumGrid grid = SpectrumGrid::around_two_photon_line(atom);
    const PulseParams tmpl = flat_top_pulse(atom, E0, 0.0, 1.5);
    std::vector<double> dws;
    for (int k = 0; k < 61; ++k)
        dws.push_back(meV_to_au(-150.0 + 5.0 * k));
    const ScanResult2D scan =
        detuning_scan(atom, tmpl, dws, ScanDuration{}, grid, Pathway::CoherentTotal, TwoPhotonOptions::defaults(atom));
    const AvoidedCrossing ac = avoided_crossing(extract_branches(scan));
    const double Omega = tmpl.rabi_frequency(atom);
    const bool in_range = ac.min_gap >= 0.9 * Omega && ac.min_gap <= 1.1 * Omega;
    const bool blue = ac.detuning_at_min > 0.0;
    return {in_range && blue, "gap minimum " + fmt(au_to_meV(ac.min_gap)) + " meV (" +
                                  fmt(ac.min_gap / Omega) + " Omega, " + (in_range ? "in" : "out of") +
                                  " range) at " + fmt(au_to_meV(ac.detuning_at_min)) + " meV (" +
                                  (blue ? "blue" : "not blue") + ")"};
}

PropagationResult run_oracle(const EssentialStatesSystem& sys, const PulseParams& p, std::size_t stride = 100)
{
    return propagate(sys, p, default_time_step(sys, p), stride);
}

Outcome oracle_equivalence()
{
    const SpectrumGrid grid = SpectrumGrid::around_two_photon_line(atom, -0.5, 0.5, 2001);
    const ContinuumSpec window = ContinuumSpec::around_two_photon_line(atom, 1.5, 1024);
    double worst_l2 = 0.0, worst_norm = 0.0;
    for (double dw_meV : {0.0, 40.0, -40.0}) {
        const PulseParams p = flat_top_pulse(atom, E0, meV_to_au(dw_meV), 1.5);
        for (Pathway pw : {Pathway::OnePhotonOnly, Pathway::TwoPhotonOnly, Pathway::CoherentTotal}) {
            const EssentialStatesSystem sys =
                build_system(atom, window, CouplingMode::Rwa, SystemOptions::for_pathway(pw));
            const PropagationResult r = run_oracle(sys, p);
            for (double n : r.norm_history)
                worst_norm = std::max(worst_norm, std::abs(n - 1.0));
            const auto analytic = single_atom_spectrum(grid, p.duration, atom, p, {}, pw).intensity();
            worst_l2 = std::max(worst_l2, normalized_l2_mismatch(oracle_spectrum(r, grid).intensity(), analytic));
        }
    }
    double worst_pb = 0.0;
    const EssentialStatesSystem two_level = build_system(atom, {0, 0, 0}, CouplingMode::Rwa);
    for (double dw_meV : {0.0, 25.0, -60.0}) {
        const PulseParams p = flat_top_pulse(atom, E0, meV_to_au(dw_meV), 2.0);
        const PropagationResult r = run_oracle(two_level, p, 10);
        const RabiParams rp = RabiParams::from(atom, p);
        for (std::size_t i = 0; i < r.times.size(); ++i)
            worst_pb = std::max(worst_pb, std::abs(r.bound_populations[i][1] - excited_population(r.times[i], rp)));
    }
    return {worst_l2 < 0.02 && worst_norm < 1e-6 && worst_pb < 1e-6,
            "spectrum L2 " + fmt(worst_l2, 3) + " (< 0.02), norm drift " + fmt(worst_norm, 2) +
                " (< 1e-6), two-level P_b error " + fmt(worst_pb, 2) + " (< 1e-6)"};
}

Outcome focal_averaging()
{
    const SpectrumGrid grid = SpectrumGrid::around_two_photon_line(atom);
    const PulseParams p = flat_top_pulse(atom, E0, 0.0, 1.5);
    BeamGeometry g;
    g.w0 = 10.2e-6;
    g.zR = 6.3e-3;
    g.L = 2e-3;
    auto contrast = [&](const Spectrum& s) {
        const DipReport dip = central_dip(grid.energies(), s.intensity(), atom.two_photon_line());
        return dip.local_minimum ? dip.depth_ratio : 1.0;
    };
    double degradation[2];
    double worst_change = 0.0;
    int k = 0;
    for (Pathway pw : {Pathway::OnePhotonOnly, Pathway::TwoPhotonOnly}) {
        const AveragingOptions base_opts;
        AveragingOptions fine = base_opts;
        fine.nz *= 2;
        fine.nrho *= 2;
        const double single = contrast(single_atom_spectrum(grid, p.duration, atom, p, {}, pw));
        const AveragedSpectrum avg = volume_averaged_spectrum(grid, p.duration, atom, p, g, {}, pw, base_opts);
        const AveragedSpectrum doubled = volume_averaged_spectrum(grid, p.duration, atom, p, g, {}, pw, fine);
        const auto a = avg.spectrum.intensity(), b = doubled.spectrum.intensity();
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            num += (a[i] - b[i]) * (a[i] - b[i]);
            den += b[i] * b[i];
        }
        worst_change = std::max(worst_change, std::sqrt(num / den));
        degradation[k++] = std::abs(contrast(avg.spectrum) - single) / single;
    }
    const bool order = degradation[1] < degradation[0];
    return {order && worst_change < 5e-3,
            "contrast degradation one-photon " + fmt(degradation[0], 3) + ", two-photon " +
                fmt(degradation[1], 3) + "; node doubling change " + fmt(worst_change, 2)};
}

Outcome deconvolution_round_trip()
{
    const SpectrumGrid grid = SpectrumGrid::around_two_photon_line(atom);
    const PulseParams p = flat_top_pulse(atom, E0, 0.0, 1.5);
    const std::vector<double> truth =
        single_atom_spectrum(grid, p.duration, atom, p, {}, Pathway::OnePhotonOnly).intensity();
    const DoubletAnalysis ta = analyze_doublet(grid.energies(), truth);
    std::vector<double> measured = convolve_gaussian(truth, meV_to_au(70.0), grid);
    std::mt19937_64 rng(20131);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = 0.01 * *std::max_element(measured.begin(), measured.end());
    for (double& v : measured)
        v = std::max(0.0, v + sigma * noise(rng));
    const double flux = std::accumulate(measured.begin(), measured.end(), 0.0);

    DeconvolutionConfig cfg;
    cfg.psf_init_fwhm = meV_to_au(65.0);
    bool invariants = true;
    const DeconvolutionResult res = richardson_lucy_blind(measured, cfg, grid, [&](const IterationState& s) {
        for (double v : s.estimate)
            invariants = invariants && v >= 0.0;
        for (double v : s.psf)
            invariants = invariants && v >= 0.0;
        const double f = std::accumulate(s.estimate.begin(), s.estimate.end(), 0.0);
        const double k = std::accumulate(s.psf.begin(), s.psf.end(), 0.0);
        invariants = invariants && std::abs(f / flux - 1.0) < 1e-9 && std::abs(k - 1.0) < 1e-9;
    });
    const DoubletAnalysis ra = analyze_doublet(grid.energies(), res.estimate);
    const double true_split = au_to_meV(*ta.splitting);
    std::string detail = "true splitting " + fmt(true_split) + " meV, ";
    bool split_ok = false;
    if (ra.splitting) {
        const double rel = std::abs(au_to_meV(*ra.splitting) / true_split - 1.0);
        split_ok = rel <= 0.05;
        detail += "recovered " + fmt(au_to_meV(*ra.splitting)) + " meV (" + fmt(100 * rel, 3) + "%)";
    } else {
        detail += "no doublet recovered";
    }
    const double psf = au_to_meV(res.psf_fwhm);
    const bool psf_ok = std::abs(psf - 70.0) <= 3.5;
    detail += ", PSF FWHM " + fmt(psf) + " meV (start 65), invariants " + (invariants ? "held" : "violated") +
              ", " + std::to_string(res.rounds) + " rounds";
    return {split_ok && psf_ok && invariants, detail};
}

Outcome envelope_trend(bool oracle_ok)
{
    const SpectrumGrid grid = SpectrumGrid::around_two_photon_line(atom, -0.5, 0.5, 2001);
    const ContinuumSpec window = ContinuumSpec::around_two_photon_line(atom, 1.5, 1024);
    const EssentialStatesSystem sys = build_system(atom, window, CouplingMode::Rwa);
    auto asymmetry = [&](double dw) {
        PulseParams p = flat_top_pulse(atom, E0, dw, 1.0);
        p.envelope = Envelope::Gaussian;
        p.duration = rabi_period(atom, E0);
        return doublet_asymmetry(oracle_spectrum(run_oracle(sys, p), grid), atom, dw);
    };
    const double dw = bisect_symmetric_detuning(asymmetry, meV_to_au(-30.0), meV_to_au(62.0), meV_to_au(0.5));
    const double meV = au_to_meV(dw);
    return {oracle_ok && meV < 62.0,
            "Gaussian envelope (intensity FWHM one Rabi period) symmetric doublet at " + fmt(meV) +
                " meV vs flat-top 62 meV; oracle equivalence " + (oracle_ok ? "holds" : "fails") +
                "; ab initio and experimental maps are out of scope"};
}

} // namespace

int main()
{
    int failures = 0;
    bool oracle_ok = false;
    auto report = [&](int id, const std::string& name, const std::function<Outcome()>& f) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass)
            ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  " << name
                  << ": " << o.detail << "  [" << fmt(secs, 3) << " s]" << std::endl;
        return o.pass;
    };

    report(1, "amplitude ratios", amplitude_ratios);
    report(2, "peak-position law", peak_positions);
    report(3, "one-photon splitting", splitting);
    report(4, "symmetric detuning", symmetric_detuning);
    report(5, "build-up ordering", buildup);
    report(6, "avoided crossing", avoided_crossing_scan);
    oracle_ok = report(7, "oracle equivalence", oracle_equivalence);
    report(8, "focal averaging", focal_averaging);
    report(9, "deconvolution round trip", deconvolution_round_trip);
    report(10, "envelope sensitivity", [&] { return envelope_trend(oracle_ok); });

    std::cout << (10 - failures) << "/10 criteria pass" << std::endl;
    return failures == 0 ? 0 : 1;
}
