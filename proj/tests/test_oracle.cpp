#include "rabi/errors.hpp"
#include "rabi/oracle.hpp"
#include "rabi/rabi_core.hpp"
#include "rabi/scans.hpp"
#include "rabi/units.hpp"

#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace rabi;
using doctest::Approx;

namespace {

const AtomModel atom = helium_cis_default();

ContinuumSpec window(std::size_t bins = 1024) { return ContinuumSpec::around_two_photon_line(atom, 1.5, bins); }

SpectrumGrid analysis_grid() { return SpectrumGrid::around_two_photon_line(atom, -0.5, 0.5, 2001); }

PropagationResult run(const EssentialStatesSystem& sys, const PulseParams& p, double dt_scale = 1.0,
                      std::size_t stride = 100)
{
    return propagate(sys, p, dt_scale * default_time_step(sys, p), stride);
}

std::vector<double> bin_populations(const PropagationResult& r)
{
    std::vector<double> out;
    for (const auto& ch : r.continuum_amplitudes)
        for (cplx c : ch)
            out.push_back(std::norm(c));
    return out;
}

} // namespace

TEST_CASE("system construction")
{
    const EssentialStatesSystem two = build_system(atom, {0, 0, 0}, CouplingMode::Rwa);
    CHECK(two.dimension() == 2);
    CHECK(two.channels.empty());

    const EssentialStatesSystem sys = build_system(atom, window(), CouplingMode::Rwa);
    CHECK(sys.dimension() == 2 + 2 * 1024);
    CHECK(sys.bin_width == Approx(eV_to_au(3.0) / 1024).epsilon(1e-14));

    CHECK_THROWS_AS(build_system(atom, window(32), CouplingMode::Rwa), ConfigError);
    ContinuumSpec off = window();
    off.emin = atom.two_photon_line() + 0.01;
    off.emax = off.emin + 0.05;
    CHECK_THROWS_AS(build_system(atom, off, CouplingMode::Rwa), ConfigError);
    ContinuumSpec below = window();
    below.emin = -0.1;
    CHECK_THROWS_AS(build_system(atom, below, CouplingMode::Rwa), ConfigError);
    CHECK_THROWS_AS(parse_coupling_mode("counter"), ConfigError);
    CHECK(parse_coupling_mode(to_string(CouplingMode::FullOscillating)) == CouplingMode::FullOscillating);
}

TEST_CASE("doubling the bins halves the width and scales couplings by 1/sqrt 2")
{
    const EssentialStatesSystem a = build_system(atom, window(512), CouplingMode::Rwa);
    const EssentialStatesSystem b = build_system(atom, window(1024), CouplingMode::Rwa);
    CHECK(b.bin_width == Approx(0.5 * a.bin_width).epsilon(1e-14));
    for (std::size_t c = 0; c < a.channels.size(); ++c)
        for (std::size_t l = 0; l < a.bound.size(); ++l)
            CHECK(b.continuum_dipoles[c][l] == Approx(a.continuum_dipoles[c][l] / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Hamiltonian is Hermitian")
{
    const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), meV_to_au(30.0), 1.5);
    for (CouplingMode mode : {CouplingMode::Rwa, CouplingMode::FullOscillating}) {
        const EssentialStatesSystem sys = build_system(atom, window(64), mode);
        for (double t : {0.0, 3.3, 100.0, 0.5 * p.duration, p.duration}) {
            const Eigen::MatrixXcd H = sys.hamiltonian(t, p);
            CHECK(H.rows() == long(sys.dimension()));
            CHECK((H - H.adjoint()).norm() == 0.0);
        }
    }
}

TEST_CASE("two-level RWA propagation matches the closed form")
{
    const EssentialStatesSystem sys = build_system(atom, {0, 0, 0}, CouplingMode::Rwa);
    for (double dw_meV : {0.0, 25.0, -60.0}) {
        const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), meV_to_au(dw_meV), 2.0);
        const PropagationResult r = run(sys, p, 1.0, 10);
        const RabiParams rp = RabiParams::from(atom, p);
        double worst = 0.0;
        for (std::size_t i = 0; i < r.times.size(); ++i)
            worst = std::max(worst, std::abs(r.bound_populations[i][1] - excited_population(r.times[i], rp)));
        INFO("detuning " << dw_meV << " meV, max deviation " << worst);
        CHECK(worst < 1e-6);
        CHECK(r.times.back() == Approx(p.duration).epsilon(1e-14));
        for (double n : r.norm_history)
            CHECK(std::abs(n - 1.0) < 1e-6);
    }
}

TEST_CASE("counter-rotating terms shift the two-level dynamics by under 1% of the peak")
{
    const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), 0.0, 1.0);
    const EssentialStatesSystem rwa = build_system(atom, {0, 0, 0}, CouplingMode::Rwa);
    const EssentialStatesSystem full = build_system(atom, {0, 0, 0}, CouplingMode::FullOscillating);
    const double dt = default_time_step(full, p);
    const PropagationResult a = propagate(rwa, p, dt, 50);
    const PropagationResult b = propagate(full, p, dt, 50);
    REQUIRE(a.times.size() == b.times.size());
    double worst = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        worst = std::max(worst, std::abs(a.bound_populations[i][1] - b.bound_populations[i][1]));
        peak = std::max(peak, a.bound_populations[i][1]);
    }
    INFO("max |P_b(full) - P_b(rwa)| = " << worst);
    CHECK(worst < 0.01 * peak);
    CHECK(worst > 0.0);
}

TEST_CASE("weak field, short pulse: bins follow first-order perturbation theory")
{
    const EssentialStatesSystem sys = build_system(atom, window(), CouplingMode::Rwa);
    const PulseParams p = flat_top_pulse(atom, 2e-4, meV_to_au(10.0), 1.0);
    PulseParams short_pulse = p;
    short_pulse.duration = 2000.0;
    const PropagationResult r = run(sys, short_pulse);
    const SpectrumGrid grid = analysis_grid();
    const auto oracle = oracle_spectrum(r, grid).intensity();
    const auto analytic =
        single_atom_spectrum(grid, short_pulse.duration, atom, short_pulse, {}, Pathway::CoherentTotal).intensity();
    const double mismatch = testing::l2_relative(oracle, analytic);
    INFO("absolute L2 mismatch " << mismatch);
    CHECK(mismatch < 0.02);
}

TEST_CASE("norm, step and bin convergence")
{
    const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), meV_to_au(20.0), 1.5);
    const EssentialStatesSystem sys = build_system(atom, window(), CouplingMode::Rwa);
    const PropagationResult r1 = run(sys, p);
    for (double n : r1.norm_history)
        CHECK(std::abs(n - 1.0) < 1e-6);

    const PropagationResult r2 = run(sys, p, 0.5);
    const double dt_change = testing::l2_relative(bin_populations(r2), bin_populations(r1));
    INFO("dt halving " << dt_change);
    CHECK(dt_change < 1e-3);

    const EssentialStatesSystem fine = build_system(atom, window(2048), CouplingMode::Rwa);
    const PropagationResult r3 = run(fine, p);
    const SpectrumGrid grid = analysis_grid();
    const double bin_change =
        testing::l2_relative(oracle_spectrum(r3, grid).intensity(), oracle_spectrum(r1, grid).intensity());
    INFO("bin doubling " << bin_change);
    CHECK(bin_change < 0.01);
}

TEST_CASE("oracle agrees with the analytic amplitudes")
{
    const SpectrumGrid grid = analysis_grid();
    for (double dw_meV : {0.0, 40.0}) {
        const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), meV_to_au(dw_meV), 1.5);
        for (Pathway pw : {Pathway::OnePhotonOnly, Pathway::TwoPhotonOnly, Pathway::CoherentTotal}) {
            const EssentialStatesSystem sys =
                build_system(atom, window(), CouplingMode::Rwa, SystemOptions::for_pathway(pw));
            const auto oracle = oracle_spectrum(run(sys, p), grid).intensity();
            const auto analytic = single_atom_spectrum(grid, p.duration, atom, p, {}, pw).intensity();
            const double m = normalized_l2_mismatch(oracle, analytic);
            INFO(to_string(pw) << " at " << dw_meV << " meV: " << m);
            CHECK(m < 0.02);
        }
    }
}

TEST_CASE("spectrum mapping")
{
    const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), 0.0, 1.5);
    const EssentialStatesSystem sys = build_system(atom, window(256), CouplingMode::Rwa);
    const PropagationResult r = run(sys, p);

    // the full window keeps the probability in the bins
    const double lo = r.bin_energies.front() - 0.5 * r.bin_width;
    const double hi = r.bin_energies.back() + 0.5 * r.bin_width;
    const SpectrumGrid full = SpectrumGrid::uniform(lo, hi, 4001);
    const Spectrum s = oracle_spectrum(r, full);
    for (std::size_t c = 0; c < s.channels.size(); ++c) {
        double bins = 0.0;
        for (cplx a : r.continuum_amplitudes[c])
            bins += std::norm(a);
        double integral = 0.0;
        const auto& y = s.channels[c].intensity;
        for (std::size_t i = 1; i < full.size(); ++i)
            integral += 0.5 * (y[i] + y[i - 1]) * (full[i] - full[i - 1]);
        CHECK(std::abs(integral - bins) <= 1e-6 * bins);
    }

    CHECK_THROWS_AS(oracle_spectrum(r, SpectrumGrid::uniform(lo - 0.01, hi, 11)), ConfigError);

    PulseParams dark = p;
    dark.E0 = 0.0;
    dark.duration = 500.0;
    EssentialStatesSystem sys0 = build_system(atom, window(256), CouplingMode::Rwa);
    const PropagationResult r0 = propagate(sys0, dark, 0.25, 100);
    for (double v : oracle_spectrum(r0, analysis_grid()).intensity())
        CHECK(v == 0.0);
}

TEST_CASE("step-size preconditions")
{
    const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), 0.0, 1.0);
    const EssentialStatesSystem full = build_system(atom, {0, 0, 0}, CouplingMode::FullOscillating);
    CHECK_THROWS_AS(propagate(full, p, 0.3 / p.omega, 10), ConfigError);
    const EssentialStatesSystem rwa = build_system(atom, {0, 0, 0}, CouplingMode::Rwa);
    CHECK_THROWS_AS(propagate(rwa, p, 0.3 / p.rabi_frequency(atom), 10), ConfigError);
    CHECK_THROWS_AS(propagate(rwa, p, -1.0, 10), ConfigError);
    CHECK_THROWS_AS(propagate(rwa, p, 0.1, 0), ConfigError);

    // window built for resonance, pulse detuned so far that its line falls outside
    const EssentialStatesSystem narrow =
        build_system(atom, ContinuumSpec::around_two_photon_line(atom, 0.2, 128), CouplingMode::Rwa);
    const PulseParams far = flat_top_pulse(atom, testing::E0_ref(), meV_to_au(200.0), 1.0);
    CHECK_THROWS_AS(propagate(narrow, far, 1.0, 10), ConfigError);
}

TEST_CASE("Gaussian envelope")
{
    PulseParams p = flat_top_pulse(atom, testing::E0_ref(), 0.0, 1.0);
    p.envelope = Envelope::Gaussian;
    p.duration = rabi_period(atom, p.E0);
    const double end = pulse_end_time(p);
    CHECK(envelope_value(p, CouplingMode::Rwa, 0.0) == Approx(1e-6).epsilon(1e-9));
    CHECK(envelope_value(p, CouplingMode::Rwa, 0.5 * end) == 1.0);
    // intensity FWHM is tau: f^2 = 1/2 at t_c +- tau/2
    const double f = envelope_value(p, CouplingMode::Rwa, 0.5 * end + 0.5 * p.duration);
    CHECK(f * f == Approx(0.5).epsilon(1e-12));

    // a Gaussian whose FWHM is one flat-top Rabi period still leaves a doublet
    const EssentialStatesSystem sys =
        build_system(atom, window(), CouplingMode::Rwa, SystemOptions::for_pathway(Pathway::OnePhotonOnly));
    const PropagationResult r = run(sys, p);
    const SpectrumGrid grid = analysis_grid();
    const Spectrum s = oracle_spectrum(r, grid);
    CHECK(analyze_doublet(s).is_doublet());
    const DipReport dip = central_dip(grid.energies(), s.intensity(), atom.two_photon_line());
    INFO("depth ratio " << dip.depth_ratio);
    CHECK(dip.present());
    // the pulse area exceeds that of a flat top of the same FWHM by sqrt(pi / (2 ln 2))
    const double area_ratio = std::sqrt(constants::pi / std::log(2.0)) / std::sqrt(2.0);
    CHECK(area_ratio == Approx(1.5).epsilon(0.01));
}

TEST_CASE("flat-top turn-on in full-oscillating mode")
{
    const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), 0.0, 1.0);
    const double cycle = 2.0 * constants::pi / p.omega;
    CHECK(envelope_value(p, CouplingMode::FullOscillating, 0.0) == 0.0);
    CHECK(envelope_value(p, CouplingMode::FullOscillating, 0.5 * cycle) == Approx(0.5));
    CHECK(envelope_value(p, CouplingMode::FullOscillating, 2.0 * cycle) == 1.0);
    CHECK(envelope_value(p, CouplingMode::Rwa, 0.0) == 1.0);
}

TEST_CASE("explicit far-detuned intermediate reproduces the effective two-photon coupling")
{
    const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), 0.0, 1.5);
    // one state 3 eV above |b> carrying the whole effective element
    IntermediateState c;
    c.label = "c";
    c.energy = atom.eps_b + eV_to_au(3.0);
    const double detune = atom.eps_a + p.omega - c.energy;
    c.z_from_a = 0.05;
    c.z_to_continuum.s = atom.z_cont_from_rho.s * detune / c.z_from_a;
    c.z_to_continuum.d = atom.z_cont_from_rho.d * detune / c.z_from_a;
    SystemOptions opts = SystemOptions::for_pathway(Pathway::TwoPhotonOnly);
    opts.intermediates = {c};
    const EssentialStatesSystem sys = build_system(atom, window(), CouplingMode::Rwa, opts);
    CHECK(sys.bound.size() == 3);
    const SpectrumGrid grid = analysis_grid();
    const auto oracle = oracle_spectrum(run(sys, p), grid).intensity();
    const auto analytic = single_atom_spectrum(grid, p.duration, atom, p, {}, Pathway::TwoPhotonOnly).intensity();
    const double m = normalized_l2_mismatch(oracle, analytic);
    INFO("explicit intermediate vs effective coupling " << m);
    CHECK(m < 0.05);

    IntermediateState bad = c;
    bad.energy = atom.eps_a - 0.1;
    opts.intermediates = {bad};
    CHECK_THROWS_AS(build_system(atom, window(), CouplingMode::Rwa, opts), ConfigError);
}

TEST_CASE("checkpoint round trip")
{
    const PulseParams p = flat_top_pulse(atom, testing::E0_ref(), 0.0, 0.5);
    const EssentialStatesSystem sys = build_system(atom, window(64), CouplingMode::Rwa);
    const PropagationResult r = run(sys, p, 1.0, 500);
    const auto dir = std::filesystem::temp_directory_path() / "rabi_checkpoint_test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "state.bin";
    write_checkpoint(file, r);
    const PropagationResult back = read_checkpoint(file);
    CHECK(back.times == r.times);
    CHECK(back.bound_labels == r.bound_labels);
    CHECK(back.bound_populations == r.bound_populations);
    CHECK(back.norm_history == r.norm_history);
    CHECK(back.channels == r.channels);
    CHECK(back.bin_energies == r.bin_energies);
    CHECK(back.bin_width == r.bin_width);
    CHECK(back.continuum_amplitudes == r.continuum_amplitudes);
    CHECK(back.dt == r.dt);
    CHECK(back.steps == r.steps);

    {
        std::ofstream junk(dir / "junk.bin", std::ios::binary);
        junk << "NOTACHECKPOINT";
    }
    CHECK_THROWS_AS(read_checkpoint(dir / "junk.bin"), ConfigError);
    // truncated copy
    {
        std::ifstream in(file, std::ios::binary);
        std::string blob((std::istreambuf_iterator<char>(in)), {});
        std::ofstream out(dir / "short.bin", std::ios::binary);
        out << blob.substr(0, blob.size() / 2);
    }
    CHECK_THROWS_AS(read_checkpoint(dir / "short.bin"), ConfigError);
    std::filesystem::remove_all(dir);
}
