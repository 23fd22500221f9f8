#include "rabi/commands.hpp"

#include "rabi/errors.hpp"
#include "rabi/units.hpp"

#include <Eigen/Core>

#include <cmath>
#include <random>

namespace rabi {

namespace {

// Collects output files in writing order, honouring the configured formats.
class OutputWriter {
public:
    OutputWriter(const RunConfig& cfg, const CommandOptions& opts) : cfg_(cfg), opts_(opts)
    {
        std::filesystem::create_directories(opts.out);
    }

    void csv(const std::string& name, const std::string& text)
    {
        if (cfg_.output.csv)
            text_file(name, text);
    }
    void json_file(const std::string& name, const json& value)
    {
        if (cfg_.output.json) {
            write_json(opts_.out / name, value);
            files_.push_back(name);
        }
    }
    // Written regardless of formats (plots, checkpoints, summaries).
    void text_file(const std::string& name, const std::string& text)
    {
        write_text(opts_.out / name, text);
        files_.push_back(name);
    }
    void plot(const std::string& name, const std::string& script)
    {
        if (opts_.emit_plots)
            text_file(name, script);
    }
    std::filesystem::path path(const std::string& name)
    {
        files_.push_back(name);
        return opts_.out / name;
    }

    std::vector<std::string> finish(const std::string& command)
    {
        json manifest = resolved_config_json(cfg_);
        manifest["output"]["directory"] = opts_.out.string();
        json files = files_;
        manifest["manifest"] = {{"command", command},
                                {"library_version", library_version},
                                {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                      std::to_string(EIGEN_MINOR_VERSION)},
                                {"json_version", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                     std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                                {"compiler", __VERSION__},
                                {"files", files}};
        write_json(opts_.out / "manifest.json", manifest);
        files_.push_back("manifest.json");
        return files_;
    }

private:
    const RunConfig& cfg_;
    const CommandOptions& opts_;
    std::vector<std::string> files_;
};

std::string periods_tag(double m)
{
    std::string s = format_number(m);
    for (char& c : s)
        if (c == '.')
            c = 'p';
    return s;
}

json pulse_summary(const RunConfig& cfg)
{
    const RabiParams rp = RabiParams::from(cfg.atom, cfg.pulse);
    const DressedPair kin = dressed_kinetic_energies(cfg.atom, cfg.pulse);
    json j = {{"E0_au", cfg.pulse.E0},
              {"intensity_W_cm2", intensity_from_field(cfg.pulse.E0)},
              {"detuning_meV", au_to_meV(rp.delta_omega)},
              {"rabi_frequency_meV", au_to_meV(rp.Omega)},
              {"generalized_rabi_frequency_meV", au_to_meV(rp.W())},
              {"duration_fs", au_to_fs(cfg.pulse.duration)},
              {"dressed_kinetic_energies_eV", {au_to_eV(kin.minus), au_to_eV(kin.plus)}}};
    if (rp.Omega > 0.0)
        j["duration_rabi_periods"] = cfg.pulse.duration / rabi_period(cfg.atom, cfg.pulse.E0);
    return j;
}

double dip_contrast(const Spectrum& spectrum, const AtomModel& atom, double detuning)
{
    const std::vector<double> total = spectrum.intensity();
    const DipReport dip =
        central_dip(spectrum.grid.energies(), total, atom.two_photon_line() + 1.5 * detuning);
    return dip.local_minimum ? dip.depth_ratio : 1.0;
}

} // namespace

std::vector<std::string> cmd_spectrum(const RunConfig& cfg, const CommandOptions& opts)
{
    OutputWriter out(cfg, opts);
    const double detuning = cfg.pulse.detuning(cfg.atom);
    json summary;
    summary["pulse"] = pulse_summary(cfg);
    json ratios;
    for (PartialWave ell : all_partial_waves)
        if (cfg.atom.z_cont_from_b[ell] != 0.0)
            ratios[std::string(to_string(ell))] = amplitude_ratio(cfg.atom, cfg.pulse, ell);
    summary["amplitude_ratio"] = ratios;

    std::vector<std::string> csv_files;
    for (Pathway pw : cfg.spectrum.pathways) {
        const std::string tag(to_string(pw));
        const Spectrum spec =
            single_atom_spectrum(cfg.grid, cfg.pulse.duration, cfg.atom, cfg.pulse, cfg.two_photon, pw);
        out.csv("spectrum_" + tag + ".csv", spectrum_csv(spec, cfg.atom));
        out.json_file("spectrum_" + tag + ".json", spectrum_json(spec, cfg.atom));
        csv_files.push_back("spectrum_" + tag + ".csv");
        json d = doublet_json(analyze_doublet(spec, cfg.spectrum.noise_floor), cfg.atom);
        const DipReport dip = central_dip(spec.grid.energies(), spec.intensity(),
                                          cfg.atom.two_photon_line() + 1.5 * detuning);
        d["central_dip"] = {{"local_minimum", dip.local_minimum},
                            {"depth_ratio", dip.depth_ratio},
                            {"present", dip.present()}};
        summary["doublets"][tag] = d;

        if (!cfg.spectrum.buildup_periods.empty()) {
            PulseParams tmpl = cfg.pulse;
            const std::vector<Spectrum> seq = buildup_sequence(
                cfg.atom, tmpl, cfg.spectrum.buildup_periods, cfg.grid, pw, cfg.two_photon);
            for (std::size_t i = 0; i < seq.size(); ++i) {
                const std::string name =
                    "buildup_" + tag + "_" + periods_tag(cfg.spectrum.buildup_periods[i]) + ".csv";
                out.csv(name, spectrum_csv(seq[i], cfg.atom));
                const DipReport bd = central_dip(seq[i].grid.energies(), seq[i].intensity(),
                                                 cfg.atom.two_photon_line() + 1.5 * detuning);
                summary["buildup"][tag].push_back({{"rabi_periods", cfg.spectrum.buildup_periods[i]},
                                                    {"dip_present", bd.present()},
                                                    {"depth_ratio", bd.depth_ratio}});
            }
        }
    }
    out.json_file("doublet.json", summary);
    out.plot("spectrum.gp", spectrum_plot_script(csv_files));
    return out.finish("spectrum");
}

std::vector<std::string> cmd_scan(const RunConfig& cfg, const CommandOptions& opts)
{
    OutputWriter out(cfg, opts);
    const ScanSection& sc = cfg.scan;
    std::vector<double> detunings(sc.points);
    for (std::size_t i = 0; i < sc.points; ++i)
        detunings[i] = sc.points == 1
                           ? sc.detuning_min
                           : sc.detuning_min + (sc.detuning_max - sc.detuning_min) * double(i) /
                                                   double(sc.points - 1);
    const ScanResult2D scan = detuning_scan(cfg.atom, cfg.pulse, detunings, sc.duration, cfg.grid,
                                            sc.pathway, cfg.two_photon);
    const std::vector<BranchPoint> branches = extract_branches(scan, cfg.spectrum.noise_floor);

    out.csv("scan.csv", scan_csv(scan));
    out.json_file("scan.json", scan_json(scan));
    out.csv("branches.csv", branches_csv(branches, cfg.atom, cfg.pulse));

    json crossing;
    const double omega_rabi = cfg.pulse.rabi_frequency(cfg.atom);
    crossing["rabi_frequency_meV"] = au_to_meV(omega_rabi);
    bool any_doublet = false;
    for (const BranchPoint& b : branches)
        any_doublet = any_doublet || b.gap.has_value();
    if (any_doublet) {
        const AvoidedCrossing ac = avoided_crossing(branches);
        crossing["min_gap_meV"] = au_to_meV(ac.min_gap);
        crossing["detuning_at_min_meV"] = au_to_meV(ac.detuning_at_min);
        crossing["min_gap_over_rabi_frequency"] = omega_rabi > 0.0 ? ac.min_gap / omega_rabi : 0.0;
    } else {
        crossing["min_gap_meV"] = nullptr;
    }
    out.json_file("crossing.json", crossing);
    if (opts.emit_plots) {
        out.text_file("scan_plot.dat", scan_plot_matrix(scan));
        out.plot("scan.gp", scan_plot_script("scan_plot.dat", "branches.csv"));
    }
    return out.finish("scan");
}

std::vector<std::string> cmd_average(const RunConfig& cfg, const CommandOptions& opts)
{
    OutputWriter out(cfg, opts);
    const double detuning = cfg.pulse.detuning(cfg.atom);
    json summary;
    summary["pulse"] = pulse_summary(cfg);
    const BeamGeometry& g = cfg.average.geometry;
    summary["geometry"] = {{"I0_W_cm2", g.I0},
                           {"w0_um", g.w0 * 1e6},
                           {"zR_mm", g.zR * 1e3},
                           {"L_mm", g.L * 1e3},
                           {"rho_max_in_waists", g.rho_max_in_waists}};
    std::vector<std::string> csv_files;
    for (Pathway pw : cfg.average.pathways) {
        const std::string tag(to_string(pw));
        const Spectrum single =
            single_atom_spectrum(cfg.grid, cfg.pulse.duration, cfg.atom, cfg.pulse, cfg.two_photon, pw);
        const AveragedSpectrum avg = volume_averaged_spectrum(
            cfg.grid, cfg.pulse.duration, cfg.atom, cfg.pulse, g, cfg.two_photon, pw, cfg.average.options);
        out.csv("single_atom_" + tag + ".csv", spectrum_csv(single, cfg.atom));
        out.csv("averaged_" + tag + ".csv", spectrum_csv(avg.spectrum, cfg.atom));
        out.json_file("averaged_" + tag + ".json", spectrum_json(avg.spectrum, cfg.atom));
        csv_files.push_back("averaged_" + tag + ".csv");
        const double c_single = dip_contrast(single, cfg.atom, detuning);
        const double c_avg = dip_contrast(avg.spectrum, cfg.atom, detuning);
        summary["pathways"][tag] = {{"contrast_single_atom", c_single},
                                    {"contrast_averaged", c_avg},
                                    {"relative_contrast_degradation", (c_avg - c_single) / c_single},
                                    {"quadrature_error_estimate", avg.error_estimate},
                                    {"nz", avg.nz},
                                    {"nrho", avg.nrho},
                                    {"volume_units", "m^3"}};
    }
    out.json_file("averaging.json", summary);
    out.plot("average.gp", spectrum_plot_script(csv_files));
    return out.finish("average");
}

std::vector<std::string> cmd_oracle(const RunConfig& cfg, const CommandOptions& opts)
{
    OutputWriter out(cfg, opts);
    const OracleSection& o = cfg.oracle;
    const double centre = cfg.atom.two_photon_line();
    const ContinuumSpec window{centre - o.half_width, centre + o.half_width, o.n_bins};
    SystemOptions sys_opts = SystemOptions::for_pathway(o.pathway);
    sys_opts.intermediates = o.intermediates;
    const EssentialStatesSystem sys = build_system(cfg.atom, window, o.mode, sys_opts);
    const double dt = o.dt.value_or(default_time_step(sys, cfg.pulse));
    const PropagationResult result = propagate(sys, cfg.pulse, dt, o.observer_stride);

    const bool closed_form = o.n_bins == 0 && o.mode == CouplingMode::Rwa &&
                             cfg.pulse.envelope == Envelope::FlatTop && o.intermediates.empty();
    std::vector<double> pb;
    if (closed_form) {
        const RabiParams rp = RabiParams::from(cfg.atom, cfg.pulse);
        for (double t : result.times)
            pb.push_back(excited_population(t, rp));
    }
    out.csv("populations.csv", populations_csv(result, closed_form ? &pb : nullptr));
    json summary = propagation_json(result);
    summary["pulse"] = pulse_summary(cfg);
    if (closed_form) {
        double err = 0.0;
        for (std::size_t s = 0; s < pb.size(); ++s)
            err = std::max(err, std::abs(result.bound_populations[s][1] - pb[s]));
        summary["max_deviation_from_closed_form"] = err;
    }
    if (o.n_bins > 0) {
        const Spectrum spec = oracle_spectrum(result, cfg.grid);
        out.csv("oracle_spectrum.csv", spectrum_csv(spec, cfg.atom));
        out.json_file("oracle_spectrum.json", spectrum_json(spec, cfg.atom));
        if (cfg.pulse.envelope == Envelope::FlatTop && o.intermediates.empty()) {
            const Spectrum analytic = single_atom_spectrum(cfg.grid, cfg.pulse.duration, cfg.atom,
                                                           cfg.pulse, cfg.two_photon, o.pathway);
            summary["analytic_l2_mismatch"] =
                normalized_l2_mismatch(spec.intensity(), analytic.intensity());
        }
        summary["doublet"] =
            doublet_json(analyze_doublet(spec, cfg.spectrum.noise_floor), cfg.atom);
    }
    out.json_file("propagation.json", summary);
    if (o.checkpoint)
        write_checkpoint(out.path("checkpoint.bin"), result);
    out.plot("populations.gp", populations_plot_script("populations.csv", result.bound_labels.size()));
    return out.finish("oracle");
}

std::vector<std::string> cmd_deconvolve(const RunConfig& cfg, const CommandOptions& opts)
{
    OutputWriter out(cfg, opts);
    const DeconvolveSection& d = cfg.deconvolve;
    SpectrumGrid grid;
    std::vector<double> measured;
    json summary;
    std::optional<double> true_splitting;
    if (d.input) {
        const TwoColumnData data = read_two_column_csv(*d.input);
        const std::size_t n = data.values.size();
        const double lo = data.energies_eV.front();
        const double hi = data.energies_eV.back();
        const double h = (hi - lo) / double(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(data.energies_eV[i] - (lo + h * double(i))) > 1e-6 * std::abs(h))
                throw ConfigError(d.input->string() + ": energies must be uniformly spaced");
        grid = SpectrumGrid::uniform(eV_to_au(lo), eV_to_au(hi), n);
        measured = data.values;
        summary["input"] = d.input->string();
    } else {
        grid = cfg.grid;
        const Spectrum truth = single_atom_spectrum(grid, cfg.pulse.duration, cfg.atom, cfg.pulse,
                                                    cfg.two_photon, d.synthetic.pathway);
        const std::vector<double> clean = truth.intensity();
        const DoubletAnalysis ta = analyze_doublet(grid.energies(), clean, cfg.spectrum.noise_floor);
        true_splitting = ta.splitting;
        measured = convolve_gaussian(clean, d.synthetic.blur_fwhm, grid);
        if (d.synthetic.seed && d.synthetic.noise_relative > 0.0) {
            std::mt19937_64 rng(*d.synthetic.seed);
            std::normal_distribution<double> noise(0.0, 1.0);
            const double sigma = d.synthetic.noise_relative *
                                 *std::max_element(measured.begin(), measured.end());
            for (double& v : measured)
                v = std::max(0.0, v + sigma * noise(rng));
        }
        summary["synthetic"] = {{"pathway", std::string(to_string(d.synthetic.pathway))},
                                {"blur_fwhm_meV", au_to_meV(d.synthetic.blur_fwhm)},
                                {"noise_relative", d.synthetic.seed ? d.synthetic.noise_relative : 0.0}};
    }

    const DeconvolutionResult res = richardson_lucy_blind(measured, d.config, grid);
    out.csv("deconvolved.csv", deconvolution_csv(grid, measured, res));
    out.csv("psf.csv", kernel_csv(res.psf, grid.step()));
    json meta = deconvolution_json(res);
    for (auto it = summary.begin(); it != summary.end(); ++it)
        meta[it.key()] = it.value();
    const DoubletAnalysis ra = analyze_doublet(grid.energies(), res.estimate, cfg.spectrum.noise_floor);
    meta["recovered_splitting_meV"] = ra.splitting ? json(au_to_meV(*ra.splitting)) : json(nullptr);
    if (true_splitting)
        meta["true_splitting_meV"] = au_to_meV(*true_splitting);
    out.json_file("deconvolution.json", meta);
    out.plot("deconvolution.gp", deconvolution_plot_script("deconvolved.csv"));
    return out.finish("deconvolve");
}

std::vector<std::string> run_command(const std::string& name, const RunConfig& config,
                                     const CommandOptions& options)
{
    if (name == "spectrum")
        return cmd_spectrum(config, options);
    if (name == "scan")
        return cmd_scan(config, options);
    if (name == "average")
        return cmd_average(config, options);
    if (name == "oracle")
        return cmd_oracle(config, options);
    if (name == "deconvolve")
        return cmd_deconvolve(config, options);
    throw ConfigError("unknown command '" + name + "'");
}

} // namespace rabi
