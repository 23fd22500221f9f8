#include "rabi/io.hpp"

#include "rabi/errors.hpp"
#include "rabi/units.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rabi {

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
        throw NumericalError("could not create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw NumericalError("could not write " + path.string());
}

void write_json(const std::filesystem::path& path, const json& value)
{
    write_text(path, value.dump(2) + "\n");
}

namespace {

std::string join(const std::vector<std::string>& parts, char sep = ',')
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

json complex_array(const std::vector<cplx>& v)
{
    json arr = json::array();
    for (const cplx& z : v)
        arr.push_back({z.real(), z.imag()});
    return arr;
}

std::vector<double> to_eV(const std::vector<double>& au)
{
    std::vector<double> out(au.size());
    for (std::size_t i = 0; i < au.size(); ++i)
        out[i] = au_to_eV(au[i]);
    return out;
}

} // namespace

std::string spectrum_csv(const Spectrum& spectrum, const AtomModel& atom)
{
    std::vector<std::string> header{"kinetic_energy_eV", "delta_eV"};
    for (const ChannelSpectrum& ch : spectrum.channels)
        header.push_back("intensity_" + std::string(to_string(ch.ell)));
    header.push_back("intensity_total");
    std::string out = join(header) + "\n";
    const std::vector<double> tot = spectrum.intensity();
    for (std::size_t i = 0; i < spectrum.grid.size(); ++i) {
        std::vector<std::string> row{format_number(au_to_eV(spectrum.grid[i])),
                                     format_number(au_to_eV(relative_energy(spectrum.grid[i], atom)))};
        for (const ChannelSpectrum& ch : spectrum.channels)
            row.push_back(format_number(ch.intensity[i]));
        row.push_back(format_number(tot[i]));
        out += join(row) + "\n";
    }
    return out;
}

json spectrum_json(const Spectrum& spectrum, const AtomModel& atom)
{
    json j;
    j["units"] = {{"energy", "eV"}, {"intensity", "a.u. (|amplitude|^2 per hartree)"}};
    j["kinetic_energy_eV"] = to_eV(spectrum.grid.energies());
    std::vector<double> delta(spectrum.grid.size());
    for (std::size_t i = 0; i < delta.size(); ++i)
        delta[i] = au_to_eV(relative_energy(spectrum.grid[i], atom));
    j["delta_eV"] = delta;
    json channels = json::array();
    for (const ChannelSpectrum& ch : spectrum.channels) {
        json c;
        c["ell"] = std::string(to_string(ch.ell));
        c["intensity"] = ch.intensity;
        if (!ch.amplitude.empty())
            c["amplitude"] = complex_array(ch.amplitude);
        channels.push_back(c);
    }
    j["channels"] = channels;
    j["intensity_total"] = spectrum.intensity();
    return j;
}

json doublet_json(const DoubletAnalysis& analysis, const AtomModel& atom)
{
    json j;
    json peaks = json::array();
    for (const Peak& p : analysis.peaks)
        peaks.push_back({{"kinetic_energy_eV", au_to_eV(p.position)},
                         {"delta_meV", au_to_meV(relative_energy(p.position, atom))},
                         {"height", p.height}});
    j["peaks"] = peaks;
    j["is_doublet"] = analysis.is_doublet();
    j["splitting_meV"] = analysis.splitting ? json(au_to_meV(*analysis.splitting)) : json(nullptr);
    j["asymmetry"] = analysis.asymmetry ? json(*analysis.asymmetry) : json(nullptr);
    return j;
}

std::string scan_csv(const ScanResult2D& scan)
{
    std::vector<std::string> row{"kinetic_energy_eV \\ detuning_meV"};
    for (double d : scan.detunings)
        row.push_back(format_number(au_to_meV(d)));
    std::string out = join(row) + "\n";
    row = {"photon_energy_eV"};
    for (double w : scan.photon_energies)
        row.push_back(format_number(au_to_eV(w)));
    out += join(row) + "\n";
    for (std::size_t e = 0; e < scan.kinetic_energies.size(); ++e) {
        row = {format_number(au_to_eV(scan.kinetic_energies[e]))};
        for (std::size_t c = 0; c < scan.detunings.size(); ++c)
            row.push_back(format_number(scan.at(c, e)));
        out += join(row) + "\n";
    }
    return out;
}

json scan_json(const ScanResult2D& scan)
{
    json j;
    std::vector<double> det(scan.detunings.size());
    for (std::size_t i = 0; i < det.size(); ++i)
        det[i] = au_to_meV(scan.detunings[i]);
    j["detuning_meV"] = det;
    j["photon_energy_eV"] = to_eV(scan.photon_energies);
    j["kinetic_energy_eV"] = to_eV(scan.kinetic_energies.energies());
    j["pathway"] = std::string(to_string(scan.pathway));
    j["pulse_duration_au"] = scan.pulse_duration;
    j["E0_au"] = scan.E0;
    j["column_model"] = scan.column_model;
    json rows = json::array();
    for (std::size_t c = 0; c < scan.detunings.size(); ++c)
        rows.push_back(scan.column(c));
    j["intensity"] = rows;  // [detuning][energy]
    return j;
}

std::string branches_csv(const std::vector<BranchPoint>& branches, const AtomModel& atom,
                         const PulseParams& pulse_template)
{
    auto opt = [](const std::optional<double>& v, bool energy) {
        if (!v)
            return std::string("nan");
        return format_number(energy ? au_to_eV(*v) : au_to_meV(*v));
    };
    std::string out = "detuning_meV,lower_eV,upper_eV,gap_meV,dressed_minus_eV,dressed_plus_eV\n";
    for (const BranchPoint& b : branches) {
        PulseParams p = pulse_template;
        p.omega = atom.omega_ba() + b.detuning;
        const DressedPair kin = dressed_kinetic_energies(atom, p);
        out += join({format_number(au_to_meV(b.detuning)), opt(b.lower, true), opt(b.upper, true),
                     opt(b.gap, false), format_number(au_to_eV(kin.minus)),
                     format_number(au_to_eV(kin.plus))}) +
               "\n";
    }
    return out;
}

std::string populations_csv(const PropagationResult& result, const std::vector<double>* closed_form_pb)
{
    std::vector<std::string> header{"time_au", "time_fs"};
    for (const std::string& label : result.bound_labels)
        header.push_back("population_" + label);
    header.push_back("norm");
    if (closed_form_pb)
        header.push_back("population_b_closed_form");
    std::string out = join(header) + "\n";
    for (std::size_t s = 0; s < result.times.size(); ++s) {
        std::vector<std::string> row{format_number(result.times[s]),
                                     format_number(au_to_fs(result.times[s]))};
        for (double p : result.bound_populations[s])
            row.push_back(format_number(p));
        row.push_back(format_number(result.norm_history[s]));
        if (closed_form_pb)
            row.push_back(format_number((*closed_form_pb)[s]));
        out += join(row) + "\n";
    }
    return out;
}

json propagation_json(const PropagationResult& result)
{
    json j;
    j["time_au"] = result.times;
    j["bound_labels"] = result.bound_labels;
    j["bound_populations"] = result.bound_populations;
    j["norm_history"] = result.norm_history;
    j["dt_au"] = result.dt;
    j["steps"] = result.steps;
    j["bin_width_eV"] = au_to_eV(result.bin_width);
    j["bins"] = result.bin_energies.size();
    json channels = json::array();
    for (std::size_t c = 0; c < result.channels.size(); ++c) {
        double prob = 0.0;
        for (const cplx& v : result.continuum_amplitudes[c])
            prob += std::norm(v);
        channels.push_back({{"ell", std::string(to_string(result.channels[c]))},
                            {"ionization_probability", prob}});
    }
    j["channels"] = channels;
    return j;
}

std::string deconvolution_csv(const SpectrumGrid& grid, const std::vector<double>& measured,
                              const DeconvolutionResult& result)
{
    std::string out = "energy_eV,measured,estimate\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        out += join({format_number(au_to_eV(grid[i])), format_number(measured[i]),
                     format_number(result.estimate[i])}) +
               "\n";
    return out;
}

std::string kernel_csv(const std::vector<double>& kernel, double step)
{
    std::string out = "offset_meV,weight\n";
    const auto m = std::ptrdiff_t(kernel.size() / 2);
    for (std::size_t i = 0; i < kernel.size(); ++i)
        out += join({format_number(au_to_meV(double(std::ptrdiff_t(i) - m) * step)),
                     format_number(kernel[i])}) +
               "\n";
    return out;
}

json deconvolution_json(const DeconvolutionResult& result)
{
    json j;
    j["psf_fwhm_meV"] = au_to_meV(result.psf_fwhm);
    j["rounds"] = result.rounds;
    j["converged"] = result.converged;
    j["diverged"] = result.diverged;
    j["residual_norm"] = result.residual_norm;
    return j;
}

TwoColumnData read_two_column_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open input data " + path.string());
    TwoColumnData data;
    std::string line;
    std::size_t lineno = 0;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        for (char& ch : line)
            if (ch == ',' || ch == ';' || ch == '\t')
                ch = ' ';
        std::istringstream ss(line);
        double e = 0.0, v = 0.0;
        if (!(ss >> e >> v)) {
            if (!header_skipped && data.values.empty()) {
                header_skipped = true;
                continue;
            }
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected two numeric columns");
        }
        data.energies_eV.push_back(e);
        data.values.push_back(v);
    }
    if (data.values.size() < 3)
        throw ConfigError(path.string() + ": need at least three data rows");
    return data;
}

std::string spectrum_plot_script(const std::vector<std::string>& csv_files)
{
    std::string s = "set datafile separator ','\nset key autotitle columnhead\n"
                    "set xlabel 'delta (eV)'\nset ylabel 'intensity (arb. u.)'\n"
                    "set terminal pngcairo size 900,600\nset output 'spectrum.png'\nplot ";
    for (std::size_t i = 0; i < csv_files.size(); ++i) {
        if (i)
            s += ", \\\n     ";
        s += "'" + csv_files[i] + "' using 2:(column('intensity_total')) with lines title '" +
             csv_files[i] + "'";
    }
    return s + "\n";
}

std::string scan_plot_matrix(const ScanResult2D& scan)
{
    // gnuplot "nonuniform matrix": first row count and x values, then y and z values.
    std::string out = std::to_string(scan.detunings.size());
    for (double d : scan.detunings)
        out += "," + format_number(au_to_meV(d));
    out += "\n";
    for (std::size_t e = 0; e < scan.kinetic_energies.size(); ++e) {
        out += format_number(au_to_eV(scan.kinetic_energies[e]));
        for (std::size_t c = 0; c < scan.detunings.size(); ++c)
            out += "," + format_number(scan.at(c, e));
        out += "\n";
    }
    return out;
}

std::string scan_plot_script(const std::string& matrix_file, const std::string& branches_file)
{
    return "set datafile separator ','\nset xlabel 'detuning (meV)'\nset ylabel 'kinetic energy (eV)'\n"
           "set terminal pngcairo size 900,700\nset output 'scan.png'\n"
           "plot '" + matrix_file + "' nonuniform matrix with image notitle, \\\n"
           "     '" + branches_file + "' using 1:5 every ::1 with lines lc 'white' title 'dressed -', \\\n"
           "     '" + branches_file + "' using 1:6 every ::1 with lines lc 'white' dt 2 title 'dressed +'\n";
}

std::string populations_plot_script(const std::string& csv_file, std::size_t levels)
{
    std::string s = "set datafile separator ','\nset key autotitle columnhead\n"
                    "set xlabel 'time (fs)'\nset ylabel 'population'\n"
                    "set terminal pngcairo size 900,600\nset output 'populations.png'\nplot ";
    for (std::size_t i = 0; i < levels; ++i) {
        if (i)
            s += ", ";
        s += "'" + csv_file + "' using 2:" + std::to_string(3 + i) + " with lines";
    }
    return s + "\n";
}

std::string deconvolution_plot_script(const std::string& csv_file)
{
    return "set datafile separator ','\nset key autotitle columnhead\n"
           "set xlabel 'energy (eV)'\nset terminal pngcairo size 900,600\n"
           "set output 'deconvolution.png'\n"
           "plot '" + csv_file + "' using 1:2 with points pt 7 ps 0.4, '" + csv_file +
           "' using 1:3 with lines\n";
}

} // namespace rabi
