#include "rabi/config.hpp"

#include "rabi/errors.hpp"
#include "rabi/units.hpp"

#include <fstream>
#include <set>

namespace rabi {

namespace {

// One JSON object of the config. Tracks which keys were read so that the rest
// can be reported as unknown.
class Section {
public:
    Section(const json& node, std::string pointer, const std::string& source)
        : node_(node), pointer_(std::move(pointer)), source_(source)
    {
        if (!node_.is_object())
            fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& what, const std::string& key = "") const
    {
        throw ConfigError(source_ + ": " + where(key) + ": " + what);
    }

    std::string where(const std::string& key) const
    {
        const std::string p = key.empty() ? pointer_ : pointer_ + "/" + key;
        return p.empty() ? "/" : p;
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    template <class T>
    std::optional<T> get(const std::string& key)
    {
        if (!node_.contains(key))
            return std::nullopt;
        used_.insert(key);
        try {
            return node_.at(key).get<T>();
        } catch (const json::exception&) {
            fail("wrong type", key);
        }
    }

    template <class T>
    T get_or(const std::string& key, T fallback)
    {
        return get<T>(key).value_or(fallback);
    }

    double positive(const std::string& key, double fallback)
    {
        const double v = get_or<double>(key, fallback);
        if (!(v > 0.0))
            fail("must be positive", key);
        return v;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum = 1)
    {
        const auto v = get<long long>(key);
        if (!v)
            return fallback;
        if (*v < static_cast<long long>(minimum))
            fail("must be at least " + std::to_string(minimum), key);
        return static_cast<std::size_t>(*v);
    }

    // Energy given as <base>_eV, <base>_meV or <base>_au; returned in a.u.
    std::optional<double> energy(const std::string& base)
    {
        std::optional<double> out;
        for (const auto& [suffix, unit] : {std::pair{"_au", EnergyUnit::AtomicUnits},
                                           std::pair{"_eV", EnergyUnit::ElectronVolt},
                                           std::pair{"_meV", EnergyUnit::MilliElectronVolt}}) {
            const std::string key = base + suffix;
            if (auto v = get<double>(key)) {
                if (out)
                    fail("given in more than one unit", base + "_*");
                out = convert_energy(*v, unit, EnergyUnit::AtomicUnits);
            }
        }
        return out;
    }

    // Length as <base>_um, <base>_mm or <base>_m; returned in metres.
    std::optional<double> length(const std::string& base)
    {
        std::optional<double> out;
        for (const auto& [suffix, scale] : {std::pair{"_m", 1.0}, std::pair{"_mm", 1e-3},
                                            std::pair{"_um", 1e-6}}) {
            if (auto v = get<double>(base + suffix)) {
                if (out)
                    fail("given in more than one unit", base + "_*");
                out = *v * scale;
            }
        }
        return out;
    }

    std::optional<Section> child(const std::string& key)
    {
        if (!node_.contains(key))
            return std::nullopt;
        used_.insert(key);
        return Section(node_.at(key), pointer_ + "/" + key, source_);
    }

    const json* raw(const std::string& key)
    {
        if (!node_.contains(key))
            return nullptr;
        used_.insert(key);
        return &node_.at(key);
    }

    void ignore(const std::string& key) { used_.insert(key); }

    void finish() const
    {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!used_.count(it.key()))
                fail("unknown key", it.key());
    }

    const std::string& pointer() const { return pointer_; }
    const std::string& source() const { return source_; }

private:
    const json& node_;
    std::string pointer_;
    const std::string& source_;
    std::set<std::string> used_;
};

template <class F>
auto rethrow_at(const Section& s, const std::string& key, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const ConfigError& e) {
        s.fail(e.what(), key);
    }
}

std::vector<Pathway> pathway_list(Section& s, const std::string& key, std::vector<Pathway> fallback)
{
    const auto names = s.get<std::vector<std::string>>(key);
    if (!names)
        return fallback;
    if (names->empty())
        s.fail("must not be empty", key);
    std::vector<Pathway> out;
    for (const std::string& n : *names)
        out.push_back(rethrow_at(s, key, [&] { return parse_pathway(n); }));
    return out;
}

ChannelDipoles dipoles(Section& parent, const std::string& key, ChannelDipoles fallback)
{
    auto s = parent.child(key);
    if (!s)
        return fallback;
    ChannelDipoles d = fallback;
    d.s = s->get_or<double>("s", d.s);
    d.d = s->get_or<double>("d", d.d);
    s->finish();
    return d;
}

void parse_atom(Section& root, RunConfig& cfg)
{
    auto s = root.child("atom");
    cfg.atom = atom_preset(cfg.atom_preset);
    if (!s)
        return;
    if (auto preset = s->get<std::string>("preset")) {
        cfg.atom_preset = *preset;
        cfg.atom = rethrow_at(*s, "preset", [&] { return atom_preset(*preset); });
    }
    AtomModel& a = cfg.atom;
    const double omega_ba = a.omega_ba();
    if (auto v = s->energy("eps_a"))
        a.eps_a = *v;
    const auto eps_b = s->energy("eps_b");
    const auto w_ba = s->energy("omega_ba");
    if (eps_b && w_ba)
        s->fail("give either eps_b or omega_ba, not both");
    a.eps_b = eps_b ? *eps_b : a.eps_a + (w_ba ? *w_ba : omega_ba);
    a.z_ba = s->get_or<double>("z_ba", a.z_ba);
    a.z_cont_from_b = dipoles(*s, "z_cont_from_b", a.z_cont_from_b);
    a.z_cont_from_rho = dipoles(*s, "z_cont_from_rho", a.z_cont_from_rho);
    if (auto v = s->energy("eps_c_nearest"))
        a.eps_c_nearest = *v;
    s->finish();
    rethrow_at(*s, "", [&] {
        a.validate();
        return 0;
    });
}

void parse_pulse(Section& root, RunConfig& cfg)
{
    auto s = root.child("pulse");
    PulseParams& p = cfg.pulse;
    const double omega_ba = cfg.atom.omega_ba();
    double intensity = 2e13;
    std::optional<double> field;
    std::optional<double> detuning, photon;
    std::string envelope = "flat_top";
    std::optional<double> periods, duration_au, duration_fs;
    if (s) {
        if (auto v = s->get<double>("intensity_W_cm2"))
            intensity = *v;
        field = s->get<double>("field_au");
        if (field && s->has("intensity_W_cm2"))
            s->fail("give either intensity_W_cm2 or field_au, not both");
        detuning = s->energy("detuning");
        photon = s->energy("photon_energy");
        if (detuning && photon)
            s->fail("give either detuning or photon_energy, not both");
        envelope = s->get_or<std::string>("envelope", envelope);
        periods = s->get<double>("rabi_periods");
        duration_au = s->get<double>("duration_au");
        duration_fs = s->get<double>("duration_fs");
        if (int(bool(periods)) + int(bool(duration_au)) + int(bool(duration_fs)) > 1)
            s->fail("give exactly one of rabi_periods, duration_au, duration_fs");
        s->finish();
    }
    Section& at = s ? *s : root;
    p.E0 = field ? *field : rethrow_at(at, "intensity_W_cm2", [&] { return field_from_intensity(intensity); });
    p.omega = photon ? *photon : omega_ba + detuning.value_or(0.0);
    p.envelope = rethrow_at(at, "envelope", [&] { return parse_envelope(envelope); });
    if (duration_au) {
        p.duration = *duration_au;
    } else if (duration_fs) {
        p.duration = fs_to_au(*duration_fs);
    } else {
        cfg.pulse_periods = periods.value_or(1.5);
        if (!(*cfg.pulse_periods > 0.0))
            at.fail("must be positive", "rabi_periods");
        p.duration = *cfg.pulse_periods * rethrow_at(at, "", [&] { return rabi_period(cfg.atom, p.E0); });
    }
    rethrow_at(at, "", [&] {
        p.validate();
        return 0;
    });
}

void parse_two_photon(Section& root, RunConfig& cfg)
{
    cfg.two_photon = TwoPhotonOptions::defaults(cfg.atom);
    auto s = root.child("two_photon");
    if (!s)
        return;
    cfg.two_photon.include_transient_term = s->get_or<bool>("include_transient_term", false);
    if (auto v = s->energy("effective_eps_c"))
        cfg.two_photon.effective_eps_c = *v;
    s->finish();
    rethrow_at(*s, "", [&] {
        cfg.two_photon.validate(cfg.atom);
        return 0;
    });
}

void parse_grid(Section& root, RunConfig& cfg)
{
    GridSection& g = cfg.grid_section;
    if (auto s = root.child("grid")) {
        g.delta_min = s->energy("delta_min").value_or(g.delta_min);
        g.delta_max = s->energy("delta_max").value_or(g.delta_max);
        g.points = s->count("points", g.points, 3);
        if (!(g.delta_min < g.delta_max))
            s->fail("empty energy window: delta_min must be below delta_max");
        s->finish();
    }
    const double line = cfg.atom.two_photon_line();
    cfg.grid = SpectrumGrid::uniform(line + g.delta_min, line + g.delta_max, g.points);
}

void parse_spectrum(Section& root, RunConfig& cfg)
{
    auto s = root.child("spectrum");
    if (!s)
        return;
    cfg.spectrum.pathways = pathway_list(*s, "pathways", cfg.spectrum.pathways);
    cfg.spectrum.buildup_periods = s->get_or<std::vector<double>>("buildup_periods", {});
    for (double m : cfg.spectrum.buildup_periods)
        if (!(m > 0.0))
            s->fail("entries must be positive", "buildup_periods");
    cfg.spectrum.noise_floor = s->positive("noise_floor", cfg.spectrum.noise_floor);
    s->finish();
}

void parse_scan(Section& root, RunConfig& cfg)
{
    ScanSection& sc = cfg.scan;
    if (cfg.pulse_periods) {
        sc.duration = {ScanDuration::Mode::RabiPeriods, *cfg.pulse_periods};
    } else {
        sc.duration = {ScanDuration::Mode::Absolute, cfg.pulse.duration};
    }
    auto s = root.child("scan");
    if (!s)
        return;
    sc.detuning_min = s->energy("detuning_min").value_or(sc.detuning_min);
    sc.detuning_max = s->energy("detuning_max").value_or(sc.detuning_max);
    sc.points = s->count("points", sc.points);
    if (sc.points > 1 ? !(sc.detuning_min < sc.detuning_max) : sc.detuning_min != sc.detuning_max)
        s->fail("empty detuning window: detuning_min must be below detuning_max");
    const auto periods = s->get<double>("rabi_periods");
    const auto dur_au = s->get<double>("duration_au");
    const auto dur_fs = s->get<double>("duration_fs");
    if (int(bool(periods)) + int(bool(dur_au)) + int(bool(dur_fs)) > 1)
        s->fail("give at most one of rabi_periods, duration_au, duration_fs");
    if (periods)
        sc.duration = {ScanDuration::Mode::RabiPeriods, *periods};
    if (dur_au)
        sc.duration = {ScanDuration::Mode::Absolute, *dur_au};
    if (dur_fs)
        sc.duration = {ScanDuration::Mode::Absolute, fs_to_au(*dur_fs)};
    if (!(sc.duration.value > 0.0))
        s->fail("scan duration must be positive");
    if (auto p = s->get<std::string>("pathway"))
        sc.pathway = rethrow_at(*s, "pathway", [&] { return parse_pathway(*p); });
    s->finish();
}

void parse_average(Section& root, RunConfig& cfg)
{
    AverageSection& av = cfg.average;
    if (auto s = root.child("average")) {
        BeamGeometry& g = av.geometry;
        g.w0 = s->length("w0").value_or(g.w0);
        g.zR = s->length("zR").value_or(g.zR);
        g.L = s->length("L").value_or(g.L);
        g.rho_max_in_waists = s->positive("rho_max_in_waists", g.rho_max_in_waists);
        AveragingOptions& o = av.options;
        o.nz = s->count("nz", o.nz, 2);
        o.nrho = s->count("nrho", o.nrho, 2);
        if (auto tol = s->get<double>("adaptive_tolerance")) {
            if (!(*tol > 0.0))
                s->fail("must be positive", "adaptive_tolerance");
            o.adaptive_tolerance = *tol;
        }
        o.max_refinements = int(s->count("max_refinements", std::size_t(o.max_refinements), 0));
        o.use_intensity_cache = s->get_or<bool>("use_intensity_cache", o.use_intensity_cache);
        o.cache_points = s->count("cache_points", o.cache_points, 2);
        o.cache_min_fraction = s->positive("cache_min_fraction", o.cache_min_fraction);
        if (!(o.cache_min_fraction < 1.0))
            s->fail("must lie in (0, 1)", "cache_min_fraction");
        av.pathways = pathway_list(*s, "pathways", av.pathways);
        s->finish();
    }
    av.geometry.I0 = intensity_from_field(cfg.pulse.E0);
    if (av.geometry.I0 > 0.0)
        rethrow_at(root, "average", [&] {
            av.geometry.validate();
            return 0;
        });
}

void parse_oracle(Section& root, RunConfig& cfg)
{
    auto s = root.child("oracle");
    if (!s)
        return;
    OracleSection& o = cfg.oracle;
    if (auto m = s->get<std::string>("coupling_mode"))
        o.mode = rethrow_at(*s, "coupling_mode", [&] { return parse_coupling_mode(*m); });
    if (auto hw = s->energy("half_width")) {
        if (!(*hw > 0.0))
            s->fail("must be positive", "half_width_*");
        o.half_width = *hw;
    }
    o.n_bins = s->count("n_bins", o.n_bins, 0);
    if (o.n_bins != 0 && o.n_bins < 64)
        s->fail("must be 0 or at least 64", "n_bins");
    if (auto dt = s->get<double>("dt_au")) {
        if (!(*dt > 0.0))
            s->fail("must be positive", "dt_au");
        o.dt = *dt;
    }
    o.observer_stride = s->count("observer_stride", o.observer_stride);
    if (auto p = s->get<std::string>("pathway"))
        o.pathway = rethrow_at(*s, "pathway", [&] { return parse_pathway(*p); });
    o.checkpoint = s->get_or<bool>("checkpoint", false);
    if (const json* list = s->raw("intermediates")) {
        if (!list->is_array())
            s->fail("expected an array", "intermediates");
        for (std::size_t i = 0; i < list->size(); ++i) {
            Section c((*list)[i], s->pointer() + "/intermediates/" + std::to_string(i), s->source());
            IntermediateState st;
            st.label = c.get_or<std::string>("label", "c" + std::to_string(i));
            const auto e = c.energy("energy");
            if (!e)
                c.fail("missing energy_eV / energy_au");
            st.energy = *e;
            st.z_from_a = c.get_or<double>("z_from_a", 0.0);
            st.z_to_continuum = dipoles(c, "z_to_continuum", {});
            c.finish();
            o.intermediates.push_back(st);
        }
    }
    s->finish();
}

void parse_deconvolve(Section& root, RunConfig& cfg, const std::filesystem::path& base_dir)
{
    DeconvolveSection& d = cfg.deconvolve;
    d.config.psf_init_fwhm = meV_to_au(65.0);
    auto s = root.child("deconvolve");
    if (!s)
        return;
    if (auto in = s->get<std::string>("input")) {
        std::filesystem::path p(*in);
        if (p.is_relative() && !base_dir.empty())
            p = base_dir / p;
        d.input = p;
    }
    if (auto syn = s->child("synthetic")) {
        if (auto p = syn->get<std::string>("pathway"))
            d.synthetic.pathway = rethrow_at(*syn, "pathway", [&] { return parse_pathway(*p); });
        if (auto b = syn->energy("blur_fwhm")) {
            if (!(*b >= 0.0))
                syn->fail("must be non-negative", "blur_fwhm_*");
            d.synthetic.blur_fwhm = *b;
        }
        d.synthetic.noise_relative = syn->get_or<double>("noise_relative", d.synthetic.noise_relative);
        if (!(d.synthetic.noise_relative >= 0.0))
            syn->fail("must be non-negative", "noise_relative");
        if (auto seed = syn->get<std::uint64_t>("seed"))
            d.synthetic.seed = *seed;
        syn->finish();
    }
    DeconvolutionConfig& c = d.config;
    if (auto f = s->energy("psf_init_fwhm"))
        c.psf_init_fwhm = *f;
    c.blind_rounds = int(s->count("blind_rounds", std::size_t(c.blind_rounds)));
    c.iterations_signal = int(s->count("iterations_signal", std::size_t(c.iterations_signal)));
    c.iterations_psf = int(s->count("iterations_psf", std::size_t(c.iterations_psf)));
    c.tikhonov_lambda = s->get_or<double>("tikhonov_lambda", c.tikhonov_lambda);
    c.blind = s->get_or<bool>("blind", c.blind);
    c.stop_relative_change = s->get_or<double>("stop_relative_change", c.stop_relative_change);
    s->finish();
    rethrow_at(*s, "", [&] {
        c.validate();
        return 0;
    });
}

void parse_output(Section& root, RunConfig& cfg)
{
    auto s = root.child("output");
    if (!s)
        return;
    if (auto dir = s->get<std::string>("directory"))
        cfg.output.directory = *dir;
    if (auto formats = s->get<std::vector<std::string>>("formats")) {
        cfg.output.csv = cfg.output.json = false;
        for (const std::string& f : *formats) {
            if (f == "csv")
                cfg.output.csv = true;
            else if (f == "json")
                cfg.output.json = true;
            else
                s->fail("unknown format '" + f + "' (expected csv or json)", "formats");
        }
        if (!cfg.output.csv && !cfg.output.json)
            s->fail("at least one output format is required", "formats");
    }
    s->finish();
}

RunConfig parse_impl(const json& document, const std::string& source,
                     const std::filesystem::path& base_dir)
{
    RunConfig cfg;
    cfg.source = source;
    Section root(document, "", source);
    root.ignore("manifest");
    parse_atom(root, cfg);
    parse_pulse(root, cfg);
    parse_two_photon(root, cfg);
    parse_grid(root, cfg);
    parse_spectrum(root, cfg);
    parse_scan(root, cfg);
    parse_average(root, cfg);
    parse_oracle(root, cfg);
    parse_deconvolve(root, cfg, base_dir);
    parse_output(root, cfg);
    root.finish();
    return cfg;
}

json pathway_names(const std::vector<Pathway>& list)
{
    json out = json::array();
    for (Pathway p : list)
        out.push_back(std::string(to_string(p)));
    return out;
}

} // namespace

RunConfig parse_config(const json& document, const std::string& source)
{
    return parse_impl(document, source, {});
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    return parse_impl(doc, path.string(), path.parent_path());
}

json resolved_config_json(const RunConfig& c)
{
    json j;
    const AtomModel& a = c.atom;
    j["atom"] = {{"preset", c.atom_preset},
                 {"eps_a_au", a.eps_a},
                 {"eps_b_au", a.eps_b},
                 {"z_ba", a.z_ba},
                 {"z_cont_from_b", {{"s", a.z_cont_from_b.s}, {"d", a.z_cont_from_b.d}}},
                 {"z_cont_from_rho", {{"s", a.z_cont_from_rho.s}, {"d", a.z_cont_from_rho.d}}}};
    if (a.eps_c_nearest)
        j["atom"]["eps_c_nearest_au"] = *a.eps_c_nearest;
    j["pulse"] = {{"field_au", c.pulse.E0},
                  {"photon_energy_au", c.pulse.omega},
                  {"envelope", std::string(to_string(c.pulse.envelope))},
                  {"duration_au", c.pulse.duration}};
    j["two_photon"] = {{"include_transient_term", c.two_photon.include_transient_term},
                       {"effective_eps_c_au", c.two_photon.effective_eps_c}};
    j["grid"] = {{"delta_min_au", c.grid_section.delta_min},
                 {"delta_max_au", c.grid_section.delta_max},
                 {"points", c.grid_section.points}};
    j["spectrum"] = {{"pathways", pathway_names(c.spectrum.pathways)},
                     {"buildup_periods", c.spectrum.buildup_periods},
                     {"noise_floor", c.spectrum.noise_floor}};
    json scan = {{"detuning_min_au", c.scan.detuning_min},
                 {"detuning_max_au", c.scan.detuning_max},
                 {"points", c.scan.points},
                 {"pathway", std::string(to_string(c.scan.pathway))}};
    if (c.scan.duration.mode == ScanDuration::Mode::RabiPeriods)
        scan["rabi_periods"] = c.scan.duration.value;
    else
        scan["duration_au"] = c.scan.duration.value;
    j["scan"] = scan;
    const AveragingOptions& o = c.average.options;
    json avg = {{"w0_m", c.average.geometry.w0},
                {"zR_m", c.average.geometry.zR},
                {"L_m", c.average.geometry.L},
                {"rho_max_in_waists", c.average.geometry.rho_max_in_waists},
                {"nz", o.nz},
                {"nrho", o.nrho},
                {"max_refinements", o.max_refinements},
                {"use_intensity_cache", o.use_intensity_cache},
                {"cache_points", o.cache_points},
                {"cache_min_fraction", o.cache_min_fraction},
                {"pathways", pathway_names(c.average.pathways)}};
    if (o.adaptive_tolerance)
        avg["adaptive_tolerance"] = *o.adaptive_tolerance;
    j["average"] = avg;
    json orc = {{"coupling_mode", std::string(to_string(c.oracle.mode))},
                {"half_width_au", c.oracle.half_width},
                {"n_bins", c.oracle.n_bins},
                {"observer_stride", c.oracle.observer_stride},
                {"pathway", std::string(to_string(c.oracle.pathway))},
                {"checkpoint", c.oracle.checkpoint}};
    if (c.oracle.dt)
        orc["dt_au"] = *c.oracle.dt;
    if (!c.oracle.intermediates.empty()) {
        json list = json::array();
        for (const IntermediateState& st : c.oracle.intermediates)
            list.push_back({{"label", st.label},
                            {"energy_au", st.energy},
                            {"z_from_a", st.z_from_a},
                            {"z_to_continuum", {{"s", st.z_to_continuum.s}, {"d", st.z_to_continuum.d}}}});
        orc["intermediates"] = list;
    }
    j["oracle"] = orc;
    const DeconvolutionConfig& dc = c.deconvolve.config;
    json dec = {{"psf_init_fwhm_au", dc.psf_init_fwhm},
                {"blind_rounds", dc.blind_rounds},
                {"iterations_signal", dc.iterations_signal},
                {"iterations_psf", dc.iterations_psf},
                {"tikhonov_lambda", dc.tikhonov_lambda},
                {"blind", dc.blind},
                {"stop_relative_change", dc.stop_relative_change}};
    if (c.deconvolve.input)
        dec["input"] = std::filesystem::absolute(*c.deconvolve.input).string();
    json syn = {{"pathway", std::string(to_string(c.deconvolve.synthetic.pathway))},
                {"blur_fwhm_au", c.deconvolve.synthetic.blur_fwhm},
                {"noise_relative", c.deconvolve.synthetic.noise_relative}};
    if (c.deconvolve.synthetic.seed)
        syn["seed"] = *c.deconvolve.synthetic.seed;
    dec["synthetic"] = syn;
    j["deconvolve"] = dec;
    json formats = json::array();
    if (c.output.csv)
        formats.push_back("csv");
    if (c.output.json)
        formats.push_back("json");
    j["output"] = {{"directory", c.output.directory.string()}, {"formats", formats}};
    return j;
}

} // namespace rabi
