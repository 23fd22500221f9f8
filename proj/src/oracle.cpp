#include "rabi/oracle.hpp"

#include "rabi/errors.hpp"
#include "rabi/rabi_core.hpp"
#include "rabi/units.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace rabi {

using namespace std::complex_literals;

std::string_view to_string(CouplingMode mode)
{
    return mode == CouplingMode::Rwa ? "rwa" : "full_oscillating";
}

CouplingMode parse_coupling_mode(std::string_view name)
{
    if (name == "rwa")
        return CouplingMode::Rwa;
    if (name == "full_oscillating")
        return CouplingMode::FullOscillating;
    throw ConfigError("unknown coupling mode '" + std::string(name) +
                      "' (expected rwa or full_oscillating)");
}

ContinuumSpec ContinuumSpec::around_two_photon_line(const AtomModel& atom, double half_width_eV,
                                                    std::size_t n_bins)
{
    const double centre = atom.two_photon_line();
    return {centre - eV_to_au(half_width_eV), centre + eV_to_au(half_width_eV), n_bins};
}

SystemOptions SystemOptions::for_pathway(Pathway pathway)
{
    SystemOptions opts;
    opts.one_photon = pathway != Pathway::TwoPhotonOnly;
    opts.two_photon = pathway != Pathway::OnePhotonOnly;
    return opts;
}

EssentialStatesSystem build_system(const AtomModel& atom, const ContinuumSpec& window,
                                   CouplingMode mode, const SystemOptions& options)
{
    atom.validate();
    EssentialStatesSystem sys;
    sys.atom = atom;
    sys.mode = mode;
    sys.window = window;
    sys.bound = {{"a", atom.eps_a, 0}, {"b", atom.eps_b, 1}};
    sys.bound_couplings = {{1, 0, atom.z_ba}};

    const bool explicit_path = options.two_photon && !options.intermediates.empty();
    if (explicit_path)
        for (const IntermediateState& c : options.intermediates) {
            if (!(c.energy > atom.eps_a))
                throw ConfigError("intermediate state '" + c.label + "' must lie above eps_a");
            sys.bound_couplings.push_back({sys.bound.size(), 0, c.z_from_a});
            sys.bound.push_back({c.label, c.energy, 1});
        }

    if (window.n_bins == 0)
        return sys;
    if (window.n_bins < 64)
        throw ConfigError("continuum: need at least 64 bins (or 0 for a bound-only system)");
    const double line = atom.two_photon_line();
    if (!(window.emin < line && line < window.emax))
        throw ConfigError("continuum window must contain the two-photon line at " +
                          std::to_string(au_to_eV(line)) + " eV");
    if (!(window.emin > 0.0))
        throw ConfigError("continuum window must start above threshold");

    sys.bin_width = (window.emax - window.emin) / double(window.n_bins);
    sys.bin_energies.resize(window.n_bins);
    for (std::size_t k = 0; k < window.n_bins; ++k)
        sys.bin_energies[k] = window.emin + (double(k) + 0.5) * sys.bin_width;

    const double norm = std::sqrt(sys.bin_width);
    for (PartialWave ell : all_partial_waves) {
        sys.channels.push_back(ell);
        std::vector<double> dip(sys.bound.size(), 0.0);
        if (options.two_photon && !explicit_path)
            dip[0] = atom.z_cont_from_rho[ell] * norm;
        if (options.one_photon)
            dip[1] = atom.z_cont_from_b[ell] * norm;
        if (explicit_path)
            for (std::size_t i = 0; i < options.intermediates.size(); ++i)
                dip[2 + i] = options.intermediates[i].z_to_continuum[ell] * norm;
        sys.continuum_dipoles.push_back(std::move(dip));
    }
    return sys;
}

double pulse_end_time(const PulseParams& pulse)
{
    if (pulse.envelope == Envelope::FlatTop)
        return pulse.duration;
    // f(0) = 1e-6
    return 2.0 * pulse.duration * std::sqrt(std::log(1e6) / (2.0 * std::log(2.0)));
}

double envelope_value(const PulseParams& pulse, CouplingMode mode, double t)
{
    if (t < 0.0 || t > pulse_end_time(pulse))
        return 0.0;
    if (pulse.envelope == Envelope::Gaussian) {
        const double x = t - 0.5 * pulse_end_time(pulse);
        return std::exp(-2.0 * std::log(2.0) * x * x / (pulse.duration * pulse.duration));
    }
    if (mode == CouplingMode::FullOscillating) {
        const double cycle = 2.0 * constants::pi / pulse.omega;
        if (t < cycle) {
            const double s = std::sin(0.5 * constants::pi * t / cycle);
            return s * s;
        }
    }
    return 1.0;
}

namespace {

double frame_energy(const EssentialStatesSystem& sys, const BoundLevel& level, double omega)
{
    return level.energy - sys.atom.eps_a - double(level.photons) * omega;
}

// Field factors at time t: one-photon coupling per unit dipole and the
// effective two-photon coupling per unit dipole.
struct FieldFactors {
    cplx one;
    cplx two;
};

FieldFactors field_factors(const PulseParams& pulse, CouplingMode mode, double t)
{
    const double half = 0.5 * pulse.E0 * envelope_value(pulse, mode, t);
    if (mode == CouplingMode::Rwa)
        return {half, half * half};
    return {half * (1.0 + std::exp(2i * pulse.omega * t)),
            half * half * (1.0 + std::exp(4i * pulse.omega * t))};
}

cplx level_factor(const BoundLevel& level, const FieldFactors& f)
{
    return level.photons == 0 ? f.two : f.one;
}

Eigen::MatrixXcd bound_hamiltonian(const EssentialStatesSystem& sys, const PulseParams& pulse,
                                   const FieldFactors& f)
{
    const std::size_t nb = sys.bound.size();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(Eigen::Index(nb), Eigen::Index(nb));
    for (std::size_t j = 0; j < nb; ++j)
        h(Eigen::Index(j), Eigen::Index(j)) = frame_energy(sys, sys.bound[j], pulse.omega);
    for (const BoundCoupling& c : sys.bound_couplings) {
        const cplx v = c.z * f.one;
        h(Eigen::Index(c.upper), Eigen::Index(c.lower)) += v;
        h(Eigen::Index(c.lower), Eigen::Index(c.upper)) += std::conj(v);
    }
    return h;
}

double continuum_frame_energy(const EssentialStatesSystem& sys, double eps, double omega)
{
    return eps - sys.atom.eps_a - 2.0 * omega;
}

} // namespace

Eigen::MatrixXcd EssentialStatesSystem::hamiltonian(double t, const PulseParams& pulse) const
{
    const FieldFactors f = field_factors(pulse, mode, t);
    const auto n = Eigen::Index(dimension());
    const auto nb = Eigen::Index(bound.size());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    h.topLeftCorner(nb, nb) = bound_hamiltonian(*this, pulse, f);
    const std::size_t nk = bin_energies.size();
    for (std::size_t c = 0; c < channels.size(); ++c)
        for (std::size_t k = 0; k < nk; ++k) {
            const auto row = nb + Eigen::Index(c * nk + k);
            h(row, row) = continuum_frame_energy(*this, bin_energies[k], pulse.omega);
            for (std::size_t j = 0; j < bound.size(); ++j) {
                const cplx v = continuum_dipoles[c][j] * level_factor(bound[j], f);
                h(row, Eigen::Index(j)) = v;
                h(Eigen::Index(j), row) = std::conj(v);
            }
        }
    return h;
}

double default_time_step(const EssentialStatesSystem& system, const PulseParams& pulse)
{
    if (system.mode == CouplingMode::FullOscillating)
        return 0.2 / pulse.omega;
    const double w = RabiParams::from(system.atom, pulse).W();
    return w > 0.0 ? std::min(0.25, 1e-3 / w) : 0.25;
}

PropagationResult propagate(const EssentialStatesSystem& sys, const PulseParams& pulse, double dt,
                            std::size_t observer_stride)
{
    pulse.validate();
    if (!(dt > 0.0))
        throw ConfigError("propagate: dt must be positive");
    if (observer_stride == 0)
        throw ConfigError("propagate: observer_stride must be at least 1");
    if (sys.mode == CouplingMode::FullOscillating && pulse.omega * dt > 0.2 * (1.0 + 1e-12))
        throw ConfigError("propagate: full-oscillating mode needs omega * dt <= 0.2");
    if (sys.mode == CouplingMode::Rwa) {
        const double w = RabiParams::from(sys.atom, pulse).W();
        if (w * dt > 0.2)
            throw ConfigError("propagate: dt does not resolve the generalized Rabi frequency");
    }
    if (!sys.channels.empty()) {
        const double line = sys.atom.eps_a + 2.0 * pulse.omega;
        if (!(sys.window.emin < line && line < sys.window.emax))
            throw ConfigError("propagate: continuum window excludes the two-photon line of this pulse");
    }

    const double t_end = pulse_end_time(pulse);
    const std::size_t steps = std::max<std::size_t>(1, std::size_t(std::ceil(t_end / dt - 1e-9)));
    const double h = t_end / double(steps);
    const double tau = 0.5 * h;

    const std::size_t nb = sys.bound.size();
    const std::size_t nc = sys.channels.size();
    const std::size_t nk = sys.bin_energies.size();

    // Continuum diagonal and its Cayley denominators are time independent.
    std::vector<double> diag(nk);
    std::vector<cplx> inv_den(nk);
    cplx inv_sum = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
        diag[k] = continuum_frame_energy(sys, sys.bin_energies[k], pulse.omega);
        inv_den[k] = 1.0 / (1.0 + 1i * tau * diag[k]);
        inv_sum += inv_den[k];
    }
    // Bin dipoles do not depend on k, so the Schur complement needs only
    // sum_k 1 / (1 + i tau D_k) per pair of bound levels.
    Eigen::MatrixXd dipole_gram = Eigen::MatrixXd::Zero(Eigen::Index(nb), Eigen::Index(nb));
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < nb; ++j)
                dipole_gram(Eigen::Index(i), Eigen::Index(j)) +=
                    sys.continuum_dipoles[c][i] * sys.continuum_dipoles[c][j];

    Eigen::VectorXcd xb = Eigen::VectorXcd::Zero(Eigen::Index(nb));
    xb(0) = 1.0;
    std::vector<std::vector<cplx>> xc(nc, std::vector<cplx>(nk, 0.0));

    PropagationResult out;
    for (const BoundLevel& level : sys.bound)
        out.bound_labels.push_back(level.label);
    out.channels = sys.channels;
    out.bin_energies = sys.bin_energies;
    out.bin_width = sys.bin_width;
    out.dt = h;
    out.steps = steps;

    auto observe = [&](double t) {
        std::vector<double> pops(nb);
        double norm = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            pops[j] = std::norm(xb(Eigen::Index(j)));
            norm += pops[j];
        }
        for (const auto& ch : xc)
            for (const cplx& v : ch)
                norm += std::norm(v);
        out.times.push_back(t);
        out.bound_populations.push_back(std::move(pops));
        out.norm_history.push_back(norm);
    };
    observe(0.0);

    std::vector<cplx> coupling(nb);  // continuum coupling of each bound level, per unit dipole
    Eigen::VectorXcd rb(static_cast<Eigen::Index>(nb));
    std::vector<std::vector<cplx>> rc(nc, std::vector<cplx>(nk));
    for (std::size_t step = 0; step < steps; ++step) {
        const double t_mid = (double(step) + 0.5) * h;
        const FieldFactors f = field_factors(pulse, sys.mode, t_mid);
        const Eigen::MatrixXcd hb = bound_hamiltonian(sys, pulse, f);
        for (std::size_t j = 0; j < nb; ++j)
            coupling[j] = level_factor(sys.bound[j], f);

        // r = (1 - i tau H) psi
        rb = xb - 1i * tau * (hb * xb);
        for (std::size_t c = 0; c < nc; ++c) {
            const std::vector<double>& dip = sys.continuum_dipoles[c];
            cplx drive = 0.0;  // sum_j H_kj xb_j, identical for all bins
            for (std::size_t j = 0; j < nb; ++j)
                drive += dip[j] * coupling[j] * xb(Eigen::Index(j));
            cplx sum_c = 0.0;
            for (std::size_t k = 0; k < nk; ++k) {
                sum_c += xc[c][k];
                rc[c][k] = xc[c][k] - 1i * tau * (diag[k] * xc[c][k] + drive);
            }
            for (std::size_t j = 0; j < nb; ++j)
                rb(Eigen::Index(j)) -= 1i * tau * std::conj(dip[j] * coupling[j]) * sum_c;
        }

        // Schur complement on the bound block.
        Eigen::MatrixXcd schur = Eigen::MatrixXcd::Identity(Eigen::Index(nb), Eigen::Index(nb)) +
                                 1i * tau * hb;
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < nb; ++j)
                schur(Eigen::Index(i), Eigen::Index(j)) +=
                    tau * tau * std::conj(coupling[i]) * coupling[j] *
                    dipole_gram(Eigen::Index(i), Eigen::Index(j)) * inv_sum;
        Eigen::VectorXcd rhs = rb;
        for (std::size_t c = 0; c < nc; ++c) {
            const std::vector<double>& dip = sys.continuum_dipoles[c];
            cplx weighted = 0.0;
            for (std::size_t k = 0; k < nk; ++k)
                weighted += inv_den[k] * rc[c][k];
            for (std::size_t j = 0; j < nb; ++j)
                rhs(Eigen::Index(j)) -= 1i * tau * std::conj(dip[j] * coupling[j]) * weighted;
        }
        xb = schur.partialPivLu().solve(rhs);
        for (std::size_t c = 0; c < nc; ++c) {
            const std::vector<double>& dip = sys.continuum_dipoles[c];
            cplx drive = 0.0;
            for (std::size_t j = 0; j < nb; ++j)
                drive += dip[j] * coupling[j] * xb(Eigen::Index(j));
            for (std::size_t k = 0; k < nk; ++k)
                xc[c][k] = (rc[c][k] - 1i * tau * drive) * inv_den[k];
        }

        if ((step + 1) % observer_stride == 0 || step + 1 == steps) {
            observe(double(step + 1) * h);
            if (std::abs(out.norm_history.back() - 1.0) > 1e-6)
                throw NumericalError("propagation norm drifted to " +
                                     std::to_string(out.norm_history.back()) + " at t = " +
                                     std::to_string(out.times.back()) + " a.u.; reduce dt");
        }
    }
    out.continuum_amplitudes = std::move(xc);
    return out;
}

Spectrum oracle_spectrum(const PropagationResult& result, const SpectrumGrid& grid)
{
    Spectrum spec;
    spec.grid = grid;
    const std::size_t nk = result.bin_energies.size();
    if (nk == 0) {
        for (PartialWave ell : all_partial_waves)
            spec.channels.push_back({ell, {}, std::vector<double>(grid.size(), 0.0)});
        return spec;
    }
    const double lo = result.bin_energies.front() - 0.5 * result.bin_width;
    const double hi = result.bin_energies.back() + 0.5 * result.bin_width;
    if (grid.size() < 2 || grid.front() < lo || grid.back() > hi)
        throw ConfigError("oracle_spectrum: grid extends beyond the continuum bin window");

    for (std::size_t c = 0; c < result.channels.size(); ++c) {
        const auto& amp = result.continuum_amplitudes[c];
        std::vector<double> density(nk);
        for (std::size_t k = 0; k < nk; ++k)
            density[k] = std::norm(amp[k]) / result.bin_width;

        std::vector<double> values(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = (grid[i] - result.bin_energies.front()) / result.bin_width;
            if (x <= 0.0) {
                values[i] = density.front();
            } else if (x >= double(nk - 1)) {
                values[i] = density.back();
            } else {
                const auto k = std::size_t(x);
                const double frac = x - double(k);
                values[i] = (1.0 - frac) * density[k] + frac * density[k + 1];
            }
        }

        // Probability of the bins covered by the grid, partial bins pro rata.
        double target = 0.0;
        for (std::size_t k = 0; k < nk; ++k) {
            const double b0 = result.bin_energies[k] - 0.5 * result.bin_width;
            const double b1 = b0 + result.bin_width;
            const double overlap = std::min(b1, grid.back()) - std::max(b0, grid.front());
            if (overlap > 0.0)
                target += density[k] * overlap;
        }
        double integral = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            integral += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
        if (integral > 0.0)
            for (double& v : values)
                v *= target / integral;
        spec.channels.push_back({result.channels[c], {}, std::move(values)});
    }
    return spec;
}

double normalized_l2_mismatch(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size())
        throw ConfigError("normalized_l2_mismatch: size mismatch");
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (!(na > 0.0) || !(nb > 0.0))
        throw NumericalError("normalized_l2_mismatch: vanishing spectrum");
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i] / na - b[i] / nb;
        d += x * x;
    }
    return std::sqrt(d);
}

namespace {

constexpr char checkpoint_magic[8] = {'R', 'A', 'B', 'I', 'O', 'R', 'C', 'L'};

class BlobWriter {
public:
    explicit BlobWriter(const std::filesystem::path& path) : out_(path, std::ios::binary)
    {
        if (!out_)
            throw ConfigError("cannot open checkpoint for writing: " + path.string());
    }
    void u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
    void f64(double v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
    void str(const std::string& s)
    {
        u64(s.size());
        out_.write(s.data(), std::streamsize(s.size()));
    }
    void doubles(const std::vector<double>& v)
    {
        u64(v.size());
        for (double x : v)
            f64(x);
    }
    std::ofstream& stream() { return out_; }

private:
    std::ofstream out_;
};

class BlobReader {
public:
    explicit BlobReader(const std::filesystem::path& path) : in_(path, std::ios::binary)
    {
        if (!in_)
            throw ConfigError("cannot open checkpoint: " + path.string());
    }
    template <class T>
    T raw()
    {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!in_)
            throw ConfigError("checkpoint truncated");
        return v;
    }
    std::uint64_t u64() { return raw<std::uint64_t>(); }
    double f64() { return raw<double>(); }
    std::uint64_t count()
    {
        const std::uint64_t n = u64();
        if (n > (std::uint64_t(1) << 32))
            throw ConfigError("checkpoint corrupt: implausible length");
        return n;
    }
    std::string str()
    {
        std::string s(count(), '\0');
        in_.read(s.data(), std::streamsize(s.size()));
        if (!in_)
            throw ConfigError("checkpoint truncated");
        return s;
    }
    std::vector<double> doubles()
    {
        std::vector<double> v(count());
        for (double& x : v)
            x = f64();
        return v;
    }
    std::ifstream& stream() { return in_; }

private:
    std::ifstream in_;
};

} // namespace

void write_checkpoint(const std::filesystem::path& path, const PropagationResult& r)
{
    static_assert(std::endian::native == std::endian::little, "checkpoint assumes little endian");
    BlobWriter w(path);
    w.stream().write(checkpoint_magic, sizeof checkpoint_magic);
    const std::uint32_t version = checkpoint_version;
    w.stream().write(reinterpret_cast<const char*>(&version), sizeof version);
    w.doubles(r.times);
    w.u64(r.bound_labels.size());
    for (const std::string& s : r.bound_labels)
        w.str(s);
    w.u64(r.bound_populations.size());
    for (const auto& row : r.bound_populations)
        w.doubles(row);
    w.doubles(r.norm_history);
    w.u64(r.channels.size());
    for (PartialWave ell : r.channels)
        w.u64(ell == PartialWave::S ? 0 : 2);
    w.doubles(r.bin_energies);
    w.f64(r.bin_width);
    for (const auto& ch : r.continuum_amplitudes) {
        w.u64(ch.size());
        for (const cplx& v : ch) {
            w.f64(v.real());
            w.f64(v.imag());
        }
    }
    w.f64(r.dt);
    w.u64(r.steps);
    if (!w.stream())
        throw NumericalError("failed writing checkpoint " + path.string());
}

PropagationResult read_checkpoint(const std::filesystem::path& path)
{
    BlobReader rd(path);
    char magic[8];
    rd.stream().read(magic, sizeof magic);
    if (!rd.stream() || std::memcmp(magic, checkpoint_magic, sizeof magic) != 0)
        throw ConfigError("not an oracle checkpoint: " + path.string());
    const auto version = rd.raw<std::uint32_t>();
    if (version != checkpoint_version)
        throw ConfigError("checkpoint version " + std::to_string(version) + " is not supported");
    PropagationResult r;
    r.times = rd.doubles();
    r.bound_labels.resize(rd.count());
    for (std::string& s : r.bound_labels)
        s = rd.str();
    r.bound_populations.resize(rd.count());
    for (auto& row : r.bound_populations)
        row = rd.doubles();
    r.norm_history = rd.doubles();
    r.channels.resize(rd.count());
    for (PartialWave& ell : r.channels)
        ell = rd.u64() == 0 ? PartialWave::S : PartialWave::D;
    r.bin_energies = rd.doubles();
    r.bin_width = rd.f64();
    r.continuum_amplitudes.resize(r.channels.size());
    for (auto& ch : r.continuum_amplitudes) {
        ch.resize(rd.count());
        for (cplx& v : ch) {
            const double re = rd.f64();
            v = {re, rd.f64()};
        }
    }
    r.dt = rd.f64();
    r.steps = rd.u64();
    return r;
}

} // namespace rabi
