#include "rabi/deconvolution.hpp"

#include "rabi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rabi {

namespace {

constexpr double fwhm_per_sigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

std::size_t half_width(const std::vector<double>& kernel)
{
    if (kernel.empty() || kernel.size() % 2 == 0)
        throw ConfigError("kernel must have odd length");
    return kernel.size() / 2;
}

// Adjoint of convolve(): sum_i k[i - j] r_i / norm_i.
std::vector<double> convolve_adjoint(const std::vector<double>& r, const std::vector<double>& kernel)
{
    const std::size_t n = r.size();
    const auto m = std::ptrdiff_t(half_width(kernel));
    std::vector<double> norm(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::ptrdiff_t j = -m; j <= m; ++j) {
            const std::ptrdiff_t src = std::ptrdiff_t(i) - j;
            if (src >= 0 && src < std::ptrdiff_t(n))
                norm[i] += kernel[std::size_t(j + m)];
        }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (norm[i] <= 0.0)
            continue;
        const double ri = r[i] / norm[i];
        for (std::ptrdiff_t j = -m; j <= m; ++j) {
            const std::ptrdiff_t src = std::ptrdiff_t(i) - j;
            if (src >= 0 && src < std::ptrdiff_t(n))
                out[std::size_t(src)] += kernel[std::size_t(j + m)] * ri;
        }
    }
    return out;
}

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void normalize(std::vector<double>& v)
{
    const double s = total(v);
    if (!(s > 0.0))
        throw NumericalError("kernel lost all weight");
    for (double& x : v)
        x /= s;
}

// Re-centre the kernel on +-4 sigma of its Gaussian-equivalent width. Samples
// that come into the support are seeded from that Gaussian so the kernel can
// widen again.
std::vector<double> resupport(const std::vector<double>& kernel, double step)
{
    const double fwhm = kernel_fwhm(kernel, step);
    std::vector<double> g = gaussian_kernel(fwhm, step);
    const std::size_t mo = kernel.size() / 2;
    const std::size_t mn = g.size() / 2;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::ptrdiff_t off = std::ptrdiff_t(i) - std::ptrdiff_t(mn);
        const std::ptrdiff_t src = off + std::ptrdiff_t(mo);
        if (src >= 0 && src < std::ptrdiff_t(kernel.size()))
            g[i] = kernel[std::size_t(src)];
    }
    normalize(g);
    return g;
}

double relative_residual(const std::vector<double>& measured, const std::vector<double>& model)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        num += (model[i] - measured[i]) * (model[i] - measured[i]);
        den += measured[i] * measured[i];
    }
    return std::sqrt(num / den);
}

} // namespace

std::vector<double> gaussian_kernel(double fwhm, double step)
{
    if (!(fwhm >= 0.0) || !(step > 0.0))
        throw ConfigError("gaussian_kernel: need fwhm >= 0 and a positive step");
    const double sigma = fwhm / fwhm_per_sigma;
    const auto m = std::size_t(std::ceil(4.0 * sigma / step - 1e-9));
    if (m == 0)
        return {1.0};
    std::vector<double> k(2 * m + 1);
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double x = (double(i) - double(m)) * step;
        k[i] = std::exp(-0.5 * x * x / (sigma * sigma));
    }
    normalize(k);
    return k;
}

double kernel_fwhm(const std::vector<double>& kernel, double step)
{
    const std::size_t m = half_width(kernel);
    const double s = total(kernel);
    if (!(s > 0.0))
        throw NumericalError("kernel_fwhm: empty kernel");
    double mean = 0.0;
    for (std::size_t i = 0; i < kernel.size(); ++i)
        mean += (double(i) - double(m)) * kernel[i];
    mean /= s;
    double var = 0.0;
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        const double x = double(i) - double(m) - mean;
        var += x * x * kernel[i];
    }
    var /= s;
    return fwhm_per_sigma * std::sqrt(var) * step;
}

std::vector<double> convolve(const std::vector<double>& signal, const std::vector<double>& kernel)
{
    const std::size_t n = signal.size();
    const auto m = std::ptrdiff_t(half_width(kernel));
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0, norm = 0.0;
        for (std::ptrdiff_t j = -m; j <= m; ++j) {
            const std::ptrdiff_t src = std::ptrdiff_t(i) - j;
            if (src < 0 || src >= std::ptrdiff_t(n))
                continue;
            const double w = kernel[std::size_t(j + m)];
            acc += w * signal[std::size_t(src)];
            norm += w;
        }
        out[i] = norm > 0.0 ? acc / norm : 0.0;
    }
    return out;
}

std::vector<double> convolve_gaussian(const std::vector<double>& signal, double fwhm,
                                      const SpectrumGrid& grid)
{
    if (!grid.is_uniform())
        throw ConfigError("convolve_gaussian needs a uniform grid");
    if (signal.size() != grid.size())
        throw ConfigError("convolve_gaussian: signal and grid sizes differ");
    if (!(fwhm >= 0.0))
        throw ConfigError("convolve_gaussian: fwhm must be non-negative");
    if (fwhm == 0.0)
        return signal;
    return convolve(signal, gaussian_kernel(fwhm, grid.step()));
}

void DeconvolutionConfig::validate() const
{
    if (blind_rounds < 1 || iterations_signal < 1 || iterations_psf < 1)
        throw ConfigError("deconvolution: iteration counts must be at least 1");
    if (!(tikhonov_lambda >= 0.0))
        throw ConfigError("deconvolution: tikhonov_lambda must be non-negative");
    if (psf_init.empty() && !(psf_init_fwhm > 0.0))
        throw ConfigError("deconvolution: psf_init_fwhm must be positive");
    if (!psf_init.empty()) {
        if (psf_init.size() % 2 == 0)
            throw ConfigError("deconvolution: psf_init must have odd length");
        for (double v : psf_init)
            if (!(v >= 0.0))
                throw ConfigError("deconvolution: psf_init must be non-negative");
        if (std::abs(total(psf_init) - 1.0) > 1e-9)
            throw ConfigError("deconvolution: psf_init must sum to one");
    }
    if (divergence_rounds < 1)
        throw ConfigError("deconvolution: divergence_rounds must be at least 1");
}

DeconvolutionResult richardson_lucy_blind(const std::vector<double>& measured,
                                          const DeconvolutionConfig& config,
                                          const SpectrumGrid& grid,
                                          const IterationObserver& observer)
{
    config.validate();
    if (!grid.is_uniform())
        throw ConfigError("richardson_lucy_blind needs a uniform grid");
    if (measured.size() != grid.size())
        throw ConfigError("richardson_lucy_blind: data and grid sizes differ");
    for (double v : measured)
        if (!(v >= 0.0))
            throw ConfigError("richardson_lucy_blind: measured data must be non-negative");
    const double flux = total(measured);
    if (!(flux > 0.0))
        throw ConfigError("richardson_lucy_blind: measured data are all zero");

    const double step = grid.step();
    const std::size_t n = measured.size();
    const double scale = *std::max_element(measured.begin(), measured.end());

    DeconvolutionResult res;
    res.psf = config.psf_init.empty() ? gaussian_kernel(config.psf_init_fwhm, step) : config.psf_init;
    res.estimate = measured;

    auto notify = [&](int round, bool psf_step) {
        if (observer)
            observer({round, psf_step, res.estimate, res.psf});
    };

    std::vector<double> ratio(n);
    auto update_ratio = [&] {
        const std::vector<double> model = convolve(res.estimate, res.psf);
        for (std::size_t i = 0; i < n; ++i)
            ratio[i] = model[i] > 0.0 ? measured[i] / model[i] : 0.0;
    };

    int increases = 0;
    for (int round = 0; round < config.blind_rounds; ++round) {
        if (config.blind) {
            res.psf = resupport(res.psf, step);
            const auto m = std::ptrdiff_t(res.psf.size() / 2);
            const double o_sum = total(res.estimate);
            for (int it = 0; it < config.iterations_psf; ++it) {
                update_ratio();
                std::vector<double> next(res.psf.size());
                for (std::ptrdiff_t j = -m; j <= m; ++j) {
                    // d(K o)_i / d k_j = o_{i-j}
                    double c = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const std::ptrdiff_t src = std::ptrdiff_t(i) - j;
                        if (src >= 0 && src < std::ptrdiff_t(n))
                            c += res.estimate[std::size_t(src)] * ratio[i];
                    }
                    next[std::size_t(j + m)] = res.psf[std::size_t(j + m)] * c / o_sum;
                }
                normalize(next);
                res.psf = std::move(next);
                notify(round, true);
            }
        }

        for (int it = 0; it < config.iterations_signal; ++it) {
            update_ratio();
            const std::vector<double> back = convolve_adjoint(ratio, res.psf);
            std::vector<double> next(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double left = res.estimate[i > 0 ? i - 1 : i + 1 < n ? i + 1 : i];
                const double right = res.estimate[i + 1 < n ? i + 1 : i > 0 ? i - 1 : i];
                const double lap = left + right - 2.0 * res.estimate[i];
                const double den = std::max(1.0 - 2.0 * config.tikhonov_lambda * lap / scale, 0.5);
                next[i] = res.estimate[i] * back[i] / den;
            }
            const double s = total(next);
            if (!(s > 0.0) || !std::isfinite(s))
                throw NumericalError("richardson_lucy_blind: estimate collapsed");
            for (double& v : next)
                v *= flux / s;
            res.estimate = std::move(next);
            notify(round, false);
        }

        res.residual_norm.push_back(relative_residual(measured, convolve(res.estimate, res.psf)));
        res.rounds = round + 1;
        if (res.residual_norm.size() >= 2) {
            const double prev = res.residual_norm[res.residual_norm.size() - 2];
            const double cur = res.residual_norm.back();
            increases = cur > prev ? increases + 1 : 0;
            if (increases >= config.divergence_rounds) {
                res.diverged = true;
                break;
            }
            if (prev > 0.0 && std::abs(prev - cur) / prev < config.stop_relative_change) {
                res.converged = true;
                break;
            }
        }
    }
    res.psf_fwhm = kernel_fwhm(res.psf, step);
    return res;
}

} // namespace rabi
