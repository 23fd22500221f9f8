#pragma once

#include "rabi/model.hpp"

#include <functional>
#include <vector>

namespace rabi {

// Widths and grids are in a.u. like everything else; the CLI converts.

// Discrete Gaussian kernel on a grid of spacing `step`, truncated at +-4 sigma
// and normalized to unit sum. Odd length, centred.
std::vector<double> gaussian_kernel(double fwhm, double step);

// Gaussian-equivalent FWHM of a centred kernel from its second moment.
double kernel_fwhm(const std::vector<double>& kernel, double step);

// Convolution with a centred kernel; near the edges the truncated kernel is
// renormalized over the samples that exist.
std::vector<double> convolve(const std::vector<double>& signal, const std::vector<double>& kernel);

// Unit-sum Gaussian blur. fwhm = 0 returns the input. Throws on non-uniform grids.
std::vector<double> convolve_gaussian(const std::vector<double>& signal, double fwhm,
                                      const SpectrumGrid& grid);

struct DeconvolutionConfig {
    int blind_rounds = 10;
    int iterations_signal = 25;
    int iterations_psf = 10;
    double tikhonov_lambda = 1e-3;
    double psf_init_fwhm = 0.0;           // a.u.; ignored if psf_init is given
    std::vector<double> psf_init;         // explicit kernel, odd length
    bool blind = true;                    // false: psf held at psf_init
    double stop_relative_change = 1e-4;
    int divergence_rounds = 3;

    void validate() const;
};

struct DeconvolutionResult {
    std::vector<double> estimate;
    std::vector<double> psf;
    double psf_fwhm = 0.0;
    std::vector<double> residual_norm;  // ||psf (*) estimate - measured|| / ||measured||, per round
    int rounds = 0;
    bool converged = false;
    bool diverged = false;
};

// Called after every signal and psf update.
struct IterationState {
    int round = 0;
    bool psf_step = false;
    const std::vector<double>& estimate;
    const std::vector<double>& psf;
};
using IterationObserver = std::function<void(const IterationState&)>;

// Blind Richardson-Lucy: each round refines the kernel with iterations_psf
// multiplicative steps (support kept at +-4 sigma of its current width, unit
// sum), then the signal with iterations_signal steps of the Tikhonov-Miller
// regularized update
//   o <- o * K^T(m / K o) / (1 - 2 lambda Lap(o) / max(m)),
// with the estimate rescaled to the measured flux after every step.
DeconvolutionResult richardson_lucy_blind(const std::vector<double>& measured,
                                          const DeconvolutionConfig& config,
                                          const SpectrumGrid& grid,
                                          const IterationObserver& observer = {});

} // namespace rabi
