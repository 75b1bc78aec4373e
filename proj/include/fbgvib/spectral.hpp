#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fbgvib::spectral {

using Complex = std::complex<double>;

enum class Window { rectangular, hann };

std::string_view to_string(Window w);
Window window_from_string(std::string_view name);

// In-place complex transform, forward sign e^{-j...}. Any length: powers of
// two go through iterative radix-2, everything else through Bluestein's chirp-z
// reformulation on a power-of-two grid. The inverse is unnormalised.
void fft_inplace(std::vector<Complex>& data, bool inverse = false);

// Full N-point DFT of a real signal.
struct Spectrum {
    std::size_t n = 0;
    double sample_rate_hz = 1.0;
    Window window = Window::rectangular;
    std::vector<Complex> bins;  // X[0..n-1]

    double bin_frequency_hz(std::size_t k) const {
        return static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
    }
    double bin_width_hz() const { return sample_rate_hz / static_cast<double>(n); }
};

// X[k] = sum_n x[n] exp(-j 2 pi k n / N). Throws DomainError on empty input.
Spectrum dft(std::span<const double> x, double sample_rate_hz = 1.0);

struct MagnitudeOptions {
    Window window = Window::rectangular;
    std::optional<std::size_t> zero_pad_to;
    // Subtract the mean before windowing so the DC level does not leak into
    // the low bins under a tapered window.
    bool remove_mean = false;
};

// One-sided amplitude spectrum on [0, fs/2]. A unit sinusoid on a bin reads
// 1.0 regardless of window (coherent-gain corrected).
struct MagnitudeSpectrum {
    std::vector<double> frequency_hz;
    std::vector<double> magnitude_nm;
    double bin_width_hz = 0.0;
    double record_s = 0.0;  // duration of the data before padding
    Window window = Window::rectangular;

    std::size_t size() const { return frequency_hz.size(); }
};

MagnitudeSpectrum magnitude_spectrum(std::span<const double> channel, double sample_rate_hz,
                                     const MagnitudeOptions& options = {});

struct Peak {
    std::size_t bin = 0;
    double frequency_hz = 0.0;
    double magnitude_nm = 0.0;
    double prominence_nm = 0.0;
};

inline constexpr double kDefaultMaxPeakFrequencyHz = 40.0;

// Interior local maxima whose prominence exceeds `min_prominence_nm`, with
// frequency in [min_freq_hz, max_freq_hz], sorted by descending magnitude.
// Prominence is measured against the lower of the two adjacent valley minima.
std::vector<Peak> find_peaks(const MagnitudeSpectrum& spectrum, double min_prominence_nm,
                             double max_freq_hz = kDefaultMaxPeakFrequencyHz,
                             double min_freq_hz = 0.0);

struct FeatureOptions {
    double shape_band_cutoff_hz = 0.05;
    double min_prominence_nm = 0.015;
    double max_freq_hz = kDefaultMaxPeakFrequencyHz;
    int max_harmonic = 5;
    double snap_bins = 2.0;
};

struct SpectralFeatures {
    std::optional<Peak> base;         // strongest shape-band peak (F_b)
    std::optional<Peak> fundamental;  // tool-locked peak
    std::vector<Peak> harmonics;      // integer multiples 2x.. of the fundamental
    std::vector<Peak> peaks;          // every detected peak, descending magnitude

    std::optional<double> base_frequency_hz() const;
    std::optional<double> fundamental_hz() const;
    std::vector<double> harmonics_hz() const;
};

// The strongest peak at or below the shape-band cutoff is the base; the
// strongest above it is the fundamental, unless an rpm hint is given and some
// peak lies within snap_bins of rpm / 60, in which case that one is taken and
// snapped. Throws DomainError when the spectrum covers less than 2 s of data.
SpectralFeatures identify_features(const MagnitudeSpectrum& spectrum,
                                   std::optional<double> rpm_hint = std::nullopt,
                                   const FeatureOptions& options = {});

}  // namespace fbgvib::spectral
