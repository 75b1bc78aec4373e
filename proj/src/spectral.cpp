#include "fbgvib/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "fbgvib/error.hpp"

namespace fbgvib::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void radix2(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        // Twiddles computed directly per index; a running product drifts on long transforms.
        std::vector<Complex> tw(half);
        for (std::size_t k = 0; k < half; ++k) {
            const double ang = sign * 2.0 * kPi * static_cast<double>(k) / static_cast<double>(len);
            tw[k] = Complex(std::cos(ang), std::sin(ang));
        }
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + half] * tw[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

void bluestein(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    const std::size_t m = std::bit_ceil(2 * n - 1);
    const double sign = inverse ? 1.0 : -1.0;

    // chirp[k] = exp(sign * j pi k^2 / n); k^2 reduced mod 2n keeps the angle small.
    std::vector<Complex> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto k2 = static_cast<unsigned long long>(k) * k % (2ULL * n);
        const double ang = sign * kPi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = Complex(std::cos(ang), std::sin(ang));
    }

    std::vector<Complex> u(m), v(m);
    for (std::size_t k = 0; k < n; ++k) u[k] = a[k] * chirp[k];
    v[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
        v[k] = std::conj(chirp[k]);
        v[m - k] = v[k];
    }
    radix2(u, false);
    radix2(v, false);
    for (std::size_t i = 0; i < m; ++i) u[i] *= v[i];
    radix2(u, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = u[k] * scale * chirp[k];
}

}  // namespace

std::string_view to_string(Window w) {
    switch (w) {
        case Window::rectangular: return "rectangular";
        case Window::hann: return "hann";
    }
    return "rectangular";
}

Window window_from_string(std::string_view name) {
    if (name == "rectangular" || name == "rect") return Window::rectangular;
    if (name == "hann") return Window::hann;
    throw DomainError("unknown window '" + std::string(name) + "'");
}

void fft_inplace(std::vector<Complex>& data, bool inverse) {
    if (data.size() <= 1) return;
    if (is_power_of_two(data.size())) {
        radix2(data, inverse);
    } else {
        bluestein(data, inverse);
    }
}

Spectrum dft(std::span<const double> x, double sample_rate_hz) {
    if (x.empty()) throw DomainError("dft of an empty signal");
    Spectrum s;
    s.n = x.size();
    s.sample_rate_hz = sample_rate_hz;
    s.bins.assign(x.begin(), x.end());
    fft_inplace(s.bins);
    return s;
}

MagnitudeSpectrum magnitude_spectrum(std::span<const double> channel, double sample_rate_hz,
                                     const MagnitudeOptions& options) {
    if (channel.empty()) throw DomainError("magnitude spectrum of an empty channel");
    if (!(sample_rate_hz > 0.0)) throw DomainError("sample rate must be positive");
    const std::size_t n = channel.size();
    const std::size_t padded = options.zero_pad_to.value_or(n);
    if (padded < n) throw DomainError("zero_pad_to is shorter than the input");

    double mean = 0.0;
    if (options.remove_mean) {
        for (double v : channel) mean += v;
        mean /= static_cast<double>(n);
    }

    std::vector<double> buf(padded, 0.0);
    double window_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (options.window == Window::hann && n > 1) {
            w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
        }
        window_sum += w;
        buf[i] = (channel[i] - mean) * w;
    }
    if (window_sum == 0.0) window_sum = 1.0;

    const Spectrum s = dft(buf, sample_rate_hz);
    MagnitudeSpectrum out;
    out.window = options.window;
    out.bin_width_hz = s.bin_width_hz();
    out.record_s = static_cast<double>(n) / sample_rate_hz;
    const std::size_t half = padded / 2;
    out.frequency_hz.resize(half + 1);
    out.magnitude_nm.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        const bool single = (k == 0) || (padded % 2 == 0 && k == half);
        out.frequency_hz[k] = s.bin_frequency_hz(k);
        out.magnitude_nm[k] = (single ? 1.0 : 2.0) * std::abs(s.bins[k]) / window_sum;
    }
    return out;
}

std::vector<Peak> find_peaks(const MagnitudeSpectrum& spectrum, double min_prominence_nm, double max_freq_hz,
                             double min_freq_hz) {
    if (!(min_prominence_nm > 0.0)) throw DomainError("min_prominence must be positive");
    const auto& m = spectrum.magnitude_nm;
    const std::size_t n = m.size();
    std::vector<Peak> peaks;
    if (n < 3) return peaks;

    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double f = spectrum.frequency_hz[k];
        if (f > max_freq_hz) break;
        if (f < min_freq_hz) continue;
        // Plateaus count once, at their left edge.
        if (!(m[k] > m[k - 1])) continue;
        std::size_t right = k + 1;
        while (right < n && m[right] == m[k]) ++right;
        if (right >= n || !(m[right] < m[k])) continue;

        std::size_t l = k;
        while (l > 0 && m[l - 1] <= m[l]) --l;
        std::size_t r = right;
        while (r + 1 < n && m[r + 1] <= m[r]) ++r;
        const double valley = std::min(m[l], m[r]);
        const double prominence = m[k] - valley;
        if (prominence > min_prominence_nm) {
            peaks.push_back({k, f, m[k], prominence});
        }
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.magnitude_nm > b.magnitude_nm; });
    return peaks;
}

std::optional<double> SpectralFeatures::base_frequency_hz() const {
    if (!base) return std::nullopt;
    return base->frequency_hz;
}

std::optional<double> SpectralFeatures::fundamental_hz() const {
    if (!fundamental) return std::nullopt;
    return fundamental->frequency_hz;
}

std::vector<double> SpectralFeatures::harmonics_hz() const {
    std::vector<double> out;
    for (const auto& h : harmonics) out.push_back(h.frequency_hz);
    return out;
}

SpectralFeatures identify_features(const MagnitudeSpectrum& spectrum, std::optional<double> rpm_hint,
                                   const FeatureOptions& options) {
    if (spectrum.record_s < 2.0 - 1e-9) {
        throw DomainError("feature identification needs at least 2 s of data");
    }
    SpectralFeatures feats;
    feats.peaks = find_peaks(spectrum, options.min_prominence_nm, options.max_freq_hz);
    const double bin = spectrum.bin_width_hz;

    for (const auto& p : feats.peaks) {
        if (p.frequency_hz <= options.shape_band_cutoff_hz) {
            if (!feats.base) feats.base = p;
        } else if (!feats.fundamental) {
            feats.fundamental = p;
        }
    }
    if (rpm_hint && *rpm_hint > 0.0) {
        // a peak close to the commanded speed wins over a stronger stray one
        const double expected = *rpm_hint / 60.0;
        for (const auto& p : feats.peaks) {
            if (p.frequency_hz > options.shape_band_cutoff_hz &&
                std::abs(p.frequency_hz - expected) <= options.snap_bins * bin) {
                feats.fundamental = p;
                feats.fundamental->frequency_hz = expected;
                break;
            }
        }
    }
    if (!feats.fundamental) return feats;

    const double f0 = feats.fundamental->frequency_hz;
    for (int mult = 2; mult <= options.max_harmonic; ++mult) {
        const double target = mult * f0;
        const Peak* best = nullptr;
        for (const auto& p : feats.peaks) {
            const bool near = std::abs(p.frequency_hz - target) <= std::min(bin, 0.5 * f0) + 1e-12;
            if (near && p.frequency_hz > f0 && (!best || p.magnitude_nm > best->magnitude_nm)) {
                best = &p;
            }
        }
        if (best) feats.harmonics.push_back(*best);
    }
    return feats;
}

}  // namespace fbgvib::spectral
