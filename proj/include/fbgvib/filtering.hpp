#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fbgvib::filtering {

// Second-order section b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
    std::array<double, 3> b{1.0, 0.0, 0.0};
    std::array<double, 2> a{0.0, 0.0};

    std::complex<double> response(double freq_hz, double sample_rate_hz) const;
    double dc_gain() const { return (b[0] + b[1] + b[2]) / (1.0 + a[0] + a[1]); }
    // Moduli of the two denominator roots.
    std::array<double, 2> pole_radii() const;
    bool stable() const;
};

struct NotchBand {
    double center_hz = 0.0;
    double bandwidth_hz = 0.0;
};

// Immutable cascade of stable sections. Construction rejects any section with
// a pole on or outside the unit circle.
class FilterSpec {
public:
    FilterSpec() = default;
    FilterSpec(std::vector<Biquad> sections, double sample_rate_hz, std::vector<NotchBand> notches = {},
               std::string description = {});

    const std::vector<Biquad>& sections() const { return sections_; }
    double sample_rate_hz() const { return sample_rate_hz_; }
    const std::vector<NotchBand>& notches() const { return notches_; }
    const std::string& description() const { return description_; }

    std::complex<double> response(double freq_hz) const;
    double magnitude_db(double freq_hz) const;
    // Slowest decay among the sections, in samples (1 / (1 - max pole radius)).
    double time_constant_samples() const;

private:
    std::vector<Biquad> sections_;
    double sample_rate_hz_ = 1.0;
    std::vector<NotchBand> notches_;
    std::string description_;
};

// Bandwidth used when the caller does not pick one: a quarter of the
// fundamental, never narrower than 0.2 Hz.
double default_notch_bandwidth_hz(double fundamental_hz);
inline constexpr int kDefaultNotchHarmonics = 3;

// One notch per multiple m * fundamental, m = 1..n_harmonics, each with -3 dB
// width `bandwidth_hz` and unity gain at DC and Nyquist.
FilterSpec design_bandstop(double fundamental_hz, int n_harmonics, double bandwidth_hz,
                           double sample_rate_hz);

// Second-order Butterworth low-pass, -3 dB at the cutoff (single pass).
FilterSpec design_lowpass(double cutoff_hz, double sample_rate_hz);

// Causal cascade with zero initial state.
std::vector<double> apply(const FilterSpec& spec, std::span<const double> samples);

// Forward-backward application with odd reflection padding of three slowest
// time constants and steady-state initial conditions. Output has the input's
// length, zero phase, and the squared cascade magnitude.
std::vector<double> apply_zero_phase(const FilterSpec& spec, std::span<const double> samples);

// Zero-phase low-pass used as the naive baseline: keeps the slow shape content
// and removes everything above the cutoff, including sharp transients.
std::vector<double> extract_shape_component(std::span<const double> samples, double cutoff_hz,
                                            double sample_rate_hz);

// Plain-text coefficient file: '#' header lines carry the sample rate and the
// notch description, then one "b0 b1 b2 a1 a2" line per section.
void write_coefficients(std::ostream& out, const FilterSpec& spec);
FilterSpec read_coefficients(std::istream& in);

}  // namespace fbgvib::filtering
