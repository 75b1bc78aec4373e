#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fbgvib/trace.hpp"

namespace fbgvib::vib {

// Two-mass chain: ground -k1- m1 (manipulator tip) -k2- m2 (sensor assembly).
// Each mass carries a viscous damper to ground. The rotating unbalance acts
// on m1 with magnitude unbalance_me * omega^2. The wavelength signal is
// gain1 * x1 + gain2 * x2.
struct TwoDofParams {
    double m1 = 1.0;  // kg
    double m2 = 0.1;
    double k1 = 0.0;  // N/m
    double k2 = 0.0;
    double c1 = 0.0;  // N s/m
    double c2 = 0.0;
    double unbalance_me = 0.0;  // kg m
    double gain1 = 0.0;         // nm/m
    double gain2 = 0.0;

    // Throws ParameterError when masses/stiffnesses are not positive, dampers
    // negative, or the undamped eigenfrequencies are not real and distinct.
    void validate() const;
};

// Undamped eigenfrequencies of (M, K), ascending, in Hz.
std::array<double, 2> natural_frequencies_hz(const TwoDofParams& p);

struct FrfResponse {
    std::complex<double> x1;  // m, phasor relative to the force sin(wt)
    std::complex<double> x2;
};

// Complex steady-state solve of (K - w^2 M + j w C) X = F.
FrfResponse frf_response(const TwoDofParams& p, double forcing_hz);

// |x1|, |x2| in metres.
std::array<double, 2> frf_amplitude(const TwoDofParams& p, double forcing_hz);

// Amplitude of gain1 * x1 + gain2 * x2, in nm.
double output_amplitude_nm(const TwoDofParams& p, double forcing_hz);

inline constexpr double kDefaultMode1Hz = 0.4;
inline constexpr double kDefaultMode2Hz = 16.0;
inline constexpr double kDefaultMassRatio = 0.1;
inline constexpr double kDefaultDampingRatio = 0.05;
inline constexpr double kDefaultPeakVibrationNm = 0.3;
inline constexpr double kDefaultGain1NmPerM = 10.0;
inline constexpr double kDefaultGain2NmPerM = 1.0e6;
inline constexpr double kNominalUnbalanceKgM = 1.0e-4;

// Solves k1, k2 with m1 = 1 kg and m2 = mass_ratio so the undamped
// eigenfrequencies hit the targets; picks the root with the soft sensor
// coupling so the low mode is the sensor rattling in its channel. Dampers give
// `damping_ratio` per mass. With positive damping the unbalance is scaled so the
// output peak over [0.05, 40] Hz equals `peak_amplitude_nm`.
TwoDofParams calibrate_default_params(double f1_hz, double f2_hz, double mass_ratio,
                                      double damping_ratio,
                                      double peak_amplitude_nm = kDefaultPeakVibrationNm);

TwoDofParams default_params();

// Maximum of output_amplitude_nm over [lo_hz, hi_hz] and where it occurs.
struct OutputPeak {
    double frequency_hz = 0.0;
    double amplitude_nm = 0.0;
};
OutputPeak max_output_amplitude(const TwoDofParams& p, double lo_hz = 0.05, double hi_hz = 40.0);

enum class BendPhase { hold, pull, release };

struct BendSegment {
    BendPhase phase = BendPhase::hold;
    double duration_s = 0.0;
};

inline constexpr double kDefaultCableSpeedMmS = 0.1;
inline constexpr double kDefaultPullS = 60.0;
inline constexpr double kDefaultCurvatureGain = 0.1 / 6.0;  // 1/m per mm
inline constexpr double kDefaultSlackThresholdMm = 0.5;
inline constexpr double kDefaultSlackScale = 2.0;

struct BendProfile {
    double cable_speed_mm_s = kDefaultCableSpeedMmS;
    std::vector<BendSegment> segments;
    double curvature_gain = kDefaultCurvatureGain;  // 1/m per mm of cable travel
    double slack_threshold_mm = kDefaultSlackThresholdMm;
    double slack_amplitude_scale = kDefaultSlackScale;

    double total_duration_s() const;
    // Throws ConfigError when a release would drive the cable below zero or a
    // parameter is out of range.
    void validate() const;

    // Repeated pull / hold / release / hold cycles covering at least `duration_s`.
    static BendProfile cycles(double duration_s, double pull_s = kDefaultPullS, double hold_s = 0.0,
                              double cable_speed_mm_s = kDefaultCableSpeedMmS);
};

struct BendState {
    double curvature_invm = 0.0;
    double displacement_mm = 0.0;
};

// Piecewise-linear cable travel and the matching curvature. DomainError when
// t lies outside [0, total duration].
BendState bend_curvature(const BendProfile& profile, double t);

// Vibration multiplier from cable slack: slack_amplitude_scale with the cable
// at rest, blending linearly to 1 at the slack threshold.
double slack_factor(const BendProfile& profile, double displacement_mm);

inline constexpr int kHarmonicsModeled = 1;
inline constexpr double kDefaultNoiseSigmaNm = 0.002;

struct Scenario {
    double rpm = 0.0;
    double duration_s = 10.0;
    double sample_rate_hz = 1000.0;
    std::optional<BendProfile> bend;
    double noise_sigma_nm = kDefaultNoiseSigmaNm;
    std::array<double, 3> base_wavelength_nm{1535.3, 1535.3, 1535.3};
    std::array<double, 3> sensitivity_nm_per_invm{13.0, 13.0, 13.0};
    int fibers = 1;

    std::size_t sample_count() const;
    // Throws ConfigError on Nyquist violation or out-of-range values.
    void validate() const;
};

// Named presets: "soft-70rpm", "hard-2250rpm". Straight pose, 10 s.
Scenario preset(std::string_view name);

// Shape term + steady-state vibration + Gaussian noise per channel.
// Deterministic for a given seed.
WavelengthTrace simulate(const Scenario& scenario, const TwoDofParams& params, std::uint64_t seed);

// The same trace without noise or vibration: base wavelength plus shape term.
WavelengthTrace shape_ground_truth(const Scenario& scenario);

}  // namespace fbgvib::vib
