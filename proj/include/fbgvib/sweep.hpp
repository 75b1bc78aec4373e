#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fbgvib/trace.hpp"
#include "fbgvib/vib_model.hpp"

namespace fbgvib::sweep {

inline constexpr double kDefaultDiscardFraction = 0.2;

// Half peak-to-peak of the oscillation left after dropping the leading
// `discard_fraction` of the record and subtracting the low-pass shape
// component. A flat channel reads 0. Throws MeasurementError when the kept
// part holds fewer than three periods of the dominant frequency.
double steady_amplitude(std::span<const double> channel, double sample_rate_hz,
                        double discard_fraction = kDefaultDiscardFraction);

enum class Attribution { sensor_dominant, manipulator_dominant };
std::string_view to_string(Attribution a);

struct SweepPoint {
    double rpm = 0.0;
    double amplitude_nm = 0.0;
};

struct RpmBand {
    double lo_rpm = 0.0;
    double hi_rpm = 0.0;

    bool contains(double rpm) const { return rpm >= lo_rpm && rpm <= hi_rpm; }
};

struct ResonancePeak {
    double rpm = 0.0;  // refined location
    double natural_frequency_hz = 0.0;
    double amplitude_nm = 0.0;
    RpmBand avoid_band;
    Attribution attribution = Attribution::sensor_dominant;
};

struct ResonanceReport {
    std::vector<SweepPoint> points;
    std::vector<ResonancePeak> peaks;

    std::vector<double> natural_frequencies_hz() const;
    std::vector<RpmBand> avoid_bands_rpm() const;
    bool in_avoid_band(double rpm) const;
};

struct SweepOptions {
    double discard_fraction = kDefaultDiscardFraction;
    std::uint64_t seed = 1;
    std::size_t channel = 0;
    bool parallel = true;
};

// `count` logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo_rpm, double hi_rpm, std::size_t count);

// Simulates one trace per RPM from `scenario_template`, measures the steady
// amplitude and builds the report. Throws InputError on unsorted or duplicate
// RPM values or fewer than 10 points.
ResonanceReport run_sweep(std::span<const double> rpms, const vib::Scenario& scenario_template,
                          const vib::TwoDofParams& params, const SweepOptions& options = {});

// Same analysis on already recorded traces, keyed by RPM.
ResonanceReport run_sweep(std::span<const std::pair<double, WavelengthTrace>> traces,
                          const vib::TwoDofParams& params, const SweepOptions& options = {});

// Peak detection, avoid bands and attribution on a finished amplitude curve.
ResonanceReport analyze_points(std::vector<SweepPoint> points, const vib::TwoDofParams& params);

// The reference sweep: 40-point log grid over 10-2400 rpm, straight pose,
// noise-free, 30 s per point.
struct SweepPreset {
    std::vector<double> rpms;
    vib::Scenario scenario;
};
SweepPreset preset(std::string_view name);

std::string summary(const ResonanceReport& report);

}  // namespace fbgvib::sweep
