#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fbgvib::events {

enum class Direction { up, down };

struct StepEvent {
    std::size_t sample = 0;
    double time_s = 0.0;
    double magnitude_nm = 0.0;  // accumulator value at the alarm
    Direction direction = Direction::up;
};

struct DetectorConfig {
    double threshold_nm = 0.2;
    double drift_nm = 0.01;
    double window_s = 0.5;
};

struct EventReport {
    std::vector<StepEvent> events;
    DetectorConfig config;
};

// Two-sided CUSUM against a trailing-mean baseline (window_s long, restarted
// after every alarm). Each sample contributes its deviation from the baseline
// minus drift_nm; an event fires when either accumulator exceeds threshold_nm.
// The input is expected to be vibration-filtered already.
EventReport detect_steps(std::span<const double> channel, double sample_rate_hz,
                         const DetectorConfig& config = {}, double t0 = 0.0);

}  // namespace fbgvib::events
