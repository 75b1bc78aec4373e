#include "fbgvib/events.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "fbgvib/error.hpp"

namespace fbgvib::events {

namespace {

// Trailing mean over the last `window` samples since the last restart. Values
// are held relative to the first sample after a restart so the running sum
// stays small next to the ~1.5e3 nm absolute level.
class Baseline {
public:
    explicit Baseline(std::size_t window) : window_(window) {}

    void restart(double v) {
        buf_.clear();
        sum_ = 0.0;
        ref_ = v;
        push(v);
    }
    void push(double v) {
        buf_.push_back(v - ref_);
        sum_ += v - ref_;
        if (buf_.size() > window_) {
            sum_ -= buf_.front();
            buf_.pop_front();
        }
    }
    double mean() const { return ref_ + sum_ / static_cast<double>(buf_.size()); }

private:
    std::size_t window_;
    std::deque<double> buf_;
    double sum_ = 0.0;
    double ref_ = 0.0;
};

}  // namespace

EventReport detect_steps(std::span<const double> channel, double sample_rate_hz, const DetectorConfig& config,
                         double t0) {
    if (!(config.drift_nm > 0.0) || !(config.threshold_nm > config.drift_nm)) {
        throw ConfigError("detector needs threshold > drift > 0");
    }
    if (!(config.window_s > 0.0) || !(sample_rate_hz > 0.0)) throw ConfigError("window and sample rate must be positive");

    EventReport report;
    report.config = config;
    if (channel.empty()) return report;

    const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.window_s * sample_rate_hz)));
    Baseline base(window);
    base.restart(channel[0]);
    double up = 0.0;
    double down = 0.0;
    for (std::size_t n = 1; n < channel.size(); ++n) {
        const double x = channel[n];
        const double d = x - base.mean();
        up = std::max(0.0, up + d - config.drift_nm);
        down = std::max(0.0, down - d - config.drift_nm);
        if (up > config.threshold_nm || down > config.threshold_nm) {
            const bool rising = up >= down;
            report.events.push_back({n, t0 + static_cast<double>(n) / sample_rate_hz, rising ? up : down,
                                     rising ? Direction::up : Direction::down});
            up = down = 0.0;
            base.restart(x);
            continue;
        }
        base.push(x);
    }
    return report;
}

}  // namespace fbgvib::events
