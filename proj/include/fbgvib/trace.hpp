#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fbgvib {

// Interrogator channel: one active area on one fiber.
struct ChannelLabel {
    int fiber = 0;
    int aa = 0;

    friend bool operator==(const ChannelLabel&, const ChannelLabel&) = default;
};

// Uniformly sampled Bragg wavelengths, one column per active area.
// Sample n is taken at t0 + n / sample_rate_hz.
struct WavelengthTrace {
    double sample_rate_hz = 1000.0;
    double t0 = 0.0;
    std::vector<ChannelLabel> labels;
    std::vector<std::vector<double>> channels;  // nm

    std::size_t samples() const { return channels.empty() ? 0 : channels.front().size(); }
    double time_at(std::size_t n) const { return t0 + static_cast<double>(n) / sample_rate_hz; }
    double duration_s() const { return static_cast<double>(samples()) / sample_rate_hz; }

    std::span<const double> channel(std::size_t i) const { return channels.at(i); }

    // Index of the channel carrying `label`; throws DomainError when absent.
    std::size_t index_of(ChannelLabel label) const;

    // Channels belonging to one fiber, in active-area order.
    WavelengthTrace fiber_subset(int fiber) const;

    // Throws DomainError when the invariants (equal lengths, >= 1 sample,
    // positive rate, one label per channel) do not hold.
    void validate() const;
};

}  // namespace fbgvib
