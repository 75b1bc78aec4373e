#include "fbgvib/trace.hpp"

#include <cmath>
#include <string>

#include "fbgvib/error.hpp"

namespace fbgvib {

std::size_t WavelengthTrace::index_of(ChannelLabel label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return i;
    }
    throw DomainError("no channel for fiber " + std::to_string(label.fiber) + " aa " +
                      std::to_string(label.aa));
}

WavelengthTrace WavelengthTrace::fiber_subset(int fiber) const {
    WavelengthTrace out;
    out.sample_rate_hz = sample_rate_hz;
    out.t0 = t0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].fiber != fiber) continue;
        out.labels.push_back(labels[i]);
        out.channels.push_back(channels[i]);
    }
    return out;
}

void WavelengthTrace::validate() const {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw DomainError("sample rate must be positive");
    }
    if (channels.empty()) throw DomainError("trace has no channels");
    if (labels.size() != channels.size()) throw DomainError("one label per channel required");
    const std::size_t n = channels.front().size();
    if (n == 0) throw DomainError("trace has no samples");
    for (const auto& c : channels) {
        if (c.size() != n) throw DomainError("channels differ in length");
    }
}

}  // namespace fbgvib
