#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fbgvib/events.hpp"
#include "fbgvib/shape.hpp"
#include "fbgvib/spectral.hpp"
#include "fbgvib/sweep.hpp"
#include "fbgvib/trace.hpp"

namespace fbgvib::io {

inline constexpr const char* kTraceHeader = "time_s,fiber,aa,wavelength_nm";

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Writes through a temporary sibling file and renames it into place, so a
// failed write never leaves a partial output behind.
void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

void write_trace_csv(std::ostream& out, const WavelengthTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const WavelengthTrace& trace);

// One trace per fiber, ascending fiber id. The sample rate comes from the
// median time step, snapped to a micro-hertz grid; a single-instant file gets
// 1 kHz. Throws ParseError naming the offending line.
std::vector<WavelengthTrace> parse_trace_csv(std::istream& in);
std::vector<WavelengthTrace> parse_trace_csv(const std::filesystem::path& path);

void write_spectrum_csv(std::ostream& out, const spectral::MagnitudeSpectrum& spectrum);
void write_events_csv(std::ostream& out, const events::EventReport& report);
void write_sweep_csv(std::ostream& out, const sweep::ResonanceReport& report);
void write_polyline_csv(std::ostream& out, const shape::ShapeEstimate& estimate);

void write_calibration_csv(std::ostream& out, const shape::CalibrationModel& calib);
shape::CalibrationModel parse_calibration_csv(std::istream& in);
shape::CalibrationModel parse_calibration_csv(const std::filesystem::path& path);

// Directory of rpm_<value>.csv traces, sorted by RPM.
std::vector<std::pair<double, WavelengthTrace>> load_sweep_directory(const std::filesystem::path& dir);

// key = value lines, '#' comments. Keys outside the known set are rejected.
class RunConfig {
public:
    static RunConfig parse(std::istream& in);
    static RunConfig load(const std::filesystem::path& path);

    static const std::vector<std::string>& known_keys();

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<double> number(const std::string& key) const;
    std::optional<std::string> text(const std::string& key) const;
    std::optional<bool> flag(const std::string& key) const;
    std::optional<std::vector<double>> numbers(const std::string& key) const;

    void set(const std::string& key, const std::string& value);

private:
    std::map<std::string, std::pair<std::string, std::size_t>> values_;  // value, line
};

}  // namespace fbgvib::io
