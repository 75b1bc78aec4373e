#include "fbgvib/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "fbgvib/error.hpp"

namespace fbgvib::io {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    return in;
}

void expect_header(std::istream& in, std::string_view header, std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    line_no = 1;
    if (trim(line) != header) throw ParseError(1, "expected header '" + std::string(header) + "'");
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("number formatting failed");
    return std::string(buf, ptr);
}

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        try {
            writer(out);
            out.flush();
        } catch (...) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw;
        }
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("write to " + path.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move output into place at " + path.string());
    }
}

void write_trace_csv(std::ostream& out, const WavelengthTrace& trace) {
    trace.validate();
    out << kTraceHeader << '\n';
    for (std::size_t n = 0; n < trace.samples(); ++n) {
        const std::string t = format_double(trace.time_at(n));
        for (std::size_t c = 0; c < trace.channels.size(); ++c) {
            out << t << ',' << trace.labels[c].fiber << ',' << trace.labels[c].aa << ','
                << format_double(trace.channels[c][n]) << '\n';
        }
    }
}

void write_trace_csv(const fs::path& path, const WavelengthTrace& trace) {
    trace.validate();
    write_atomic(path, [&](std::ostream& out) { write_trace_csv(out, trace); });
}

std::vector<WavelengthTrace> parse_trace_csv(std::istream& in) {
    std::size_t line_no = 0;
    expect_header(in, kTraceHeader, line_no);

    struct Instant {
        double time;
        std::size_t line;
        std::set<std::pair<int, int>> seen;
    };
    std::vector<Instant> instants;
    std::map<std::pair<int, int>, std::vector<double>> values;

    auto check_complete = [&](const Instant& inst) {
        if (inst.seen.size() != values.size()) {
            throw ParseError(inst.line, "sample instant at t = " + format_double(inst.time) + " is missing channels");
        }
    };

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto f = split(body, ',');
        if (f.size() != 4) throw ParseError(line_no, "expected 4 fields");
        double t = 0.0, w = 0.0;
        int fiber = 0, aa = 0;
        if (!parse_number(f[0], t) || !std::isfinite(t)) throw ParseError(line_no, "bad time_s");
        if (!parse_number(f[1], fiber) || (fiber != 0 && fiber != 1)) throw ParseError(line_no, "fiber must be 0 or 1");
        if (!parse_number(f[2], aa) || aa < 0 || aa > 2) throw ParseError(line_no, "aa must be 0, 1 or 2");
        if (!parse_number(f[3], w) || !(w >= 1510.0 && w <= 1590.0)) {
            throw ParseError(line_no, "wavelength_nm outside 1510-1590");
        }
        const std::pair<int, int> key{fiber, aa};

        if (instants.empty() || t > instants.back().time) {
            // The first instant defines the channel set.
            if (!instants.empty()) check_complete(instants.back());
            instants.push_back({t, line_no, {}});
        } else if (t < instants.back().time) {
            throw ParseError(line_no, "time_s decreases");
        }
        auto& inst = instants.back();
        if (!inst.seen.insert(key).second) throw ParseError(line_no, "duplicate channel within one sample instant");
        if (instants.size() > 1 && values.count(key) == 0) throw ParseError(line_no, "channel absent from the first instant");
        values[key].push_back(w);
    }
    if (instants.empty()) throw ParseError(line_no + 1, "no samples");
    check_complete(instants.back());

    double fs_hz = 1000.0;
    if (instants.size() > 1) {
        std::vector<double> dt;
        for (std::size_t i = 1; i < instants.size(); ++i) dt.push_back(instants[i].time - instants[i - 1].time);
        std::vector<double> sorted = dt;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
        const double med = sorted[sorted.size() / 2];
        fs_hz = std::round(1e6 / med) / 1e6;
        if (!(fs_hz > 0.0)) throw ParseError(instants[1].line, "cannot infer a sample rate");
        const double step = 1.0 / fs_hz;
        for (std::size_t i = 0; i < dt.size(); ++i) {
            if (std::abs(dt[i] - step) > 1e-6 * step) {
                throw ParseError(instants[i + 1].line, "sample interval deviates from 1/" + format_double(fs_hz) +
                                                           " s by more than 1 ppm");
            }
        }
    }

    std::vector<WavelengthTrace> traces;
    for (auto& [key, v] : values) {
        if (traces.empty() || traces.back().labels.front().fiber != key.first) {
            WavelengthTrace t;
            t.sample_rate_hz = fs_hz;
            t.t0 = instants.front().time;
            traces.push_back(std::move(t));
        }
        traces.back().labels.push_back({key.first, key.second});
        traces.back().channels.push_back(std::move(v));
    }
    return traces;
}

std::vector<WavelengthTrace> parse_trace_csv(const fs::path& path) {
    auto in = open_input(path);
    return parse_trace_csv(in);
}

void write_spectrum_csv(std::ostream& out, const spectral::MagnitudeSpectrum& spectrum) {
    out << "frequency_hz,magnitude_nm\n";
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        out << format_double(spectrum.frequency_hz[k]) << ',' << format_double(spectrum.magnitude_nm[k]) << '\n';
    }
}

void write_events_csv(std::ostream& out, const events::EventReport& report) {
    out << "time_s,magnitude_nm,direction\n";
    for (const auto& e : report.events) {
        out << format_double(e.time_s) << ',' << format_double(e.magnitude_nm) << ','
            << (e.direction == events::Direction::up ? "up" : "down") << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const sweep::ResonanceReport& report) {
    out << "rpm,amplitude_nm\n";
    for (const auto& p : report.points) out << format_double(p.rpm) << ',' << format_double(p.amplitude_nm) << '\n';
}

void write_polyline_csv(std::ostream& out, const shape::ShapeEstimate& estimate) {
    out << "s_mm,x_mm,z_mm\n";
    for (const auto& c : estimate.centerline) {
        out << format_double(c.s_mm) << ',' << format_double(c.p.x_mm) << ',' << format_double(c.p.z_mm) << '\n';
    }
}

void write_calibration_csv(std::ostream& out, const shape::CalibrationModel& calib) {
    out << "aa_index,base_wavelength_nm,sensitivity_nm_per_invm\n";
    for (std::size_t i = 0; i < calib.areas.size(); ++i) {
        out << i << ',' << format_double(calib.areas[i].base_wavelength_nm) << ','
            << format_double(calib.areas[i].sensitivity_nm_per_invm) << '\n';
    }
}

shape::CalibrationModel parse_calibration_csv(std::istream& in) {
    std::size_t line_no = 0;
    expect_header(in, "aa_index,base_wavelength_nm,sensitivity_nm_per_invm", line_no);
    std::map<int, shape::CalibrationModel::Area> rows;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto f = split(body, ',');
        if (f.size() != 3) throw ParseError(line_no, "expected 3 fields");
        int aa = 0;
        shape::CalibrationModel::Area a;
        if (!parse_number(f[0], aa) || aa < 0) throw ParseError(line_no, "bad aa_index");
        if (!parse_number(f[1], a.base_wavelength_nm) ||
            !(a.base_wavelength_nm >= shape::kBandMinNm && a.base_wavelength_nm <= shape::kBandMaxNm)) {
            throw ParseError(line_no, "base_wavelength_nm outside 1510-1590");
        }
        if (!parse_number(f[2], a.sensitivity_nm_per_invm) || a.sensitivity_nm_per_invm == 0.0 ||
            !std::isfinite(a.sensitivity_nm_per_invm)) {
            throw ParseError(line_no, "sensitivity must be a nonzero number");
        }
        if (!rows.emplace(aa, a).second) throw ParseError(line_no, "duplicate aa_index");
    }
    if (rows.empty()) throw ParseError(line_no + 1, "no calibration rows");
    shape::CalibrationModel model;
    model.areas.clear();
    int expect = 0;
    for (const auto& [aa, a] : rows) {
        if (aa != expect++) throw ParseError(line_no, "aa_index values must run 0..n-1");
        model.areas.push_back(a);
    }
    return model;
}

shape::CalibrationModel parse_calibration_csv(const fs::path& path) {
    auto in = open_input(path);
    return parse_calibration_csv(in);
}

std::vector<std::pair<double, WavelengthTrace>> load_sweep_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError(dir.string() + " is not a directory");
    std::vector<std::pair<double, WavelengthTrace>> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() <= 8 || name.rfind("rpm_", 0) != 0 || entry.path().extension() != ".csv") continue;
        const std::string_view value(name.data() + 4, name.size() - 8);
        double rpm = 0.0;
        if (!parse_number(value, rpm)) throw InputError("cannot read rpm from file name " + name);
        auto traces = parse_trace_csv(entry.path());
        out.emplace_back(rpm, std::move(traces.front()));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys{
        "tool_rpm",          "duration_s",         "sample_rate_hz",          "noise_sigma_nm",
        "seed",              "fibers",             "bend_enabled",            "cable_speed_mm_s",
        "bend_pull_s",       "bend_hold_s",        "curvature_gain_invm_per_mm", "slack_threshold_mm",
        "slack_amplitude_scale", "base_wavelength_nm", "sensitivity_nm_per_invm", "mode1_hz",
        "mode2_hz",          "mass_ratio",         "damping_ratio",           "peak_vibration_nm",
        "window",            "shape_cutoff_hz",    "min_prominence_nm",       "fundamental_hz",
        "notch_harmonics",   "notch_bandwidth_hz", "detect_threshold_nm",     "detect_drift_nm",
        "detect_window_s",   "calibration_file",   "output_dir",              "sweep_lo_rpm",
        "sweep_hi_rpm",      "sweep_points",       "sweep_discard_fraction",
    };
    return keys;
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        const auto& known = known_keys();
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        if (value.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value for '" + key + "'");
        if (!cfg.values_.emplace(key, std::make_pair(value, line_no)).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse(in);
}

std::optional<double> RunConfig::number(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    double v = 0.0;
    if (!parse_number(std::string_view(it->second.first), v) || !std::isfinite(v)) {
        throw ConfigError("line " + std::to_string(it->second.second) + ": '" + key + "' expects a number");
    }
    return v;
}

std::optional<std::string> RunConfig::text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second.first;
}

std::optional<bool> RunConfig::flag(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    const auto& v = it->second.first;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("line " + std::to_string(it->second.second) + ": '" + key + "' expects true or false");
}

std::optional<std::vector<double>> RunConfig::numbers(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::vector<double> out;
    for (auto part : split(it->second.first, ',')) {
        double v = 0.0;
        if (!parse_number(part, v) || !std::isfinite(v)) {
            throw ConfigError("line " + std::to_string(it->second.second) + ": '" + key + "' expects numbers");
        }
        out.push_back(v);
    }
    return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& known = known_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown key '" + key + "'");
    values_[key] = {value, 0};
}

}  // namespace fbgvib::io
