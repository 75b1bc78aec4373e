#include "fbgvib/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>

#include "fbgvib/error.hpp"
#include "fbgvib/events.hpp"
#include "fbgvib/filtering.hpp"
#include "fbgvib/io.hpp"
#include "fbgvib/shape.hpp"
#include "fbgvib/spectral.hpp"
#include "fbgvib/sweep.hpp"
#include "fbgvib/vib_model.hpp"

namespace fbgvib {

namespace {

namespace fs = std::filesystem;

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

io::RunConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    if (!fs::exists(path)) throw UsageError("config file not found: " + path);
    return io::RunConfig::load(path);
}

// Flag value when given on the command line, else the config key, else fallback.
double pick(const CLI::Option* opt, double flag, const io::RunConfig& cfg, const std::string& key, double fallback) {
    if (opt->count() > 0) return flag;
    if (auto v = cfg.number(key)) return *v;
    return fallback;
}

std::string pick_text(const CLI::Option* opt, const std::string& flag, const io::RunConfig& cfg, const std::string& key,
                      const std::string& fallback) {
    if (opt->count() > 0) return flag;
    if (auto v = cfg.text(key)) return *v;
    return fallback;
}

fs::path require_input(const std::string& p) {
    if (p.empty()) throw UsageError("missing input file");
    if (!fs::exists(p)) throw UsageError("input not found: " + p);
    if (fs::is_regular_file(p) && fs::file_size(p) == 0) throw UsageError("input file is empty: " + p);
    return p;
}

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& writer) {
    if (path.empty()) {
        writer(out);
    } else {
        io::write_atomic(path, writer);
    }
}

vib::TwoDofParams model_params(const io::RunConfig& cfg) {
    const char* keys[] = {"mode1_hz", "mode2_hz", "mass_ratio", "damping_ratio", "peak_vibration_nm"};
    if (std::none_of(std::begin(keys), std::end(keys), [&](const char* k) { return cfg.has(k); })) {
        return vib::default_params();
    }
    try {
        return vib::calibrate_default_params(cfg.number("mode1_hz").value_or(vib::kDefaultMode1Hz),
                                             cfg.number("mode2_hz").value_or(vib::kDefaultMode2Hz),
                                             cfg.number("mass_ratio").value_or(vib::kDefaultMassRatio),
                                             cfg.number("damping_ratio").value_or(vib::kDefaultDampingRatio),
                                             cfg.number("peak_vibration_nm").value_or(vib::kDefaultPeakVibrationNm));
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
}

// Merges per-fiber traces back into one table for writing.
WavelengthTrace merge(const std::vector<WavelengthTrace>& traces) {
    WavelengthTrace all = traces.front();
    for (std::size_t i = 1; i < traces.size(); ++i) {
        if (traces[i].samples() != all.samples()) throw DomainError("fibers differ in sample count");
        all.labels.insert(all.labels.end(), traces[i].labels.begin(), traces[i].labels.end());
        all.channels.insert(all.channels.end(), traces[i].channels.begin(), traces[i].channels.end());
    }
    return all;
}

const WavelengthTrace& fiber_trace(const std::vector<WavelengthTrace>& traces, int fiber) {
    for (const auto& t : traces) {
        if (t.labels.front().fiber == fiber) return t;
    }
    throw DomainError("input has no fiber " + std::to_string(fiber));
}

std::string join(const std::vector<double>& v) {
    if (v.empty()) return "none";
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + io::format_double(v[i]);
    return s;
}

std::string maybe(const std::optional<double>& v) { return v ? io::format_double(*v) : "none"; }

// --bend value: "on" or a comma list of cable_speed=, pull_s=, hold_s=,
// curvature_gain=, slack_threshold=, slack_scale=.
vib::BendProfile bend_profile(const std::string& spec, const io::RunConfig& cfg, double duration_s) {
    double speed = cfg.number("cable_speed_mm_s").value_or(vib::kDefaultCableSpeedMmS);
    double pull = cfg.number("bend_pull_s").value_or(vib::kDefaultPullS);
    double hold = cfg.number("bend_hold_s").value_or(0.0);
    double gain = cfg.number("curvature_gain_invm_per_mm").value_or(vib::kDefaultCurvatureGain);
    double slack = cfg.number("slack_threshold_mm").value_or(vib::kDefaultSlackThresholdMm);
    double scale = cfg.number("slack_amplitude_scale").value_or(vib::kDefaultSlackScale);
    if (!spec.empty() && spec != "on") {
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw UsageError("--bend expects key=value pairs, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(item.substr(eq + 1), &used);
                if (used != item.size() - eq - 1) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw UsageError("--bend: '" + key + "' expects a number");
            }
            if (key == "cable_speed") speed = v;
            else if (key == "pull_s") pull = v;
            else if (key == "hold_s") hold = v;
            else if (key == "curvature_gain") gain = v;
            else if (key == "slack_threshold") slack = v;
            else if (key == "slack_scale") scale = v;
            else throw UsageError("--bend: unknown key '" + key + "'");
        }
    }
    auto profile = vib::BendProfile::cycles(duration_s, pull, hold, speed);
    profile.curvature_gain = gain;
    profile.slack_threshold_mm = slack;
    profile.slack_amplitude_scale = scale;
    profile.validate();
    return profile;
}

void fill_array(std::array<double, 3>& dst, const std::vector<double>& src, const std::string& key) {
    if (src.size() == 1) {
        dst.fill(src[0]);
    } else if (src.size() == 3) {
        std::copy(src.begin(), src.end(), dst.begin());
    } else {
        throw ConfigError("'" + key + "' takes one value or three");
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"FBG vibration simulator and signal-processing toolkit", "fbgvib"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 1;
    std::string input;

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic wavelength trace");
    double rpm = 0.0, duration = 10.0, rate = 1000.0, noise = vib::kDefaultNoiseSigmaNm;
    int fibers = 1;
    std::string bend, scenario_preset;
    auto* o_rpm = sim->add_option("--rpm", rpm, "Tool speed (rev/min)");
    auto* o_duration = sim->add_option("--duration", duration, "Record length (s)");
    auto* o_rate = sim->add_option("--sample-rate", rate, "Sample rate (Hz)");
    auto* o_noise = sim->add_option("--noise", noise, "Noise sigma (nm)");
    auto* o_fibers = sim->add_option("--fibers", fibers, "Number of fibers (1 or 2)");
    auto* o_bend = sim->add_option("--bend", bend, "Bend cycles: 'on' or cable_speed=..,pull_s=..,hold_s=..");
    sim->add_option("--preset", scenario_preset, "Scenario preset (soft-70rpm, hard-2250rpm)");
    auto* o_sim_seed = sim->add_option("--seed", seed, "Noise seed");
    sim->add_option("--config", config_path, "key = value configuration file");
    sim->add_option("--out", out_path, "Output trace CSV (stdout when absent)");

    // analyze
    auto* ana = app.add_subcommand("analyze", "Spectrum and spectral features of one channel");
    int fiber = 0, aa = 0;
    double hint_rpm = 0.0, cutoff = 0.05, prominence = 0.015;
    std::string window = "hann";
    ana->add_option("input", input, "Trace CSV")->required();
    ana->add_option("--fiber", fiber, "Fiber id");
    ana->add_option("--aa", aa, "Active-area index");
    auto* o_hint = ana->add_option("--rpm", hint_rpm, "Tool speed hint (rev/min)");
    auto* o_window = ana->add_option("--window", window, "hann or rectangular");
    auto* o_cutoff = ana->add_option("--cutoff", cutoff, "Shape-band cutoff (Hz)");
    auto* o_prom = ana->add_option("--prominence", prominence, "Minimum peak prominence (nm)");
    ana->add_option("--config", config_path, "key = value configuration file");
    ana->add_option("--out", out_path, "Spectrum CSV");

    // filter
    auto* fil = app.add_subcommand("filter", "Zero-phase band-stop filtering keyed to the tool speed");
    double fundamental = 0.0, bandwidth = 0.0;
    int harmonics = filtering::kDefaultNotchHarmonics;
    std::string coeff_path;
    fil->add_option("input", input, "Trace CSV")->required();
    auto* o_frpm = fil->add_option("--rpm", rpm, "Tool speed (rev/min)");
    auto* o_fund = fil->add_option("--fundamental", fundamental, "Fundamental (Hz)");
    auto* o_harm = fil->add_option("--notch-harmonics", harmonics, "Number of notched multiples");
    auto* o_bw = fil->add_option("--bandwidth", bandwidth, "Notch -3 dB width (Hz)");
    fil->add_option("--coefficients", coeff_path, "Write the section coefficients here");
    fil->add_option("--config", config_path, "key = value configuration file");
    fil->add_option("--out", out_path, "Filtered trace CSV (stdout when absent)");

    // shape
    auto* shp = app.add_subcommand("shape", "Curvature and centerline reconstruction");
    std::string calib_path, tips_path;
    long long sample = -1;
    double length = 35.0;
    shp->add_option("input", input, "Trace CSV")->required();
    auto* o_calib = shp->add_option("--calibration", calib_path, "Calibration CSV");
    shp->add_option("--fiber", fiber, "Fiber id");
    shp->add_option("--sample", sample, "Sample index for the polyline (default last)");
    shp->add_option("--length", length, "Flexible length (mm)");
    shp->add_option("--tips", tips_path, "Tip position series CSV");
    shp->add_option("--config", config_path, "key = value configuration file");
    shp->add_option("--out", out_path, "Polyline CSV (stdout when absent)");

    // detect
    auto* det = app.add_subcommand("detect", "Step detection on a filtered channel");
    double threshold = 0.2, drift = 0.01, det_window = 0.5;
    det->add_option("input", input, "Trace CSV")->required();
    det->add_option("--fiber", fiber, "Fiber id");
    det->add_option("--aa", aa, "Active-area index");
    auto* o_thr = det->add_option("--threshold", threshold, "Alarm threshold (nm)");
    auto* o_drift = det->add_option("--drift", drift, "Drift allowance (nm)");
    auto* o_dwin = det->add_option("--window", det_window, "Baseline window (s)");
    det->add_option("--config", config_path, "key = value configuration file");
    det->add_option("--out", out_path, "Events CSV (stdout when absent)");

    // sweep
    auto* swp = app.add_subcommand("sweep", "Amplitude-vs-rpm sweep and resonance report");
    std::string sweep_preset, input_dir;
    double lo = 10.0, hi = 2400.0, sweep_noise = 0.0;
    std::size_t points = 40;
    bool serial = false;
    duration = 10.0;
    swp->add_option("--preset", sweep_preset, "Sweep preset (paper)");
    auto* o_lo = swp->add_option("--lo", lo, "Lowest rpm");
    auto* o_hi = swp->add_option("--hi", hi, "Highest rpm");
    auto* o_points = swp->add_option("--points", points, "Grid points");
    auto* o_sduration = swp->add_option("--duration", duration, "Seconds per point");
    auto* o_snoise = swp->add_option("--noise", sweep_noise, "Noise sigma (nm)");
    swp->add_option("--input-dir", input_dir, "Directory of rpm_<value>.csv traces");
    auto* o_sweep_seed = swp->add_option("--seed", seed, "Noise seed");
    swp->add_flag("--serial", serial, "Run points one at a time");
    swp->add_option("--config", config_path, "key = value configuration file");
    swp->add_option("--out", out_path, "Sweep CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return kExitUsage;
    }

    try {
        const auto cfg = load_config(config_path);
        // relative output paths land under output_dir when the config names one
        if (const auto dir = cfg.text("output_dir")) {
            for (std::string* p : {&out_path, &coeff_path, &tips_path}) {
                if (!p->empty() && fs::path(*p).is_relative()) *p = (fs::path(*dir) / *p).string();
            }
        }

        if (*sim) {
            vib::Scenario sc = scenario_preset.empty() ? vib::Scenario{} : vib::preset(scenario_preset);
            sc.rpm = pick(o_rpm, rpm, cfg, "tool_rpm", sc.rpm);
            sc.duration_s = pick(o_duration, duration, cfg, "duration_s", sc.duration_s);
            sc.sample_rate_hz = pick(o_rate, rate, cfg, "sample_rate_hz", sc.sample_rate_hz);
            sc.noise_sigma_nm = pick(o_noise, noise, cfg, "noise_sigma_nm", sc.noise_sigma_nm);
            sc.fibers = static_cast<int>(pick(o_fibers, fibers, cfg, "fibers", sc.fibers));
            if (auto v = cfg.numbers("base_wavelength_nm")) fill_array(sc.base_wavelength_nm, *v, "base_wavelength_nm");
            if (auto v = cfg.numbers("sensitivity_nm_per_invm")) {
                fill_array(sc.sensitivity_nm_per_invm, *v, "sensitivity_nm_per_invm");
            }
            if (o_bend->count() > 0 || cfg.flag("bend_enabled").value_or(false)) {
                sc.bend = bend_profile(bend, cfg, sc.duration_s);
            }
            const auto s = o_sim_seed->count() ? seed : static_cast<std::uint64_t>(cfg.number("seed").value_or(1.0));
            const auto params = model_params(cfg);
            const auto trace = vib::simulate(sc, params, s);
            emit(out_path, out, [&](std::ostream& o) { io::write_trace_csv(o, trace); });
            return kExitOk;
        }

        if (*ana) {
            const auto traces = io::parse_trace_csv(require_input(input));
            const auto& tr = fiber_trace(traces, fiber);
            const auto ch = tr.channel(tr.index_of({fiber, aa}));
            spectral::MagnitudeOptions mo;
            mo.window = spectral::window_from_string(pick_text(o_window, window, cfg, "window", "hann"));
            mo.remove_mean = true;
            const auto spec = spectral::magnitude_spectrum(ch, tr.sample_rate_hz, mo);
            spectral::FeatureOptions fo;
            fo.shape_band_cutoff_hz = pick(o_cutoff, cutoff, cfg, "shape_cutoff_hz", fo.shape_band_cutoff_hz);
            fo.min_prominence_nm = pick(o_prom, prominence, cfg, "min_prominence_nm", fo.min_prominence_nm);
            std::optional<double> hint;
            if (o_hint->count() > 0) hint = hint_rpm;
            else if (auto v = cfg.number("tool_rpm")) hint = *v;
            const auto feats = spectral::identify_features(spec, hint, fo);
            if (!out_path.empty()) io::write_atomic(out_path, [&](std::ostream& o) { io::write_spectrum_csv(o, spec); });
            out << "samples: " << ch.size() << '\n'
                << "sample_rate_hz: " << io::format_double(tr.sample_rate_hz) << '\n'
                << "nyquist_hz: " << io::format_double(spec.frequency_hz.back()) << '\n'
                << "base_frequency_hz: " << maybe(feats.base_frequency_hz()) << '\n'
                << "fundamental_hz: " << maybe(feats.fundamental_hz()) << '\n'
                << "harmonics_hz: " << join(feats.harmonics_hz()) << '\n'
                << "peaks: " << feats.peaks.size() << '\n';
            return kExitOk;
        }

        if (*fil) {
            const auto traces = io::parse_trace_csv(require_input(input));
            const double fs_hz = traces.front().sample_rate_hz;
            double f0 = 0.0;
            if (o_fund->count() > 0) {
                f0 = fundamental;
            } else if (o_frpm->count() > 0) {
                f0 = rpm / 60.0;
            } else if (auto v = cfg.number("fundamental_hz")) {
                f0 = *v;
            } else if (auto r = cfg.number("tool_rpm")) {
                f0 = *r / 60.0;
            } else {
                const auto spec = spectral::magnitude_spectrum(traces.front().channel(0), fs_hz,
                                                               {spectral::Window::hann, {}, true});
                const auto feats = spectral::identify_features(spec);
                if (!feats.fundamental) throw Error("no vibration fundamental found; pass --rpm or --fundamental");
                f0 = feats.fundamental->frequency_hz;
            }
            if (!(f0 > 0.0)) throw UsageError("fundamental must be positive");
            const int n = static_cast<int>(pick(o_harm, harmonics, cfg, "notch_harmonics", harmonics));
            if (n < 1) throw UsageError("--notch-harmonics must be >= 1");
            const double bw = pick(o_bw, bandwidth, cfg, "notch_bandwidth_hz", filtering::default_notch_bandwidth_hz(f0));
            const auto spec = filtering::design_bandstop(f0, n, bw, fs_hz);
            auto all = merge(traces);
            for (auto& c : all.channels) c = filtering::apply_zero_phase(spec, c);
            if (!coeff_path.empty()) {
                io::write_atomic(coeff_path, [&](std::ostream& o) { filtering::write_coefficients(o, spec); });
            }
            emit(out_path, out, [&](std::ostream& o) { io::write_trace_csv(o, all); });
            return kExitOk;
        }

        if (*shp) {
            const auto traces = io::parse_trace_csv(require_input(input));
            const auto& tr = fiber_trace(traces, fiber);
            shape::CalibrationModel calib;
            const std::string cpath = pick_text(o_calib, calib_path, cfg, "calibration_file", "");
            if (!cpath.empty()) calib = io::parse_calibration_csv(require_input(cpath));
            calib.validate();
            if (tr.channels.size() != calib.areas.size()) {
                throw DomainError("fiber " + std::to_string(fiber) + " has " + std::to_string(tr.channels.size()) +
                                  " channels, calibration has " + std::to_string(calib.areas.size()));
            }
            shape::CmGeometry geom;
            geom.length_mm = length;
            geom.aa_positions_mm = {0.25 * length, 0.5 * length, 0.75 * length};
            if (!(length > 0.0)) throw UsageError("--length must be positive");

            auto estimate_at = [&](std::size_t n) {
                std::vector<double> w(tr.channels.size());
                for (std::size_t c = 0; c < w.size(); ++c) w[c] = tr.channels[c][n];
                return shape::reconstruct(shape::wavelength_to_curvature(w, calib), geom);
            };
            if (sample >= static_cast<long long>(tr.samples())) throw UsageError("--sample beyond the end of the trace");
            const std::size_t at = sample < 0 ? tr.samples() - 1 : static_cast<std::size_t>(sample);
            const auto est = estimate_at(at);
            if (!tips_path.empty()) {
                io::write_atomic(tips_path, [&](std::ostream& o) {
                    o << "time_s,x_mm,z_mm\n";
                    for (std::size_t n = 0; n < tr.samples(); ++n) {
                        const auto e = estimate_at(n);
                        o << io::format_double(tr.time_at(n)) << ',' << io::format_double(e.tip.x_mm) << ','
                          << io::format_double(e.tip.z_mm) << '\n';
                    }
                });
            }
            emit(out_path, out, [&](std::ostream& o) { io::write_polyline_csv(o, est); });
            if (!out_path.empty()) {
                out << "tip_x_mm: " << io::format_double(est.tip.x_mm) << '\n'
                    << "tip_z_mm: " << io::format_double(est.tip.z_mm) << '\n';
            }
            return kExitOk;
        }

        if (*det) {
            const auto traces = io::parse_trace_csv(require_input(input));
            const auto& tr = fiber_trace(traces, fiber);
            events::DetectorConfig dc;
            dc.threshold_nm = pick(o_thr, threshold, cfg, "detect_threshold_nm", dc.threshold_nm);
            dc.drift_nm = pick(o_drift, drift, cfg, "detect_drift_nm", dc.drift_nm);
            dc.window_s = pick(o_dwin, det_window, cfg, "detect_window_s", dc.window_s);
            const auto report = events::detect_steps(tr.channel(tr.index_of({fiber, aa})), tr.sample_rate_hz, dc, tr.t0);
            emit(out_path, out, [&](std::ostream& o) { io::write_events_csv(o, report); });
            if (!out_path.empty()) out << "events: " << report.events.size() << '\n';
            return kExitOk;
        }

        if (*swp) {
            sweep::SweepOptions so;
            so.parallel = !serial;
            so.seed = o_sweep_seed->count() ? seed : static_cast<std::uint64_t>(cfg.number("seed").value_or(1.0));
            so.discard_fraction = cfg.number("sweep_discard_fraction").value_or(so.discard_fraction);
            const auto params = model_params(cfg);
            sweep::ResonanceReport report;
            if (!input_dir.empty()) {
                if (!fs::is_directory(input_dir)) throw UsageError("input directory not found: " + input_dir);
                const auto traces = io::load_sweep_directory(input_dir);
                report = sweep::run_sweep(std::span<const std::pair<double, WavelengthTrace>>(traces), params, so);
            } else {
                auto p = sweep::preset(sweep_preset.empty() ? "paper" : sweep_preset);
                const double l = pick(o_lo, lo, cfg, "sweep_lo_rpm", 10.0);
                const double h = pick(o_hi, hi, cfg, "sweep_hi_rpm", 2400.0);
                const auto count = static_cast<std::size_t>(pick(o_points, static_cast<double>(points), cfg, "sweep_points", 40.0));
                if (!(l > 0.0) || !(h > l) || count < 2) throw UsageError("sweep grid needs 0 < lo < hi and >= 2 points");
                p.rpms = sweep::log_grid(l, h, count);
                p.scenario.duration_s = pick(o_sduration, duration, cfg, "duration_s", p.scenario.duration_s);
                p.scenario.noise_sigma_nm = pick(o_snoise, sweep_noise, cfg, "noise_sigma_nm", p.scenario.noise_sigma_nm);
                if (auto v = cfg.number("sample_rate_hz")) p.scenario.sample_rate_hz = *v;
                report = sweep::run_sweep(p.rpms, p.scenario, params, so);
            }
            if (!out_path.empty()) io::write_atomic(out_path, [&](std::ostream& o) { io::write_sweep_csv(o, report); });
            out << sweep::summary(report);
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace fbgvib
