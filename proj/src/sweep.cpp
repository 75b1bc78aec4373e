#include "fbgvib/sweep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include "fbgvib/error.hpp"
#include "fbgvib/filtering.hpp"
#include "fbgvib/spectral.hpp"

namespace fbgvib::sweep {

namespace {

constexpr std::size_t kMinPoints = 10;
constexpr double kPi = std::numbers::pi;

void check_rpms(std::span<const double> rpms) {
    if (rpms.size() < kMinPoints) {
        throw InputError("sweep needs at least " + std::to_string(kMinPoints) + " rpm points, got " +
                         std::to_string(rpms.size()));
    }
    for (std::size_t i = 0; i < rpms.size(); ++i) {
        if (!(rpms[i] >= 0.0) || !std::isfinite(rpms[i])) throw InputError("rpm values must be finite and >= 0");
        if (i > 0 && !(rpms[i] > rpms[i - 1])) throw InputError("rpm values must be strictly increasing");
    }
}

// Runs job(i) for i in [0, n), keeping results in index order.
template <class Job>
std::vector<double> map_indices(std::size_t n, bool parallel, Job job) {
    std::vector<double> out(n);
    if (!parallel) {
        for (std::size_t i = 0; i < n; ++i) out[i] = job(i);
        return out;
    }
    const std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < n; start += workers) {
        std::vector<std::future<double>> batch;
        for (std::size_t i = start; i < std::min(n, start + workers); ++i) {
            batch.push_back(std::async(std::launch::async, job, i));
        }
        for (std::size_t k = 0; k < batch.size(); ++k) out[start + k] = batch[k].get();
    }
    return out;
}

// log-log crossing of `level` between (r0, a0) and (r1, a1).
double crossing(double r0, double a0, double r1, double a1, double level) {
    if (!(a0 > 0.0) || !(a1 > 0.0) || a0 == a1 || !(r0 > 0.0)) return r0;
    const double u = (std::log(level) - std::log(a0)) / (std::log(a1) - std::log(a0));
    return std::exp(std::log(r0) + u * (std::log(r1) - std::log(r0)));
}

// Least-squares a cos(w n) + b sin(w n) + c, w in rad/sample.
std::array<double, 3> fit_sinusoid(std::span<const double> x, double w) {
    double m[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ph = w * static_cast<double>(i);
        const double r[3] = {std::cos(ph), std::sin(ph), 1.0};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) m[a][b] += r[a] * r[b];
            m[a][3] += r[a] * x[i];
        }
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r) {
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        }
        std::swap(m[c], m[piv]);
        if (m[c][c] == 0.0) return {0.0, 0.0, 0.0};
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double k = m[r][c] / m[c][c];
            for (int j = c; j < 4; ++j) m[r][j] -= k * m[c][j];
        }
    }
    return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

// Frequency in [lo, hi] Hz that leaves the smallest least-squares residual.
double refine_frequency(std::span<const double> x, double fs, double lo, double hi) {
    auto energy = [&](double f) {
        const double w = 2.0 * kPi * f / fs;
        const auto c = fit_sinusoid(x, w);
        double sse = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double ph = w * static_cast<double>(i);
            const double r = x[i] - c[0] * std::cos(ph) - c[1] * std::sin(ph) - c[2];
            sse += r * r;
        }
        return -sse;
    };
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double e1 = energy(x1), e2 = energy(x2);
    for (int it = 0; it < 60; ++it) {
        if (e1 < e2) {
            a = x1;
            x1 = x2;
            e1 = e2;
            x2 = a + g * (b - a);
            e2 = energy(x2);
        } else {
            b = x2;
            x2 = x1;
            e2 = e1;
            x1 = b - g * (b - a);
            e1 = energy(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double steady_amplitude(std::span<const double> channel, double sample_rate_hz, double discard_fraction) {
    if (!(discard_fraction >= 0.0 && discard_fraction < 1.0)) throw DomainError("discard fraction must lie in [0, 1)");
    if (!(sample_rate_hz > 0.0)) throw DomainError("sample rate must be positive");
    const auto skip = static_cast<std::size_t>(std::floor(discard_fraction * static_cast<double>(channel.size())));
    const auto kept = channel.subspan(skip);
    if (kept.size() < 8) throw MeasurementError("too few samples to measure an amplitude");

    const auto [lo, hi] = std::minmax_element(kept.begin(), kept.end());
    if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) return 0.0;

    // Coarse pick on the detrended record: a bend ramp would otherwise leak
    // into the lowest bins and outgrow the oscillation.
    std::vector<double> detrended(kept.begin(), kept.end());
    {
        const double m = static_cast<double>(detrended.size());
        const double tc = 0.5 * (m - 1.0);
        double sy = 0.0, sty = 0.0, stt = 0.0;
        for (std::size_t i = 0; i < detrended.size(); ++i) {
            const double t = static_cast<double>(i) - tc;
            sy += detrended[i];
            sty += t * detrended[i];
            stt += t * t;
        }
        const double slope = stt > 0.0 ? sty / stt : 0.0;
        for (std::size_t i = 0; i < detrended.size(); ++i) detrended[i] -= sy / m + slope * (static_cast<double>(i) - tc);
    }
    const auto spec = spectral::magnitude_spectrum(detrended, sample_rate_hz, {spectral::Window::hann, {}, true});
    std::size_t best = 1;
    for (std::size_t k = 2; k < spec.size(); ++k) {
        if (spec.magnitude_nm[k] > spec.magnitude_nm[best]) best = k;
    }
    const double f = spec.frequency_hz[best];
    const double kept_s = static_cast<double>(kept.size()) / sample_rate_hz;
    if (f * kept_s < 3.0) {
        throw MeasurementError("record holds fewer than three periods of the " + std::to_string(f) + " Hz oscillation");
    }
    // The low-pass alone leaves an edge transient of the order of the
    // oscillation itself, so the fitted sinusoid is taken out first and only
    // the smooth remainder goes through the filter.
    const std::size_t n = kept.size();
    const double bin = spec.bin_width_hz;
    const double w_refined = 2.0 * kPi / sample_rate_hz *
                             refine_frequency(kept, sample_rate_hz, std::max(f - bin, 0.5 * f), f + bin);
    const auto fit = fit_sinusoid(kept, w_refined);
    std::vector<double> remainder(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = w_refined * static_cast<double>(i);
        remainder[i] = kept[i] - fit[0] * std::cos(ph) - fit[1] * std::sin(ph);
    }
    const auto slow = filtering::extract_shape_component(remainder, f / 8.0, sample_rate_hz);
    double rmin = kept[0] - slow[0];
    double rmax = rmin;
    for (std::size_t i = 1; i < n; ++i) {
        const double r = kept[i] - slow[i];
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    return 0.5 * (rmax - rmin);
}

std::string_view to_string(Attribution a) {
    return a == Attribution::sensor_dominant ? "sensor-dominant" : "manipulator-dominant";
}

std::vector<double> ResonanceReport::natural_frequencies_hz() const {
    std::vector<double> f;
    for (const auto& p : peaks) f.push_back(p.natural_frequency_hz);
    return f;
}

std::vector<RpmBand> ResonanceReport::avoid_bands_rpm() const {
    std::vector<RpmBand> b;
    for (const auto& p : peaks) b.push_back(p.avoid_band);
    return b;
}

bool ResonanceReport::in_avoid_band(double rpm) const {
    return std::any_of(peaks.begin(), peaks.end(), [&](const ResonancePeak& p) { return p.avoid_band.contains(rpm); });
}

std::vector<double> log_grid(double lo_rpm, double hi_rpm, std::size_t count) {
    if (!(lo_rpm > 0.0) || !(hi_rpm > lo_rpm) || count < 2) throw DomainError("log grid needs 0 < lo < hi and >= 2 points");
    std::vector<double> g(count);
    const double a = std::log(lo_rpm);
    const double step = (std::log(hi_rpm) - a) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) g[i] = std::exp(a + step * static_cast<double>(i));
    g.front() = lo_rpm;
    g.back() = hi_rpm;
    return g;
}

ResonanceReport run_sweep(std::span<const double> rpms, const vib::Scenario& scenario_template,
                          const vib::TwoDofParams& params, const SweepOptions& options) {
    check_rpms(rpms);
    params.validate();
    auto job = [&](std::size_t i) {
        vib::Scenario sc = scenario_template;
        sc.rpm = rpms[i];
        const auto trace = vib::simulate(sc, params, options.seed + i);
        return steady_amplitude(trace.channel(options.channel), trace.sample_rate_hz, options.discard_fraction);
    };
    const auto amps = map_indices(rpms.size(), options.parallel, job);
    std::vector<SweepPoint> points;
    for (std::size_t i = 0; i < rpms.size(); ++i) points.push_back({rpms[i], amps[i]});
    return analyze_points(std::move(points), params);
}

ResonanceReport run_sweep(std::span<const std::pair<double, WavelengthTrace>> traces, const vib::TwoDofParams& params,
                          const SweepOptions& options) {
    std::vector<double> rpms;
    for (const auto& t : traces) rpms.push_back(t.first);
    check_rpms(rpms);
    auto job = [&](std::size_t i) {
        const auto& tr = traces[i].second;
        return steady_amplitude(tr.channel(options.channel), tr.sample_rate_hz, options.discard_fraction);
    };
    const auto amps = map_indices(traces.size(), options.parallel, job);
    std::vector<SweepPoint> points;
    for (std::size_t i = 0; i < rpms.size(); ++i) points.push_back({rpms[i], amps[i]});
    return analyze_points(std::move(points), params);
}

ResonanceReport analyze_points(std::vector<SweepPoint> points, const vib::TwoDofParams& params) {
    ResonanceReport report;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].rpm > points[i - 1].rpm)) throw InputError("rpm values must be strictly increasing");
    }
    for (const auto& p : points) {
        if (!(p.amplitude_nm >= 0.0)) throw InputError("amplitudes must be >= 0");
    }
    report.points = std::move(points);
    const auto& pts = report.points;

    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        if (!(pts[i].amplitude_nm > pts[i - 1].amplitude_nm && pts[i].amplitude_nm > pts[i + 1].amplitude_nm)) continue;

        ResonancePeak peak;
        peak.rpm = pts[i].rpm;
        peak.amplitude_nm = pts[i].amplitude_nm;
        // Parabola through the three points in (log rpm, log amplitude).
        if (pts[i - 1].amplitude_nm > 0.0 && pts[i + 1].amplitude_nm > 0.0 && pts[i - 1].rpm > 0.0) {
            const double x0 = std::log(pts[i - 1].rpm), x1 = std::log(pts[i].rpm), x2 = std::log(pts[i + 1].rpm);
            const double y0 = std::log(pts[i - 1].amplitude_nm), y1 = std::log(pts[i].amplitude_nm),
                         y2 = std::log(pts[i + 1].amplitude_nm);
            const double d01 = (y1 - y0) / (x1 - x0);
            const double d12 = (y2 - y1) / (x2 - x1);
            const double a = (d12 - d01) / (x2 - x0);
            if (a < 0.0) {
                const double b = d01 - a * (x0 + x1);
                const double xv = std::clamp(-b / (2.0 * a), x0, x2);
                peak.rpm = std::exp(xv);
                peak.amplitude_nm = std::exp(y1 + d01 * (xv - x1) + a * (xv - x0) * (xv - x1));
            }
        }
        peak.natural_frequency_hz = peak.rpm / 60.0;

        const double level = 0.5 * peak.amplitude_nm;
        std::size_t j = i;
        while (j > 0 && pts[j - 1].amplitude_nm >= level) --j;
        peak.avoid_band.lo_rpm = j == 0 ? pts.front().rpm
                                        : crossing(pts[j - 1].rpm, pts[j - 1].amplitude_nm, pts[j].rpm, pts[j].amplitude_nm, level);
        std::size_t k = i;
        while (k + 1 < pts.size() && pts[k + 1].amplitude_nm >= level) ++k;
        peak.avoid_band.hi_rpm = k + 1 == pts.size()
                                     ? pts.back().rpm
                                     : crossing(pts[k].rpm, pts[k].amplitude_nm, pts[k + 1].rpm, pts[k + 1].amplitude_nm, level);
        peak.avoid_band.lo_rpm = std::min(peak.avoid_band.lo_rpm, peak.rpm);
        peak.avoid_band.hi_rpm = std::max(peak.avoid_band.hi_rpm, peak.rpm);

        const auto x = vib::frf_amplitude(params, peak.natural_frequency_hz);
        peak.attribution = x[1] > x[0] ? Attribution::sensor_dominant : Attribution::manipulator_dominant;
        report.peaks.push_back(peak);
    }
    return report;
}

SweepPreset preset(std::string_view name) {
    if (name != "paper") throw ConfigError("unknown sweep preset '" + std::string(name) + "'");
    SweepPreset p;
    p.rpms = log_grid(10.0, 2400.0, 40);
    p.scenario.duration_s = 30.0;
    p.scenario.noise_sigma_nm = 0.0;
    return p;
}

std::string summary(const ResonanceReport& report) {
    std::ostringstream s;
    s << std::setprecision(4);
    s << "points: " << report.points.size() << '\n';
    s << "peaks: " << report.peaks.size() << '\n';
    for (std::size_t i = 0; i < report.peaks.size(); ++i) {
        const auto& p = report.peaks[i];
        s << "peak " << i + 1 << ": " << p.rpm << " rpm (" << p.natural_frequency_hz << " Hz), amplitude "
          << p.amplitude_nm << " nm, " << to_string(p.attribution) << ", avoid " << p.avoid_band.lo_rpm << "-"
          << p.avoid_band.hi_rpm << " rpm\n";
    }
    return s.str();
}

}  // namespace fbgvib::sweep
