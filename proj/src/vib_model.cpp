#include "fbgvib/vib_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fbgvib/error.hpp"

namespace fbgvib::vib {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

// Roots of a x^2 - b x + c with b^2 > 4ac, ascending, without cancellation.
std::array<double, 2> quadratic_roots(double a, double b, double c) {
    const double disc = b * b - 4.0 * a * c;
    if (!(disc > 0.0)) throw ParameterError("eigenfrequencies are not real and distinct");
    const double q = 0.5 * (b + std::sqrt(disc));
    const double r1 = c / q;
    const double r2 = q / a;
    return {std::min(r1, r2), std::max(r1, r2)};
}

}  // namespace

void TwoDofParams::validate() const {
    if (!positive(m1) || !positive(m2)) throw ParameterError("masses must be positive");
    if (!positive(k1) || !positive(k2)) throw ParameterError("stiffnesses must be positive");
    if (!(c1 >= 0.0) || !(c2 >= 0.0) || !std::isfinite(c1) || !std::isfinite(c2)) {
        throw ParameterError("dampers must be non-negative");
    }
    if (!std::isfinite(unbalance_me) || !std::isfinite(gain1) || !std::isfinite(gain2)) {
        throw ParameterError("unbalance and gains must be finite");
    }
    natural_frequencies_hz(*this);
}

std::array<double, 2> natural_frequencies_hz(const TwoDofParams& p) {
    // det(K - lambda M) = m1 m2 l^2 - (m1 k2 + m2 (k1 + k2)) l + k1 k2
    const auto l = quadratic_roots(p.m1 * p.m2, p.m1 * p.k2 + p.m2 * (p.k1 + p.k2), p.k1 * p.k2);
    return {std::sqrt(l[0]) / kTwoPi, std::sqrt(l[1]) / kTwoPi};
}

FrfResponse frf_response(const TwoDofParams& p, double forcing_hz) {
    if (!(forcing_hz >= 0.0) || !std::isfinite(forcing_hz)) throw DomainError("forcing frequency must be >= 0");
    const double w = kTwoPi * forcing_hz;
    const double w2 = w * w;
    const std::complex<double> z11(p.k1 + p.k2 - w2 * p.m1, w * p.c1);
    const std::complex<double> z22(p.k2 - w2 * p.m2, w * p.c2);
    const std::complex<double> det = z11 * z22 - p.k2 * p.k2;
    const double scale = std::max(std::abs(z11) * std::abs(z22), p.k2 * p.k2);
    if (std::abs(det) <= 1e-12 * scale) {
        throw UndampedResonanceError("undamped resonance at " + std::to_string(forcing_hz) + " Hz");
    }
    const double f = p.unbalance_me * w2;
    return {z22 * f / det, p.k2 * f / det};
}

std::array<double, 2> frf_amplitude(const TwoDofParams& p, double forcing_hz) {
    const auto r = frf_response(p, forcing_hz);
    return {std::abs(r.x1), std::abs(r.x2)};
}

double output_amplitude_nm(const TwoDofParams& p, double forcing_hz) {
    const auto r = frf_response(p, forcing_hz);
    return std::abs(p.gain1 * r.x1 + p.gain2 * r.x2);
}

TwoDofParams calibrate_default_params(double f1_hz, double f2_hz, double mass_ratio, double damping_ratio,
                                      double peak_amplitude_nm) {
    if (!(f1_hz > 0.0) || !(f2_hz > f1_hz) || !std::isfinite(f2_hz)) {
        throw ParameterError("need 0 < f1 < f2");
    }
    if (!(mass_ratio > 0.0 && mass_ratio < 1.0)) throw ParameterError("mass ratio must lie in (0, 1)");
    if (!(damping_ratio >= 0.0 && damping_ratio < 1.0)) throw ParameterError("damping ratio must lie in [0, 1)");

    TwoDofParams p;
    p.m1 = 1.0;
    p.m2 = mass_ratio;
    const double l1 = std::pow(kTwoPi * f1_hz, 2);
    const double l2 = std::pow(kTwoPi * f2_hz, 2);
    const double s = l1 + l2;
    const double prod = l1 * l2;
    // (1 + 1/mu) k2^2 - S k2 + P mu = 0, then k1 = P mu / k2.
    const double a = 1.0 + 1.0 / mass_ratio;
    const double disc = s * s - 4.0 * a * prod * mass_ratio;
    if (disc < 0.0) throw ParameterError("no positive-stiffness solution for these targets");
    const double q = 0.5 * (s + std::sqrt(disc));
    p.k2 = std::min(prod * mass_ratio / q, q / a);
    p.k1 = prod * mass_ratio / p.k2;
    if (!positive(p.k1) || !positive(p.k2)) throw ParameterError("no positive-stiffness solution for these targets");

    const auto fn = natural_frequencies_hz(p);
    if (std::abs(fn[0] - f1_hz) > 1e-6 * f1_hz || std::abs(fn[1] - f2_hz) > 1e-6 * f2_hz) {
        throw ParameterError("stiffness solve did not reproduce the target frequencies");
    }

    p.c1 = 2.0 * damping_ratio * std::sqrt(p.k1 * p.m1);
    p.c2 = 2.0 * damping_ratio * std::sqrt(p.k2 * p.m2);
    p.gain1 = kDefaultGain1NmPerM;
    p.gain2 = kDefaultGain2NmPerM;
    p.unbalance_me = kNominalUnbalanceKgM;
    if (damping_ratio > 0.0) {
        p.unbalance_me = 1.0;
        const double unit_peak = max_output_amplitude(p).amplitude_nm;
        p.unbalance_me = peak_amplitude_nm / unit_peak;
    }
    return p;
}

TwoDofParams default_params() {
    static const TwoDofParams p =
        calibrate_default_params(kDefaultMode1Hz, kDefaultMode2Hz, kDefaultMassRatio, kDefaultDampingRatio);
    return p;
}

OutputPeak max_output_amplitude(const TwoDofParams& p, double lo_hz, double hi_hz) {
    if (!(lo_hz > 0.0) || !(hi_hz > lo_hz)) throw DomainError("need 0 < lo < hi");
    constexpr int kGrid = 4000;
    const double llo = std::log(lo_hz);
    const double step = (std::log(hi_hz) - llo) / kGrid;
    auto amp = [&](double logf) { return output_amplitude_nm(p, std::exp(logf)); };

    int best = 0;
    double best_amp = -1.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double v = amp(llo + step * i);
        if (v > best_amp) {
            best_amp = v;
            best = i;
        }
    }
    // Golden-section refinement inside the bracketing grid cells.
    double a = llo + step * std::max(best - 1, 0);
    double b = llo + step * std::min(best + 1, kGrid);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a);
    double x2 = a + g * (b - a);
    double f1 = amp(x1);
    double f2 = amp(x2);
    for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = amp(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = amp(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    const double fm = amp(xm);
    if (fm >= best_amp) return {std::exp(xm), fm};
    return {std::exp(llo + step * best), best_amp};
}

double BendProfile::total_duration_s() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration_s;
    return t;
}

void BendProfile::validate() const {
    if (!positive(cable_speed_mm_s)) throw ConfigError("cable speed must be positive");
    if (!std::isfinite(curvature_gain)) throw ConfigError("curvature gain must be finite");
    if (!(slack_threshold_mm >= 0.0) || !std::isfinite(slack_threshold_mm)) {
        throw ConfigError("slack threshold must be >= 0");
    }
    if (!(slack_amplitude_scale >= 1.0) || !std::isfinite(slack_amplitude_scale)) {
        throw ConfigError("slack amplitude scale must be >= 1");
    }
    double d = 0.0;
    for (const auto& s : segments) {
        if (!(s.duration_s >= 0.0) || !std::isfinite(s.duration_s)) throw ConfigError("segment durations must be >= 0");
        if (s.phase == BendPhase::pull) d += cable_speed_mm_s * s.duration_s;
        if (s.phase == BendPhase::release) d -= cable_speed_mm_s * s.duration_s;
        if (d < -1e-9) throw ConfigError("release drives the cable displacement below zero");
    }
}

BendProfile BendProfile::cycles(double duration_s, double pull_s, double hold_s, double cable_speed_mm_s) {
    if (!positive(duration_s) || !positive(pull_s) || !(hold_s >= 0.0)) {
        throw ConfigError("bend cycle needs positive duration and pull time");
    }
    BendProfile p;
    p.cable_speed_mm_s = cable_speed_mm_s;
    double t = 0.0;
    while (t < duration_s) {
        p.segments.push_back({BendPhase::pull, pull_s});
        if (hold_s > 0.0) p.segments.push_back({BendPhase::hold, hold_s});
        p.segments.push_back({BendPhase::release, pull_s});
        if (hold_s > 0.0) p.segments.push_back({BendPhase::hold, hold_s});
        t += 2.0 * (pull_s + hold_s);
    }
    p.validate();
    return p;
}

BendState bend_curvature(const BendProfile& profile, double t) {
    const double total = profile.total_duration_s();
    if (!(t >= 0.0) || t > total) {
        throw DomainError("t = " + std::to_string(t) + " s outside bend profile [0, " + std::to_string(total) + "]");
    }
    double start = 0.0;
    double d = 0.0;
    for (const auto& s : profile.segments) {
        const double dt = std::min(t - start, s.duration_s);
        const double sign = s.phase == BendPhase::pull ? 1.0 : s.phase == BendPhase::release ? -1.0 : 0.0;
        d += sign * profile.cable_speed_mm_s * dt;
        if (t <= start + s.duration_s) break;
        start += s.duration_s;
    }
    d = std::max(d, 0.0);
    return {profile.curvature_gain * d, d};
}

double slack_factor(const BendProfile& profile, double displacement_mm) {
    if (profile.slack_threshold_mm <= 0.0 || displacement_mm >= profile.slack_threshold_mm) return 1.0;
    const double u = std::max(displacement_mm, 0.0) / profile.slack_threshold_mm;
    return profile.slack_amplitude_scale + (1.0 - profile.slack_amplitude_scale) * u;
}

std::size_t Scenario::sample_count() const {
    return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

void Scenario::validate() const {
    if (!(rpm >= 0.0) || !std::isfinite(rpm)) throw ConfigError("rpm must be >= 0");
    if (!positive(duration_s)) throw ConfigError("duration must be positive");
    if (!positive(sample_rate_hz)) throw ConfigError("sample rate must be positive");
    const double top = rpm / 60.0 * kHarmonicsModeled;
    if (!(sample_rate_hz > 2.0 * top)) {
        throw ConfigError("sample rate " + std::to_string(sample_rate_hz) + " Hz violates Nyquist for " +
                          std::to_string(top) + " Hz forcing");
    }
    if (sample_count() == 0) throw ConfigError("duration shorter than one sample");
    if (!(noise_sigma_nm >= 0.0) || !std::isfinite(noise_sigma_nm)) throw ConfigError("noise sigma must be >= 0");
    if (fibers != 1 && fibers != 2) throw ConfigError("fibers must be 1 or 2");
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(base_wavelength_nm[i] >= 1510.0 && base_wavelength_nm[i] <= 1590.0)) {
            throw ConfigError("base wavelength outside 1510-1590 nm");
        }
        if (!std::isfinite(sensitivity_nm_per_invm[i]) || sensitivity_nm_per_invm[i] == 0.0) {
            throw ConfigError("sensitivity must be nonzero");
        }
    }
    if (bend) {
        bend->validate();
        const double last = static_cast<double>(sample_count() - 1) / sample_rate_hz;
        if (bend->total_duration_s() < last) throw ConfigError("bend profile shorter than the scenario");
    }
}

Scenario preset(std::string_view name) {
    Scenario s;
    if (name == "soft-70rpm") {
        s.rpm = 70.0;
    } else if (name == "hard-2250rpm") {
        s.rpm = 2250.0;
    } else {
        throw ConfigError("unknown scenario preset '" + std::string(name) + "'");
    }
    return s;
}

namespace {

WavelengthTrace make_trace(const Scenario& sc, const TwoDofParams* params, std::uint64_t seed) {
    sc.validate();
    if (params) params->validate();
    const std::size_t n = sc.sample_count();
    const double fs = sc.sample_rate_hz;

    std::vector<double> shape(n, 0.0);
    std::vector<double> vib(n, 0.0);
    if (sc.bend) {
        for (std::size_t i = 0; i < n; ++i) shape[i] = bend_curvature(*sc.bend, static_cast<double>(i) / fs).curvature_invm;
    }
    if (params && sc.rpm > 0.0) {
        const double f = sc.rpm / 60.0;
        const auto r = frf_response(*params, f);
        const std::complex<double> g = params->gain1 * r.x1 + params->gain2 * r.x2;
        const double amp = std::abs(g);
        const double phase = std::arg(g);
        const double w = kTwoPi * f;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            double scale = 1.0;
            if (sc.bend) scale = slack_factor(*sc.bend, bend_curvature(*sc.bend, t).displacement_mm);
            vib[i] = scale * amp * std::sin(w * t + phase);
        }
    }

    WavelengthTrace trace;
    trace.sample_rate_hz = fs;
    trace.t0 = 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int fiber = 0; fiber < sc.fibers; ++fiber) {
        for (int aa = 0; aa < 3; ++aa) {
            std::vector<double> ch(n);
            const double base = sc.base_wavelength_nm[aa];
            const double sens = sc.sensitivity_nm_per_invm[aa];
            for (std::size_t i = 0; i < n; ++i) ch[i] = base + sens * shape[i] + vib[i];
            if (params && sc.noise_sigma_nm > 0.0) {
                for (auto& v : ch) v += sc.noise_sigma_nm * noise(rng);
            }
            trace.labels.push_back({fiber, aa});
            trace.channels.push_back(std::move(ch));
        }
    }
    return trace;
}

}  // namespace

WavelengthTrace simulate(const Scenario& scenario, const TwoDofParams& params, std::uint64_t seed) {
    return make_trace(scenario, &params, seed);
}

WavelengthTrace shape_ground_truth(const Scenario& scenario) { return make_trace(scenario, nullptr, 0); }

}  // namespace fbgvib::vib
