#include "fbgvib/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fbgvib/error.hpp"
#include "fbgvib/io.hpp"

namespace fbgvib::filtering {

namespace {

constexpr double kPi = std::numbers::pi;

// Direct form II transposed, state carried across calls.
struct SectionState {
    double z1 = 0.0;
    double z2 = 0.0;

    double step(const Biquad& s, double x) {
        const double y = s.b[0] * x + z1;
        z1 = s.b[1] * x - s.a[0] * y + z2;
        z2 = s.b[2] * x - s.a[1] * y;
        return y;
    }

    // State the section would settle into under a constant input u.
    static SectionState steady(const Biquad& s, double u) {
        const double g = s.dc_gain();
        SectionState st;
        st.z2 = (s.b[2] - s.a[1] * g) * u;
        st.z1 = (s.b[1] - s.a[0] * g) * u + st.z2;
        return st;
    }
};

void run_cascade(const std::vector<Biquad>& sections, std::vector<double>& x, bool steady_start) {
    if (x.empty()) return;
    double u = x.front();
    for (const auto& s : sections) {
        SectionState st = steady_start ? SectionState::steady(s, u) : SectionState{};
        u *= s.dc_gain();
        for (double& v : x) v = st.step(s, v);
    }
}

}  // namespace

std::complex<double> Biquad::response(double freq_hz, double sample_rate_hz) const {
    const double w = 2.0 * kPi * freq_hz / sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    return (b[0] + b[1] * z1 + b[2] * z2) / (1.0 + a[0] * z1 + a[1] * z2);
}

std::array<double, 2> Biquad::pole_radii() const {
    // Roots of z^2 + a1 z + a2.
    const double disc = a[0] * a[0] - 4.0 * a[1];
    if (disc < 0.0) {
        const double r = std::sqrt(a[1]);
        return {r, r};
    }
    const double sq = std::sqrt(disc);
    return {std::abs((-a[0] + sq) / 2.0), std::abs((-a[0] - sq) / 2.0)};
}

bool Biquad::stable() const {
    const auto r = pole_radii();
    return r[0] < 1.0 && r[1] < 1.0;
}

FilterSpec::FilterSpec(std::vector<Biquad> sections, double sample_rate_hz, std::vector<NotchBand> notches,
                       std::string description)
    : sections_(std::move(sections)),
      sample_rate_hz_(sample_rate_hz),
      notches_(std::move(notches)),
      description_(std::move(description)) {
    if (!(sample_rate_hz_ > 0.0)) throw DesignError("sample rate must be positive");
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        if (!sections_[i].stable()) {
            throw DesignError("section " + std::to_string(i) + " has a pole on or outside the unit circle");
        }
    }
}

std::complex<double> FilterSpec::response(double freq_hz) const {
    std::complex<double> h = 1.0;
    for (const auto& s : sections_) h *= s.response(freq_hz, sample_rate_hz_);
    return h;
}

double FilterSpec::magnitude_db(double freq_hz) const {
    return 20.0 * std::log10(std::max(std::abs(response(freq_hz)), 1e-300));
}

double FilterSpec::time_constant_samples() const {
    double r = 0.0;
    for (const auto& s : sections_) {
        const auto radii = s.pole_radii();
        r = std::max({r, radii[0], radii[1]});
    }
    return 1.0 / (1.0 - r);
}

double default_notch_bandwidth_hz(double fundamental_hz) { return std::max(0.25 * fundamental_hz, 0.2); }

FilterSpec design_bandstop(double fundamental_hz, int n_harmonics, double bandwidth_hz, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0)) throw DesignError("sample rate must be positive");
    if (!(fundamental_hz > 0.0)) throw DesignError("fundamental must be positive");
    if (n_harmonics < 1) throw DesignError("at least one notch required");
    if (!(bandwidth_hz > 0.0)) throw DesignError("bandwidth must be positive");
    const double nyquist = sample_rate_hz / 2.0;
    if (fundamental_hz * n_harmonics >= nyquist) {
        std::ostringstream msg;
        msg << "notch at " << fundamental_hz * n_harmonics << " Hz is at or above Nyquist (" << nyquist << " Hz)";
        throw DesignError(msg.str());
    }
    const double dw = 2.0 * kPi * bandwidth_hz / sample_rate_hz;
    if (dw >= kPi) throw DesignError("bandwidth wider than the Nyquist band");

    std::vector<Biquad> sections;
    std::vector<NotchBand> notches;
    std::ostringstream desc;
    for (int m = 1; m <= n_harmonics; ++m) {
        const double center = m * fundamental_hz;
        const double w0 = 2.0 * kPi * center / sample_rate_hz;
        // Zeros on the unit circle at w0; pole radius sqrt((1-beta)/(1+beta)) sets the -3 dB width.
        const double beta = std::tan(dw / 2.0);
        const double gain = 1.0 / (1.0 + beta);
        Biquad s;
        s.b = {gain, -2.0 * gain * std::cos(w0), gain};
        s.a = {-2.0 * gain * std::cos(w0), 2.0 * gain - 1.0};
        sections.push_back(s);
        notches.push_back({center, bandwidth_hz});
        desc << (m > 1 ? " " : "") << center << "Hz/" << bandwidth_hz << "Hz";
    }
    return FilterSpec(std::move(sections), sample_rate_hz, std::move(notches), "notch " + desc.str());
}

FilterSpec design_lowpass(double cutoff_hz, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0)) throw DesignError("sample rate must be positive");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0)) {
        throw DesignError("low-pass cutoff must lie in (0, fs/2)");
    }
    const double k = std::tan(kPi * cutoff_hz / sample_rate_hz);
    const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
    Biquad s;
    s.a = {2.0 * (k * k - 1.0) * norm, (1.0 - std::numbers::sqrt2 * k + k * k) * norm};
    // numerator taken from the denominator sum so DC passes at exactly unity;
    // k^2 * norm alone loses digits to cancellation at low cutoffs
    const double dc = 1.0 + s.a[0] + s.a[1];
    s.b = {0.25 * dc, 0.5 * dc, 0.25 * dc};
    std::ostringstream desc;
    desc << "lowpass " << cutoff_hz << "Hz";
    return FilterSpec({s}, sample_rate_hz, {}, desc.str());
}

std::vector<double> apply(const FilterSpec& spec, std::span<const double> samples) {
    std::vector<double> x(samples.begin(), samples.end());
    run_cascade(spec.sections(), x, false);
    return x;
}

std::vector<double> apply_zero_phase(const FilterSpec& spec, std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (spec.sections().empty()) return {samples.begin(), samples.end()};
    if (n <= 6 * spec.sections().size()) {
        throw DomainError("zero-phase filtering needs more than 6 samples per section");
    }
    const double tau = spec.time_constant_samples();
    const auto want = static_cast<std::size_t>(std::ceil(3.0 * tau));
    const std::size_t pad = std::min(want, n - 1);

    // Work on deviations from the first sample: with poles near z = 1 the
    // rounding on a ~1500 nm level would otherwise be amplified by ~tau^2.
    // The level comes back through the squared DC gain.
    const double level = samples.front();
    std::vector<double> x;
    x.reserve(n + 2 * pad);
    const double last = samples.back() - level;
    for (std::size_t i = pad; i >= 1; --i) x.push_back(level - samples[i]);
    for (double v : samples) x.push_back(v - level);
    for (std::size_t i = 1; i <= pad; ++i) x.push_back(2.0 * last - (samples[n - 1 - i] - level));

    run_cascade(spec.sections(), x, true);
    std::reverse(x.begin(), x.end());
    run_cascade(spec.sections(), x, true);
    std::reverse(x.begin(), x.end());

    double g = 1.0;
    for (const auto& s : spec.sections()) g *= s.dc_gain();
    const double back = level * g * g;
    std::vector<double> y(x.begin() + static_cast<std::ptrdiff_t>(pad), x.begin() + static_cast<std::ptrdiff_t>(pad + n));
    for (double& v : y) v += back;
    return y;
}

std::vector<double> extract_shape_component(std::span<const double> samples, double cutoff_hz,
                                            double sample_rate_hz) {
    return apply_zero_phase(design_lowpass(cutoff_hz, sample_rate_hz), samples);
}

void write_coefficients(std::ostream& out, const FilterSpec& spec) {
    out << "# sample_rate_hz " << io::format_double(spec.sample_rate_hz()) << '\n';
    for (const auto& n : spec.notches()) {
        out << "# notch_hz " << io::format_double(n.center_hz) << " bandwidth_hz " << io::format_double(n.bandwidth_hz)
            << '\n';
    }
    out << "# b0 b1 b2 a1 a2\n";
    for (const auto& s : spec.sections()) {
        out << io::format_double(s.b[0]) << ' ' << io::format_double(s.b[1]) << ' ' << io::format_double(s.b[2])
            << ' ' << io::format_double(s.a[0]) << ' ' << io::format_double(s.a[1]) << '\n';
    }
}

FilterSpec read_coefficients(std::istream& in) {
    std::vector<Biquad> sections;
    std::vector<NotchBand> notches;
    double fs = 0.0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line.front() == '#') {
            std::string hash, key;
            ls >> hash >> key;
            if (key == "sample_rate_hz") {
                if (!(ls >> fs)) throw ParseError(lineno, "bad sample_rate_hz");
            } else if (key == "notch_hz") {
                NotchBand nb;
                std::string bwkey;
                if (!(ls >> nb.center_hz >> bwkey >> nb.bandwidth_hz)) throw ParseError(lineno, "bad notch line");
                notches.push_back(nb);
            }
            continue;
        }
        Biquad s;
        if (!(ls >> s.b[0] >> s.b[1] >> s.b[2] >> s.a[0] >> s.a[1])) {
            throw ParseError(lineno, "expected five coefficients: b0 b1 b2 a1 a2");
        }
        std::string extra;
        if (ls >> extra) throw ParseError(lineno, "trailing data after coefficients");
        sections.push_back(s);
    }
    if (!(fs > 0.0)) throw ParseError(lineno, "missing '# sample_rate_hz' header");
    return FilterSpec(std::move(sections), fs, std::move(notches));
}

}  // namespace fbgvib::filtering
