#include <doctest.h>

#include <cmath>

#include "fbgvib/error.hpp"
#include "fbgvib/io.hpp"
#include "fbgvib/sweep.hpp"
#include "support.hpp"

using namespace fbgvib;

TEST_CASE("steady amplitude of a pure sinusoid") {
    for (double f : {0.5, 2.0, 13.7, 40.0}) {
        auto x = test::sinusoid(30000, 1000.0, f, 0.3, 0.7);
        for (auto& v : x) v += 1535.3;
        // the samples themselves bound what half peak-to-peak can see
        const double sampled = test::half_peak_to_peak(x, 6000, x.size());
        CHECK(sweep::steady_amplitude(x, 1000.0) == doctest::Approx(sampled).epsilon(1e-6));
        CHECK(sampled == doctest::Approx(0.3).epsilon(1.0 - std::cos(test::kPi * f / 1000.0) + 1e-9));
    }
}

TEST_CASE("steady amplitude ignores a slow drift") {
    auto x = test::sinusoid(30000, 1000.0, 2.0, 0.05);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += 1535.3 + 0.02 * i / 1000.0 + 0.1 * std::sin(0.05 * i / 1000.0);
    CHECK(sweep::steady_amplitude(x, 1000.0) == doctest::Approx(0.05).epsilon(0.01));
}

TEST_CASE("steady amplitude edge cases") {
    CHECK(sweep::steady_amplitude(std::vector<double>(10000, 1535.3), 1000.0) == 0.0);
    const auto slow = test::sinusoid(10000, 1000.0, 0.2, 0.3);
    CHECK_THROWS_AS(sweep::steady_amplitude(slow, 1000.0), MeasurementError);
    CHECK_THROWS_AS(sweep::steady_amplitude(slow, 1000.0, 1.0), DomainError);
    CHECK_THROWS_AS(sweep::steady_amplitude(std::vector<double>(3, 1.0), 1000.0), MeasurementError);
}

TEST_CASE("960 rpm trace amplitude matches the frequency response") {
    vib::Scenario sc;
    sc.rpm = 960.0;
    sc.noise_sigma_nm = 0.0;
    const auto p = vib::default_params();
    const auto tr = vib::simulate(sc, p, 1);
    CHECK(sweep::steady_amplitude(tr.channel(0), 1000.0) == doctest::Approx(vib::output_amplitude_nm(p, 16.0)).epsilon(0.02));
}

TEST_CASE("rpm lists are validated") {
    const auto p = vib::default_params();
    vib::Scenario sc;
    std::vector<double> few{100, 200, 300};
    CHECK_THROWS_AS(sweep::run_sweep(few, sc, p), InputError);
    auto grid = sweep::log_grid(10, 2400, 12);
    auto unsorted = grid;
    std::swap(unsorted[3], unsorted[4]);
    CHECK_THROWS_AS(sweep::run_sweep(unsorted, sc, p), InputError);
    auto dup = grid;
    dup[5] = dup[4];
    CHECK_THROWS_AS(sweep::run_sweep(dup, sc, p), InputError);
}

TEST_CASE("log grid") {
    const auto g = sweep::log_grid(10.0, 2400.0, 40);
    REQUIRE(g.size() == 40);
    CHECK(g.front() == 10.0);
    CHECK(g.back() == 2400.0);
    for (std::size_t i = 2; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
    CHECK_THROWS_AS(sweep::log_grid(0.0, 10.0, 5), DomainError);
}

TEST_CASE("reference sweep") {
    const auto pre = sweep::preset("paper");
    CHECK(pre.rpms.size() == 40);
    CHECK(pre.scenario.noise_sigma_nm == 0.0);
    CHECK(pre.scenario.duration_s == 30.0);
    CHECK_THROWS_AS(sweep::preset("other"), ConfigError);

    const auto p = vib::default_params();
    const auto report = sweep::run_sweep(pre.rpms, pre.scenario, p);
    REQUIRE(report.points.size() == 40);
    for (const auto& pt : report.points) {
        CHECK(pt.amplitude_nm >= 0.0);
        CHECK_MESSAGE(pt.amplitude_nm == doctest::Approx(vib::output_amplitude_nm(p, pt.rpm / 60.0)).epsilon(0.02),
                      pt.rpm << " rpm");
    }
    REQUIRE(report.peaks.size() == 2);
    CHECK(std::abs(report.peaks[0].rpm - 24.0) <= 6.0);
    CHECK(std::abs(report.peaks[1].rpm - 960.0) <= 60.0);
    CHECK(report.peaks[0].natural_frequency_hz == doctest::Approx(report.peaks[0].rpm / 60.0));
    CHECK(report.peaks[0].attribution == sweep::Attribution::sensor_dominant);
    CHECK(report.peaks[1].attribution == sweep::Attribution::manipulator_dominant);
    for (const auto& pk : report.peaks) CHECK(pk.avoid_band.contains(pk.rpm));
    CHECK(report.peaks[1].avoid_band.contains(960.0));
    CHECK_FALSE(report.in_avoid_band(70.0));
    CHECK_FALSE(report.in_avoid_band(2250.0));
    CHECK(report.natural_frequencies_hz().size() == 2);
    CHECK(report.avoid_bands_rpm().size() == 2);
    CHECK(vib::output_amplitude_nm(p, 40.0) < 0.25 * vib::output_amplitude_nm(p, 4.0));

    const auto text = sweep::summary(report);
    CHECK(text.find("sensor-dominant") != std::string::npos);
    CHECK(text.find("manipulator-dominant") != std::string::npos);
}

TEST_CASE("parallel and serial sweeps agree exactly") {
    const auto rpms = sweep::log_grid(60, 1800, 12);
    vib::Scenario sc;
    sc.duration_s = 5.0;
    sweep::SweepOptions serial;
    serial.parallel = false;
    const auto a = sweep::run_sweep(rpms, sc, vib::default_params(), serial);
    const auto b = sweep::run_sweep(rpms, sc, vib::default_params());
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].amplitude_nm == b.points[i].amplitude_nm);
}

TEST_CASE("recorded traces give the same report as simulation") {
    const auto rpms = sweep::log_grid(15, 2000, 14);
    vib::Scenario sc;
    sc.duration_s = 20.0;
    sc.noise_sigma_nm = 0.0;
    const auto p = vib::default_params();
    test::TempDir dir;
    for (std::size_t i = 0; i < rpms.size(); ++i) {
        auto s = sc;
        s.rpm = rpms[i];
        io::write_trace_csv(dir / ("rpm_" + io::format_double(rpms[i]) + ".csv"), vib::simulate(s, p, 1 + i));
    }
    test::write_file(dir / "notes.txt", "ignored");
    const auto loaded = io::load_sweep_directory(dir.path());
    REQUIRE(loaded.size() == rpms.size());
    const auto from_files = sweep::run_sweep(std::span<const std::pair<double, WavelengthTrace>>(loaded), p);
    const auto simulated = sweep::run_sweep(rpms, sc, p);
    for (std::size_t i = 0; i < rpms.size(); ++i) {
        CHECK(from_files.points[i].rpm == rpms[i]);
        CHECK(from_files.points[i].amplitude_nm == doctest::Approx(simulated.points[i].amplitude_nm).epsilon(1e-9));
    }
    CHECK(from_files.peaks.size() == simulated.peaks.size());
}

TEST_CASE("peak analysis on a constructed curve") {
    std::vector<sweep::SweepPoint> pts;
    const auto g = sweep::log_grid(10, 1000, 30);
    for (double r : g) pts.push_back({r, 1.0 / (1.0 + std::pow(std::log(r / 100.0) / 0.3, 2))});
    const auto rep = sweep::analyze_points(pts, vib::default_params());
    REQUIRE(rep.peaks.size() == 1);
    CHECK(rep.peaks[0].rpm == doctest::Approx(100.0).epsilon(0.02));
    // half-maximum of this Lorentzian in log space sits at 100 * exp(+-0.3)
    CHECK(rep.peaks[0].avoid_band.lo_rpm == doctest::Approx(100.0 * std::exp(-0.3)).epsilon(0.05));
    CHECK(rep.peaks[0].avoid_band.hi_rpm == doctest::Approx(100.0 * std::exp(0.3)).epsilon(0.05));

    pts[3].rpm = pts[2].rpm;
    CHECK_THROWS_AS(sweep::analyze_points(pts, vib::default_params()), InputError);
}
