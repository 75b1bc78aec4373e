#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>
#include <sstream>
#include <string>
#include <vector>

#include "fbgvib/cli.hpp"
#include "fbgvib/io.hpp"
#include "fbgvib/spectral.hpp"
#include "support.hpp"

using namespace fbgvib;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "fbgvib");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::size_t lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

std::string field(const std::string& text, const std::string& key) {
    const auto at = text.find(key + ": ");
    if (at == std::string::npos) return {};
    const auto from = at + key.size() + 2;
    return text.substr(from, text.find('\n', from) - from);
}

}  // namespace

TEST_CASE("simulate then analyze finds the tool frequency") {
    test::TempDir dir;
    const auto trace = (dir / "t.csv").string();
    const auto r = run({"simulate", "--rpm", "240", "--duration", "10", "--seed", "4", "--out", trace});
    REQUIRE(r.code == 0);
    const auto a = run({"analyze", trace, "--out", (dir / "s.csv").string()});
    REQUIRE(a.code == 0);
    CHECK(std::stod(field(a.out, "fundamental_hz")) == doctest::Approx(4.0).epsilon(0.025));
    CHECK(field(a.out, "samples") == "10000");
    CHECK(test::read_file(dir / "s.csv").rfind("frequency_hz,magnitude_nm\n", 0) == 0);
}

TEST_CASE("analysis of a file equals analysis in memory") {
    test::TempDir dir;
    vib::Scenario sc;
    sc.rpm = 120.0;
    sc.duration_s = 8.0;
    const auto tr = vib::simulate(sc, vib::default_params(), 8);
    io::write_trace_csv(dir / "t.csv", tr);
    const auto a = run({"analyze", (dir / "t.csv").string(), "--out", (dir / "s.csv").string()});
    REQUIRE(a.code == 0);
    std::ostringstream want;
    io::write_spectrum_csv(want, spectral::magnitude_spectrum(tr.channel(0), tr.sample_rate_hz,
                                                              {spectral::Window::hann, std::nullopt, true}));
    CHECK(test::read_file(dir / "s.csv") == want.str());
}

TEST_CASE("runs are reproducible byte for byte") {
    test::TempDir dir;
    for (const char* name : {"a.csv", "b.csv"}) {
        REQUIRE(run({"simulate", "--rpm", "120", "--duration", "3", "--bend", "on", "--fibers", "2", "--seed", "11",
                     "--out", (dir / name).string()})
                    .code == 0);
    }
    CHECK(test::read_file(dir / "a.csv") == test::read_file(dir / "b.csv"));
    const auto c = run({"simulate", "--rpm", "120", "--duration", "3", "--seed", "12"});
    const auto d = run({"simulate", "--rpm", "120", "--duration", "3", "--seed", "12"});
    CHECK(c.out == d.out);
    CHECK(c.out.rfind(io::kTraceHeader, 0) == 0);
}

TEST_CASE("filter, shape and detect chain") {
    test::TempDir dir;
    const auto raw = (dir / "raw.csv").string();
    const auto filt = (dir / "filt.csv").string();
    REQUIRE(run({"simulate", "--rpm", "120", "--duration", "30", "--bend", "on", "--out", raw}).code == 0);
    const auto f = run({"filter", raw, "--rpm", "120", "--coefficients", (dir / "c.txt").string(), "--out", filt});
    REQUIRE(f.code == 0);
    CHECK(std::filesystem::exists(dir / "c.txt"));
    const auto auto_f = run({"filter", raw, "--out", (dir / "auto.csv").string()});
    CHECK(auto_f.code == 0);

    const auto s = run({"shape", filt, "--out", (dir / "poly.csv").string(), "--tips", (dir / "tips.csv").string()});
    REQUIRE(s.code == 0);
    CHECK(std::stod(field(s.out, "tip_z_mm")) > 30.0);
    CHECK(test::read_file(dir / "poly.csv").rfind("s_mm,x_mm,z_mm\n", 0) == 0);
    CHECK(test::read_file(dir / "tips.csv").rfind("time_s,x_mm,z_mm\n", 0) == 0);

    const auto d = run({"detect", filt, "--out", (dir / "ev.csv").string()});
    REQUIRE(d.code == 0);
    CHECK(field(d.out, "events") == "0");
    const auto d_raw = run({"detect", raw, "--out", (dir / "ev2.csv").string()});
    REQUIRE(d_raw.code == 0);
    CHECK(std::stoi(field(d_raw.out, "events")) > 0);
}

TEST_CASE("usage problems exit 2 with a single diagnostic line") {
    test::TempDir dir;
    test::write_file(dir / "empty.csv", "");
    for (const auto& args : std::vector<std::vector<std::string>>{
             {},
             {"analyze"},
             {"simulate", "--bogus", "1"},
             {"frobnicate"},
             {"simulate", "--rpm", "abc"},
             {"analyze", (dir / "empty.csv").string()},
         }) {
        const auto r = run(args);
        CHECK(r.code == 2);
        CHECK(lines(r.err) == 1);
    }
}

TEST_CASE("runtime failures exit 1 and leave no output") {
    test::TempDir dir;
    test::write_file(dir / "bad.csv", "time_s,fiber,aa,wavelength_nm\n0,0,0,1535\n0,0,1,1400\n");
    const auto out = dir / "o.csv";
    auto r = run({"analyze", (dir / "bad.csv").string(), "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(lines(r.err) == 1);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(out));

    r = run({"analyze", (dir / "missing.csv").string()});
    CHECK(r.code == 2);
    r = run({"simulate", "--rpm", "120", "--sample-rate", "3", "--out", out.string()});
    CHECK(r.code == 2);  // Nyquist violation is a configuration problem
    CHECK_FALSE(std::filesystem::exists(out));
}

TEST_CASE("configuration files") {
    test::TempDir dir;
    test::write_file(dir / "run.cfg", "tool_rpm = 240\nduration_s = 5\nseed = 3\n");
    const auto a = run({"simulate", "--config", (dir / "run.cfg").string()});
    REQUIRE(a.code == 0);
    CHECK(lines(a.out) == 15001);  // three active areas per instant
    const auto b = run({"simulate", "--config", (dir / "run.cfg").string(), "--duration", "2"});
    REQUIRE(b.code == 0);
    CHECK(lines(b.out) == 6001);
    test::write_file(dir / "out.cfg", "duration_s = 1\noutput_dir = " + dir.path().string() + "\n");
    REQUIRE(run({"simulate", "--config", (dir / "out.cfg").string(), "--out", "placed.csv"}).code == 0);
    CHECK(std::filesystem::exists(dir / "placed.csv"));
    test::write_file(dir / "bad.cfg", "tool_rpm = 240\nspeed = 3\n");
    const auto c = run({"simulate", "--config", (dir / "bad.cfg").string()});
    CHECK(c.code == 2);
    CHECK(c.err.find("line 2") != std::string::npos);
}

TEST_CASE("sweep subcommand") {
    test::TempDir dir;
    const auto r = run({"sweep", "--preset", "paper", "--out", (dir / "sweep.csv").string()});
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "points") == "40");
    CHECK(field(r.out, "peaks") == "2");
    CHECK(lines(test::read_file(dir / "sweep.csv")) == 41);
    CHECK(r.out.find("sensor-dominant") != std::string::npos);

    const auto small = run({"sweep", "--lo", "60", "--hi", "2000", "--points", "12", "--duration", "5", "--serial"});
    CHECK(small.code == 0);
    CHECK(field(small.out, "points") == "12");
    CHECK(run({"sweep", "--points", "5"}).code == 1);
}

TEST_CASE("help exits cleanly") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("simulate") != std::string::npos);
    CHECK(run({"sweep", "--help"}).code == 0);
}

TEST_CASE("the installed executable reports exit codes") {
    test::TempDir dir;
    const std::string exe = FBGVIB_CLI_PATH;
    auto status = [&](const std::string& args) {
        const int raw = std::system((exe + " " + args + " > " + (dir / "o.txt").string() + " 2> " +
                                     (dir / "e.txt").string()).c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    CHECK(status("--help") == 0);
    CHECK(status("simulate --rpm 240 --duration 2 --out " + (dir / "t.csv").string()) == 0);
    CHECK(status("analyze " + (dir / "t.csv").string()) == 0);
    CHECK(test::read_file(dir / "o.txt").find("fundamental_hz: 4") != std::string::npos);
    CHECK(status("simulate --nope") == 2);
    CHECK(lines(test::read_file(dir / "e.txt")) == 1);
    test::write_file(dir / "bad.csv", "time_s,fiber,aa,wavelength_nm\n0,0,0,99\n");
    CHECK(status("analyze " + (dir / "bad.csv").string()) == 1);
}
