#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "invctl/analysis.hpp"
#include "test_support.hpp"

using namespace invctl;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> tone(std::size_t n, double spc, double amplitude, int harmonic,
                         double phase) {
    std::vector<double> s(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        s[k] = amplitude * std::cos(kTwoPi * harmonic * static_cast<double>(k) / spc + phase);
    }
    return s;
}

void add(std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
}

// Balanced three-phase record with a per-sample multiplicative tracking
// deviation d(k): v_c = (1 + d(k)) * ref.
WaveformRecord make_record(std::size_t n, double period, double spc, double amplitude,
                           const std::vector<double>& deviation) {
    WaveformRecord r;
    r.period = period;
    const double shift = kTwoPi / 3.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = kTwoPi * static_cast<double>(k) / spc;
        const double d = deviation.empty() ? 0.0 : deviation[k];
        const double ra = amplitude * std::cos(theta);
        const double rb = amplitude * std::cos(theta - shift);
        const double rc = amplitude * std::cos(theta + shift);
        r.ref_a.push_back(ra), r.ref_b.push_back(rb), r.ref_c.push_back(rc);
        r.v_c_a.push_back((1.0 + d) * ra);
        r.v_c_b.push_back((1.0 + d) * rb);
        r.v_c_c.push_back((1.0 + d) * rc);
        r.i_o_a.push_back(0), r.i_o_b.push_back(0), r.i_o_c.push_back(0);
        r.i_f_a.push_back(0), r.i_f_b.push_back(0), r.i_f_c.push_back(0);
    }
    return r;
}

}  // namespace

TEST_CASE("pure sine has vanishing distortion") {
    const double period = 25e-6;
    const double spc = 800.0;
    const auto s = tone(3200, spc, 180.0, 1, 0.37);
    const auto rep = thd(s, period, 50.0, 50);
    CHECK(rep.thd <= 1e-9);
    CHECK(rep.fundamental_amplitude == doctest::Approx(180.0).epsilon(1e-9));
    CHECK(rep.fundamental_hz == 50.0);
}

TEST_CASE("single harmonic fraction is reported exactly") {
    const double spc = 800.0;
    auto s = tone(3200, spc, 200.0, 1, 0.0);
    add(s, tone(3200, spc, 10.0, 3, 1.1));
    const auto rep = thd(s, 25e-6, 50.0, 50);
    CHECK(rep.thd == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(rep.harmonic_amplitude[2] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("harmonics add in quadrature") {
    const double spc = 800.0;
    auto s = tone(3200, spc, 100.0, 1, 0.2);
    add(s, tone(3200, spc, 3.0, 5, -0.4));
    add(s, tone(3200, spc, 4.0, 7, 2.0));
    const auto rep = thd(s, 25e-6, 50.0, 50);
    CHECK(rep.thd == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("distortion is scale invariant") {
    const double spc = 800.0;
    auto s = tone(3200, spc, 100.0, 1, 0.0);
    add(s, tone(3200, spc, 2.5, 2, 0.9));
    auto scaled = s;
    for (auto& v : scaled) v *= 10.0;
    CHECK(thd(scaled, 25e-6, 50.0, 50).thd ==
          doctest::Approx(thd(s, 25e-6, 50.0, 50).thd).epsilon(1e-12));
}

TEST_CASE("window invariance across integer cycle counts") {
    const double spc = 800.0;
    auto s = tone(4800, spc, 150.0, 1, 0.0);
    add(s, tone(4800, spc, 6.0, 3, 0.3));
    add(s, tone(4800, spc, 2.0, 11, -1.0));
    const std::vector<double> two(s.begin(), s.begin() + 1600);
    const std::vector<double> four(s.begin(), s.begin() + 3200);
    CHECK(thd(two, 25e-6, 50.0, 50).thd ==
          doctest::Approx(thd(four, 25e-6, 50.0, 50).thd).epsilon(1e-9));
}

TEST_CASE("harmonic energy honors parseval on band-limited input") {
    const double spc = 800.0;
    auto s = tone(1600, spc, 120.0, 1, 0.5);
    add(s, tone(1600, spc, 7.0, 4, 1.3));
    add(s, tone(1600, spc, 3.0, 9, -0.8));
    const auto rep = thd(s, 25e-6, 50.0, 50);
    double sum_sq = 0.0;
    for (const double a : rep.harmonic_amplitude) sum_sq += a * a;
    double mean_sq = 0.0;
    for (const double v : s) mean_sq += v * v;
    mean_sq /= static_cast<double>(s.size());
    CHECK(0.5 * sum_sq == doctest::Approx(mean_sq).epsilon(1e-9));
}

TEST_CASE("bad analysis windows are rejected") {
    const auto s = tone(3250, 800.0, 100.0, 1, 0.0);  // 4.0625 cycles
    CHECK_THROWS_AS(thd(s, 25e-6, 50.0, 50), std::invalid_argument);
    const auto one_cycle = tone(800, 800.0, 100.0, 1, 0.0);
    CHECK_THROWS_AS(thd(one_cycle, 25e-6, 50.0, 50), std::invalid_argument);
}

TEST_CASE("unresolvable harmonics and tiny fundamentals are rejected") {
    const auto s = tone(1600, 800.0, 100.0, 1, 0.0);
    // Nyquist at 25 us sampling is 20 kHz = harmonic 400 of 50 Hz.
    CHECK_THROWS_AS(thd(s, 25e-6, 50.0, 400), std::invalid_argument);
    CHECK_NOTHROW(thd(s, 25e-6, 50.0, 399));

    const std::vector<double> silent(1600, 0.0);
    CHECK_THROWS_AS(thd(silent, 25e-6, 50.0, 50), std::domain_error);
}

TEST_CASE("non-finite samples are rejected") {
    auto s = tone(1600, 800.0, 100.0, 1, 0.0);
    s[7] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(thd(s, 25e-6, 50.0, 50), std::invalid_argument);
}

TEST_CASE("whole-sample cycle counts per sampling period") {
    CHECK(cycles_per_integer_window(25e-6, 50.0) == 1);
    CHECK(cycles_per_integer_window(30e-6, 50.0) == 3);
    CHECK(cycles_per_integer_window(33e-6, 50.0) == 33);
    CHECK(cycles_per_integer_window(35e-6, 50.0) == 7);
    CHECK(cycles_per_integer_window(40e-6, 50.0) == 1);
}

TEST_CASE("default analysis window covers at least four cycles") {
    const auto w25 = default_analysis_window(25e-6, 50.0);
    CHECK(w25.skip_cycles == 2);
    CHECK(w25.window_cycles == 4);
    CHECK(default_analysis_window(30e-6, 50.0).window_cycles == 6);
    CHECK(default_analysis_window(33e-6, 50.0).window_cycles == 33);
    CHECK(default_analysis_window(35e-6, 50.0).window_cycles == 7);
    CHECK(default_analysis_window(40e-6, 50.0).window_cycles == 4);
}

TEST_CASE("window_slice selects the requested cycles") {
    std::vector<double> s(4000);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = static_cast<double>(k);
    const auto slice = window_slice(s, 25e-6, 50.0, 2, 2);
    REQUIRE(slice.size() == 1600);
    CHECK(slice.front() == 1600.0);
    CHECK(slice.back() == 3199.0);
    CHECK_THROWS_AS(window_slice(s, 25e-6, 50.0, 4, 2), std::invalid_argument);
}

TEST_CASE("immediately settled records settle at time zero") {
    const double period = 100e-6;
    const double spc = 200.0;
    const auto r = make_record(1000, period, spc, 100.0, {});
    const auto t = settling_time(r, 0.05, 50.0);
    REQUIRE(t.has_value());
    CHECK(*t == 0.0);
}

TEST_CASE("settling time is the start of the first held in-band run") {
    const double period = 100e-6;
    const double spc = 200.0;
    std::vector<double> d(1000, 0.0);
    for (std::size_t k = 0; k < 300; ++k) d[k] = 0.5;
    const auto r = make_record(1000, period, spc, 100.0, d);
    const auto t = settling_time(r, 0.05, 50.0);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(300 * period));
}

TEST_CASE("in-band runs shorter than a cycle do not settle the record") {
    const double period = 100e-6;
    const double spc = 200.0;
    std::vector<double> d(1000, 0.2);
    // 150 in-band samples (< one cycle), then out, then in-band for good.
    for (std::size_t k = 100; k < 250; ++k) d[k] = 0.0;
    for (std::size_t k = 500; k < 1000; ++k) d[k] = 0.0;
    const auto r = make_record(1000, period, spc, 100.0, d);
    const auto t = settling_time(r, 0.05, 50.0);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(500 * period));
}

TEST_CASE("records that never settle report empty") {
    std::vector<double> d(1000, 0.2);
    const auto r = make_record(1000, 100e-6, 200.0, 100.0, d);
    CHECK_FALSE(settling_time(r, 0.05, 50.0).has_value());
}

TEST_CASE("rms tracking error of a proportional deviation") {
    std::vector<double> d(1000, 0.1);
    const auto r = make_record(1000, 100e-6, 200.0, 100.0, d);
    CHECK(rms_tracking_error(r, 50.0, 1, 3) == doctest::Approx(0.1).epsilon(1e-9));
    const auto perfect = make_record(1000, 100e-6, 200.0, 100.0, {});
    CHECK(rms_tracking_error(perfect, 50.0, 0, 5) <= 1e-12);
    CHECK_THROWS_AS(rms_tracking_error(perfect, 50.0, 4, 2), std::invalid_argument);
}

TEST_CASE("record_waveform reproduces the per-phase projections") {
    ScenarioConfig sc;
    sc.ts = 30e-6;
    ClosedLoopResult run;
    StepTrace s;
    s.v_c = {100.0, -40.0};
    s.i_o = {3.0, 1.0};
    s.i_f = {5.0, -2.0};
    s.v_ref = {200.0, 0.0};
    run.steps.push_back(s);
    const auto r = record_waveform(run, sc);
    REQUIRE(r.v_c_a.size() == 1);
    CHECK(r.period == sc.ts);
    const auto vc = inverse_clarke(s.v_c);
    CHECK(r.v_c_a[0] == vc.a);
    CHECK(r.v_c_b[0] == vc.b);
    CHECK(r.v_c_c[0] == vc.c);
    const auto ref = inverse_clarke(s.v_ref);
    CHECK(r.ref_a[0] == ref.a);
}

TEST_CASE("comparison csv formats empty metrics as empty cells") {
    ComparisonRow row;
    row.sample = "s1";
    row.load_kind = "resistive";
    row.load_params = "r_ohm=10";
    row.ts_us = 30.0;
    row.l_mh = 2.0;
    row.c_uf = 40.0;
    row.vdc = 500.0;
    row.vref = 200.0;
    row.thd_ann = 1.5;
    row.status = "mpc_diverged_at_12";
    const auto csv = comparison_csv({row});
    CHECK(csv.find("sample,load_kind,load_params,ts_us,l_mh,c_uf,vdc,vref,thd_ann,thd_mpc,"
                   "tss_mpc_ms,tss_ann_ms,status") == 0);
    CHECK(csv.find("s1,resistive,r_ohm=10,30,2,40,500,200,1.5,,,,mpc_diverged_at_12\n") !=
          std::string::npos);
}
