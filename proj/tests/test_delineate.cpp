#include "doctest.h"

#include <cmath>
#include <vector>

#include "support/helpers.hpp"
#include "vitalcep/delineate.hpp"
#include "vitalcep/synth.hpp"

using namespace vitalcep;
using namespace vitalcep::delineate;

TEST_SUITE("delineate") {

TEST_CASE("five-beat template train is fully delineated") {
    auto x = synth::ecg_fixed_hr(60.0, 500.0, 5000.0, 500.0);  // R at 500, 1500, ... 4500 ms
    auto k = delineate_ecg(x, 500.0);
    REQUIRE(k.beats.size() == 5);
    for (size_t i = 0; i < 5; ++i) {
        const Beat& b = k.beats[i];
        int expected_r = static_cast<int>((500 + 1000 * i) * 500 / 1000);
        CHECK(std::abs(b.r - expected_r) <= 5);
        CHECK(is_valid(b.p));
        CHECK(is_valid(b.q));
        CHECK(is_valid(b.s));
        CHECK(is_valid(b.t));
        CHECK(b.p < b.q);
        CHECK(b.q < b.r);
        CHECK(b.r < b.s);
        CHECK(b.s < b.t);
        CHECK(b.r_amp == doctest::Approx(1.0).epsilon(1e-9));  // R is the window maximum
        CHECK(b.p_amp >= 0.0);
        CHECK(b.t_amp >= 0.0);
    }
}

TEST_CASE("degenerate and too-short windows yield no beats") {
    CHECK(delineate_ecg(std::vector<double>(3000, 0.42), 500.0).beats.empty());
    // under one second of signal
    auto x = synth::ecg_fixed_hr(60.0, 500.0, 800.0, 400.0);
    CHECK(delineate_ecg(std::vector<double>(x.begin(), x.begin() + 400), 500.0).beats.empty());
}

TEST_CASE("delineation is invariant to positive affine amplitude changes") {
    auto x = synth::ecg_fixed_hr(72.0, 500.0, 5000.0, 450.0);
    auto base = delineate_ecg(x, 500.0);
    REQUIRE(!base.beats.empty());

    for (auto [a, b] : {std::pair{0.5, 0.0}, {7.3, 0.0}, {2.0, -3.5}, {0.001, 100.0}}) {
        auto scaled = x;
        for (auto& v : scaled) v = a * v + b;
        auto k = delineate_ecg(scaled, 500.0);
        REQUIRE(k.beats.size() == base.beats.size());
        for (size_t i = 0; i < k.beats.size(); ++i) {
            CHECK(k.beats[i].r == base.beats[i].r);
            CHECK(k.beats[i].p == base.beats[i].p);
            CHECK(k.beats[i].q == base.beats[i].q);
            CHECK(k.beats[i].s == base.beats[i].s);
            CHECK(k.beats[i].t == base.beats[i].t);
        }
    }
}

TEST_CASE("search windows truncated by the edge go invalid") {
    // first R at 60 ms: its P search span (R-250, R-80) ms starts before the window
    auto x = synth::ecg_from_beats({60, 1060, 2060, 3060, 4060}, 500.0, 5000.0);
    auto k = delineate_ecg(x, 500.0);
    REQUIRE(k.beats.size() == 5);
    CHECK_FALSE(is_valid(k.beats[0].p));
    CHECK(is_valid(k.beats[0].q));
    CHECK(is_valid(k.beats[0].s));
    CHECK(is_valid(k.beats[0].t));
    for (size_t i = 1; i < 5; ++i) CHECK(is_valid(k.beats[i].p));
}

TEST_CASE("intervals from hand-placed key-points") {
    EcgKeyPoints k;
    for (int i = 0; i < 4; ++i) {
        Beat b;
        b.r = 200 + i * 375;  // 750 ms apart at 500 Hz
        b.q = b.r - 15;
        b.s = b.r + 20;
        b.t = b.r + 110;
        k.beats.push_back(b);
    }
    auto bi = beat_intervals(k, 500.0);
    REQUIRE(bi.rr_ms.size() == 4);
    CHECK_FALSE(is_valid(bi.rr_ms[0]));  // no predecessor
    for (size_t i = 1; i < 4; ++i) CHECK(bi.rr_ms[i] == doctest::Approx(750.0));
    CHECK(bi.hr_bpm == 80.0);  // 60000 / 750 exactly
    CHECK(bi.qrs_ms[0] == doctest::Approx(70.0));   // (20 + 15) samples * 2 ms
    CHECK(bi.qt_ms[0] == doctest::Approx(250.0));   // (110 + 15) samples * 2 ms
    CHECK(bi.mean_qrs_ms == doctest::Approx(70.0));
    CHECK(bi.mean_qt_ms == doctest::Approx(250.0));
}

TEST_CASE("q at 100 and s at 160 give a 120 ms qrs") {
    EcgKeyPoints k;
    Beat b;
    b.r = 130;
    b.q = 100;
    b.s = 160;
    b.t = 300;
    k.beats.push_back(b);
    auto bi = beat_intervals(k, 500.0);
    CHECK(bi.qrs_ms[0] == doctest::Approx(120.0));
    CHECK_FALSE(is_valid(bi.rr_ms[0]));  // single beat: no rr, qrs/qt still computable
    CHECK_FALSE(is_valid(bi.hr_bpm));
}

TEST_CASE("invalid constituents make invalid intervals") {
    EcgKeyPoints k;
    Beat a;  // q missing: no qrs, no qt
    a.r = 300;
    a.s = 320;
    a.t = 400;
    Beat b;
    b.r = 675;
    b.q = 660;
    b.s = 695;
    b.t = 800;
    k.beats = {a, b};
    auto bi = beat_intervals(k, 500.0);
    CHECK_FALSE(is_valid(bi.qrs_ms[0]));
    CHECK_FALSE(is_valid(bi.qt_ms[0]));
    CHECK(is_valid(bi.qrs_ms[1]));
    CHECK(bi.rr_ms[1] == doctest::Approx(750.0));
    CHECK(bi.mean_qrs_ms == doctest::Approx(70.0));  // averaged over the valid beat only

    auto empty = beat_intervals(EcgKeyPoints{}, 500.0);
    CHECK_FALSE(is_valid(empty.hr_bpm));
    CHECK_FALSE(is_valid(empty.mean_qrs_ms));
}

TEST_CASE("morphology flags from exact amplitudes") {
    // x acts as its own normalization: anchors at 0 and 1
    auto build = [](std::vector<double> st_levels, std::vector<double> t_amps) {
        std::vector<double> x(2000, 0.5);
        x[0] = 0.0;
        x[1] = 1.0;
        EcgKeyPoints k;
        for (size_t i = 0; i < st_levels.size(); ++i) {
            int off = static_cast<int>(i) * 600;
            Beat b;
            b.p = 100 + off;
            b.q = 150 + off;
            b.r = 200 + off;
            b.s = 250 + off;
            b.t = 300 + off;
            b.t_amp = t_amps[i];
            x[(b.p + b.q) / 2] = 0.5;                // baseline sample
            x[b.s + 40] = st_levels[i];              // ST sample, 80 ms after S at 500 Hz
            k.beats.push_back(b);
        }
        return std::pair{k, x};
    };

    auto [k1, x1] = build({0.5, 0.5, 0.5}, {0.7, 0.7, 0.7});
    auto m1 = morphology(k1, x1, 500.0);
    CHECK(m1.st_depression == Ternary::no);
    CHECK(m1.st_elevation == Ternary::no);
    CHECK(m1.inverted_t == Ternary::no);

    auto [k2, x2] = build({0.4, 0.4, 0.5}, {0.7, 0.7, 0.7});  // depressed in 2 of 3
    CHECK(morphology(k2, x2, 500.0).st_depression == Ternary::yes);

    auto [k3, x3] = build({0.4, 0.5, 0.5}, {0.7, 0.7, 0.7});  // depressed in 1 of 3: minority
    CHECK(morphology(k3, x3, 500.0).st_depression == Ternary::no);

    auto [k4, x4] = build({0.6, 0.6, 0.6}, {0.7, 0.7, 0.7});
    auto m4 = morphology(k4, x4, 500.0);
    CHECK(m4.st_elevation == Ternary::yes);
    CHECK(m4.st_depression == Ternary::no);

    auto [k5, x5] = build({0.5, 0.5, 0.5}, {0.3, 0.3, 0.7});  // T below baseline in 2 of 3
    CHECK(morphology(k5, x5, 500.0).inverted_t == Ternary::yes);
}

TEST_CASE("morphology with no usable beats is invalid") {
    std::vector<double> x(1000, 0.5);
    x[0] = 0.0;
    x[1] = 1.0;
    EcgKeyPoints k;
    Beat b;  // no valid p: baseline unavailable
    b.r = 500;
    b.q = 480;
    b.s = 520;
    b.t = 620;
    b.t_amp = 0.7;
    k.beats.push_back(b);
    auto m = morphology(k, x, 500.0);
    CHECK(m.st_depression == Ternary::invalid);
    CHECK(m.st_elevation == Ternary::invalid);
    CHECK(m.inverted_t == Ternary::invalid);

    CHECK(morphology(EcgKeyPoints{}, x, 500.0).st_depression == Ternary::invalid);
    CHECK(morphology(k, std::vector<double>(100, 1.0), 500.0).st_depression == Ternary::invalid);
}

TEST_CASE("healthy template train shows no morphology flags") {
    auto x = synth::ecg_fixed_hr(60.0, 500.0, 5000.0, 500.0);
    auto k = delineate_ecg(x, 500.0);
    auto m = morphology(k, x, 500.0);
    CHECK(m.st_depression == Ternary::no);
    CHECK(m.st_elevation == Ternary::no);
    CHECK(m.inverted_t == Ternary::no);
}

TEST_CASE("bp features from a pressure sinusoid") {
    auto x = synth::bp_series(140.0, 60.0, 1.2, 50.0, 5000.0);
    auto f = bp_features(x);
    CHECK(f.sbp_mmhg == doctest::Approx(140.0).epsilon(0.01));
    CHECK(f.dbp_mmhg == doctest::Approx(60.0).epsilon(0.02));
}

TEST_CASE("bp features from exact triangular peaks") {
    std::vector<double> x;
    auto ramp = [&](double from, double to, int steps) {
        for (int i = 1; i <= steps; ++i) x.push_back(from + (to - from) * i / steps);
    };
    x.push_back(80.0);
    ramp(80, 120, 10);
    ramp(120, 80, 10);
    ramp(80, 130, 10);
    ramp(130, 80, 10);
    ramp(80, 140, 10);
    ramp(140, 80, 10);
    auto f = bp_features(x);
    CHECK(f.sbp_mmhg == doctest::Approx(130.0).epsilon(1e-6));  // mean of 120, 130, 140
    CHECK(f.dbp_mmhg == doctest::Approx(80.0).epsilon(1e-6));   // the two interior troughs
}

TEST_CASE("bp features go invalid without enough extrema") {
    auto f = bp_features(std::vector<double>(250, 100.0));
    CHECK_FALSE(is_valid(f.sbp_mmhg));
    CHECK_FALSE(is_valid(f.dbp_mmhg));

    // a single pulse: one maximum, no interior minima
    std::vector<double> one;
    for (int i = 0; i < 50; ++i) one.push_back(100.0 + i);
    for (int i = 0; i < 50; ++i) one.push_back(150.0 - i);
    auto g = bp_features(one);
    CHECK_FALSE(is_valid(g.sbp_mmhg));
    CHECK_FALSE(is_valid(g.dbp_mmhg));
}

TEST_CASE("window overload carries sample values through") {
    windowing::SignalWindow w;
    w.user_id = "u";
    w.data_type = wire::DataType::ECG;
    w.window_start_ms = 0;
    w.window_length_ms = 5000;
    w.sample_rate_hz = 500.0;
    auto x = synth::ecg_fixed_hr(60.0, 500.0, 5000.0, 500.0);
    for (size_t i = 0; i < x.size(); ++i) w.samples.emplace_back(static_cast<int64_t>(i * 2), x[i]);
    auto k = delineate_ecg(w);
    CHECK(k.beats.size() == 5);
}

}  // TEST_SUITE
