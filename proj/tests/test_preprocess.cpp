#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mpmf/preprocess.hpp"
#include "support.hpp"

using namespace mpmf;

TEST_CASE("resample_uniform is identity on an already-uniform grid") {
    std::vector<double> t, x;
    for (int i = 0; i < 500; ++i) {
        t.push_back(0.01 * i);
        x.push_back(std::sin(0.1 * i));
    }
    const auto out = resample_uniform(t, x, 100.0);
    REQUIRE(out.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(out[i] == Catch::Approx(x[i]).margin(1e-12));
}

TEST_CASE("resample_uniform interpolates linearly") {
    const std::vector<double> t{0.0, 1.0, 2.0};
    const std::vector<double> x{0.0, 2.0, 4.0};
    const auto out = resample_uniform(t, x, 2.0);
    REQUIRE(out.size() == 5);
    const std::vector<double> expected{0.0, 1.0, 2.0, 3.0, 4.0};
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == Catch::Approx(expected[i]));
}

TEST_CASE("resample_uniform recovers a jittered sine to 1e-3") {
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> jitter(-0.002, 0.002);
    std::vector<double> t, x;
    const double f0 = 0.3;
    for (int i = 0; i < 3000; ++i) {
        double ti = 0.01 * i + (i > 0 && i < 2999 ? jitter(gen) : 0.0);
        t.push_back(ti);
        x.push_back(std::sin(2.0 * std::numbers::pi * f0 * ti));
    }
    const auto out = resample_uniform(t, x, 100.0);
    double max_err = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double ti = t[0] + static_cast<double>(i) / 100.0;
        max_err = std::max(max_err, std::abs(out[i] - std::sin(2.0 * std::numbers::pi * f0 * ti)));
    }
    CHECK(max_err < 1e-3);
}

TEST_CASE("resample_uniform rejects duplicate timestamps") {
    const std::vector<double> t{0.0, 0.01, 0.01, 0.03};
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
    CHECK_THROWS_AS(resample_uniform(t, x, 100.0), ValidationError);
}

TEST_CASE("reorient_gravity on an upright device returns az minus its mean") {
    std::array<std::vector<double>, 3> accel;
    std::vector<double> expected;
    double mean = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double s = 0.02 * std::sin(0.01 * i);
        accel[0].push_back(0.0);
        accel[1].push_back(0.0);
        accel[2].push_back(9.81 + s);
        expected.push_back(s);
        mean += s;
    }
    mean /= 2000.0;
    const auto out = reorient_gravity(accel);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out[i] == Catch::Approx(expected[i] - mean).margin(1e-12));
}

TEST_CASE("reorient_gravity undoes a fixed unknown rotation") {
    const Quaternion rot = Quaternion::axis_angle({0.3, -0.7, 0.2}, 0.9);
    std::array<std::vector<double>, 3> upright, rotated;
    for (int i = 0; i < 4000; ++i) {
        const double s = 0.05 * std::sin(0.02 * i) + 0.01 * std::cos(0.005 * i);
        const Vec3 device = rot.rotate({0.0, 0.0, 9.81 + s});
        upright[0].push_back(0.0);
        upright[1].push_back(0.0);
        upright[2].push_back(9.81 + s);
        rotated[0].push_back(device.x);
        rotated[1].push_back(device.y);
        rotated[2].push_back(device.z);
    }
    const auto want = reorient_gravity(upright);
    const auto got = reorient_gravity(rotated);
    double rms = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) rms += (want[i] - got[i]) * (want[i] - got[i]);
    rms = std::sqrt(rms / static_cast<double>(want.size()));
    CHECK(rms < 1e-6);
}

TEST_CASE("reorient_gravity rejects near-zero mean vectors") {
    std::array<std::vector<double>, 3> accel;
    for (int i = 0; i < 100; ++i) {
        accel[0].push_back(0.001);
        accel[1].push_back(0.0);
        accel[2].push_back(0.0);
    }
    CHECK_THROWS_AS(reorient_gravity(accel), ValidationError);
}

TEST_CASE("reorient_quaternion with identity quaternions keeps the device frame") {
    std::array<std::vector<double>, 3> accel;
    std::vector<double> t;
    for (int i = 0; i < 100; ++i) {
        t.push_back(0.01 * i);
        accel[0].push_back(1.0);
        accel[1].push_back(2.0);
        accel[2].push_back(3.0 + 0.1 * i);
    }
    const std::vector<RotationSample> rot{{0.0, 1.0, 0.0, 0.0, 0.0}};
    const auto out = reorient_quaternion(accel, t, rot);
    // mean-removed z channel
    double mean = 0.0;
    for (int i = 0; i < 100; ++i) mean += 3.0 + 0.1 * i;
    mean /= 100.0;
    for (int i = 0; i < 100; ++i)
        CHECK(out[static_cast<std::size_t>(i)] == Catch::Approx(3.0 + 0.1 * i - mean).margin(1e-12));
}

TEST_CASE("quaternion convention: +90 deg about x maps +z to -y") {
    const Quaternion q = Quaternion::axis_angle({1.0, 0.0, 0.0}, std::numbers::pi / 2.0);
    const Vec3 v = q.rotate({0.0, 0.0, 1.0});
    CHECK(v.x == Catch::Approx(0.0).margin(1e-12));
    CHECK(v.y == Catch::Approx(-1.0).margin(1e-12));
    CHECK(v.z == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("random unit quaternions preserve vector norms") {
    std::mt19937 gen(23);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double w = n(gen), x = n(gen), y = n(gen), z = n(gen);
        const double norm = std::sqrt(w * w + x * x + y * y + z * z);
        const Quaternion q(w / norm, x / norm, y / norm, z / norm);
        const Vec3 v{n(gen), n(gen), n(gen)};
        CHECK(q.rotate(v).norm() == Catch::Approx(v.norm()).margin(1e-12));
    }
}

TEST_CASE("non-unit quaternions beyond tolerance are rejected") {
    CHECK_THROWS_AS(Quaternion(1.1, 0.0, 0.0, 0.0), ValidationError);
    CHECK_NOTHROW(Quaternion(1.0000001, 0.0, 0.0, 0.0));
}

TEST_CASE("lowpass_decimate passes DC unchanged") {
    FilterSpec spec;
    spec.f_cut_hz = 0.5;
    spec.resample_fs_hz = 100.0;
    std::vector<double> x(20000, 3.25);
    const auto out = lowpass_decimate(x, 100.0, spec);
    REQUIRE(out.size() == 200);
    for (double v : out) CHECK(v == Catch::Approx(3.25).margin(1e-9));
}

TEST_CASE("lowpass_decimate attenuates a 5 Hz tone by 60 dB and keeps 0.1 Hz within 1%") {
    FilterSpec spec;
    spec.f_cut_hz = 0.5;
    spec.resample_fs_hz = 100.0;
    const double fs = 100.0;
    const std::size_t n = 60000;  // 600 s
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        x[i] = std::sin(2.0 * std::numbers::pi * 0.1 * t) +
               std::sin(2.0 * std::numbers::pi * 5.0 * t);
    }
    const auto out = lowpass_decimate(x, fs, spec);
    const double fs_out = 1.0;

    // Fit the 0.1 Hz quadrature pair on the interior (away from edge transients).
    double c_sin = 0.0, c_cos = 0.0;
    std::size_t lo = out.size() / 10, hi = out.size() - out.size() / 10;
    for (std::size_t i = lo; i < hi; ++i) {
        const double t = static_cast<double>(i) / fs_out;
        c_sin += out[i] * std::sin(2.0 * std::numbers::pi * 0.1 * t);
        c_cos += out[i] * std::cos(2.0 * std::numbers::pi * 0.1 * t);
    }
    const double n_fit = static_cast<double>(hi - lo);
    const double amp = 2.0 * std::hypot(c_sin, c_cos) / n_fit;
    CHECK(amp == Catch::Approx(1.0).margin(0.01));

    double resid = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double t = static_cast<double>(i) / fs_out;
        const double fit = 2.0 * c_sin / n_fit * std::sin(2.0 * std::numbers::pi * 0.1 * t) +
                           2.0 * c_cos / n_fit * std::cos(2.0 * std::numbers::pi * 0.1 * t);
        resid = std::max(resid, std::abs(out[i] - fit));
    }
    CHECK(resid < 1e-3);  // >= 60 dB below the unit 5 Hz tone
}

TEST_CASE("lowpass_decimate output rate is 2*f_cut") {
    FilterSpec spec;
    spec.f_cut_hz = 0.5;
    spec.resample_fs_hz = 100.0;
    std::vector<double> x(10000, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::sin(2.0 * std::numbers::pi * 0.2 * static_cast<double>(i) / 100.0);
    const auto out = lowpass_decimate(x, 100.0, spec);
    // 100 s of input at 100 Hz -> 1 Hz output, one sample per second
    CHECK(out.size() == (x.size() - 1) / 100 + 1);
}

TEST_CASE("lowpass_decimate is linear") {
    FilterSpec spec;
    spec.f_cut_hz = 0.5;
    spec.resample_fs_hz = 100.0;
    std::mt19937 gen(31);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(8000), y(8000), z(8000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = n(gen);
        y[i] = n(gen);
        z[i] = 2.5 * x[i] - 1.25 * y[i];
    }
    const auto fx = lowpass_decimate(x, 100.0, spec);
    const auto fy = lowpass_decimate(y, 100.0, spec);
    const auto fz = lowpass_decimate(z, 100.0, spec);
    for (std::size_t i = 0; i < fz.size(); ++i)
        CHECK(fz[i] == Catch::Approx(2.5 * fx[i] - 1.25 * fy[i]).margin(1e-9));
}

TEST_CASE("lowpass_decimate rejects too-short series") {
    FilterSpec spec;
    spec.f_cut_hz = 0.5;
    spec.resample_fs_hz = 100.0;
    std::vector<double> x(400, 1.0);  // 4 s << 4 cutoff periods
    CHECK_THROWS_AS(lowpass_decimate(x, 100.0, spec), ValidationError);
}
