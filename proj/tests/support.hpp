#pragma once

// Shared test oracles and fixtures. Everything here is independent of the
// library code paths it checks.

#include <atomic>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <unistd.h>
#include <string>
#include <vector>

#include "mpmf/fft.hpp"
#include "mpmf/geo.hpp"

namespace testsupport {

// Spherical law of cosines; alternate great-circle formula used as the
// haversine oracle.
inline double law_of_cosines_m(const mpmf::LatLon& p1, const mpmf::LatLon& p2) {
    const double d2r = std::numbers::pi / 180.0;
    const double s = std::sin(p1.lat * d2r) * std::sin(p2.lat * d2r) +
                     std::cos(p1.lat * d2r) * std::cos(p2.lat * d2r) *
                         std::cos((p2.lon - p1.lon) * d2r);
    return mpmf::kEarthRadiusM * std::acos(std::min(1.0, std::max(-1.0, s)));
}

// Welch PSD with Hann windows and 50% overlap. Returns (freq, power) pairs.
inline std::pair<std::vector<double>, std::vector<double>> welch_psd(
    const std::vector<double>& x, double fs, std::size_t nseg) {
    nseg = mpmf::detail::next_pow2(nseg);
    while (nseg > x.size()) nseg /= 2;
    const std::size_t hop = nseg / 2;
    std::vector<double> window(nseg);
    for (std::size_t i = 0; i < nseg; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (nseg - 1)));

    std::vector<double> psd(nseg / 2 + 1, 0.0);
    std::size_t count = 0;
    std::vector<std::complex<double>> buf(nseg);
    for (std::size_t start = 0; start + nseg <= x.size(); start += hop) {
        double mean = 0.0;
        for (std::size_t i = 0; i < nseg; ++i) mean += x[start + i];
        mean /= static_cast<double>(nseg);
        for (std::size_t i = 0; i < nseg; ++i) buf[i] = {(x[start + i] - mean) * window[i], 0.0};
        mpmf::detail::fft_inplace(buf, false);
        for (std::size_t k = 0; k <= nseg / 2; ++k) psd[k] += std::norm(buf[k]);
        ++count;
    }
    std::vector<double> freq(psd.size());
    for (std::size_t k = 0; k < psd.size(); ++k) {
        freq[k] = fs * static_cast<double>(k) / static_cast<double>(nseg);
        psd[k] /= std::max<std::size_t>(count, 1);
    }
    return {freq, psd};
}

inline std::size_t argmax(const std::vector<double>& v, std::size_t lo = 0,
                          std::size_t hi = SIZE_MAX) {
    hi = std::min(hi, v.size());
    std::size_t best = lo;
    for (std::size_t i = lo; i < hi; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

// Unique scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("mpmf_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

// Small controlled bridge frame for tests: straight ~1 km span heading north
// at the equator-ish latitude where degree math is easy to reason about.
inline mpmf::BridgeFrame test_frame(double length_m = 1000.0, double cross_margin_m = 60.0) {
    const double lat0 = 45.0;
    const double m_per_deg_lat = mpmf::kEarthRadiusM * std::numbers::pi / 180.0;
    const double m_per_deg_lon = m_per_deg_lat * std::cos(lat0 * std::numbers::pi / 180.0);
    const mpmf::LatLon a{lat0, 7.0};
    const mpmf::LatLon b{lat0 + length_m / m_per_deg_lat, 7.0};
    const double margin_lat = 0.3 * length_m / m_per_deg_lat;
    const double margin_lon = cross_margin_m / m_per_deg_lon;
    return mpmf::BridgeFrame::create("test-span", a, b, length_m,
                                     {a.lat - margin_lat, a.lon - margin_lon},
                                     {b.lat + margin_lat, b.lon + margin_lon});
}

}  // namespace testsupport
