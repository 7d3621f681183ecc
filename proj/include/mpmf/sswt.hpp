#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "mpmf/fft.hpp"
#include "mpmf/geo.hpp"

namespace mpmf {

inline constexpr double kMorletOmega0 = 6.0;

// Logarithmic frequency grid: f_l = (1/(K*dt)) * 2^(l*df) for l = 0..n_a-1
// with df = log2(K/2)/(n_a-1), so the grid always spans [1/(K*dt), 1/(2*dt)].
// n_v is the number of voices per octave.
struct FreqGrid {
    std::vector<double> f_hz;
    int n_v = 32;
    std::size_t signal_len = 0;
    double dt = 1.0;
    double delta_f_log2 = 0.0;

    std::size_t size() const { return f_hz.size(); }

    static FreqGrid make(std::size_t signal_len, double dt, int n_v) {
        if (signal_len < 16) throw ValidationError("FreqGrid: signal length must be >= 16");
        if (dt <= 0.0) throw ValidationError("FreqGrid: dt must be positive");
        if (n_v < 4) throw ValidationError("FreqGrid: n_v must be >= 4");
        FreqGrid g;
        g.n_v = n_v;
        g.signal_len = signal_len;
        g.dt = dt;
        const double octaves = std::log2(static_cast<double>(signal_len) / 2.0);
        const std::size_t n_a =
            static_cast<std::size_t>(std::floor(octaves * static_cast<double>(n_v))) + 1;
        g.delta_f_log2 = octaves / static_cast<double>(n_a - 1);
        const double f0 = 1.0 / (static_cast<double>(signal_len) * dt);
        g.f_hz.resize(n_a);
        for (std::size_t l = 0; l < n_a; ++l)
            g.f_hz[l] = f0 * std::exp2(static_cast<double>(l) * g.delta_f_log2);
        return g;
    }

    // Morlet scale mapped to grid frequency l: a = omega0 / (2*pi*f_l).
    double scale(std::size_t l, double omega0) const {
        return omega0 / (2.0 * std::numbers::pi * f_hz[l]);
    }

    // Nearest grid index to f in log spacing, or -1 when outside the grid.
    std::ptrdiff_t nearest(double f) const {
        if (!(f > 0.0)) return -1;
        const double pos = std::log2(f / f_hz.front()) / delta_f_log2;
        const auto idx = static_cast<std::ptrdiff_t>(std::llround(pos));
        if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(f_hz.size())) return -1;
        return idx;
    }
};

// CWT coefficients and their exact time derivative, row-major (scale x time).
struct CwtResult {
    std::size_t n_scales = 0;
    std::size_t n_cols = 0;
    std::vector<std::complex<double>> w;
    std::vector<std::complex<double>> dw;

    const std::complex<double>& at(std::size_t l, std::size_t b) const { return w[l * n_cols + b]; }
};

// Morlet CWT with 1/a normalization, computed in the Fourier domain with the
// analytic wavelet psi_hat(w) = pi^{-1/4} sqrt(2*pi) exp(-(w - w0)^2/2), w > 0.
// The signal is mirror-extended on both sides before the FFT; dW/db comes from
// multiplying by i*w in the spectral domain rather than finite differences.
inline CwtResult cwt_morlet(std::span<const double> x, const FreqGrid& grid,
                            double omega0 = kMorletOmega0) {
    const std::size_t k_len = x.size();
    if (k_len < 16) throw ValidationError("cwt_morlet: signal too short");
    if (k_len != grid.signal_len) throw ValidationError("cwt_morlet: grid/signal length mismatch");
    for (double v : x)
        if (!std::isfinite(v)) throw ValidationError("cwt_morlet: non-finite sample");

    const std::size_t pad = k_len - 1;
    std::vector<std::complex<double>> ext;
    const std::size_t n = detail::next_pow2(k_len + 2 * pad);
    ext.reserve(n);
    for (std::size_t i = pad; i >= 1; --i) ext.emplace_back(x[i], 0.0);
    for (std::size_t i = 0; i < k_len; ++i) ext.emplace_back(x[i], 0.0);
    for (std::size_t i = 1; i <= pad; ++i) ext.emplace_back(x[k_len - 1 - i], 0.0);
    ext.resize(n, {0.0, 0.0});

    detail::fft_inplace(ext, false);

    CwtResult res;
    res.n_scales = grid.size();
    res.n_cols = k_len;
    res.w.resize(res.n_scales * k_len);
    res.dw.resize(res.n_scales * k_len);

    const double norm_c = std::pow(std::numbers::pi, -0.25) * std::sqrt(2.0 * std::numbers::pi);
    const double d_omega = 2.0 * std::numbers::pi / (static_cast<double>(n) * grid.dt);
    std::vector<std::complex<double>> row(n);
    std::vector<std::complex<double>> drow(n);
    for (std::size_t l = 0; l < res.n_scales; ++l) {
        const double a = grid.scale(l, omega0);
        std::fill(row.begin(), row.end(), std::complex<double>(0.0, 0.0));
        std::fill(drow.begin(), drow.end(), std::complex<double>(0.0, 0.0));
        for (std::size_t k = 1; k <= n / 2; ++k) {
            const double w_k = static_cast<double>(k) * d_omega;
            const double arg = a * w_k - omega0;
            const double psi = norm_c * std::exp(-0.5 * arg * arg);
            if (psi < 1e-300) continue;
            row[k] = ext[k] * psi;
            drow[k] = row[k] * std::complex<double>(0.0, w_k);
        }
        detail::fft_inplace(row, true);
        detail::fft_inplace(drow, true);
        for (std::size_t b = 0; b < k_len; ++b) {
            res.w[l * k_len + b] = row[pad + b];
            res.dw[l * k_len + b] = drow[pad + b];
        }
    }
    return res;
}

// Phase transform in Hz: omega = Im[(dW/db)/W]/(2*pi) where |W| > gamma,
// NaN elsewhere.
inline std::vector<double> phase_transform(const CwtResult& cwt, double gamma) {
    if (gamma < 0.0) throw ValidationError("phase_transform: gamma must be >= 0");
    std::vector<double> omega(cwt.w.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < cwt.w.size(); ++i) {
        if (std::abs(cwt.w[i]) > gamma)
            omega[i] = std::imag(cwt.dw[i] / cwt.w[i]) / (2.0 * std::numbers::pi);
    }
    return omega;
}

// Discrete synchrosqueezing: mass W * da/a of every cell above gamma is
// reassigned to the grid bin nearest (log-spaced) to its phase-transform
// frequency. da comes from centered differences of the discrete scales.
inline std::vector<std::complex<double>> synchrosqueeze(const CwtResult& cwt,
                                                        const std::vector<double>& omega,
                                                        const FreqGrid& grid, double gamma,
                                                        double omega0 = kMorletOmega0) {
    if (omega.size() != cwt.w.size()) throw ValidationError("synchrosqueeze: omega size mismatch");
    const std::size_t n_a = grid.size();
    const std::size_t n_cols = cwt.n_cols;
    std::vector<double> weight(n_a);  // da_l / a_l
    for (std::size_t l = 0; l < n_a; ++l) {
        const double a = grid.scale(l, omega0);
        double da;
        if (l == 0)
            da = grid.scale(0, omega0) - grid.scale(1, omega0);
        else if (l + 1 == n_a)
            da = grid.scale(n_a - 2, omega0) - grid.scale(n_a - 1, omega0);
        else
            da = (grid.scale(l - 1, omega0) - grid.scale(l + 1, omega0)) / 2.0;
        weight[l] = da / a;
    }

    std::vector<std::complex<double>> t(n_a * n_cols, {0.0, 0.0});
    for (std::size_t l = 0; l < n_a; ++l) {
        for (std::size_t b = 0; b < n_cols; ++b) {
            const std::size_t i = l * n_cols + b;
            if (!(std::abs(cwt.w[i]) > gamma)) continue;
            const double f_inst = omega[i];
            if (!std::isfinite(f_inst)) continue;
            const std::ptrdiff_t m = grid.nearest(f_inst);
            if (m < 0) continue;
            t[static_cast<std::size_t>(m) * n_cols + b] += cwt.w[i] * weight[l];
        }
    }
    return t;
}

// Synchrosqueezed representation of one trip plus everything downstream
// stages need: the CWT, the phase transform, per-scale boundary widths
// (columns within one wavelet e-folding width of either edge), and the
// amplitude threshold actually applied.
struct TfrGrid {
    FreqGrid grid;
    double gamma = 0.0;
    std::size_t n_cols = 0;
    std::vector<std::complex<double>> w;
    std::vector<double> omega;
    std::vector<std::complex<double>> t;
    std::vector<std::size_t> boundary_cols;  // per scale

    double abs_t(std::size_t l, std::size_t b) const { return std::abs(t[l * n_cols + b]); }

    bool is_boundary(std::size_t l, std::size_t b) const {
        const std::size_t wl = boundary_cols[l];
        return b < wl || b + wl >= n_cols;
    }
};

inline TfrGrid sswt(std::span<const double> x, double dt, int n_v, double gamma_rel = 1e-8,
                    double omega0 = kMorletOmega0) {
    TfrGrid tfr;
    tfr.grid = FreqGrid::make(x.size(), dt, n_v);
    CwtResult cwt = cwt_morlet(x, tfr.grid, omega0);
    double max_w = 0.0;
    for (const auto& c : cwt.w) max_w = std::max(max_w, std::abs(c));
    tfr.gamma = gamma_rel * max_w;
    tfr.n_cols = cwt.n_cols;
    tfr.omega = phase_transform(cwt, tfr.gamma);
    tfr.t = synchrosqueeze(cwt, tfr.omega, tfr.grid, tfr.gamma, omega0);
    tfr.boundary_cols.resize(tfr.grid.size());
    for (std::size_t l = 0; l < tfr.grid.size(); ++l) {
        const double a = tfr.grid.scale(l, omega0);
        tfr.boundary_cols[l] = static_cast<std::size_t>(std::ceil(std::numbers::sqrt2 * a / dt));
    }
    tfr.w = std::move(cwt.w);
    return tfr;
}

// Debug dump of |T| as a dense CSV (frequency rows x time columns).
inline void write_tfr_csv(const TfrGrid& tfr, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    for (std::size_t l = 0; l < tfr.grid.size(); ++l) {
        out << tfr.grid.f_hz[l];
        for (std::size_t b = 0; b < tfr.n_cols; ++b) out << ',' << tfr.abs_t(l, b);
        out << '\n';
    }
}

}  // namespace mpmf
