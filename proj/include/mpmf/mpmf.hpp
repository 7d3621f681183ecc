#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mpmf/geo.hpp"
#include "mpmf/ridge.hpp"
#include "mpmf/rng.hpp"

namespace mpmf {

// Uniform overlapping spatial segments: M = floor(L/delta_s) centers spaced
// delta_s apart starting at delta_s/2; each segment has width c, so adjacent
// segments overlap by c_o = c - delta_s.
struct Segmentation {
    double length_m = 0.0;
    double delta_s = 0.0;
    double c = 0.0;
    std::vector<double> centers;

    static Segmentation build(double length_m, double delta_s, double c) {
        if (!(delta_s > 0.0 && delta_s <= c && c <= length_m))
            throw ValidationError("Segmentation: need 0 < delta_s <= c <= L");
        Segmentation seg;
        seg.length_m = length_m;
        seg.delta_s = delta_s;
        seg.c = c;
        const std::size_t m = static_cast<std::size_t>(std::floor(length_m / delta_s + 1e-9));
        seg.centers.resize(m);
        for (std::size_t i = 0; i < m; ++i)
            seg.centers[i] = delta_s * (static_cast<double>(i) + 0.5);
        return seg;
    }

    std::size_t size() const { return centers.size(); }
    double overlap() const { return c - delta_s; }

    // Indices m with r in [s_m - c/2, s_m + c/2), clamped to the segment list.
    std::pair<std::size_t, std::size_t> covering(double r) const {
        // Equivalent bounds on the center: r - c/2 < s_m <= r + c/2.
        const double lo_f = (r - c / 2.0) / delta_s - 0.5;
        const double hi_f = (r + c / 2.0) / delta_s - 0.5;
        std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(std::floor(lo_f)) + 1;
        std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(std::floor(hi_f));
        // Exact inclusion check around the float boundaries.
        while (lo <= hi && !(r >= centers_at(lo) - c / 2.0 && r < centers_at(lo) + c / 2.0)) ++lo;
        while (hi >= lo && !(r >= centers_at(hi) - c / 2.0 && r < centers_at(hi) + c / 2.0)) --hi;
        lo = std::max<std::ptrdiff_t>(lo, 0);
        hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(centers.size()) - 1);
        if (lo > hi) return {1, 0};  // empty
        return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
    }

private:
    double centers_at(std::ptrdiff_t i) const { return delta_s * (static_cast<double>(i) + 0.5); }
};

// Common log-spaced aggregation grid with exact 2^(1/n_v) spacing, anchored
// at f_max. Per-trip grids differ slightly in spacing (their span depends on
// trip length), so ridge frequencies are snapped to this shared grid before
// prominences are pooled across trips.
struct CommonGrid {
    double f_max = 0.5;
    int n_v = 32;
    std::size_t n_bins = 0;

    static CommonGrid cover(double f_max, int n_v, double f_min) {
        if (!(f_min > 0.0 && f_min < f_max)) throw ValidationError("CommonGrid: need 0 < f_min < f_max");
        CommonGrid g;
        g.f_max = f_max;
        g.n_v = n_v;
        g.n_bins = static_cast<std::size_t>(
                       std::ceil(static_cast<double>(n_v) * std::log2(f_max / f_min))) + 1;
        return g;
    }

    double f(std::size_t m) const {
        const double back = static_cast<double>(n_bins - 1 - m) / static_cast<double>(n_v);
        return f_max * std::exp2(-back);
    }

    // Nearest bin in log space; -1 when f is outside the covered range.
    std::ptrdiff_t snap(double f_hz) const {
        if (!(f_hz > 0.0)) return -1;
        const double pos = static_cast<double>(n_bins - 1) + static_cast<double>(n_v) * std::log2(f_hz / f_max);
        const auto idx = static_cast<std::ptrdiff_t>(std::llround(pos));
        if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(n_bins)) return -1;
        return idx;
    }
};

// Ridge point remapped into bridge space.
struct SpatialRidgePoint {
    double r = 0.0;
    double f_hz = 0.0;
    double prominence = 0.0;
    int t_index = 0;
};

struct TripRidges {
    std::string trip_id;
    std::vector<SpatialRidgePoint> points;
};

// (f, t) -> (f, r) using the trip's GPS-derived track. Points outside the
// track's time coverage or outside [0, L] are dropped.
inline TripRidges remap_to_space(const RidgeSet& ridges, const BridgeTrack& track, double t0,
                                 double fs_out, double length_m) {
    TripRidges out;
    out.trip_id = ridges.trip_id;
    for (const auto& p : ridges.points) {
        const double t = t0 + static_cast<double>(p.t_index) / fs_out;
        if (t < track.t_first() || t > track.t_last()) continue;
        const double r = position_at(track, t);
        if (r < 0.0 || r > length_m) continue;
        out.points.push_back({r, p.f_hz, p.prominence, p.t_index});
    }
    return out;
}

// Aggregated prominence matrix P_N over (frequency bin x segment).
struct ProminenceMatrix {
    CommonGrid grid;
    Segmentation seg;
    std::vector<double> p;  // row-major, n_bins x M

    double& at(std::size_t bin, std::size_t m) { return p[bin * seg.size() + m]; }
    double at(std::size_t bin, std::size_t m) const { return p[bin * seg.size() + m]; }
};

// P_N(f, s_m) = sum over trips and over points with r in segment m of the
// point's prominence; a point lands in every overlapping segment containing
// it. Trips must arrive sorted by trip_id so the summation order (and hence
// the result, bit for bit) is independent of scheduling.
inline ProminenceMatrix aggregate(std::span<const TripRidges> trips, const Segmentation& seg,
                                  const CommonGrid& grid) {
    ProminenceMatrix pn;
    pn.grid = grid;
    pn.seg = seg;
    pn.p.assign(grid.n_bins * seg.size(), 0.0);
    // Per-trip subtotals are combined trip by trip, so P_N over a union of
    // trip sets equals the sum of the parts exactly (not just to rounding).
    std::vector<double> scratch(pn.p.size());
    for (const auto& trip : trips) {
        std::fill(scratch.begin(), scratch.end(), 0.0);
        for (const auto& pt : trip.points) {
            const std::ptrdiff_t bin = grid.snap(pt.f_hz);
            if (bin < 0) continue;
            const auto [lo, hi] = seg.covering(pt.r);
            for (std::size_t m = lo; m <= hi && m < seg.size(); ++m)
                scratch[static_cast<std::size_t>(bin) * seg.size() + m] += pt.prominence;
        }
        for (std::size_t i = 0; i < pn.p.size(); ++i) pn.p[i] += scratch[i];
    }
    return pn;
}

struct CandidateSet {
    std::vector<std::vector<double>> per_segment;  // up to N_R frequencies each
    std::vector<double> f_hat_s;                   // concatenation over segments
};

// Per segment, the N_R frequencies with the largest aggregated prominence;
// ties break toward the lower frequency. Segments with fewer than N_R nonzero
// bins contribute only their nonzero bins.
inline CandidateSet top_candidates(const ProminenceMatrix& pn, int n_r) {
    if (n_r < 1) throw ValidationError("top_candidates: N_R must be >= 1");
    CandidateSet cs;
    const std::size_t m_count = pn.seg.size();
    cs.per_segment.resize(m_count);
    std::vector<std::pair<double, std::size_t>> order;  // (-prominence, bin)
    for (std::size_t m = 0; m < m_count; ++m) {
        order.clear();
        for (std::size_t bin = 0; bin < pn.grid.n_bins; ++bin) {
            const double v = pn.at(bin, m);
            if (v > 0.0) order.emplace_back(-v, bin);
        }
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(n_r), order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end());
        for (std::size_t i = 0; i < take; ++i) {
            const double f = pn.grid.f(order[i].second);
            cs.per_segment[m].push_back(f);
            cs.f_hat_s.push_back(f);
        }
    }
    return cs;
}

struct PdfCurve {
    std::vector<double> f;
    std::vector<double> density;
    double bandwidth = 0.0;
};

// Gaussian KDE of the candidate vector on a uniform grid over [f_min, f_max].
inline PdfCurve kde_pdf(std::span<const double> f_hat_s, double f_min, double f_max,
                        double bandwidth, std::size_t grid_points = 2000) {
    if (f_hat_s.empty()) throw ValidationError("kde_pdf: empty candidate vector");
    if (!(bandwidth > 0.0)) throw ValidationError("kde_pdf: bandwidth must be positive");
    if (!(f_max > f_min)) throw ValidationError("kde_pdf: bad range");
    PdfCurve curve;
    curve.bandwidth = bandwidth;
    curve.f.resize(grid_points);
    curve.density.assign(grid_points, 0.0);
    const double step = (f_max - f_min) / static_cast<double>(grid_points - 1);
    for (std::size_t g = 0; g < grid_points; ++g)
        curve.f[g] = f_min + static_cast<double>(g) * step;

    const double inv_bw = 1.0 / bandwidth;
    const double norm = 1.0 / (static_cast<double>(f_hat_s.size()) * bandwidth *
                               std::sqrt(2.0 * std::numbers::pi));
    const double reach = 8.0 * bandwidth;  // truncated tails, error ~1e-15
    for (double fi : f_hat_s) {
        const auto g_lo = static_cast<std::ptrdiff_t>(std::ceil((fi - reach - f_min) / step));
        const auto g_hi = static_cast<std::ptrdiff_t>(std::floor((fi + reach - f_min) / step));
        const std::size_t lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(g_lo, 0));
        const std::size_t hi = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(g_hi, static_cast<std::ptrdiff_t>(grid_points) - 1));
        for (std::size_t g = lo; g <= hi && g < grid_points; ++g) {
            const double u = (curve.f[g] - fi) * inv_bw;
            curve.density[g] += norm * std::exp(-0.5 * u * u);
        }
    }
    return curve;
}

struct MpmfPeak {
    double f_hz = 0.0;
    double density = 0.0;
    double cdf = 0.0;  // rank of the peak height among all grid densities
};

struct MpmfReport {
    PdfCurve pdf;
    std::vector<MpmfPeak> peaks;   // all strict local maxima, descending density
    std::vector<MpmfPeak> mpmfs;   // peaks with cdf >= 1 - threshold
    double threshold = 0.1;
    bool empty_flagged = false;
};

// Peaks of the KDE density; a peak's significance is the empirical CDF rank
// of its height among all grid densities, and the MPMFs are the peaks in the
// upper `threshold` fraction of that CDF.
inline MpmfReport pick_mpmfs(PdfCurve pdf, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ValidationError("pick_mpmfs: need 0 < threshold < 1");
    MpmfReport report;
    report.threshold = threshold;

    std::vector<double> sorted = pdf.density;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    for (std::size_t g = 1; g + 1 < pdf.density.size(); ++g) {
        if (!(pdf.density[g] > pdf.density[g - 1] && pdf.density[g] > pdf.density[g + 1])) continue;
        MpmfPeak peak;
        peak.f_hz = pdf.f[g];
        peak.density = pdf.density[g];
        const auto rank = std::upper_bound(sorted.begin(), sorted.end(), peak.density) - sorted.begin();
        peak.cdf = static_cast<double>(rank) / n;
        report.peaks.push_back(peak);
    }
    std::sort(report.peaks.begin(), report.peaks.end(),
              [](const MpmfPeak& a, const MpmfPeak& b) { return a.density > b.density; });
    for (const auto& p : report.peaks)
        if (p.cdf >= 1.0 - threshold) report.mpmfs.push_back(p);
    report.empty_flagged = report.peaks.empty();
    report.pdf = std::move(pdf);
    return report;
}

// Parameters for the aggregation + KDE stage, shared by analyze and the
// robustness harness.
struct AggregationParams {
    Segmentation seg;
    CommonGrid grid;
    int n_r = 5;
    double f_min = 0.0;    // KDE range low edge
    double f_max = 0.5;    // KDE range high edge (= f_cut)
    double bandwidth = 0.005;
    double cdf_threshold = 0.1;
};

inline MpmfReport run_aggregation(std::span<const TripRidges> trips, const AggregationParams& params) {
    const ProminenceMatrix pn = aggregate(trips, params.seg, params.grid);
    const CandidateSet cs = top_candidates(pn, params.n_r);
    if (cs.f_hat_s.empty()) throw ValidationError("run_aggregation: no frequency candidates");
    PdfCurve pdf = kde_pdf(cs.f_hat_s, params.f_min, params.f_max, params.bandwidth);
    return pick_mpmfs(std::move(pdf), params.cdf_threshold);
}

struct RobustnessDraw {
    int n_s = 0;
    int repeat = 0;
    bool failed = false;
    double top_f = 0.0;       // highest-density KDE peak
    double error_rel = 0.0;   // vs nearest truth frequency
    int nearest_mode = -1;    // index into the truth list
};

struct RobustnessRow {
    int n_s = 0;
    double mean_error = 0.0;
    double frac_under_5pct = 0.0;
    int failures = 0;
};

struct RobustnessResult {
    std::vector<RobustnessRow> rows;
    std::vector<RobustnessDraw> draws;
};

// Error versus trip count: for each subset size, draw that many trips without
// replacement, rerun aggregation + KDE, take the top MPMF and score it against
// the nearest truth frequency. Draw RNG streams are keyed by (seed, N_S,
// repeat), so results do not depend on evaluation order.
inline RobustnessResult subset_error_curve(std::span<const TripRidges> trips,
                                           const AggregationParams& params,
                                           std::span<const double> truth_hz,
                                           std::span<const int> sizes, int repeats,
                                           std::uint64_t seed) {
    if (truth_hz.empty()) throw ValidationError("subset_error_curve: empty truth list");
    if (repeats < 1) throw ValidationError("subset_error_curve: repeats must be >= 1");
    for (int n_s : sizes)
        if (n_s < 1 || static_cast<std::size_t>(n_s) > trips.size())
            throw ValidationError("subset_error_curve: size outside [1, #trips]");

    RobustnessResult result;
    for (int n_s : sizes) {
        RobustnessRow row;
        row.n_s = n_s;
        double err_sum = 0.0;
        int err_count = 0;
        int under5 = 0;
        for (int rep = 0; rep < repeats; ++rep) {
            Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(n_s) * 1000003ULL +
                                            static_cast<std::uint64_t>(rep));
            auto idx = rng.sample_indices(trips.size(), static_cast<std::size_t>(n_s));
            std::sort(idx.begin(), idx.end());  // keep trip_id summation order
            std::vector<TripRidges> subset;
            subset.reserve(idx.size());
            for (std::size_t i : idx) subset.push_back(trips[i]);

            RobustnessDraw draw;
            draw.n_s = n_s;
            draw.repeat = rep;
            try {
                const MpmfReport report = run_aggregation(subset, params);
                if (report.peaks.empty()) throw ValidationError("no KDE peaks");
                draw.top_f = report.peaks.front().f_hz;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t m = 0; m < truth_hz.size(); ++m) {
                    const double e = std::abs(draw.top_f - truth_hz[m]) / truth_hz[m];
                    if (e < best) {
                        best = e;
                        draw.nearest_mode = static_cast<int>(m);
                    }
                }
                draw.error_rel = best;
                err_sum += best;
                ++err_count;
                if (best < 0.05) ++under5;
            } catch (const std::exception&) {
                draw.failed = true;
                ++row.failures;
            }
            result.draws.push_back(draw);
        }
        row.mean_error = err_count > 0 ? err_sum / err_count
                                       : std::numeric_limits<double>::quiet_NaN();
        row.frac_under_5pct = err_count > 0 ? static_cast<double>(under5) / err_count : 0.0;
        result.rows.push_back(row);
    }
    return result;
}

}  // namespace mpmf
