#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mpmf/sswt.hpp"

namespace mpmf {

// One retained spectral peak: column index in the trip's (decimated) time
// grid, grid frequency, and the |T| amplitude used as its prominence.
struct RidgePoint {
    int t_index = 0;
    int f_index = 0;
    double f_hz = 0.0;
    double prominence = 0.0;
};

struct RidgeSet {
    std::string trip_id;
    double alpha = 0.05;
    std::vector<RidgePoint> points;
    bool empty_flagged = false;
};

// Strict local maxima of one |T| column over frequency; plateaus take the
// leftmost index. Returns (frequency index, prominence) pairs.
inline std::vector<std::pair<int, double>> column_peaks(std::span<const double> column) {
    std::vector<std::pair<int, double>> peaks;
    const std::size_t n = column.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(column[i] > column[i - 1])) continue;
        std::size_t j = i;
        while (j + 1 < n && column[j + 1] == column[i]) ++j;
        if (j + 1 < n && column[j + 1] < column[i])
            peaks.emplace_back(static_cast<int>(i), column[i]);
        i = j;
    }
    return peaks;
}

// All column peaks of a trip's |T|, excluding boundary-affected cells.
inline std::vector<RidgePoint> extract_column_peaks(const TfrGrid& tfr) {
    std::vector<RidgePoint> out;
    std::vector<double> column(tfr.grid.size());
    for (std::size_t b = 0; b < tfr.n_cols; ++b) {
        for (std::size_t l = 0; l < tfr.grid.size(); ++l) column[l] = tfr.abs_t(l, b);
        for (const auto& [fi, prom] : column_peaks(column)) {
            if (prom <= 0.0) continue;
            if (tfr.is_boundary(static_cast<std::size_t>(fi), b)) continue;
            RidgePoint p;
            p.t_index = static_cast<int>(b);
            p.f_index = fi;
            p.f_hz = tfr.grid.f_hz[static_cast<std::size_t>(fi)];
            p.prominence = prom;
            out.push_back(p);
        }
    }
    return out;
}

// Keep the peaks whose prominence reaches the upper alpha fraction of the
// trip's pooled peak population; ties at the threshold are kept.
inline RidgeSet threshold_ridges(std::vector<RidgePoint> peaks, double alpha,
                                 std::string trip_id = {}) {
    if (!(alpha > 0.0 && alpha <= 0.5)) throw ValidationError("threshold_ridges: need 0 < alpha <= 0.5");
    RidgeSet set;
    set.trip_id = std::move(trip_id);
    set.alpha = alpha;
    if (peaks.empty()) {
        set.empty_flagged = true;
        return set;
    }
    std::vector<double> proms;
    proms.reserve(peaks.size());
    for (const auto& p : peaks) proms.push_back(p.prominence);
    const std::size_t k = static_cast<std::size_t>(
        std::ceil(alpha * static_cast<double>(proms.size())));
    std::nth_element(proms.begin(), proms.begin() + static_cast<std::ptrdiff_t>(proms.size() - k),
                     proms.end());
    const double threshold = proms[proms.size() - k];
    for (const auto& p : peaks)
        if (p.prominence >= threshold) set.points.push_back(p);
    return set;
}

}  // namespace mpmf
