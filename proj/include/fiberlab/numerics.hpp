#pragma once

#include <cmath>
#include <span>

namespace fiberlab {

struct RateFit {
    double rate = 0.0;       // fitted geometric rate exp(slope)
    double prefactor = 0.0;  // exp(intercept)
    int points_used = 0;
    bool ok = false;  // at least two usable points
};

// Log-linear least squares of y_j ~ prefactor * rate^j over j in [j_begin, j_end],
// skipping values at or below `floor`.
inline RateFit fit_geometric_rate(std::span<const double> y, int j_begin, int j_end,
                                  double floor = 1e-300) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int j = j_begin; j <= j_end && j < static_cast<int>(y.size()); ++j) {
        if (!(y[j] > floor)) continue;
        double lx = static_cast<double>(j), ly = std::log(y[j]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    RateFit fit;
    fit.points_used = n;
    if (n < 2) return fit;
    double det = n * sxx - sx * sx;
    if (det == 0.0) return fit;
    double slope = (n * sxy - sx * sy) / det;
    double intercept = (sy * sxx - sx * sxy) / det;
    fit.rate = std::exp(slope);
    fit.prefactor = std::exp(intercept);
    fit.ok = true;
    return fit;
}

// Tail-half window [ceil(n/2), n] used by the basis-gap estimator to skip
// transients.
inline RateFit fit_geometric_rate_tail(std::span<const double> y, double floor = 1e-300) {
    int n = static_cast<int>(y.size()) - 1;
    return fit_geometric_rate(y, (n + 1) / 2, n, floor);
}

}  // namespace fiberlab
