#include "fiberlab/lifting.hpp"

#include <algorithm>
#include <cmath>

namespace fiberlab {

EnvelopePair envelope(const FiberSystem& sys, const Observable& psi, int n, int depth,
                      int fiber_samples) {
    if (depth < n + 2) throw InvalidInput("envelope: need depth >= n + 2");
    if (fiber_samples < 2) throw InvalidInput("envelope: need at least 2 fiber samples");

    std::vector<double> points;
    if (sys.space.kind() == FiberSpace::Kind::Interval) {
        points.resize(fiber_samples);
        for (int i = 0; i < fiber_samples; ++i)
            points[i] = sys.space.lo() +
                        (sys.space.hi() - sys.space.lo()) * i / (fiber_samples - 1);
    } else {
        for (int i = 0; i < sys.space.point_count(); ++i) points.push_back(i);
    }

    const int rep_len = representative_length(sys.base, depth) + n + 1;
    EnvelopePair pair;
    pair.n = n;
    std::vector<int> rep;
    std::vector<double> zs(points.size());
    for_each_word(sys.base, depth, [&](std::span<const int> w, std::uint64_t, double mass) {
        rep = representative(sys.base, w, rep_len);
        std::span<const int> xs(rep);
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (double z0 : points) {
            double z = z0;
            for (int j = 0; j < n; ++j) z = evaluate_G(sys, xs.subspan(j), z);
            double v = psi.eval(xs.subspan(n), z);
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
        pair.upper += mass * hi;
        pair.lower += mass * lo;
    });
    pair.gap = pair.upper - pair.lower;
    return pair;
}

double envelope_rep_slack(const FiberSystem& sys, const Observable& psi, int n, int depth) {
    const double theta = sys.base.theta;
    double orbit_err = 0.0;
    if (!sys.first_symbol_only)
        for (int j = 0; j < n; ++j)
            orbit_err += std::pow(sys.alpha, n - 1 - j) * sys.H * std::pow(theta, depth - j) /
                         (1.0 - theta);
    const double base_err =
        psi.fiber_only ? 0.0 : std::pow(theta, depth - n) / (1.0 - theta);
    return psi.lip_theta * (orbit_err + base_err);
}

LiftedValue lifted_value(const FiberSystem& sys, const Observable& psi, int n_max, int depth,
                         int fiber_samples) {
    EnvelopePair pair = envelope(sys, psi, n_max, depth, fiber_samples);
    LiftedValue out;
    out.last = pair;
    out.value = pair.lower;
    const double spacing = sys.space.kind() == FiberSpace::Kind::Interval
                               ? sys.space.diameter() / (fiber_samples - 1)
                               : 0.0;
    out.certified_error = pair.gap + psi.lip_theta * std::pow(sys.alpha, n_max) * spacing +
                          2.0 * envelope_rep_slack(sys, psi, n_max, depth);
    return out;
}

InvarianceReport invariance_check(const FiberSystem& sys, const Observable& psi, int n_max,
                                  int depth, int fiber_samples) {
    if (depth < n_max + 3) throw InvalidInput("invariance_check: need depth >= n_max + 3");
    LiftedValue base = lifted_value(sys, psi, n_max, depth, fiber_samples);
    Observable composed = observables::compose_with_dynamics(sys, psi);
    LiftedValue moved = lifted_value(sys, composed, n_max, depth, fiber_samples);

    InvarianceReport report;
    report.lifted_psi = base.value;
    report.lifted_psi_F = moved.value;
    report.diff = std::abs(base.value - moved.value);
    report.bound = 2.0 * base.last.gap + base.certified_error + moved.certified_error;
    report.passed = report.diff <= report.bound;
    return report;
}

}  // namespace fiberlab
