#pragma once

#include "fiberlab/statistics.hpp"

namespace fiberlab {

struct EnvelopePair {
    int n = 0;
    double upper = 0.0;  // int (psi o F^n)_+ dm
    double lower = 0.0;  // int (psi o F^n)_- dm
    double gap = 0.0;    // upper - lower >= 0
};

// Fiber sup/inf of psi o F^n per depth-k cylinder, taken over the two
// endpoints of K plus equispaced interior points (fiber_samples in total;
// finite spaces use every point), then integrated against m. Since the n-step
// fiber image has diameter <= alpha^n, the sampling brackets the true
// extremes within L(psi) * (alpha^n * sample spacing + representative slack).
EnvelopePair envelope(const FiberSystem& sys, const Observable& psi, int n, int depth,
                      int fiber_samples);

// Representative-tail error of one envelope evaluation: the per-step G2
// deviation of the orbit (zero for first-symbol systems), contracted by the
// remaining steps, plus psi's own base-coordinate truncation at sigma^n.
double envelope_rep_slack(const FiberSystem& sys, const Observable& psi, int n, int depth);

struct LiftedValue {
    double value = 0.0;            // lower(n_max), the mu(psi) approximant
    double certified_error = 0.0;  // gap + sampling and representative slack
    EnvelopePair last;
};

LiftedValue lifted_value(const FiberSystem& sys, const Observable& psi, int n_max, int depth,
                         int fiber_samples = 9);

struct InvarianceReport {
    double lifted_psi = 0.0;
    double lifted_psi_F = 0.0;  // the same functional applied to psi o F
    double diff = 0.0;
    double bound = 0.0;  // 2 gap(n_max) + slack
    bool passed = false;
};

// F-invariance of the lifted functional: mu(psi o F) = mu(psi) within twice
// the bracketing gap. Needs depth >= n_max + 3 (one extra symbol for F).
InvarianceReport invariance_check(const FiberSystem& sys, const Observable& psi, int n_max,
                                  int depth, int fiber_samples = 9);

}  // namespace fiberlab
