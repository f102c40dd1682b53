#pragma once

#include <functional>
#include <span>
#include <utility>

#include "fiberlab/fiber_space.hpp"
#include "fiberlab/wk_solvers.hpp"

namespace fiberlab {

// Finite-support signed measure on a fiber space. Atoms are kept normalized:
// sorted by position, positions distinct (merged within 1e-12) and weights
// above 1e-15 in magnitude.
struct FiniteSignedMeasure {
    FiberSpace space;
    AtomList atoms;
};

// In-place normalization of a raw atom list.
void normalize_atoms(AtomList& atoms);

// Validates positions against the space, then normalizes.
FiniteSignedMeasure make_measure(FiberSpace space, AtomList atoms);

FiniteSignedMeasure zero_measure(FiberSpace space);
FiniteSignedMeasure dirac(FiberSpace space, double position, double weight = 1.0);

double total_mass(std::span<const Atom> atoms);
double total_mass(const FiniteSignedMeasure& mu);
double total_abs_mass(std::span<const Atom> atoms);

bool is_probability(const FiniteSignedMeasure& mu, double tol = 1e-10);

// Jordan decomposition; for atomic measures with distinct positions this is
// the per-atom sign split, and the parts have disjoint supports.
std::pair<FiniteSignedMeasure, FiniteSignedMeasure> jordan(const FiniteSignedMeasure& mu);

// ||mu||_W of Def. 3.4 as the exact optimum of the LP
//   max sum w_j g(x_j)  s.t.  ||g||_inf <= 1, Lip(g) <= 1
// (both pair directions as explicit constraints). Single-signed measures take
// the g = +/-1 shortcut, which attains the LP optimum exactly.
double wk_norm(const FiberSpace& space, std::span<const Atom> normalized_atoms);
double wk_norm(const FiniteSignedMeasure& mu);

// Independent brute-force check: exhaustive search over test functions with
// values on a grid of spacing grid_step, feasibility-filtered. Supports of at
// most 4 atoms.
double wk_oracle(const FiniteSignedMeasure& mu, double grid_step);

// Atoms move, weights stay; result renormalized. Images must land in the
// space within 1e-12.
FiniteSignedMeasure pushforward(const FiniteSignedMeasure& mu,
                                const std::function<double(double)>& f);

// Snap atoms to the resolution grid anchored at the interval's left endpoint
// (ties to even); finite spaces are unchanged. Guarantees
// wk_norm(mu - compress(mu)) <= resolution * total_abs_mass(mu).
FiniteSignedMeasure compress(const FiniteSignedMeasure& mu, double resolution);
void compress_atoms(const FiberSpace& space, AtomList& atoms, double resolution);

// ca * a + cb * b, normalized.
AtomList linear_combination(std::span<const Atom> a, double ca, std::span<const Atom> b,
                            double cb);

FiniteSignedMeasure operator+(const FiniteSignedMeasure& a, const FiniteSignedMeasure& b);
FiniteSignedMeasure operator-(const FiniteSignedMeasure& a, const FiniteSignedMeasure& b);
FiniteSignedMeasure operator*(double c, const FiniteSignedMeasure& mu);

// Integral of a pointwise function against the measure.
double integrate(const FiniteSignedMeasure& mu, const std::function<double(double)>& f);

}  // namespace fiberlab
