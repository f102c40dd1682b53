#pragma once

#include <string>
#include <vector>

#include "fiberlab/fiber_system.hpp"

namespace fiberlab::catalog {

// Full shift on 2 symbols, uniform Markov measure, theta = 1/2, branches
// f_i(z) = z/2 + i/2: the inverse branches of the doubling map. Its invariant
// measure is m x Lebesgue, which makes every acceptance number closed-form.
FiberSystem dyadic();

// Same base, G(x, z) = z/2 + (1/2)(1 - theta) sum x_i theta^i: fibers vary
// genuinely with the whole sequence, so the disintegration has a strictly
// positive Lipschitz constant.
FiberSystem sequence_affine();

// Proper two-state Markov base (non-Bernoulli rows) over the dyadic branches;
// exercises nonconstant Jacobian weights.
FiberSystem markov_affine();

// Golden-mean shift (transition [[1,1],[1,0]]) over the dyadic branches;
// exercises admissibility filtering everywhere.
FiberSystem golden_affine();

struct NamedSystem {
    std::string name;
    FiberSystem system;
};

// The systems acceptance sweeps run over.
std::vector<NamedSystem> all_systems();

}  // namespace fiberlab::catalog
