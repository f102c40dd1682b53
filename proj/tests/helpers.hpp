#pragma once

#include <Eigen/Dense>

#include "fiberlab/measure.hpp"
#include "fiberlab/rng.hpp"
#include "fiberlab/symbolic.hpp"

namespace fiberlab::testing {

inline SubshiftSpec full_shift_uniform(double theta = 0.5) {
    Eigen::MatrixXi A = Eigen::MatrixXi::Ones(2, 2);
    Eigen::MatrixXd P = Eigen::MatrixXd::Constant(2, 2, 0.5);
    return make_subshift(A, P, theta);
}

inline SubshiftSpec bernoulli_skewed(double theta = 0.5) {
    Eigen::MatrixXi A = Eigen::MatrixXi::Ones(2, 2);
    Eigen::MatrixXd P(2, 2);
    P << 2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0;
    return make_subshift(A, P, theta);
}

inline SubshiftSpec golden_mean(double theta = 0.5) {
    Eigen::MatrixXi A(2, 2);
    A << 1, 1, 1, 0;
    Eigen::MatrixXd P(2, 2);
    P << 0.5, 0.5, 1.0, 0.0;
    return make_subshift(A, P, theta);
}

inline SubshiftSpec markov_two_state(double theta = 0.5) {
    Eigen::MatrixXi A = Eigen::MatrixXi::Ones(2, 2);
    Eigen::MatrixXd P(2, 2);
    P << 0.7, 0.3, 0.4, 0.6;
    return make_subshift(A, P, theta);
}

inline FiniteSignedMeasure random_signed_measure(const FiberSpace& space, Rng& rng,
                                                 int max_atoms = 4) {
    AtomList atoms;
    int n = 1 + rng.uniform_int(max_atoms);
    for (int i = 0; i < n; ++i)
        atoms.push_back({rng.uniform(space.lo(), space.hi()), rng.symmetric()});
    return make_measure(space, std::move(atoms));
}

}  // namespace fiberlab::testing
