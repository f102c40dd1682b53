#pragma once

#include "fiberlab/statistics.hpp"

namespace fiberlab {

// Iterated function system of affine contractions phi_i(z) = a_i z + b_i on
// an interval, driven by an i.i.d. probability vector.
struct IfsSpec {
    FiberSpace space;
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    Eigen::VectorXd p;
};

IfsSpec make_ifs(FiberSpace space, Eigen::VectorXd a, Eigen::VectorXd b, Eigen::VectorXd p);

// Markov-chain sampling of the Hutchinson measure: z_{j+1} = phi_{i_j}(z_j)
// with i_j ~ p. Atoms optionally snapped to `resolution` (0 keeps raw
// samples); weights are bin counts over the sample total, so the result has
// total mass 1.
FiniteSignedMeasure chaos_game(const IfsSpec& ifs, long samples, int burn_in, std::uint64_t seed,
                               double resolution = 0.0);

// || mu - sum p_i phi_i* mu ||_W, the fixed-point defect of mu.
double hutchinson_residual(const IfsSpec& ifs, const FiniteSignedMeasure& mu);

// The skew-product lift: Bernoulli base with rows p, fibers G(x, z) = phi_{x0}(z).
FiberSystem skew_product(const IfsSpec& ifs, double theta = 0.5);

// max over cylinders of || mu0|_w / phi1(w) - ifs_measure ||_W. Verifies that
// the system is the lift of the IFS (probabilities and maps must match).
double product_structure_check(const FiberSystem& sys, const LeafwiseMeasure& mu0,
                               const FiniteSignedMeasure& ifs_measure);

struct AnnealedRow {
    int n = 0;
    double mc = 0.0;
    double mc_stderr = 0.0;
    double transfer = 0.0;
    double tolerance = 0.0;  // 3 stderr + grid slack
    bool agree = false;
};

struct AnnealedReport {
    std::vector<AnnealedRow> rows;
    DecayReport decay;  // fitted on |transfer| values against xi
    bool all_agree = false;
};

// The annealed correlation integral of section 8.2, estimated two independent
// ways: direct Monte Carlo over (word, Hutchinson-sample) pairs, and the
// skew-product identity int C_n dm = int g1 (g2 o F^n) dmu0 - ... through the
// transfer engine. Lag n applies n composed maps, so lag 0 is the covariance.
// g1, g2 must be fiber-only observables; mu0 must have depth >= n_max + 1.
AnnealedReport annealed_correlation(const IfsSpec& ifs, const FiberSystem& sys,
                                    const LeafwiseMeasure& mu0, const Observable& g1,
                                    const Observable& g2, int n_max, long samples,
                                    std::uint64_t seed, double xi, double compress_res);

namespace catalog {

// Inverse branches of the doubling map with fair coin weights; Hutchinson
// measure is Lebesgue.
IfsSpec dyadic_ifs();

// Same maps with weights (2/3, 1/3); the fixed point is a singular digit
// measure.
IfsSpec skewed_ifs();

}  // namespace catalog

}  // namespace fiberlab
