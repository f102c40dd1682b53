#pragma once

#include <functional>
#include <string>

#include "fiberlab/transfer.hpp"

namespace fiberlab {

// Lipschitz observable on Sigma x K with respect to d_theta + d. Evaluation
// receives a representative-extended symbol sequence.
struct Observable {
    std::string name;
    std::function<double(std::span<const int>, double)> eval;
    double lip_theta = 0.0;
    double sup = 0.0;
    bool fiber_only = false;
};

namespace observables {

Observable z();
Observable z_squared();
Observable constant(double c);
Observable first_symbol();          // f(x, z) = x_0
Observable first_symbol_times_z();  // f(x, z) = x_0 * z

// CLI names: z, z2, one, x0, x0z.
Observable from_name(const std::string& name);

// a * f + g, with the triangle-inequality constants.
Observable combine(double a, const Observable& f, const Observable& g);

// psi o F: evaluates psi(sigma(x), G(x, z)). The Lipschitz constant is the
// conservative bound L(psi) * (max(1/theta, 1/(1-theta)) + H + alpha).
Observable compose_with_dynamics(const FiberSystem& sys, const Observable& psi);

}  // namespace observables

// sum_w m([w]) * integral of f(rep(w), .) against the entry.
double integrate_observable(const Observable& f, const LeafwiseMeasure& mu);

// fbar(w) = int f(rep(w), y) d(mu0|_w)(y); requires positive mu0.
CylinderFunction observable_marginal(const Observable& f, const LeafwiseMeasure& mu0);

// f mu0: atomwise reweighting (y, w) -> (y, w f(rep, y)); requires positive
// mu0. Its marginal density equals observable_marginal(f, mu0).
LeafwiseMeasure weighted_leafwise(const Observable& f, const LeafwiseMeasure& mu0);

struct DecayReport {
    std::vector<double> values;  // C_n for n = 0..n_max
    double fitted_rate = 0.0;
    double bound_rate = 0.0;  // xi
    bool bound_passed = false;
    double prefactor_estimate = 0.0;  // max_n C_n / xi^n
    bool degenerate = false;          // all values at numerical zero
};

// Signed building blocks shared by the correlation and annealed estimators.
struct CorrelationSeries {
    std::vector<double> iterated;       // int g d(F*^n (f mu0))
    std::vector<double> g_on_iterated;  // int g d(F*^n mu0)
    double int_f_mu0 = 0.0;
    double int_g_mu0 = 0.0;
};

CorrelationSeries correlation_series(const FiberSystem& sys, const LeafwiseMeasure& mu0,
                                     const Observable& f, const Observable& g, int n_max,
                                     double compress_res, int threads = 1);

// C_n(f, g) = |int g d(F*^n(f mu0)) - int g dmu0 int f dmu0| with the rate fit
// and the xi-bound verdict. mu0 must have depth >= n_max + 1.
DecayReport correlation_sequence(const FiberSystem& sys, const LeafwiseMeasure& mu0,
                                 const Observable& f, const Observable& g, int n_max,
                                 double compress_res, double xi, int threads = 1);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
};

// Independent simulation cross-check of the correlation at lag n: averages
// f * (g o F^n) minus the product of averages over sampled trajectories.
// Batch-mean standard error over 20 batches. Deterministic given the seed.
MonteCarloEstimate monte_carlo_correlation(const FiberSystem& sys, const Observable& f,
                                           const Observable& g, int n, int samples, int burn_in,
                                           std::uint64_t seed);

struct ThetaMembershipReport {
    NormReport weighted;        // strong_norm(f mu0)
    double marginal_lip = 0.0;  // measured |fbar|_theta
    double marginal_lip_bound = 0.0;
    bool finite = false;
    bool marginal_bound_ok = false;
};

// Operational membership of f in Theta_{mu0}: the weighted measure's strong
// norm computes to a finite value and the marginal Lipschitz bound holds.
ThetaMembershipReport theta_membership(const Observable& f, const LeafwiseMeasure& mu0,
                                       double slack = 1e-6);

}  // namespace fiberlab
