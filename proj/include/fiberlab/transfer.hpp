#pragma once

#include <cstdint>
#include <vector>

#include "fiberlab/fiber_system.hpp"
#include "fiberlab/measure.hpp"

namespace fiberlab {

// Disintegrated (leafwise) signed measure at cylinder resolution: one
// restriction mu|_gamma per admissible depth-k word, constant on the cylinder.
// The entry's total mass is the marginal density phi1 at that word.
struct LeafwiseMeasure {
    SubshiftSpec spec;
    FiberSpace space;
    int depth = 0;
    std::vector<AtomList> entries;  // indexed by lexicographic word rank

    std::uint64_t word_count() const { return entries.size(); }
};

// m x nu: every restriction equals nu, density identically 1.
LeafwiseMeasure product_leafwise(const SubshiftSpec& spec, const FiberSpace& space,
                                 const FiniteSignedMeasure& nu, int depth);

// phi1(w) = mu|_w(K) as a cylinder function.
CylinderFunction density(const LeafwiseMeasure& mu);

// mu(Sigma) = sum_w m([w]) phi1(w).
double global_mass(const LeafwiseMeasure& mu);

FiniteSignedMeasure entry_measure(const LeafwiseMeasure& mu, std::uint64_t rank);

// ca * a + cb * b entrywise (same spec shape, depth and space required).
LeafwiseMeasure lw_combine(const LeafwiseMeasure& a, double ca, const LeafwiseMeasure& b,
                           double cb);

// Copy entries onto refined cylinders; exact for measures constant at the
// coarser depth.
LeafwiseMeasure relift(const LeafwiseMeasure& mu, int extra_depth);

// One application of the leafwise transfer operator:
//   (F* mu)|_v = sum_{i admissible} g_i(i.v) F_{i.v *} (mu|_{i.v}),
// followed by grid compression at resolution compress_res (0 disables).
// Consumes one symbol of depth. The output density is exactly the
// Perron-Frobenius image of the input density, and global mass is preserved.
// Deterministic and bitwise independent of the thread count.
LeafwiseMeasure transfer_step(const FiberSystem& sys, const LeafwiseMeasure& mu,
                              double compress_res, int threads = 1);

// ||mu||_inf: max over cylinders of the restriction's WK norm (the essential
// sup is a max at cylinder resolution).
double weak_norm(const LeafwiseMeasure& mu);

enum class LipMode { Exact, Sampled };

// |mu|_theta at cylinder resolution: worst WK distance between restrictions
// over the base distance of their cylinders. Exact mode enumerates all pairs
// (word count <= 256); sampled mode draws a fixed budget of 8192 pairs
// deterministically. Same-word pairs are skipped (their scale is the
// truncation term theta^k/(1-theta)).
double lipschitz_constant(const LeafwiseMeasure& mu, LipMode mode);

struct NormReport {
    double weak = 0.0;            // ||mu||_inf
    double marginal_theta = 0.0;  // ||phi1||_theta
    double strong = 0.0;          // ||mu||_S_inf = weak + marginal_theta
    double lip_disint = 0.0;      // |mu|_theta estimate
    double truncation_note = 0.0; // theta^depth/(1-theta)
};

NormReport strong_norm(const LeafwiseMeasure& mu);

struct InvariantResult {
    LeafwiseMeasure measure;
    double residual = 0.0;        // weak distance between the result and one more step
    double residual_bound = 0.0;  // 2 alpha^n + n delta
    int steps = 0;
};

// Iterates transfer_step `steps` times from product_leafwise(nu0) at depth
// final_depth + steps. Refuses with a size estimate if the run would exceed
// mem_cap_bytes.
InvariantResult invariant_measure(const FiberSystem& sys, int final_depth, int steps,
                                  double compress_res, const FiniteSignedMeasure& nu0,
                                  int threads = 1, std::uint64_t mem_cap_bytes = 0);

// Default cap: FIBERLAB_MEM_CAP env var, else 2 GiB.
std::uint64_t memory_cap_bytes();
std::uint64_t estimate_run_bytes(const SubshiftSpec& spec, int start_depth, int steps,
                                 std::size_t nu_atoms, double compress_res,
                                 const FiberSpace& space);

struct LasotaYorkeRow {
    int j = 0;
    double weak = 0.0;
    double iterate_bound = 0.0;   // alpha^j w0 + sup|phi1|/(1-alpha) + j delta
    double iterate_margin = 0.0;  // bound - weak
    double step_margin = 0.0;     // weak_{j-1} + delta - weak_j  (Prop 5.1 slackened)
};

struct LasotaYorkeReport {
    double weak0 = 0.0;
    double sup_phi1 = 0.0;
    std::vector<LasotaYorkeRow> rows;
    bool all_passed = false;  // margins >= -1e-9
};

LasotaYorkeReport lasota_yorke_check(const FiberSystem& sys, const LeafwiseMeasure& mu, int steps,
                                     double compress_res);

struct EquilibriumReport {
    std::vector<double> weak_norms;  // j = 0..n
    double fitted_rate = 0.0;
    double beta1 = 0.0;  // max(sqrt(alpha), sqrt(r))
    double margin = 0.0; // beta1 + 0.05 - fitted
    bool degenerate = false;
    bool passed = false;
};

// Requires mu in V: its density must integrate to zero against m (1e-10).
EquilibriumReport equilibrium_rate(const FiberSystem& sys, const LeafwiseMeasure& mu, int steps,
                                   double compress_res, double measured_r);

struct PaperConstants {
    double alpha = 0.0;
    double H = 0.0;
    int N = 0;
    double theta = 0.0;
    double g_theta_max = 0.0;  // max over branches of the weight function's theta-Lipschitz constant
    double g_theta_sum = 0.0;  // alternative reading: sum over branches
    double C1 = 0.0;           // max{H theta + theta N |g|_theta, 2} with the max reading
    double C1_sum_reading = 0.0;
    double r = 0.0;
    double beta1 = 0.0;
    double lambda0 = 0.0;
    double xi = 0.0;
    double lip_bound = 0.0;  // C1/(1-theta)
};

PaperConstants paper_constants(const FiberSystem& sys, double measured_r);

// Random signed leafwise measure with zero-average density (a member of V):
// a few atoms per cylinder, then the global mass is cancelled against a
// constant product family. Deterministic given the seed.
LeafwiseMeasure random_leafwise_in_v(const SubshiftSpec& spec, const FiberSpace& space, int depth,
                                     std::uint64_t seed, int atoms_per_entry = 2);

}  // namespace fiberlab
