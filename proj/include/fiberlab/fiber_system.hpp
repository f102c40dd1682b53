#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "fiberlab/fiber_space.hpp"
#include "fiberlab/symbolic.hpp"

namespace fiberlab {

// f_i(z) = a_i z + b_i, chosen by the first symbol. Representative error is
// exactly zero for this kind.
struct FirstSymbolAffine {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};

// G(x, z) = a z + c(x) with c(x) = c0 (1 - theta) sum_i x_i theta^i, the
// genuinely sequence-dependent member of the catalog.
struct SequenceAffine {
    double a = 0.5;
    double c0 = 0.5;
};

// Finite fiber space: per first symbol, a point-to-point map given as a table
// of indices.
struct CustomTable {
    Eigen::MatrixXi table;  // N x point_count
};

// The skew product F(x, z) = (sigma(x), G(x, z)) with certified vertical
// contraction rate alpha (G1) and horizontal Lipschitz bound H (G2).
struct FiberSystem {
    SubshiftSpec base;
    FiberSpace space;
    std::variant<FirstSymbolAffine, SequenceAffine, CustomTable> dynamics;
    double alpha = 0.0;
    double H = 0.0;
    bool first_symbol_only = false;
};

FiberSystem make_first_symbol_affine(SubshiftSpec base, FiberSpace space, Eigen::VectorXd a,
                                     Eigen::VectorXd b);
FiberSystem make_sequence_affine(SubshiftSpec base, FiberSpace space, double a, double c0);
FiberSystem make_custom_table(SubshiftSpec base, FiberSpace space, Eigen::MatrixXi table);

// Deterministic representative sequence of a cylinder: extend by the smallest
// admissible symbol. The induced error in G is at most H * theta^k / (1-theta).
std::vector<int> representative(const SubshiftSpec& spec, std::span<const int> word, int length);

// Extension length at which the representative tail is numerically negligible.
int representative_length(const SubshiftSpec& spec, int depth);

// G evaluated on an (extended) symbol sequence.
double evaluate_G(const FiberSystem& sys, std::span<const int> x, double z);

// Concrete fiber map for one cylinder: z -> G(rep(word), z).
struct FiberMap {
    double slope = 0.0;
    double intercept = 0.0;
    const Eigen::MatrixXi* table = nullptr;
    int table_row = 0;

    double operator()(double z) const {
        if (table) return static_cast<double>((*table)(table_row, static_cast<int>(z + 0.5)));
        return slope * z + intercept;
    }
};

FiberMap fiber_map(const FiberSystem& sys, std::span<const int> word);

// z_{j+1} = G(sigma^j(rep(x_word)), z_j); returns [z_0, ..., z_n].
std::vector<double> orbit(const FiberSystem& sys, const Cylinder& x_word, double z0, int steps);

struct CertifyReport {
    double alpha_observed = 0.0;
    double H_observed = 0.0;
    int samples = 0;
};

// Empirical maxima of the G1/G2 ratios over random samples; throws
// CertificationFailure (with the witness) if a declared constant is exceeded
// by more than 1e-9.
CertifyReport certify_constants(const FiberSystem& sys, int samples, std::uint64_t seed);

}  // namespace fiberlab
