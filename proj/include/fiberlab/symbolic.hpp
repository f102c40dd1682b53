#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "fiberlab/errors.hpp"

namespace fiberlab {

// Subshift of finite type with a Markov reference measure.
// Symbols are 0-based: {0, ..., N-1}.
struct SubshiftSpec {
    int alphabet_size = 0;       // N >= 2
    Eigen::MatrixXi transition;  // N x N aperiodic 0/1 matrix A
    Eigen::MatrixXd stochastic;  // row-stochastic P with support equal to A
    Eigen::VectorXd stationary;  // probability vector p with pP = p
    double theta = 0.5;          // metric parameter in (0,1)
};

bool check_aperiodic(const Eigen::MatrixXi& A);

// Stationary vector by power iteration (tolerance 1e-13, at most 1e5 steps).
Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& P);

// Validating constructors. The first computes the stationary vector, the
// second checks a supplied one (||pP - p||_inf <= 1e-10).
SubshiftSpec make_subshift(Eigen::MatrixXi A, Eigen::MatrixXd P, double theta);
SubshiftSpec make_subshift(Eigen::MatrixXi A, Eigen::MatrixXd P, Eigen::VectorXd p, double theta);

// An admissible finite word, standing for the cylinder of sequences with that
// prefix.
struct Cylinder {
    std::vector<int> word;
    int depth() const { return static_cast<int>(word.size()); }
};

bool is_admissible(const SubshiftSpec& spec, std::span<const int> word);

// All admissible depth-k words in lexicographic order. Intended for desk-scale
// depths; bulk paths use WordIndex instead of materialized lists.
std::vector<Cylinder> admissible_words(const SubshiftSpec& spec, int depth);

// Truncated metric sum_{i<k} theta^i [u_i != v_i]; the truncation error
// against the sequence metric is at most theta^k/(1-theta).
double d_theta(double theta, std::span<const int> u, std::span<const int> v);
double d_theta(const SubshiftSpec& spec, const Cylinder& u, const Cylinder& v);

// m([w]) = p_{w0} * prod P_{w_i w_{i+1}}.
double markov_mass(const SubshiftSpec& spec, std::span<const int> w);

// g_i(i.w) = m([i.w])/m([w]) = p_i P_{i w0} / p_{w0}; the exact inverse
// Jacobian of the branch sigma_i at cylinder resolution (constant on
// cylinders for Markov measures, so no approximation enters here).
double jacobian_weight(const SubshiftSpec& spec, int branch, int w0);
double jacobian_weight(const SubshiftSpec& spec, int branch, std::span<const int> w);

// Function constant on depth-k cylinders; values in lexicographic word order.
struct CylinderFunction {
    int depth = 0;
    Eigen::VectorXd values;
};

// Ranks admissible words of each depth <= max_depth in lexicographic order.
class WordIndex {
  public:
    WordIndex(const SubshiftSpec& spec, int max_depth);

    int max_depth() const { return max_depth_; }
    std::uint64_t total(int depth) const;
    std::uint64_t count_by_first(int depth, int symbol) const;
    std::uint64_t start_of_first(int depth, int symbol) const;

    std::uint64_t rank(std::span<const int> w) const;
    void unrank(std::uint64_t r, int depth, std::span<int> out) const;
    std::vector<int> unrank(std::uint64_t r, int depth) const;

    // Rank at depth d+1 of the word branch.v, given v's rank at depth d.
    std::uint64_t prepend_rank(int branch, std::uint64_t v_rank, int v0, int v_depth) const;

    int first_symbol(std::uint64_t r, int depth) const;

  private:
    int n_ = 0;
    int max_depth_ = 0;
    Eigen::MatrixXi transition_;
    // counts_[d-1][s]: admissible words of depth d starting with s
    std::vector<std::vector<std::uint64_t>> counts_;
    std::vector<std::vector<std::uint64_t>> starts_;  // prefix sums of counts_
    // blocked_[d-1][i][t]: sum over t' < t admissible after i of counts_[d-1][t']
    std::vector<std::vector<std::vector<std::uint64_t>>> blocked_;
};

// Lexicographic enumeration with running Markov mass; fn(word, rank, mass).
template <class F>
void for_each_word(const SubshiftSpec& spec, int depth, F&& fn) {
    if (depth < 1) throw InvalidInput("for_each_word: depth must be >= 1");
    const int n = spec.alphabet_size;
    std::vector<int> w(depth);
    std::vector<double> mass(depth + 1);
    mass[0] = 1.0;
    std::uint64_t rank = 0;
    auto rec = [&](auto&& self, int pos) -> void {
        for (int s = 0; s < n; ++s) {
            if (pos > 0 && spec.transition(w[pos - 1], s) == 0) continue;
            w[pos] = s;
            mass[pos + 1] = mass[pos] * (pos == 0 ? spec.stationary(s) : spec.stochastic(w[pos - 1], s));
            if (pos + 1 == depth) {
                fn(std::span<const int>(w), rank, mass[depth]);
                ++rank;
            } else {
                self(self, pos + 1);
            }
        }
    };
    rec(rec, 0);
}

// Lexicographic successor among admissible words; false once w was the last.
bool next_word(const SubshiftSpec& spec, std::span<int> w);

// Markov masses of all depth-k cylinders in lexicographic order.
Eigen::VectorXd cylinder_masses(const SubshiftSpec& spec, int depth);

// Weighted integral against m of a cylinder function.
double integral_m(const SubshiftSpec& spec, const CylinderFunction& phi);

// (P_sigma phi)(v) = sum over admissible branches i of g_i(i.v) phi(i.v_prefix);
// coarsens depth by one and preserves the m-integral.
CylinderFunction perron_frobenius(const SubshiftSpec& spec, const CylinderFunction& phi);

struct ThetaNorm {
    double sup = 0.0;
    double lip = 0.0;
    double norm = 0.0;
};

// ||phi||_theta = ||phi||_inf + |phi|_theta at cylinder resolution. The pair
// loop is exact for word counts <= 256 and otherwise samples a fixed budget of
// pairs (deterministic); same-word pairs are skipped, their contribution being
// the truncation term theta^k/(1-theta).
ThetaNorm theta_norm(const SubshiftSpec& spec, const CylinderFunction& phi);

struct BasisGap {
    double r = 1.0;    // fitted geometric rate of ||P^j phi||_theta decay
    double D = 1.0;    // max observed ratio / r^j
    bool contracting = false;
    // ratios[t][j] = ||P^j phi_t||_theta / ||phi_t||_theta
    std::vector<std::vector<double>> ratios;
    std::vector<double> trial_rates;
};

// Empirical spectral-gap estimate for P_sigma on zero-mean cylinder functions.
// Deterministic given the seed; trial t uses derive_seed(seed, t).
BasisGap estimate_basis_gap(const SubshiftSpec& spec, int depth, int iterations, int trials,
                            std::uint64_t seed);

}  // namespace fiberlab
