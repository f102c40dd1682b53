#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace fiberlab {

struct Atom {
    double position = 0.0;
    double weight = 0.0;
};

using AtomList = std::vector<Atom>;

namespace wk {

// Exact optimum of the Wasserstein-Kantorovich LP
//   max sum_j w_j g_j   s.t.  |g_j| <= 1,  |g_i - g_j| <= d(x_i, x_j)
// for atoms on a line with d(x,y) = |x-y|. Atoms must be sorted by position
// with distinct positions. On a line the adjacent-pair constraints are
// equivalent to the full pair set (d is additive along the order), so this
// solves the same LP as dense_lp; it runs in O(n * segments).
//
// Method: dynamic program over g_1, ..., g_n maintaining the concave
// piecewise-linear value function V_j(g) = max { sum_{i<=j} w_i g_i : g_j = g },
// V_{j+1}(g) = w_{j+1} g + max_{|g'-g| <= delta_j} V_j(g').
double chain_lp(std::span<const Atom> atoms);

// The same LP with the explicit all-pairs constraint set (both directions per
// pair), solved by a primal simplex with the box handled as extra rows.
// Correct for any metric d; intended for finite metric spaces and for
// cross-checking chain_lp on small supports.
double dense_lp(std::span<const double> weights, const Eigen::MatrixXd& dist);

}  // namespace wk
}  // namespace fiberlab
