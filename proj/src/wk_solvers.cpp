#include "fiberlab/wk_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fiberlab/errors.hpp"

namespace fiberlab::wk {

namespace {

// Concave piecewise-linear function on [-1, 1].
struct Pwl {
    std::vector<double> x;  // segment left endpoints; x[0] == -1
    std::vector<double> s;  // slope on [x[i], x[i+1]) (last segment runs to +1); non-increasing
    double v_lo = 0.0;      // value at -1

    double end_of(std::size_t i) const { return i + 1 < x.size() ? x[i + 1] : 1.0; }

    double value_at(double g) const {
        double v = v_lo;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double hi = end_of(i);
            if (g <= hi) return v + s[i] * (g - x[i]);
            v += s[i] * (hi - x[i]);
        }
        return v;
    }

    double max_value() const {
        double v = v_lo, best = v_lo;
        for (std::size_t i = 0; i < x.size(); ++i) {
            v += s[i] * (end_of(i) - x[i]);
            best = std::max(best, v);
        }
        return best;
    }
};

}  // namespace

double chain_lp(std::span<const Atom> atoms) {
    const std::size_t n = atoms.size();
    if (n == 0) return 0.0;

    Pwl f;
    f.x = {-1.0};
    f.s = {atoms[0].weight};
    f.v_lo = -atoms[0].weight;

    std::vector<double> nx, ns;
    for (std::size_t j = 1; j < n; ++j) {
        const double delta = atoms[j].position - atoms[j - 1].position;
        const std::size_t m = f.x.size();

        // Maximal region [m_lo, m_hi] of the concave f.
        std::size_t last_pos = m;  // last segment with slope > 0 (m = none)
        std::size_t first_neg = m;
        for (std::size_t i = 0; i < m; ++i) {
            if (f.s[i] > 0.0) last_pos = i;
            if (f.s[i] < 0.0 && first_neg == m) first_neg = i;
        }
        const double m_lo = (last_pos == m) ? -1.0 : f.end_of(last_pos);
        const double m_hi = (first_neg == m) ? 1.0 : f.x[first_neg];
        const double vmax = f.value_at(m_lo);

        // Window max: increasing part shifts left by delta, plateau widens,
        // decreasing part shifts right; then clip the domain back to [-1, 1].
        nx.clear();
        ns.clear();
        auto push = [&](double lo, double hi, double slope) {
            if (!(hi > lo)) return;
            if (!ns.empty() && ns.back() == slope) return;  // merge equal slopes
            nx.push_back(lo);
            ns.push_back(slope);
        };
        if (last_pos != m) {
            for (std::size_t i = 0; i <= last_pos; ++i) {
                if (f.s[i] <= 0.0) continue;
                double lo = std::max(f.x[i] - delta, -1.0);
                double hi = (i == last_pos ? m_lo : f.end_of(i)) - delta;
                push(lo, hi, f.s[i]);
            }
        }
        push(std::max(-1.0, m_lo - delta), std::min(1.0, m_hi + delta), 0.0);
        if (first_neg != m) {
            for (std::size_t i = first_neg; i < m; ++i) {
                if (f.s[i] >= 0.0) continue;
                double lo = f.x[i] + delta;
                double hi = std::min(f.end_of(i) + delta, 1.0);
                push(lo, std::min(hi, 1.0), f.s[i]);
            }
        }

        double v_lo_new = (-1.0 < m_lo - delta) ? f.value_at(-1.0 + delta) : vmax;

        // fold in the new atom's linear term w * g
        const double w = atoms[j].weight;
        for (double& sl : ns) sl += w;
        v_lo_new -= w;

        f.x = nx;
        f.s = ns;
        f.v_lo = v_lo_new;
        if (f.x.empty() || f.x[0] != -1.0) {  // defensive; push() always starts at -1
            f.x.assign(1, -1.0);
            f.s.assign(1, w);
        }
    }
    return f.max_value();
}

double dense_lp(std::span<const double> weights, const Eigen::MatrixXd& dist) {
    const int n = static_cast<int>(weights.size());
    if (n == 0) return 0.0;
    if (n == 1) return std::abs(weights[0]);
    if (n > 40)
        throw InvalidInput("dense_lp: support too large for the dense simplex (max 40 atoms)");

    // Shift g = x - 1 so x in [0, 2]; pair rows x_i - x_j <= d_ij stay valid
    // (the shift cancels) and the box becomes x <= 2 rows plus x >= 0.
    const int m_pairs = n * (n - 1);
    const int m = m_pairs + n;
    const int cols = n + m;  // structural + slack

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, cols + 1);
    {
        int r = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                T(r, i) = 1.0;
                T(r, j) = -1.0;
                T(r, cols) = dist(i, j);
                ++r;
            }
        for (int i = 0; i < n; ++i) {
            T(r, i) = 1.0;
            T(r, cols) = 2.0;
            ++r;
        }
        for (int r2 = 0; r2 < m; ++r2) T(r2, n + r2) = 1.0;
    }
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);  // reduced costs
    for (int i = 0; i < n; ++i) cost(i) = weights[i];
    std::vector<int> basis(m);
    for (int r = 0; r < m; ++r) basis[r] = n + r;

    double objective = 0.0;
    const double eps = 1e-11;
    const long max_iters = 60L * (n + m);
    for (long iter = 0; iter < max_iters; ++iter) {
        const bool bland = iter > 20L * (n + m);
        int enter = -1;
        double best = eps;
        for (int j = 0; j < cols; ++j) {
            if (cost(j) > best) {
                enter = j;
                if (bland) break;
                best = cost(j);
            }
        }
        if (enter < 0) break;  // optimal

        int leave = -1;
        double ratio = std::numeric_limits<double>::infinity();
        for (int r = 0; r < m; ++r) {
            if (T(r, enter) > eps) {
                double q = T(r, cols) / T(r, enter);
                if (q < ratio - 1e-12 || (q < ratio + 1e-12 && (leave < 0 || basis[r] < basis[leave]))) {
                    ratio = q;
                    leave = r;
                }
            }
        }
        if (leave < 0) throw Error("dense_lp: unbounded (should not happen: box rows bound x)");

        // pivot
        double piv = T(leave, enter);
        T.row(leave) /= piv;
        for (int r = 0; r < m; ++r) {
            if (r == leave) continue;
            double factor = T(r, enter);
            if (factor != 0.0) T.row(r) -= factor * T.row(leave);
        }
        double cf = cost(enter);
        objective += cf * T(leave, cols);
        cost -= cf * T.row(leave).head(cols);
        basis[leave] = enter;
    }

    // objective is for x = g + 1; subtract the shift sum w_i * 1
    double shift = 0.0;
    for (int i = 0; i < n; ++i) shift += weights[i];
    return objective - shift;
}

}  // namespace fiberlab::wk
