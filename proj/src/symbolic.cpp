#include "fiberlab/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fiberlab/numerics.hpp"
#include "fiberlab/rng.hpp"

namespace fiberlab {

bool check_aperiodic(const Eigen::MatrixXi& A) {
    const int n = static_cast<int>(A.rows());
    if (n == 0 || A.cols() != n) throw InvalidInput("check_aperiodic: matrix must be square");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (A(i, j) != 0 && A(i, j) != 1)
                throw InvalidInput("check_aperiodic: entries must be 0 or 1");

    // Boolean powers: A^m > 0 for some m <= N^2 iff A is primitive.
    Eigen::MatrixXi B = A;
    for (int m = 1; m <= n * n; ++m) {
        if ((B.array() > 0).all()) return true;
        Eigen::MatrixXi C = Eigen::MatrixXi::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (B(i, k))
                    for (int j = 0; j < n; ++j)
                        if (A(k, j)) C(i, j) = 1;
        B.swap(C);
    }
    return false;
}

Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& P) {
    const int n = static_cast<int>(P.rows());
    Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / n);
    bool converged = false;
    double prev_err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 100000; ++it) {
        Eigen::VectorXd q = P.transpose() * p;
        q /= q.sum();
        double err = (q - p).cwiseAbs().maxCoeff();
        p = q;
        if (err <= 1e-13) {
            converged = true;
            // run past the contractual tolerance to the FP fixed point
            if (err == 0.0 || err >= prev_err) break;
        }
        prev_err = err;
    }
    if (!converged) throw InvalidInput("stationary_vector: power iteration did not converge");
    return p;
}

namespace {

void validate_spec(const SubshiftSpec& spec) {
    const int n = spec.alphabet_size;
    if (n < 2) throw InvalidInput("subshift: alphabet size must be >= 2");
    if (spec.transition.rows() != n || spec.transition.cols() != n ||
        spec.stochastic.rows() != n || spec.stochastic.cols() != n ||
        spec.stationary.size() != n)
        throw InvalidInput("subshift: dimension mismatch");
    if (!(spec.theta > 0.0 && spec.theta < 1.0))
        throw InvalidInput("subshift: theta must lie in (0,1)");
    if (!check_aperiodic(spec.transition))
        throw InvalidInput("subshift: transition matrix is not aperiodic");
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            const bool allowed = spec.transition(i, j) == 1;
            const double pij = spec.stochastic(i, j);
            if (allowed != (pij > 0.0))
                throw InvalidInput("subshift: support of P must equal support of A");
            if (pij < 0.0) throw InvalidInput("subshift: P entries must be nonnegative");
            row += pij;
        }
        if (std::abs(row - 1.0) > 1e-12)
            throw InvalidInput("subshift: P rows must sum to 1 within 1e-12");
    }
    if (std::abs(spec.stationary.sum() - 1.0) > 1e-12)
        throw InvalidInput("subshift: stationary vector must sum to 1 within 1e-12");
    if ((spec.stationary.array() <= 0.0).any())
        throw InvalidInput("subshift: stationary vector must be strictly positive");
    Eigen::VectorXd residual = spec.stochastic.transpose() * spec.stationary - spec.stationary;
    if (residual.cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidInput("subshift: ||pP - p||_inf exceeds 1e-10");
}

}  // namespace

SubshiftSpec make_subshift(Eigen::MatrixXi A, Eigen::MatrixXd P, double theta) {
    if (P.rows() != P.cols() || P.rows() == 0) throw InvalidInput("subshift: P must be square");
    Eigen::VectorXd p = stationary_vector(P);
    return make_subshift(std::move(A), std::move(P), std::move(p), theta);
}

SubshiftSpec make_subshift(Eigen::MatrixXi A, Eigen::MatrixXd P, Eigen::VectorXd p, double theta) {
    SubshiftSpec spec;
    spec.alphabet_size = static_cast<int>(A.rows());
    spec.transition = std::move(A);
    spec.stochastic = std::move(P);
    spec.stationary = std::move(p);
    spec.theta = theta;
    validate_spec(spec);
    return spec;
}

bool is_admissible(const SubshiftSpec& spec, std::span<const int> word) {
    if (word.empty()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (word[i] < 0 || word[i] >= spec.alphabet_size) return false;
        if (i > 0 && spec.transition(word[i - 1], word[i]) == 0) return false;
    }
    return true;
}

std::vector<Cylinder> admissible_words(const SubshiftSpec& spec, int depth) {
    if (depth < 1) throw InvalidInput("admissible_words: depth must be >= 1");
    std::vector<Cylinder> out;
    for_each_word(spec, depth, [&](std::span<const int> w, std::uint64_t, double) {
        out.push_back(Cylinder{std::vector<int>(w.begin(), w.end())});
    });
    return out;
}

double d_theta(double theta, std::span<const int> u, std::span<const int> v) {
    if (u.size() != v.size()) throw InvalidInput("d_theta: words must have equal depth");
    double sum = 0.0;
    double pw = 1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] != v[i]) sum += pw;
        pw *= theta;
    }
    return sum;
}

double d_theta(const SubshiftSpec& spec, const Cylinder& u, const Cylinder& v) {
    return d_theta(spec.theta, u.word, v.word);
}

double markov_mass(const SubshiftSpec& spec, std::span<const int> w) {
    if (!is_admissible(spec, w)) throw InvalidInput("markov_mass: word is not admissible");
    double mass = spec.stationary(w[0]);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) mass *= spec.stochastic(w[i], w[i + 1]);
    return mass;
}

double jacobian_weight(const SubshiftSpec& spec, int branch, int w0) {
    if (branch < 0 || branch >= spec.alphabet_size || w0 < 0 || w0 >= spec.alphabet_size)
        throw InvalidInput("jacobian_weight: symbol out of range");
    if (spec.transition(branch, w0) == 0)
        throw InvalidInput("jacobian_weight: inadmissible branch");
    return spec.stationary(branch) * spec.stochastic(branch, w0) / spec.stationary(w0);
}

double jacobian_weight(const SubshiftSpec& spec, int branch, std::span<const int> w) {
    if (w.empty()) throw InvalidInput("jacobian_weight: empty word");
    return jacobian_weight(spec, branch, w[0]);
}

WordIndex::WordIndex(const SubshiftSpec& spec, int max_depth)
    : n_(spec.alphabet_size), max_depth_(max_depth), transition_(spec.transition) {
    if (max_depth < 1) throw InvalidInput("WordIndex: max_depth must be >= 1");
    counts_.resize(max_depth);
    starts_.resize(max_depth);
    blocked_.resize(max_depth);
    counts_[0].assign(n_, 1);
    for (int d = 2; d <= max_depth; ++d) {
        counts_[d - 1].assign(n_, 0);
        for (int s = 0; s < n_; ++s)
            for (int t = 0; t < n_; ++t)
                if (transition_(s, t)) counts_[d - 1][s] += counts_[d - 2][t];
    }
    for (int d = 1; d <= max_depth; ++d) {
        starts_[d - 1].assign(n_ + 1, 0);
        for (int s = 0; s < n_; ++s) starts_[d - 1][s + 1] = starts_[d - 1][s] + counts_[d - 1][s];
        blocked_[d - 1].assign(n_, std::vector<std::uint64_t>(n_ + 1, 0));
        for (int i = 0; i < n_; ++i)
            for (int t = 0; t < n_; ++t)
                blocked_[d - 1][i][t + 1] =
                    blocked_[d - 1][i][t] + (transition_(i, t) ? counts_[d - 1][t] : 0);
    }
}

std::uint64_t WordIndex::total(int depth) const { return starts_[depth - 1][n_]; }

std::uint64_t WordIndex::count_by_first(int depth, int symbol) const {
    return counts_[depth - 1][symbol];
}

std::uint64_t WordIndex::start_of_first(int depth, int symbol) const {
    return starts_[depth - 1][symbol];
}

std::uint64_t WordIndex::rank(std::span<const int> w) const {
    const int k = static_cast<int>(w.size());
    std::uint64_t r = starts_[k - 1][w[0]];
    for (int j = 1; j < k; ++j) r += blocked_[k - j - 1][w[j - 1]][w[j]];
    return r;
}

void WordIndex::unrank(std::uint64_t r, int depth, std::span<int> out) const {
    int s = 0;
    while (starts_[depth - 1][s + 1] <= r) ++s;
    r -= starts_[depth - 1][s];
    out[0] = s;
    for (int j = 1; j < depth; ++j) {
        const int d = depth - j;
        int prev = out[j - 1];
        int t = 0;
        for (;; ++t) {
            if (!transition_(prev, t)) continue;
            if (r < counts_[d - 1][t]) break;
            r -= counts_[d - 1][t];
        }
        out[j] = t;
    }
}

std::vector<int> WordIndex::unrank(std::uint64_t r, int depth) const {
    std::vector<int> w(depth);
    unrank(r, depth, w);
    return w;
}

std::uint64_t WordIndex::prepend_rank(int branch, std::uint64_t v_rank, int v0,
                                      int v_depth) const {
    return starts_[v_depth][branch] + blocked_[v_depth - 1][branch][v0] + v_rank -
           starts_[v_depth - 1][v0];
}

int WordIndex::first_symbol(std::uint64_t r, int depth) const {
    int s = 0;
    while (starts_[depth - 1][s + 1] <= r) ++s;
    return s;
}

bool next_word(const SubshiftSpec& spec, std::span<int> w) {
    const int n = spec.alphabet_size;
    const int k = static_cast<int>(w.size());
    for (int pos = k - 1; pos >= 0; --pos) {
        for (int s = w[pos] + 1; s < n; ++s) {
            if (pos > 0 && spec.transition(w[pos - 1], s) == 0) continue;
            w[pos] = s;
            for (int f = pos + 1; f < k; ++f) {
                int t = 0;
                while (spec.transition(w[f - 1], t) == 0) ++t;
                w[f] = t;
            }
            return true;
        }
    }
    return false;
}

Eigen::VectorXd cylinder_masses(const SubshiftSpec& spec, int depth) {
    WordIndex idx(spec, depth);
    Eigen::VectorXd masses(idx.total(depth));
    for_each_word(spec, depth, [&](std::span<const int>, std::uint64_t r, double m) {
        masses(static_cast<Eigen::Index>(r)) = m;
    });
    return masses;
}

double integral_m(const SubshiftSpec& spec, const CylinderFunction& phi) {
    return cylinder_masses(spec, phi.depth).dot(phi.values);
}

CylinderFunction perron_frobenius(const SubshiftSpec& spec, const CylinderFunction& phi) {
    if (phi.depth < 2) throw InvalidInput("perron_frobenius: cannot coarsen a depth-1 function");
    const int k = phi.depth;
    WordIndex idx(spec, k);
    CylinderFunction out;
    out.depth = k - 1;
    out.values.resize(static_cast<Eigen::Index>(idx.total(k - 1)));
    for_each_word(spec, k - 1, [&](std::span<const int> v, std::uint64_t r, double) {
        double acc = 0.0;
        for (int i = 0; i < spec.alphabet_size; ++i) {
            if (spec.transition(i, v[0]) == 0) continue;
            std::uint64_t in = idx.prepend_rank(i, r, v[0], k - 1);
            acc += jacobian_weight(spec, i, v[0]) * phi.values(static_cast<Eigen::Index>(in));
        }
        out.values(static_cast<Eigen::Index>(r)) = acc;
    });
    return out;
}

ThetaNorm theta_norm(const SubshiftSpec& spec, const CylinderFunction& phi) {
    if (phi.values.size() == 0) throw InvalidInput("theta_norm: empty function");
    ThetaNorm result;
    result.sup = phi.values.cwiseAbs().maxCoeff();

    const std::uint64_t m = static_cast<std::uint64_t>(phi.values.size());
    WordIndex idx(spec, phi.depth);
    double lip = 0.0;
    if (m <= 256) {
        std::vector<std::vector<int>> words(m);
        for (std::uint64_t r = 0; r < m; ++r) words[r] = idx.unrank(r, phi.depth);
        for (std::uint64_t a = 0; a < m; ++a)
            for (std::uint64_t b = a + 1; b < m; ++b) {
                double d = d_theta(spec.theta, words[a], words[b]);
                double diff = std::abs(phi.values(static_cast<Eigen::Index>(a)) -
                                       phi.values(static_cast<Eigen::Index>(b)));
                lip = std::max(lip, diff / d);
            }
    } else {
        // Sampled mode: 262144 pairs from a fixed-seed generator, so repeated
        // calls agree. The estimate is a lower bound on the exact pair maximum.
        constexpr std::uint64_t kPairBudget = 262144;
        Rng rng(0x7E7A0FB2D1C3ULL);
        std::vector<int> wa(phi.depth), wb(phi.depth);
        for (std::uint64_t s = 0; s < kPairBudget; ++s) {
            std::uint64_t a = rng.bits() % m;
            std::uint64_t b = rng.bits() % m;
            if (a == b) continue;
            idx.unrank(a, phi.depth, wa);
            idx.unrank(b, phi.depth, wb);
            double d = d_theta(spec.theta, wa, wb);
            double diff = std::abs(phi.values(static_cast<Eigen::Index>(a)) -
                                   phi.values(static_cast<Eigen::Index>(b)));
            lip = std::max(lip, diff / d);
        }
    }
    result.lip = lip;
    result.norm = result.sup + result.lip;
    return result;
}

BasisGap estimate_basis_gap(const SubshiftSpec& spec, int depth, int iterations, int trials,
                            std::uint64_t seed) {
    if (depth < 2) throw InvalidInput("estimate_basis_gap: depth must be >= 2");
    if (iterations < 1 || iterations > depth - 1)
        throw InvalidInput("estimate_basis_gap: need 1 <= iterations <= depth-1");
    if (trials < 1) throw InvalidInput("estimate_basis_gap: trials must be >= 1");

    Eigen::VectorXd masses = cylinder_masses(spec, depth);
    BasisGap gap;
    gap.ratios.resize(trials);
    gap.trial_rates.resize(trials);

    double fitted_max = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        CylinderFunction phi;
        phi.depth = depth;
        phi.values.resize(masses.size());
        double base = 0.0;
        do {
            for (Eigen::Index i = 0; i < phi.values.size(); ++i) phi.values(i) = rng.symmetric();
            phi.values.array() -= masses.dot(phi.values);  // project to zero m-mean
            base = theta_norm(spec, phi).norm;
        } while (base == 0.0);  // the zero function is excluded from trials

        std::vector<double> ratios(iterations + 1);
        ratios[0] = 1.0;
        CylinderFunction cur = phi;
        for (int j = 1; j <= iterations; ++j) {
            cur = perron_frobenius(spec, cur);
            ratios[j] = theta_norm(spec, cur).norm / base;
        }
        RateFit fit = fit_geometric_rate_tail(ratios, 1e-280);
        gap.ratios[t] = ratios;
        gap.trial_rates[t] = fit.ok ? fit.rate : 1.0;
        fitted_max = std::max(fitted_max, gap.trial_rates[t]);
    }
    gap.r = fitted_max;
    gap.contracting = gap.r < 1.0;
    double dmax = 0.0;
    for (const auto& ratios : gap.ratios)
        for (std::size_t j = 0; j < ratios.size(); ++j)
            dmax = std::max(dmax, ratios[j] / std::pow(gap.r, static_cast<double>(j)));
    gap.D = dmax;
    return gap;
}

}  // namespace fiberlab
