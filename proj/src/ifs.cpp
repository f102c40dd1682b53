#include "fiberlab/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fiberlab/numerics.hpp"
#include "fiberlab/rng.hpp"

namespace fiberlab {

IfsSpec make_ifs(FiberSpace space, Eigen::VectorXd a, Eigen::VectorXd b, Eigen::VectorXd p) {
    const int n = static_cast<int>(p.size());
    if (n < 1 || a.size() != n || b.size() != n)
        throw InvalidInput("ifs: maps and probabilities must have matching lengths");
    if (space.kind() != FiberSpace::Kind::Interval)
        throw InvalidInput("ifs: needs an interval fiber space");
    double psum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!(std::abs(a(i)) < 1.0)) throw InvalidInput("ifs: contraction factors must be < 1");
        if (!(p(i) > 0.0)) throw InvalidInput("ifs: probabilities must be positive");
        psum += p(i);
        for (double z : {space.lo(), space.hi()}) {
            double y = a(i) * z + b(i);
            if (y < space.lo() - 1e-12 || y > space.hi() + 1e-12)
                throw InvalidInput("ifs: map leaves the fiber space");
        }
    }
    if (std::abs(psum - 1.0) > 1e-12) throw InvalidInput("ifs: probabilities must sum to 1");
    return IfsSpec{std::move(space), std::move(a), std::move(b), std::move(p)};
}

FiniteSignedMeasure chaos_game(const IfsSpec& ifs, long samples, int burn_in, std::uint64_t seed,
                               double resolution) {
    if (samples < 1000) throw InvalidInput("chaos_game: need at least 1000 samples");
    if (burn_in < 100) throw InvalidInput("chaos_game: need burn_in >= 100");
    Rng rng(seed);
    std::vector<double> probs(ifs.p.data(), ifs.p.data() + ifs.p.size());

    double z = rng.uniform(ifs.space.lo(), ifs.space.hi());
    auto step = [&] {
        int i = rng.sample(probs);
        z = ifs.a(i) * z + ifs.b(i);
    };
    for (int j = 0; j < burn_in; ++j) step();

    // bin counts, so the weights sum to samples/samples
    std::map<double, long> counts;
    const double lo = ifs.space.lo(), hi = ifs.space.hi();
    for (long s = 0; s < samples; ++s) {
        step();
        double pos = z;
        if (resolution > 0.0)
            pos = std::clamp(lo + resolution * std::nearbyint((pos - lo) / resolution), lo, hi);
        ++counts[pos];
    }
    AtomList atoms;
    atoms.reserve(counts.size());
    for (const auto& [pos, count] : counts)
        atoms.push_back({pos, static_cast<double>(count) / static_cast<double>(samples)});
    return make_measure(ifs.space, std::move(atoms));
}

double hutchinson_residual(const IfsSpec& ifs, const FiniteSignedMeasure& mu) {
    if (!is_probability(mu)) throw InvalidInput("hutchinson_residual: mu must be a probability");
    AtomList defect = mu.atoms;
    defect.reserve(mu.atoms.size() * (1 + ifs.p.size()));
    for (int i = 0; i < ifs.p.size(); ++i) {
        for (const Atom& atom : mu.atoms) {
            double y = std::clamp(ifs.a(i) * atom.position + ifs.b(i), ifs.space.lo(),
                                  ifs.space.hi());
            defect.push_back({y, -ifs.p(i) * atom.weight});
        }
    }
    normalize_atoms(defect);
    return wk_norm(ifs.space, defect);
}

FiberSystem skew_product(const IfsSpec& ifs, double theta) {
    const int n = static_cast<int>(ifs.p.size());
    Eigen::MatrixXi A = Eigen::MatrixXi::Ones(n, n);
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) P(i, j) = ifs.p(j);
    Eigen::VectorXd stat = ifs.p;
    auto base = make_subshift(A, P, stat, theta);
    return make_first_symbol_affine(std::move(base), ifs.space, ifs.a, ifs.b);
}

namespace {

void require_bernoulli(const SubshiftSpec& spec, const char* who) {
    for (int i = 0; i < spec.alphabet_size; ++i)
        for (int j = 0; j < spec.alphabet_size; ++j)
            if (std::abs(spec.stochastic(i, j) - spec.stationary(j)) > 1e-12)
                throw InvalidInput(std::string(who) +
                                   ": base measure must be Bernoulli (P rows equal to p); "
                                   "general Markov bases are outside the section-8.2 setting");
}

}  // namespace

double product_structure_check(const FiberSystem& sys, const LeafwiseMeasure& mu0,
                               const FiniteSignedMeasure& ifs_measure) {
    const auto* fsa = std::get_if<FirstSymbolAffine>(&sys.dynamics);
    if (!fsa) throw InvalidInput("product_structure_check: system is not first-symbol-affine");
    require_bernoulli(sys.base, "product_structure_check");
    if (!(ifs_measure.space == sys.space))
        throw InvalidInput("product_structure_check: measure lives on another space");

    double worst = 0.0;
    for (const AtomList& entry : mu0.entries) {
        double mass = total_mass(entry);
        if (std::abs(mass) < 1e-12) continue;  // empty fiber carries no information
        AtomList diff = linear_combination(entry, 1.0 / mass, ifs_measure.atoms, -1.0);
        worst = std::max(worst, wk_norm(mu0.space, diff));
    }
    return worst;
}

AnnealedReport annealed_correlation(const IfsSpec& ifs, const FiberSystem& sys,
                                    const LeafwiseMeasure& mu0, const Observable& g1,
                                    const Observable& g2, int n_max, long samples,
                                    std::uint64_t seed, double xi, double compress_res) {
    if (!g1.fiber_only || !g2.fiber_only)
        throw InvalidInput("annealed_correlation: observables must live on K alone");
    require_bernoulli(sys.base, "annealed_correlation");
    if (samples < 1000) throw InvalidInput("annealed_correlation: need at least 1000 samples");

    // transfer-engine side of the identity
    CorrelationSeries series =
        correlation_series(sys, mu0, g1, g2, n_max, compress_res, 1);

    // direct Monte Carlo side
    constexpr int kBatches = 20;
    const long per_batch = samples / kBatches;
    std::vector<double> probs(ifs.p.data(), ifs.p.data() + ifs.p.size());
    std::vector<std::vector<double>> batch_est(n_max + 1);
    std::vector<double> sum_g1g2(n_max + 1, 0.0), sum_g2(n_max + 1, 0.0);
    double sum_g1 = 0.0;
    long total = 0;
    std::span<const int> no_symbols;

    for (int b = 0; b < kBatches; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        std::vector<double> bg1g2(n_max + 1, 0.0), bg2(n_max + 1, 0.0);
        double bg1 = 0.0;
        for (long s = 0; s < per_batch; ++s) {
            double z = rng.uniform(ifs.space.lo(), ifs.space.hi());
            for (int j = 0; j < 128; ++j) {
                int i = rng.sample(probs);
                z = ifs.a(i) * z + ifs.b(i);
            }
            double g1v = g1.eval(no_symbols, z);
            bg1 += g1v;
            double y = z;
            for (int n = 0; n <= n_max; ++n) {
                double g2v = g2.eval(no_symbols, y);
                bg1g2[n] += g1v * g2v;
                bg2[n] += g2v;
                int i = rng.sample(probs);
                y = ifs.a(i) * y + ifs.b(i);
            }
        }
        sum_g1 += bg1;
        total += per_batch;
        for (int n = 0; n <= n_max; ++n) {
            sum_g1g2[n] += bg1g2[n];
            sum_g2[n] += bg2[n];
            batch_est[n].push_back(bg1g2[n] / per_batch -
                                   (bg1 / per_batch) * (bg2[n] / per_batch));
        }
    }

    AnnealedReport report;
    std::vector<double> abs_transfer(n_max + 1);
    bool all_agree = true;
    for (int n = 0; n <= n_max; ++n) {
        AnnealedRow row;
        row.n = n;
        row.mc = sum_g1g2[n] / total - (sum_g1 / total) * (sum_g2[n] / total);
        double mean = 0.0;
        for (double e : batch_est[n]) mean += e;
        mean /= batch_est[n].size();
        double var = 0.0;
        for (double e : batch_est[n]) var += (e - mean) * (e - mean);
        var /= (batch_est[n].size() - 1);
        row.mc_stderr = std::sqrt(var / batch_est[n].size());
        row.transfer = series.iterated[n] - series.int_f_mu0 * series.g_on_iterated[n];
        row.tolerance = 3.0 * row.mc_stderr +
                        (n + 1) * compress_res * std::max(1.0, g1.sup) *
                            std::max(1.0, g2.lip_theta) +
                        1e-9;
        row.agree = std::abs(row.mc - row.transfer) <= row.tolerance;
        all_agree = all_agree && row.agree;
        abs_transfer[n] = std::abs(row.transfer);
        report.rows.push_back(row);
    }
    report.all_agree = all_agree;

    // rate certificate on the transfer-side series
    DecayReport decay;
    decay.values = abs_transfer;
    decay.bound_rate = xi;
    double top = *std::max_element(abs_transfer.begin(), abs_transfer.end());
    if (g1.lip_theta == 0.0 || g2.lip_theta == 0.0 || top < 1e-13) {
        decay.degenerate = true;
        decay.bound_passed = true;
    } else {
        RateFit fit = fit_geometric_rate(abs_transfer, 0, n_max, 1e-13);
        decay.fitted_rate = fit.ok ? fit.rate : 0.0;
        decay.bound_passed = decay.fitted_rate <= xi + 0.05;
        for (int n = 0; n <= n_max; ++n)
            decay.prefactor_estimate =
                std::max(decay.prefactor_estimate, abs_transfer[n] / std::pow(xi, n));
    }
    report.decay = decay;
    return report;
}

namespace catalog {

IfsSpec dyadic_ifs() {
    Eigen::VectorXd a(2), b(2), p(2);
    a << 0.5, 0.5;
    b << 0.0, 0.5;
    p << 0.5, 0.5;
    return make_ifs(FiberSpace::interval(0.0, 1.0), a, b, p);
}

IfsSpec skewed_ifs() {
    Eigen::VectorXd a(2), b(2), p(2);
    a << 0.5, 0.5;
    b << 0.0, 0.5;
    p << 2.0 / 3.0, 1.0 / 3.0;
    return make_ifs(FiberSpace::interval(0.0, 1.0), a, b, p);
}

}  // namespace catalog

}  // namespace fiberlab
